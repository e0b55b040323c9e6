"""Isometric comonoids of CP maps: laws, generators, canonicity, proof tracing.

A comonoid here is a pair ``delta: H -> H (x) H``, ``epsilon: H -> C`` of
CP maps subject to coassociativity, the two counit laws, and the isometry
law ``dagger(delta) o delta = identity``.  The central fact this module
verifies numerically is a dichotomy: a pair either fails some law, or
both ``delta`` and ``epsilon`` are pure (Choi rank 1), i.e. the comonoid
arises by doubling a plain-operator comonoid.  ``canonicity_check``
renders the verdict; ``proof_trace`` records every intermediate quantity
of the underlying argument so that each step can be asserted at desk
scale.

Law residuals are Choi-Frobenius distances; "passing" means every
residual is at most ``atol * dim`` (Choi norms grow with dimension).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cpm import (
    CPMap,
    choi_distance,
    compose,
    cpmap_from_json,
    cpmap_to_json,
    dagger,
    double,
    identity,
    is_pure,
    tensor,
)
from .isometry import GramBlockError, decompose
from .tensor import (
    DEFAULT_TOL,
    CpmkitError,
    Tolerance,
    as_matrix,
    eigh,
    fix_global_phase,
    matrix_to_json,
    numerical_rank,
)

__all__ = [
    "LawsFailedError",
    "ProportionalityError",
    "BasesCoincideError",
    "ComonoidCPM",
    "LawResiduals",
    "CanonicityReport",
    "ProofTrace",
    "law_residuals",
    "frobenius_law_residuals",
    "classical_structure",
    "copy_pair",
    "matrix_algebra_structure",
    "mixture_structure",
    "canonicity_check",
    "proof_trace",
    "comonoid_to_json",
    "comonoid_from_json",
    "canonicity_to_json",
    "proof_trace_to_json",
]


class LawsFailedError(CpmkitError):
    """The comonoid laws do not hold, so downstream analysis is meaningless."""

    def __init__(self, laws: "LawResiduals"):
        self.laws = laws
        super().__init__(f"comonoid laws failed: max residual {laws.max_residual:.3e}")


class ProportionalityError(CpmkitError):
    """A proof step required a scalar multiple of the identity and did not get one.

    On a genuine isometric comonoid this cannot happen; seeing it means
    the input slipped past the law gate numerically.
    """

    def __init__(self, step: str, where, residual: float):
        self.step = step
        self.where = where
        self.residual = float(residual)
        super().__init__(f"{step} at {where}: residual {self.residual:.3e}")


class BasesCoincideError(CpmkitError):
    """The two bases of a mixture agree up to per-column phases."""

    def __init__(self, distance: float):
        self.distance = float(distance)
        super().__init__(
            f"bases coincide up to per-column phases (distance {self.distance:.3e} <= 0.1)"
        )


@dataclass(frozen=True)
class ComonoidCPM:
    """A candidate isometric comonoid: ``delta: H -> H (x) H`` and ``epsilon: H -> C``."""

    dim: int
    delta: CPMap
    epsilon: CPMap

    def __post_init__(self):
        n = self.dim
        if n < 1:
            raise ValueError("comonoid dimension must be >= 1")
        if (self.delta.in_dim, self.delta.out_dim) != (n, n * n):
            raise ValueError(
                f"delta must map {n} -> {n * n}, got {self.delta.in_dim} -> {self.delta.out_dim}"
            )
        if (self.epsilon.in_dim, self.epsilon.out_dim) != (n, 1):
            raise ValueError(
                f"epsilon must map {n} -> 1, got {self.epsilon.in_dim} -> {self.epsilon.out_dim}"
            )


@dataclass(frozen=True)
class LawResiduals:
    """Choi-Frobenius residuals of the four comonoid laws."""

    coassoc: float
    counit_left: float
    counit_right: float
    isometry: float

    @property
    def max_residual(self) -> float:
        return max(self.coassoc, self.counit_left, self.counit_right, self.isometry)

    def passing(self, dim: int, tol: Tolerance = DEFAULT_TOL) -> bool:
        return self.max_residual <= tol.atol * dim

    def to_json(self) -> dict:
        return {
            "coassoc": self.coassoc,
            "counit_left": self.counit_left,
            "counit_right": self.counit_right,
            "isometry": self.isometry,
        }


@dataclass(frozen=True)
class CanonicityReport:
    """Verdict of the canonicity check.

    ``canonical`` is true iff the laws pass and both Choi ranks are 1; in
    that case ``extracted_d`` and ``extracted_e`` are operators whose
    doublings reproduce ``delta`` and ``epsilon`` (Choi residual in
    ``extraction_residual``) and which satisfy the comonoid laws exactly
    as operators after the relative phase of ``e`` is normalized.
    """

    laws: LawResiduals
    laws_pass: bool
    delta_choi_rank: int
    epsilon_choi_rank: int
    canonical: bool
    extracted_d: np.ndarray | None
    extracted_e: np.ndarray | None
    extraction_residual: float | None


@dataclass(frozen=True)
class ProofTrace:
    """Numerical record of the canonicity argument on a law-passing comonoid.

    ``q``/``v`` decompose ``delta`` into pure isometries with orthogonal
    images; ``epsilon_components`` are the weights and unit effect rows of
    the counit's pure decomposition; ``l``/``r`` hold the scalars obtained
    by closing one output leg of each ``v[i]`` with each effect component;
    ``t`` holds the scalars of the four-index contraction coming from
    coassociativity; ``dagger_witnesses`` maps each ``(i, j)`` to the
    ``(i', j')`` minimizing the leg-swap residual, with that residual.

    Identities asserted on construction: ``sum_i q_i l_i = sum_i q_i r_i
    = 1``; ``l_i = r_i``; all ``r_i`` positive; every witness resolves to
    ``(i, j)`` itself with a vanishing residual.
    """

    q: np.ndarray
    v: tuple[np.ndarray, ...]
    epsilon_components: tuple[tuple[float, np.ndarray], ...]
    l: np.ndarray
    r: np.ndarray
    l_row: np.ndarray
    r_row: np.ndarray
    t: np.ndarray
    dagger_witnesses: dict
    counit_prop_residual: float
    t_prop_residual: float


def law_residuals(c: ComonoidCPM) -> LawResiduals:
    """Evaluate the four law residuals: both sides of each law, Choi distance."""
    n = c.dim
    eye = identity(n)
    both = compose(tensor(c.delta, eye), c.delta)
    other = compose(tensor(eye, c.delta), c.delta)
    return LawResiduals(
        coassoc=choi_distance(both, other),
        counit_left=choi_distance(compose(tensor(c.epsilon, eye), c.delta), eye),
        counit_right=choi_distance(compose(tensor(eye, c.epsilon), c.delta), eye),
        isometry=choi_distance(compose(dagger(c.delta), c.delta), eye),
    )


def frobenius_law_residuals(c: ComonoidCPM) -> tuple[float, float]:
    """Optional extra residuals for the Frobenius law (not part of the canonicity verdict)."""
    n = c.dim
    eye = identity(n)
    mu = dagger(c.delta)
    mid = compose(c.delta, mu)
    left = compose(tensor(eye, mu), tensor(c.delta, eye))
    right = compose(tensor(mu, eye), tensor(eye, c.delta))
    return choi_distance(left, mid), choi_distance(right, mid)


def copy_pair(basis, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Plain-operator copy/delete pair of an orthonormal basis.

    ``d = sum_i (u_i (x) u_i) u_i^dag`` copies basis vectors and
    ``e = sum_i u_i^dag`` deletes them; the pair satisfies all comonoid
    laws exactly.
    """
    u = as_matrix(basis)
    n = u.shape[0]
    if u.shape != (n, n):
        raise ValueError(f"basis must be square, got {u.shape}")
    if float(np.linalg.norm(u.conj().T @ u - np.eye(n))) > tol.atol * n:
        raise ValueError("basis matrix is not unitary within tolerance")
    d = np.zeros((n * n, n), dtype=complex)
    for i in range(n):
        col = u[:, i]
        d += np.outer(np.kron(col, col), col.conj())
    e = u.sum(axis=1).conj().reshape(1, n)
    return d, e


def classical_structure(basis, tol: Tolerance = DEFAULT_TOL) -> ComonoidCPM:
    """The doubled basis-copying comonoid of an orthonormal basis."""
    d, e = copy_pair(basis, tol)
    n = d.shape[1]
    return ComonoidCPM(dim=n, delta=double(d), epsilon=double(e))


def matrix_algebra_structure(n: int) -> ComonoidCPM:
    """The special comultiplication of the n x n matrix algebra on ``C^(n^2)``, doubled.

    The raw comultiplication sends the matrix unit ``E_il`` to
    ``sum_j E_ij (x) E_jl``; its normalization is computed, not
    hard-coded: the unique positive constant enforcing the isometry law,
    then a counit scale enforcing the unit law.
    """
    if n < 1:
        raise ValueError("matrix algebra needs n >= 1")
    dim = n * n
    d0 = np.zeros((dim * dim, dim), dtype=complex)
    for i in range(n):
        for ll in range(n):
            col = i * n + ll
            for j in range(n):
                d0[(i * n + j) * dim + (j * n + ll), col] = 1.0
    s = float(np.sqrt(dim / np.trace(d0.conj().T @ d0).real))
    d = s * d0
    iso_residual = float(np.linalg.norm(d.conj().T @ d - np.eye(dim)))
    if iso_residual > 1e-12:
        raise CpmkitError(f"matrix algebra normalization failed: residual {iso_residual:.3e}")
    e0 = np.eye(n, dtype=complex).reshape(1, dim)
    x = np.kron(e0, np.eye(dim)) @ d
    beta = dim / np.trace(x).real
    e = beta * e0
    return ComonoidCPM(dim=dim, delta=double(d), epsilon=double(e))


def _phase_distance(b1: np.ndarray, b2: np.ndarray) -> float:
    # min over per-column phases of |b1 - b2 diag(phases)|_F, via column overlaps
    overlap = np.abs(np.diagonal(b1.conj().T @ b2))
    return float(np.sqrt(max(0.0, 2.0 * float(np.sum(1.0 - np.minimum(overlap, 1.0))))))


def mixture_structure(b1, b2, w: float, tol: Tolerance = DEFAULT_TOL) -> ComonoidCPM:
    """Convex mixture of the copy structures of two genuinely different bases.

    There is no law guarantee: mixtures are the negative instances that
    the law checks are expected to reject.  Bases that agree up to
    per-column phases (copy structures would coincide) are refused.
    """
    if not (0.0 < w <= 1.0):
        raise ValueError(f"mixture weight must lie in (0, 1], got {w}")
    d1, e1 = copy_pair(b1, tol)
    d2, e2 = copy_pair(b2, tol)
    if d1.shape != d2.shape:
        raise ValueError("bases must have the same dimension")
    dist = _phase_distance(as_matrix(b1), as_matrix(b2))
    if dist <= 0.1:
        raise BasesCoincideError(dist)
    n = d1.shape[1]
    if w == 1.0:
        return ComonoidCPM(dim=n, delta=double(d1), epsilon=double(e1))
    delta = CPMap([np.sqrt(w) * d1, np.sqrt(1.0 - w) * d2], in_dim=n, out_dim=n * n)
    epsilon = CPMap([np.sqrt(w) * e1, np.sqrt(1.0 - w) * e2], in_dim=n, out_dim=1)
    return ComonoidCPM(dim=n, delta=delta, epsilon=epsilon)


def canonicity_check(c: ComonoidCPM, tol: Tolerance = DEFAULT_TOL) -> CanonicityReport:
    """Laws, Choi ranks, and (when both ranks are 1) operator extraction.

    After rank-1 extraction the relative phase of ``e`` is fixed so that
    ``(e (x) I) d`` is as close to the identity as a phase allows;
    doubling erases that phase, so this costs nothing and yields an exact
    operator comonoid representative.
    """
    laws = law_residuals(c)
    laws_pass = laws.passing(c.dim, tol)
    pd = is_pure(c.delta, tol)
    pe = is_pure(c.epsilon, tol)
    canonical = bool(laws_pass and pd.rank == 1 and pe.rank == 1)
    extracted_d = extracted_e = None
    extraction_residual = None
    if pd.rank == 1 and pe.rank == 1:
        n = c.dim
        d, e = pd.operator, pe.operator
        z = np.trace(np.kron(e, np.eye(n)) @ d) / n
        if abs(z) > 0:
            e = e * (z.conjugate() / abs(z))
        extracted_d, extracted_e = d, e
        extraction_residual = max(
            choi_distance(double(d), c.delta),
            choi_distance(double(e), c.epsilon),
        )
    return CanonicityReport(
        laws=laws,
        laws_pass=laws_pass,
        delta_choi_rank=pd.rank,
        epsilon_choi_rank=pe.rank,
        canonical=canonical,
        extracted_d=extracted_d,
        extracted_e=extracted_e,
        extraction_residual=extraction_residual,
    )


def _scalar_of_identity(a: np.ndarray, n: int) -> tuple[complex, float]:
    c = np.trace(a) / n
    return c, float(np.linalg.norm(a - c * np.eye(n)))


def _phase_free_distance(a: np.ndarray, b: np.ndarray) -> float:
    # min over a global phase of |a - exp(i theta) b|_F; doubling erases the
    # phase.  Align explicitly and subtract: stable near zero.
    c = np.vdot(a, b)
    z = c.conjugate() / abs(c) if abs(c) > 0 else 1.0
    return float(np.linalg.norm(a - z * b))


def proof_trace(c: ComonoidCPM, tol: Tolerance = DEFAULT_TOL) -> ProofTrace:
    """Record and assert every intermediate of the canonicity argument.

    Steps: decompose ``delta`` into ``(q_i, V_i)``; decompose the counit's
    Choi matrix into pure effect components; close single legs of each
    ``V_i`` with each component (the ``l``/``r`` scalars, each gated on
    being a multiple of the identity); contract pairs of ``V`` against
    pairs of adjoints (the ``t`` tensor, same gate); and resolve, for each
    ``(i, j)``, which ``(i', j')`` makes the two leg orderings agree.

    Raises :class:`LawsFailedError` when the precondition gate fails and
    :class:`ProportionalityError` when any step's scalar check fails.
    """
    laws = law_residuals(c)
    if not laws.passing(c.dim, tol):
        raise LawsFailedError(laws)
    n = c.dim
    eye = np.eye(n, dtype=complex)

    try:
        dec = decompose(c.delta, tol)
    except GramBlockError as exc:
        # the scalar-block condition K_b^dag K_a = g_ab I is itself a
        # proportionality statement; report it as such
        raise ProportionalityError("dilation block scalars", "delta", exc.residual) from exc
    q, v = dec.q, dec.v
    m = len(q)

    es = eigh(c.epsilon.choi, tol)
    kcount = numerical_rank(np.maximum(es.values, -tol.atol), tol)
    components = []
    for k in range(kcount):
        row = fix_global_phase(es.vectors[:, k].reshape(1, n))
        components.append((float(es.values[k]), row))

    l = np.zeros((m, kcount))
    r = np.zeros((m, kcount))
    counit_prop = 0.0
    for i, vi in enumerate(v):
        for k, (nu, row) in enumerate(components):
            left_leg = np.kron(row, eye) @ vi
            cc, res = _scalar_of_identity(left_leg, n)
            counit_prop = max(counit_prop, res)
            if res > tol.atol * (1.0 + float(np.linalg.norm(left_leg))):
                raise ProportionalityError("counit left-leg closure", (i, k), res)
            l[i, k] = nu * abs(cc) ** 2
            right_leg = np.kron(eye, row) @ vi
            cc, res = _scalar_of_identity(right_leg, n)
            counit_prop = max(counit_prop, res)
            if res > tol.atol * (1.0 + float(np.linalg.norm(right_leg))):
                raise ProportionalityError("counit right-leg closure", (i, k), res)
            r[i, k] = nu * abs(cc) ** 2
    l_row = l.sum(axis=1)
    r_row = r.sum(axis=1)

    t = np.zeros((m, m, m, m))
    t_prop = 0.0
    stacked = [np.kron(eye, vj) @ vi for vi in v for vj in v]  # index i*m+j
    for i in range(m):
        for j in range(m):
            bij = stacked[i * m + j]
            for k in range(m):
                for ll in range(m):
                    w = v[k].conj().T @ np.kron(v[ll].conj().T, eye) @ bij
                    cc, res = _scalar_of_identity(w, n)
                    t_prop = max(t_prop, res)
                    if res > tol.atol * (1.0 + float(np.linalg.norm(w))):
                        raise ProportionalityError("four-index contraction", (i, j, k, ll), res)
                    t[i, j, k, ll] = abs(cc) ** 2

    witnesses: dict = {}
    swapped = [np.kron(vi, eye) @ vj for vi in v for vj in v]  # index i2*m+j2
    for i in range(m):
        for j in range(m):
            bij = stacked[i * m + j]
            best = None
            for i2 in range(m):
                for j2 in range(m):
                    res = _phase_free_distance(bij, swapped[i2 * m + j2])
                    # strict < keeps the lexicographically smallest (i2, j2) on ties
                    if best is None or res < best[2]:
                        best = (i2, j2, res)
            witnesses[(i, j)] = best

    _assert_trace_identities(q, l_row, r_row, t, witnesses, tol)
    return ProofTrace(
        q=q,
        v=v,
        epsilon_components=tuple(components),
        l=l,
        r=r,
        l_row=l_row,
        r_row=r_row,
        t=t,
        dagger_witnesses=witnesses,
        counit_prop_residual=counit_prop,
        t_prop_residual=t_prop,
    )


def _assert_trace_identities(q, l_row, r_row, t, witnesses, tol: Tolerance):
    gate = tol.atol * max(1, len(q))
    lsum = float(np.dot(q, l_row))
    rsum = float(np.dot(q, r_row))
    if abs(lsum - 1.0) > gate or abs(rsum - 1.0) > gate:
        raise ProportionalityError(
            "unit-law coefficient sums", ("sum q*l", "sum q*r"), max(abs(lsum - 1), abs(rsum - 1))
        )
    lr = float(np.max(np.abs(l_row - r_row)))
    if lr > gate:
        raise ProportionalityError("left/right coefficient symmetry", "l vs r", lr)
    if float(np.min(r_row)) <= tol.rank_rel:
        raise ProportionalityError("coefficient positivity", "min r", float(np.min(r_row)))
    for (i, j), (i2, j2, res) in witnesses.items():
        if (i2, j2) != (i, j) or res > gate:
            raise ProportionalityError("leg-swap witness", (i, j, i2, j2), res)
        if float(np.max(np.abs(t[i, j]))) <= tol.rank_rel:
            raise ProportionalityError("four-index non-vanishing", (i, j), float(np.max(np.abs(t[i, j]))))


def comonoid_to_json(c: ComonoidCPM) -> dict:
    return {"dim": c.dim, "delta": cpmap_to_json(c.delta), "epsilon": cpmap_to_json(c.epsilon)}


def comonoid_from_json(obj, tol: Tolerance = DEFAULT_TOL) -> ComonoidCPM:
    if not isinstance(obj, dict):
        raise ValueError(f"comonoid JSON must be an object, got {type(obj).__name__}")
    missing = {"dim", "delta", "epsilon"} - obj.keys()
    if missing:
        raise ValueError(f"comonoid JSON is missing keys: {sorted(missing)}")
    if not isinstance(obj["dim"], int) or obj["dim"] < 1:
        raise ValueError(f"comonoid JSON has invalid dim {obj['dim']!r}")
    return ComonoidCPM(
        dim=obj["dim"],
        delta=cpmap_from_json(obj["delta"], tol),
        epsilon=cpmap_from_json(obj["epsilon"], tol),
    )


def canonicity_to_json(rep: CanonicityReport) -> dict:
    out = {
        "laws": rep.laws.to_json(),
        "laws_pass": rep.laws_pass,
        "delta_choi_rank": rep.delta_choi_rank,
        "epsilon_choi_rank": rep.epsilon_choi_rank,
        "canonical": rep.canonical,
        "extraction_residual": rep.extraction_residual,
        "extracted_d": None,
        "extracted_e": None,
    }
    if rep.extracted_d is not None:
        out["extracted_d"] = matrix_to_json(rep.extracted_d)
        out["extracted_e"] = matrix_to_json(rep.extracted_e)
    return out


def proof_trace_to_json(tr: ProofTrace) -> dict:
    return {
        "q": [float(x) for x in tr.q],
        "v": [matrix_to_json(vi) for vi in tr.v],
        "epsilon_components": [
            {"weight": nu, "effect": matrix_to_json(row)} for nu, row in tr.epsilon_components
        ],
        "l": tr.l.tolist(),
        "r": tr.r.tolist(),
        "l_row": tr.l_row.tolist(),
        "r_row": tr.r_row.tolist(),
        "t": tr.t.tolist(),
        "dagger_witnesses": [
            {"i": i, "j": j, "i2": i2, "j2": j2, "residual": res}
            for (i, j), (i2, j2, res) in sorted(tr.dagger_witnesses.items())
        ],
        "counit_prop_residual": tr.counit_prop_residual,
        "t_prop_residual": tr.t_prop_residual,
    }
