"""Completely positive maps between finite-dimensional spaces.

A CP map ``f: H -> K`` is held as a nonempty Kraus family of
``out_dim x in_dim`` matrices, with the Choi matrix cached on first use.

Choi convention: with ``E_ij = |i><j|`` on the *input* space,

    choi(f) = sum_ij E_ij (x) f(E_ij)

so the Choi matrix lives on input (x) output and trace preservation reads
``Tr_out(choi) = I_in``.  Under the row-major ``vec`` of :mod:`.tensor`,
``choi = sum_a w_a w_a^dag`` where ``w_a = vec(K_a^T)`` is the Choi
embedding of the Kraus operator ``K_a``.

Equality of CP maps is always Choi-Frobenius distance within tolerance
(:func:`choi_distance`), never Kraus-list comparison: Kraus families are
not unique.  Kraus families are never pruned implicitly; canonicalization
happens only through :func:`kraus_from_choi`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .tensor import (
    DEFAULT_TOL,
    CpmkitError,
    Tolerance,
    as_matrix,
    eigh,
    fix_global_phase,
    matrix_from_json,
    matrix_to_json,
    numerical_rank,
)

__all__ = [
    "CPMap",
    "Purification",
    "PurityReport",
    "IsometryCheck",
    "NotPSDError",
    "NotPureError",
    "NotProportionalError",
    "double",
    "compose",
    "tensor",
    "dagger",
    "discard",
    "prepare",
    "identity",
    "scale",
    "add",
    "apply_to",
    "choi_embed",
    "choi_unembed",
    "choi_distance",
    "choi_norm",
    "kraus_from_choi",
    "is_pure",
    "purify",
    "pure_proportionality",
    "check_isometry",
    "cpmap_to_json",
    "cpmap_from_json",
]


class NotPSDError(CpmkitError):
    """A matrix required to be positive semidefinite has a genuinely negative eigenvalue."""

    def __init__(self, most_negative: float):
        self.most_negative = float(most_negative)
        super().__init__(f"matrix is not PSD: most negative eigenvalue {self.most_negative:.3e}")


class NotPureError(CpmkitError):
    """An operation requiring pure CP maps received an impure one."""

    def __init__(self, rank: int):
        self.rank = int(rank)
        super().__init__(f"CP map is not pure: Choi numerical rank {self.rank}")


class NotProportionalError(CpmkitError):
    """Two pure CP maps are not related by a non-negative scalar."""

    def __init__(self, residual: float):
        self.residual = float(residual)
        super().__init__(f"pure maps are not proportional: residual {self.residual:.3e}")


def choi_embed(k) -> np.ndarray:
    """Choi embedding of an operator: ``w[(i, b)] = K[b, i]`` with input index major."""
    return as_matrix(k).T.reshape(-1)


def choi_unembed(w, in_dim: int, out_dim: int) -> np.ndarray:
    """Inverse of :func:`choi_embed` for an ``out_dim x in_dim`` operator."""
    w = np.asarray(w, dtype=complex).reshape(-1)
    if w.size != in_dim * out_dim:
        raise ValueError(f"cannot unembed length {w.size} into {out_dim}x{in_dim}")
    return w.reshape(in_dim, out_dim).T


class CPMap:
    """A completely positive map held as an immutable Kraus family.

    The Choi matrix is computed lazily and cached; every operation in this
    module is a pure function, so values are safe to share across threads.
    """

    def __init__(self, kraus, in_dim: int | None = None, out_dim: int | None = None):
        ops = [as_matrix(k) for k in kraus]
        if not ops:
            raise ValueError("a CP map needs at least one Kraus operator")
        rows, cols = ops[0].shape
        out_dim = rows if out_dim is None else out_dim
        in_dim = cols if in_dim is None else in_dim
        for k in ops:
            if k.shape != (out_dim, in_dim):
                raise ValueError(
                    f"Kraus operators must all be {out_dim}x{in_dim}, got {k.shape}"
                )
        for k in ops:
            k.setflags(write=False)
        self.in_dim = int(in_dim)
        self.out_dim = int(out_dim)
        self.kraus = tuple(ops)

    @cached_property
    def choi(self) -> np.ndarray:
        d = self.in_dim * self.out_dim
        c = np.zeros((d, d), dtype=complex)
        for k in self.kraus:
            w = choi_embed(k)
            c += np.outer(w, w.conj())
        c.setflags(write=False)
        return c

    def __repr__(self):
        return f"CPMap(in_dim={self.in_dim}, out_dim={self.out_dim}, kraus={len(self.kraus)})"


@dataclass(frozen=True)
class Purification:
    """A pure dilation of ``base``: one operator ``w: H -> K (x) E``.

    Discarding the environment factor of ``double(w)`` reproduces ``base``;
    the environment dimension equals the number of Kraus operators, indexed
    in Kraus-list order.
    """

    base: CPMap
    env_dim: int
    w: np.ndarray


@dataclass(frozen=True)
class PurityReport:
    """Choi-rank purity verdict, with the extracted operator when pure.

    The operator is phase-fixed (largest-modulus entry real positive) and
    satisfies ``double(operator) ~ map`` within the eigensolver's accuracy.
    """

    pure: bool
    rank: int
    operator: np.ndarray | None


@dataclass(frozen=True)
class IsometryCheck:
    """Result of testing ``dagger(f) o f = identity``."""

    ok: bool
    residual: float


def double(k) -> CPMap:
    """The doubling of an operator: the pure CP map ``rho -> K rho K^dag``."""
    return CPMap([k])


def compose(g: CPMap, f: CPMap) -> CPMap:
    """Composite ``g after f``; Kraus family is all products ``g_b f_a``."""
    if f.out_dim != g.in_dim:
        raise ValueError(f"cannot compose: f has out_dim {f.out_dim}, g has in_dim {g.in_dim}")
    return CPMap([gb @ fa for gb in g.kraus for fa in f.kraus],
                 in_dim=f.in_dim, out_dim=g.out_dim)


def tensor(f: CPMap, g: CPMap) -> CPMap:
    """Parallel composite ``f (x) g``; Kraus family is all ``kron(f_a, g_b)``."""
    return CPMap([np.kron(fa, gb) for fa in f.kraus for gb in g.kraus],
                 in_dim=f.in_dim * g.in_dim, out_dim=f.out_dim * g.out_dim)


def dagger(f: CPMap) -> CPMap:
    """Adjoint CP map: Kraus operators are the adjoints of ``f``'s."""
    return CPMap([k.conj().T for k in f.kraus], in_dim=f.out_dim, out_dim=f.in_dim)


def discard(n: int) -> CPMap:
    """The trace map ``H -> C``, ``rho -> Tr(rho)``."""
    if n < 1:
        raise ValueError("discard needs dimension >= 1")
    eye = np.eye(n, dtype=complex)
    return CPMap([eye[i:i + 1, :] for i in range(n)], in_dim=n, out_dim=1)


def prepare(n: int) -> CPMap:
    """The map ``C -> H`` preparing the unnormalized identity, ``c -> c I_n``."""
    if n < 1:
        raise ValueError("prepare needs dimension >= 1")
    eye = np.eye(n, dtype=complex)
    return CPMap([eye[:, i:i + 1] for i in range(n)], in_dim=1, out_dim=n)


def identity(n: int) -> CPMap:
    """The identity CP map on an ``n``-dimensional space."""
    if n < 1:
        raise ValueError("identity needs dimension >= 1")
    return CPMap([np.eye(n, dtype=complex)])


def scale(f: CPMap, c: float) -> CPMap:
    """Multiply a CP map by a non-negative scalar (the Choi scales by ``c``)."""
    if c < 0 or not np.isfinite(c):
        raise ValueError(f"CP scalars are non-negative reals, got {c}")
    return CPMap([np.sqrt(c) * k for k in f.kraus], in_dim=f.in_dim, out_dim=f.out_dim)


def add(f: CPMap, g: CPMap) -> CPMap:
    """Sum of CP maps: concatenated Kraus families."""
    if (f.in_dim, f.out_dim) != (g.in_dim, g.out_dim):
        raise ValueError("can only add CP maps with identical dimensions")
    return CPMap(list(f.kraus) + list(g.kraus), in_dim=f.in_dim, out_dim=f.out_dim)


def apply_to(f: CPMap, rho) -> np.ndarray:
    """Apply ``f`` to an operator: ``sum_a K_a rho K_a^dag``."""
    rho = as_matrix(rho, rows=f.in_dim, cols=f.in_dim)
    out = np.zeros((f.out_dim, f.out_dim), dtype=complex)
    for k in f.kraus:
        out += k @ rho @ k.conj().T
    return out


def _flat_kraus(f: CPMap) -> np.ndarray:
    return np.stack([k.reshape(-1) for k in f.kraus])


def _gram_overlap(f: CPMap, g: CPMap) -> float:
    # Tr(choi(f) choi(g)) = sum_ab |Tr(K_a^dag L_b)|^2, computed without
    # materializing either Choi matrix.
    gram = _flat_kraus(f).conj() @ _flat_kraus(g).T
    return float(np.sum(np.abs(gram) ** 2))


def choi_distance(f: CPMap, g: CPMap) -> float:
    """Frobenius distance between Choi matrices, without building them.

    The difference ``choi(f) - choi(g)`` is ``U diag(s) U^dag`` with the
    stacked Kraus embeddings as columns of ``U`` and signs ``s``; after a
    QR factorization of ``U`` its norm is the norm of the small matrix
    ``R diag(s) R^dag``.  This matches ``norm(choi(f) - choi(g))`` to
    machine precision while keeping large tensor composites cheap, and it
    avoids the catastrophic cancellation a plain Gram-overlap difference
    would suffer near zero.
    """
    if (f.in_dim, f.out_dim) != (g.in_dim, g.out_dim):
        raise ValueError(
            f"CP maps have different shapes: {f.in_dim}->{f.out_dim} vs {g.in_dim}->{g.out_dim}"
        )
    wf = _flat_kraus(f)
    wg = _flat_kraus(g)
    if wf.shape == wg.shape and np.array_equal(wf, wg):
        return 0.0
    u = np.concatenate([wf, wg], axis=0).T          # N x (kf + kg)
    signs = np.concatenate([np.ones(len(wf)), -np.ones(len(wg))])
    r = np.linalg.qr(u, mode="r")
    return float(np.linalg.norm((r * signs) @ r.conj().T))


def choi_norm(f: CPMap) -> float:
    """Frobenius norm of the Choi matrix, via the same Gram trick."""
    return float(np.sqrt(max(_gram_overlap(f, f), 0.0)))


def kraus_from_choi(choi, in_dim: int, out_dim: int, tol: Tolerance = DEFAULT_TOL) -> CPMap:
    """Canonical Kraus family from a Choi matrix, via its eigendecomposition.

    Eigenvalues below the numerical-rank cutoff are dropped; a genuinely
    negative eigenvalue raises :class:`NotPSDError` and a non-Hermitian
    input raises :class:`NotHermitianError`.
    """
    d = in_dim * out_dim
    choi = as_matrix(choi, rows=d, cols=d)
    es = eigh(choi, tol)  # raises NotHermitianError with the residual
    scale_ref = max(float(es.values[0]) if es.values.size else 0.0, tol.atol)
    if es.values[-1] < -tol.atol * (1.0 + float(np.linalg.norm(choi))):
        raise NotPSDError(float(es.values[-1]))
    cutoff = tol.rank_rel * scale_ref
    kraus = []
    for lam, u in zip(es.values, es.vectors.T):
        if lam > cutoff:
            kraus.append(choi_unembed(np.sqrt(lam) * u, in_dim, out_dim))
    if not kraus:
        # the zero map still needs a representative Kraus operator
        kraus = [np.zeros((out_dim, in_dim), dtype=complex)]
    return CPMap(kraus, in_dim=in_dim, out_dim=out_dim)


def is_pure(f: CPMap, tol: Tolerance = DEFAULT_TOL) -> PurityReport:
    """Purity test: a CP map is pure iff its Choi matrix has numerical rank 1."""
    es = eigh(f.choi, tol)
    rank = numerical_rank(np.maximum(es.values, -tol.atol), tol)
    if rank != 1:
        return PurityReport(pure=False, rank=rank, operator=None)
    k = choi_unembed(np.sqrt(es.values[0]) * es.vectors[:, 0], f.in_dim, f.out_dim)
    return PurityReport(pure=True, rank=1, operator=fix_global_phase(k))


def purify(f: CPMap) -> Purification:
    """Stack the Kraus family into one pure dilation ``w = sum_a K_a (x) |a>``.

    ``w`` maps ``H -> K (x) E`` with ``E = C^(#Kraus)``; the environment
    index follows Kraus-list order, so downstream environment operators
    are literal (normalized) Gram matrices of the Kraus list.
    """
    env = len(f.kraus)
    arr = np.stack(f.kraus)                       # (env, out, in)
    w = arr.transpose(1, 0, 2).reshape(f.out_dim * env, f.in_dim)
    return Purification(base=f, env_dim=env, w=w)


def pure_proportionality(psi: CPMap, f: CPMap, tol: Tolerance = DEFAULT_TOL) -> float:
    """Recover ``p >= 0`` with ``psi = p * f`` for pure maps, or fail loudly.

    The candidate coefficient is ``p = |<vec F, vec Psi>|^2 / |vec F|^4``;
    if the induced operator proportionality does not hold within tolerance,
    :class:`NotProportionalError` carries the residual.
    """
    if (psi.in_dim, psi.out_dim) != (f.in_dim, f.out_dim):
        raise ValueError("pure_proportionality needs maps with identical dimensions")
    rp = is_pure(psi, tol)
    rf = is_pure(f, tol)
    if not rf.pure:
        raise NotPureError(rf.rank)
    if not rp.pure:
        # psi may be the zero map (rank 0): that is proportional with p = 0
        if rp.rank == 0:
            return 0.0
        raise NotPureError(rp.rank)
    fop, pop = rf.operator, rp.operator
    fnorm2 = float(np.vdot(fop, fop).real)
    c = np.vdot(fop, pop) / fnorm2
    residual = float(np.linalg.norm(pop - c * fop))
    if residual > tol.atol * (1.0 + float(np.linalg.norm(pop))):
        raise NotProportionalError(residual)
    return float(abs(c) ** 2)


def check_isometry(f: CPMap, tol: Tolerance = DEFAULT_TOL) -> IsometryCheck:
    """Test ``dagger(f) o f = identity`` by Choi-Frobenius residual.

    Passing means the residual is at most ``atol * in_dim`` (Choi norms
    grow with dimension).
    """
    residual = choi_distance(compose(dagger(f), f), identity(f.in_dim))
    return IsometryCheck(ok=residual <= tol.atol * f.in_dim, residual=residual)


def cpmap_to_json(f: CPMap) -> dict:
    """Encode a CP map as ``{"in_dim", "out_dim", "kraus": [Matrix, ...]}``."""
    return {
        "in_dim": f.in_dim,
        "out_dim": f.out_dim,
        "kraus": [matrix_to_json(k) for k in f.kraus],
    }


def cpmap_from_json(obj, tol: Tolerance = DEFAULT_TOL) -> CPMap:
    """Decode a CP map; an optional ``"choi"`` entry is validated against the Kraus family."""
    if not isinstance(obj, dict):
        raise ValueError(f"CP map JSON must be an object, got {type(obj).__name__}")
    missing = {"in_dim", "out_dim", "kraus"} - obj.keys()
    if missing:
        raise ValueError(f"CP map JSON is missing keys: {sorted(missing)}")
    in_dim, out_dim = obj["in_dim"], obj["out_dim"]
    if not (isinstance(in_dim, int) and isinstance(out_dim, int) and in_dim >= 1 and out_dim >= 1):
        raise ValueError(f"CP map JSON has invalid dims {in_dim!r} -> {out_dim!r}")
    if not isinstance(obj["kraus"], list) or not obj["kraus"]:
        raise ValueError("CP map JSON needs a nonempty kraus list")
    kraus = [matrix_from_json(k) for k in obj["kraus"]]
    f = CPMap(kraus, in_dim=in_dim, out_dim=out_dim)
    if "choi" in obj:
        given = as_matrix(matrix_from_json(obj["choi"]),
                          rows=in_dim * out_dim, cols=in_dim * out_dim)
        residual = float(np.linalg.norm(given - f.choi))
        if residual > tol.atol * (1.0 + float(np.linalg.norm(given))):
            raise ValueError(
                f"CP map JSON: provided choi disagrees with kraus, residual {residual:.3e}"
            )
    return f
