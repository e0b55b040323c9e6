"""Decomposing CP isometries into pure isometries with orthogonal images.

A CP map ``f`` with ``dagger(f) o f = identity`` always equals a sum
``sum_i q_i double(V_i)`` where the ``V_i`` are isometries with pairwise
orthogonal images (``V_i^dag V_j = delta_ij I``), the coefficients are
positive with ``sum_i q_i^2 = 1``, and none of them vanish.

Two independent constructions are provided:

* :func:`decompose` works through the pure dilation: for an isometry the
  Kraus blocks ``K_b^dag K_a`` are all proportional to the identity, so
  the normalized Gram matrix ``g[a, b] = Tr(K_b^dag K_a) / in_dim`` is
  Hermitian PSD; its eigenvalues are the ``q_i`` and its eigenvectors mix
  the Kraus family into the ``V_i``.
* :func:`decompose_oracle` reads the same data off the Choi spectrum:
  eigenvalues are ``in_dim * q_i`` with eigenvectors the Choi embeddings
  of the ``V_i``.

Outputs are gauge-fixed for determinism: coefficients descending (ties
broken lexicographically on the mixing eigenvector) and each ``V_i``
phase-fixed.  Within a degenerate coefficient block the ``V_i`` are only
defined up to unitary mixing, so comparisons across routes should use
gauge-invariant data (coefficient multisets, block spans, reconstruction
Choi matrices).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cpm import (
    CPMap,
    Purification,
    check_isometry,
    choi_distance,
    choi_unembed,
    purify,
)
from .tensor import DEFAULT_TOL, CpmkitError, Tolerance, eigh, fix_global_phase, haar_isometry, matrix_to_json, numerical_rank

__all__ = [
    "NotIsometryError",
    "GramBlockError",
    "ReshapeNotIsometryError",
    "EnvironmentGram",
    "IsometryDecomposition",
    "environment_gram",
    "decompose",
    "decompose_oracle",
    "random_cp_isometry",
    "dilation_gram_residual",
    "reconstruction",
    "decomposition_to_json",
]


class NotIsometryError(CpmkitError):
    """The input CP map fails ``dagger(f) o f = identity``."""

    def __init__(self, residual: float):
        self.residual = float(residual)
        super().__init__(f"CP map is not an isometry: residual {self.residual:.3e}")


class GramBlockError(CpmkitError):
    """A Kraus block ``K_b^dag K_a`` is not scalar: the input is numerically inconsistent."""

    def __init__(self, residual: float):
        self.residual = float(residual)
        super().__init__(f"Kraus blocks are not scalar multiples of I: residual {self.residual:.3e}")


class ReshapeNotIsometryError(CpmkitError):
    """A Choi eigenvector does not reshape to an isometry: the input violates the hypothesis."""

    def __init__(self, residual: float):
        self.residual = float(residual)
        super().__init__(f"reshaped Choi eigenvector is not an isometry: residual {self.residual:.3e}")


@dataclass(frozen=True)
class EnvironmentGram:
    """Normalized Gram matrix of a Kraus family, with its scalar-block residual.

    ``g[a, b] = Tr(K_b^dag K_a) / in_dim``; ``block_residual`` is the worst
    deviation of any ``K_b^dag K_a`` from ``g[a, b] * I`` and vanishes (up
    to noise) exactly when the source map is an isometry.
    """

    g: np.ndarray
    block_residual: float


@dataclass(frozen=True)
class IsometryDecomposition:
    """Coefficients and pure isometries recovered from a CP isometry.

    Invariants (all within tolerance on gated inputs): ``sum q_i^2 = 1``;
    ``V_i^dag V_j = delta_ij I``; the reconstruction ``sum q_i double(V_i)``
    has the source's Choi matrix; all ``q_i`` exceed the rank cutoff.
    """

    q: np.ndarray
    v: tuple[np.ndarray, ...]
    source: CPMap
    reconstruction_residual: float
    orthogonality_residual: float
    route: str


def environment_gram(p: Purification, tol: Tolerance = DEFAULT_TOL) -> EnvironmentGram:
    """Build the normalized Kraus Gram matrix and measure its scalar-block residual."""
    ops = p.base.kraus
    n = p.base.in_dim
    flat = np.stack([k.reshape(-1) for k in ops])
    g = (flat @ flat.conj().T) / n            # g[a, b] = Tr(K_b^dag K_a) / n
    eye = np.eye(n, dtype=complex)
    block_residual = 0.0
    for a, ka in enumerate(ops):
        for b, kb in enumerate(ops):
            block_residual = max(
                block_residual,
                float(np.linalg.norm(kb.conj().T @ ka - g[a, b] * eye)),
            )
    return EnvironmentGram(g=g, block_residual=block_residual)


def _tie_key(u: np.ndarray):
    v = fix_global_phase(u.reshape(1, -1)).reshape(-1)
    return tuple((float(z.real), float(z.imag)) for z in v)


def _canonical_order(values: np.ndarray, vectors: np.ndarray, count: int, atol: float):
    """Order the kept eigenpairs: descending values, ties broken by eigenvector."""
    idx = list(range(count))
    groups: list[list[int]] = []
    for i in idx:
        if groups and values[groups[-1][0]] - values[i] <= atol:
            groups[-1].append(i)
        else:
            groups.append([i])
    ordered: list[int] = []
    for grp in groups:
        ordered.extend(sorted(grp, key=lambda i: _tie_key(vectors[:, i])))
    return ordered


def _residuals(q: np.ndarray, v: list[np.ndarray], source: CPMap) -> tuple[float, float]:
    n = source.in_dim
    eye = np.eye(n, dtype=complex)
    orth = 0.0
    for i, vi in enumerate(v):
        for j, vj in enumerate(v):
            target = eye if i == j else 0.0
            orth = max(orth, float(np.linalg.norm(vi.conj().T @ vj - target)))
    recon = CPMap([np.sqrt(qi) * vi for qi, vi in zip(q, v)],
                  in_dim=source.in_dim, out_dim=source.out_dim)
    return choi_distance(recon, source), orth


def decompose(f: CPMap, tol: Tolerance = DEFAULT_TOL) -> IsometryDecomposition:
    """Decompose a CP isometry through its dilation's environment Gram matrix.

    Raises :class:`NotIsometryError` when the isometry gate fails and
    :class:`GramBlockError` when the Kraus blocks are not scalar (which
    signals an input inconsistent with the isometry hypothesis).
    """
    chk = check_isometry(f, tol)
    if not chk.ok:
        raise NotIsometryError(chk.residual)
    p = purify(f)
    eg = environment_gram(p, tol)
    if eg.block_residual > tol.atol * (1.0 + float(np.linalg.norm(eg.g))):
        raise GramBlockError(eg.block_residual)
    es = eigh(eg.g, tol)
    count = numerical_rank(np.maximum(es.values, -tol.atol), tol)
    order = _canonical_order(es.values, es.vectors, count, tol.atol)
    arr = np.stack(f.kraus)                    # (env, out, in)
    q = es.values[order].astype(float)
    v = []
    for lam, i in zip(q, order):
        phi = es.vectors[:, i]
        vi = np.tensordot(phi.conj(), arr, axes=(0, 0)) / np.sqrt(lam)
        v.append(fix_global_phase(vi))
    recon_res, orth_res = _residuals(q, v, f)
    return IsometryDecomposition(q=q, v=tuple(v), source=f,
                                 reconstruction_residual=recon_res,
                                 orthogonality_residual=orth_res, route="gram")


def decompose_oracle(f: CPMap, tol: Tolerance = DEFAULT_TOL) -> IsometryDecomposition:
    """Independent route: read coefficients and isometries off the Choi spectrum.

    The Choi matrix of ``sum_i q_i double(V_i)`` has eigenvalues
    ``in_dim * q_i`` with eigenvectors the embeddings of the ``V_i``; an
    eigenvector whose reshape fails ``V^dag V = c I`` raises
    :class:`ReshapeNotIsometryError`.
    """
    chk = check_isometry(f, tol)
    if not chk.ok:
        raise NotIsometryError(chk.residual)
    n = f.in_dim
    es = eigh(f.choi, tol)
    count = numerical_rank(np.maximum(es.values, -tol.atol), tol)
    order = _canonical_order(es.values, es.vectors, count, tol.atol)
    q = (es.values[order] / n).astype(float)
    eye = np.eye(n, dtype=complex)
    v = []
    for i in order:
        vi = choi_unembed(np.sqrt(n) * es.vectors[:, i], n, f.out_dim)
        residual = float(np.linalg.norm(vi.conj().T @ vi - eye))
        if residual > tol.atol * n:
            raise ReshapeNotIsometryError(residual)
        v.append(fix_global_phase(vi))
    recon_res, orth_res = _residuals(q, v, f)
    return IsometryDecomposition(q=q, v=tuple(v), source=f,
                                 reconstruction_residual=recon_res,
                                 orthogonality_residual=orth_res, route="choi")


def reconstruction(d: IsometryDecomposition) -> CPMap:
    """Reassemble ``sum_i q_i double(V_i)`` as a CP map."""
    return CPMap([np.sqrt(qi) * vi for qi, vi in zip(d.q, d.v)],
                 in_dim=d.source.in_dim, out_dim=d.source.out_dim)


def random_cp_isometry(in_dim: int, out_dim: int, terms: int, seed):
    """Sample a CP isometry with known ground truth.

    A Haar isometry on ``terms * in_dim`` columns is sliced into ``terms``
    blocks (isometries with orthogonal images by construction) and mixed
    with coefficients drawn uniformly from the positive orthant of the
    ``sum q^2 = 1`` sphere.  Returns ``(cp_map, q, v)`` with the planted
    data sorted by descending coefficient.
    """
    if terms < 1:
        raise ValueError("need at least one term")
    if out_dim < terms * in_dim:
        raise ValueError(
            f"orthogonal images need out_dim >= terms * in_dim, got {out_dim} < {terms * in_dim}"
        )
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    u = haar_isometry(out_dim, terms * in_dim, rng)
    v = [u[:, i * in_dim:(i + 1) * in_dim] for i in range(terms)]
    x = rng.standard_normal(terms)
    q = np.abs(x) / np.linalg.norm(x)
    order = np.argsort(-q)
    q = q[order]
    v = [v[i] for i in order]
    f = CPMap([np.sqrt(qi) * vi for qi, vi in zip(q, v)], in_dim=in_dim, out_dim=out_dim)
    return f, q, tuple(v)


def dilation_gram_residual(p: Purification, g: np.ndarray) -> float:
    """Consistency check between a dilation and its environment Gram matrix.

    With ``w: H -> K (x) E`` the dilation operator, the composite
    ``(w^dag (x) I_E) (I_K (x) swap_EE) (w (x) I_E)`` maps ``H (x) E`` to
    itself and must equal ``I_H (x) g`` whenever the base map is an
    isometry.  Returns the Frobenius residual of that identity.
    """
    n = p.base.in_dim
    k = p.base.out_dim
    e = p.env_dim
    swap = np.zeros((e * e, e * e), dtype=complex)
    for a in range(e):
        for b in range(e):
            swap[b * e + a, a * e + b] = 1.0
    m = (
        np.kron(p.w.conj().T, np.eye(e))
        @ np.kron(np.eye(k), swap)
        @ np.kron(p.w, np.eye(e))
    )
    return float(np.linalg.norm(m - np.kron(np.eye(n), g)))


def decomposition_to_json(d: IsometryDecomposition) -> dict:
    """Report encoding: coefficients, isometries, and the two residuals."""
    return {
        "q": [float(x) for x in d.q],
        "v": [matrix_to_json(vi) for vi in d.v],
        "sum_q_sq": float(np.sum(d.q ** 2)),
        "orthogonality_residual": float(d.orthogonality_residual),
        "reconstruction_residual": float(d.reconstruction_residual),
        "route": d.route,
    }
