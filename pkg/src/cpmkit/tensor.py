"""Dense complex matrix primitives and the numeric tolerance policy.

Conventions fixed here and used by every other module:

* Matrices are 2-D ``numpy`` arrays of ``complex128``, row-major.
* ``vec`` stacks rows (row-major flattening), so that
  ``<vec(A), vec(B)> = Tr(A^dag B)``.
* Hermitian eigensystems are returned with eigenvalues sorted in
  descending order and orthonormal eigenvector columns.
* Random matrices are drawn from the Ginibre ensemble (i.i.d. standard
  complex Gaussians); Haar isometries are obtained by QR with the phases
  of the R diagonal absorbed into Q, which makes the distribution
  invariant under left/right unitary rotation.

All helpers are pure functions over immutable inputs; random sampling
takes an explicit seed or ``numpy.random.Generator``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CpmkitError",
    "NotHermitianError",
    "Tolerance",
    "DEFAULT_TOL",
    "Eigensystem",
    "as_matrix",
    "kron",
    "partial_trace",
    "vec",
    "unvec",
    "eigh",
    "numerical_rank",
    "haar_isometry",
    "fix_global_phase",
    "matrix_to_json",
    "matrix_from_json",
]


class CpmkitError(Exception):
    """Base class for all errors raised by this package."""


class NotHermitianError(CpmkitError):
    """A matrix required to be Hermitian is not, beyond tolerance."""

    def __init__(self, residual: float):
        self.residual = float(residual)
        super().__init__(f"matrix is not Hermitian: |A - A^dag|_F = {self.residual:.3e}")


@dataclass(frozen=True)
class Tolerance:
    """Global numeric policy.

    ``atol`` is the absolute comparison tolerance used in every residual
    check; ``rank_rel`` is the relative eigenvalue cutoff that defines
    numerical rank.  Defaults sit two orders of magnitude above
    double-precision eigensolver noise at the dimensions this package
    targets (products of dims up to ~64).
    """

    atol: float = 1e-9
    rank_rel: float = 1e-10

    def __post_init__(self):
        if not (self.atol > 0 and np.isfinite(self.atol)):
            raise ValueError(f"atol must be positive and finite, got {self.atol}")
        if not (self.rank_rel > 0 and np.isfinite(self.rank_rel)):
            raise ValueError(f"rank_rel must be positive and finite, got {self.rank_rel}")


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True)
class Eigensystem:
    """Hermitian eigendecomposition with descending eigenvalues.

    ``values[i]`` belongs to the orthonormal column ``vectors[:, i]``.
    """

    values: np.ndarray
    vectors: np.ndarray


def as_matrix(a, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Coerce to a finite complex 2-D array, optionally checking its shape."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValueError("matrix contains non-finite entries")
    if rows is not None and m.shape[0] != rows:
        raise ValueError(f"expected {rows} rows, got {m.shape[0]}")
    if cols is not None and m.shape[1] != cols:
        raise ValueError(f"expected {cols} cols, got {m.shape[1]}")
    return m


def kron(a, b) -> np.ndarray:
    """Tensor (Kronecker) product: ``(a (x) b)[i*rb+k, j*cb+l] = a[i,j] b[k,l]``."""
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(m, which: str, dims: tuple[int, int]) -> np.ndarray:
    """Trace out one factor of an operator on A (x) B.

    ``which`` selects the factor to discard, ``"A"`` or ``"B"``;
    ``dims = (dimA, dimB)``.  Satisfies ``Tr_B(X (x) Y) = Tr(Y) X`` and
    its mirror image, extended linearly.
    """
    da, db = dims
    if da < 1 or db < 1:
        raise ValueError(f"dims must be positive, got {dims}")
    m = as_matrix(m, rows=da * db, cols=da * db)
    t = m.reshape(da, db, da, db)
    if which == "A":
        return np.einsum("abad->bd", t)
    if which == "B":
        return np.einsum("abcb->ac", t)
    raise ValueError(f"which must be 'A' or 'B', got {which!r}")


def vec(a) -> np.ndarray:
    """Row-major flattening of a matrix into a vector."""
    return as_matrix(a).reshape(-1)


def unvec(v, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec` for the given shape."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.size != rows * cols:
        raise ValueError(f"cannot reshape length {v.size} into {rows}x{cols}")
    return v.reshape(rows, cols)


def eigh(a, tol: Tolerance = DEFAULT_TOL) -> Eigensystem:
    """Eigendecompose a Hermitian matrix, eigenvalues descending.

    The input is gated on Hermiticity (raising :class:`NotHermitianError`
    with the residual) and then symmetrized as ``(a + a^dag)/2`` so that
    representation noise does not leak into the eigensystem.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"eigh needs a square matrix, got {a.shape}")
    residual = float(np.linalg.norm(a - a.conj().T))
    if residual > tol.atol * (1.0 + float(np.linalg.norm(a))):
        raise NotHermitianError(residual)
    sym = (a + a.conj().T) / 2.0
    values, vectors = np.linalg.eigh(sym)
    return Eigensystem(values=values[::-1].copy(), vectors=vectors[:, ::-1].copy())


def numerical_rank(values, tol: Tolerance = DEFAULT_TOL) -> int:
    """Count eigenvalues above the relative cutoff ``rank_rel * max(values, atol)``.

    ``values`` must be sorted descending and non-negative up to ``-atol``.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0
    if np.any(np.diff(values) > 0):
        raise ValueError("values must be sorted in descending order")
    if values[-1] < -tol.atol:
        raise ValueError(f"values must be non-negative up to -atol, got min {values[-1]:.3e}")
    cutoff = tol.rank_rel * max(float(values[0]), tol.atol)
    return int(np.sum(values > cutoff))


def haar_isometry(out_dim: int, in_dim: int, seed) -> np.ndarray:
    """Sample a Haar-distributed isometry of shape ``out_dim x in_dim``.

    A Ginibre matrix is QR-factored and the phases of the diagonal of R
    are multiplied into the columns of Q; for ``out_dim == in_dim`` this
    is the standard Haar-unitary recipe.  ``seed`` may be an integer or a
    ``numpy.random.Generator``; the same seed yields the identical matrix.
    """
    if out_dim < in_dim:
        raise ValueError(f"need out_dim >= in_dim, got {out_dim} < {in_dim}")
    if in_dim < 1:
        raise ValueError("in_dim must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = rng.standard_normal((out_dim, in_dim)) + 1j * rng.standard_normal((out_dim, in_dim))
    q, r = np.linalg.qr(z / np.sqrt(2.0))
    d = np.diagonal(r)
    phases = np.where(np.abs(d) > 0, d / np.where(np.abs(d) > 0, np.abs(d), 1.0), 1.0)
    return q * phases


def fix_global_phase(m) -> np.ndarray:
    """Rotate a matrix by a global phase so its largest-modulus entry is real positive.

    Doubling erases global phases, so comparisons of extracted operators
    need a deterministic representative.  Ties are broken row-major; an
    all-zero matrix is returned unchanged.
    """
    m = as_matrix(m)
    flat = m.reshape(-1)
    idx = int(np.argmax(np.abs(flat)))
    pivot = flat[idx]
    if abs(pivot) == 0:
        return m
    return m * (abs(pivot) / pivot)


def matrix_to_json(a) -> dict:
    """Encode a matrix as ``{"rows", "cols", "data"}`` with ``[re, im]`` pairs, row-major."""
    m = as_matrix(a)
    data = [[float(z.real), float(z.imag)] for z in m.reshape(-1)]
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "data": data}


def matrix_from_json(obj) -> np.ndarray:
    """Decode the matrix encoding produced by :func:`matrix_to_json`."""
    if not isinstance(obj, dict):
        raise ValueError(f"matrix JSON must be an object, got {type(obj).__name__}")
    missing = {"rows", "cols", "data"} - obj.keys()
    if missing:
        raise ValueError(f"matrix JSON is missing keys: {sorted(missing)}")
    rows, cols = obj["rows"], obj["cols"]
    if not (isinstance(rows, int) and isinstance(cols, int) and rows >= 1 and cols >= 1):
        raise ValueError(f"matrix JSON has invalid shape {rows!r} x {cols!r}")
    data = obj["data"]
    if not isinstance(data, list) or len(data) != rows * cols:
        raise ValueError(f"matrix JSON data must list {rows * cols} [re, im] pairs")
    out = np.empty(rows * cols, dtype=complex)
    for i, pair in enumerate(data):
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ValueError(f"matrix JSON entry {i} is not an [re, im] pair")
        out[i] = complex(float(pair[0]), float(pair[1]))
    return as_matrix(out.reshape(rows, cols))
