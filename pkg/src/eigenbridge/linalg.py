"""Dense linear algebra kernels with deterministic output conventions.

Matrices are plain numpy arrays; the scalar field is carried by the dtype
(float64 or complex128). Results that bundle several arrays are returned
as small frozen dataclasses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NotSymmetric, PoleTooClose, RankDeficient

__all__ = [
    "QrFactors",
    "SpectralDecomposition",
    "gram_schmidt",
    "sym_eig",
    "resolvent_quadratic_form",
]

_RANK_TOL = 1e-12
_SYM_TOL = 1e-10
_POLE_MARGIN = 1e-14


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m)
    if a.ndim != 2:
        raise ValueError("expected a 2-d array")
    dtype = np.complex128 if np.iscomplexobj(a) else np.float64
    a = np.asarray(a, dtype=dtype)
    if not np.isfinite(a).all():
        raise ValueError("matrix entries must be finite")
    return a


@dataclass(frozen=True)
class QrFactors:
    """Thin QR pair with r upper triangular and real positive diagonal."""

    q: np.ndarray
    r: np.ndarray

    @property
    def field(self) -> str:
        return "complex" if np.iscomplexobj(self.q) else "real"


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (real, nondecreasing) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def field(self) -> str:
        return "complex" if np.iscomplexobj(self.eigenvectors) else "real"

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    def reconstruct(self) -> np.ndarray:
        """Return Q diag(w) Q^*."""
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.conj().T


def gram_schmidt(m) -> QrFactors:
    """Orthonormalize the columns of ``m`` by modified Gram-Schmidt.

    Parameters
    ----------
    m : array_like, shape (rows, cols), cols <= rows
        Columns must be numerically independent.

    Returns
    -------
    QrFactors
        ``q`` has orthonormal columns, ``r`` is upper triangular with
        strictly positive diagonal, and ``q @ r`` reconstructs ``m``.

    Raises
    ------
    RankDeficient
        If some column's residual norm falls below 1e-12 times its
        original norm.
    """
    a = _as_matrix(m)
    rows, cols = a.shape
    if cols > rows:
        raise ValueError(f"need cols <= rows, got {a.shape}")
    q = a.copy()
    r = np.zeros((cols, cols), dtype=a.dtype)
    for k in range(cols):
        v = q[:, k]
        col_norm = np.linalg.norm(a[:, k])
        for j in range(k):
            c = np.vdot(q[:, j], v)  # conjugates the first argument
            r[j, k] = c
            v -= c * q[:, j]
        nrm = np.linalg.norm(v)
        if nrm <= _RANK_TOL * col_norm:
            raise RankDeficient(f"column {k} is dependent on earlier columns")
        # One reorthogonalization pass; a single sweep can leave O(kappa eps)
        # in the off-diagonal Gram entries on ill-conditioned input.
        for j in range(k):
            c = np.vdot(q[:, j], v)
            r[j, k] += c
            v -= c * q[:, j]
        nrm = np.linalg.norm(v)
        if nrm <= _RANK_TOL * col_norm:
            raise RankDeficient(f"column {k} is dependent on earlier columns")
        r[k, k] = nrm
        v /= nrm
    return QrFactors(q=q, r=r)


def _fix_column_phases(vectors: np.ndarray) -> np.ndarray:
    """Scale each column so its largest-magnitude entry is real positive.

    Ties in magnitude resolve to the lowest row index (argmax convention),
    which makes repeated calls on identical input bit-for-bit identical.
    """
    idx = np.argmax(np.abs(vectors), axis=0)
    lead = vectors[idx, np.arange(vectors.shape[1])]
    if np.iscomplexobj(vectors):
        mag = np.abs(lead)
        phase = np.where(mag > 0, lead / np.where(mag > 0, mag, 1.0), 1.0)
        return vectors * np.conj(phase)
    sign = np.where(lead < 0, -1.0, 1.0)
    return vectors * sign


def sym_eig(s) -> SpectralDecomposition:
    """Full eigendecomposition of a symmetric or Hermitian matrix.

    Eigenvalues come back sorted nondecreasing. Eigenvector signs follow a
    fixed convention (largest-magnitude entry real positive) so the output
    is deterministic for a given input.

    Raises
    ------
    NotSymmetric
        If max |S - S^*| >= 1e-10 * (1 + max |S|).
    NoConvergence
        If the underlying iteration fails.
    """
    a = _as_matrix(s)
    if a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"matrix is not square: {a.shape}")
    scale = 1.0 + (np.abs(a).max() if a.size else 0.0)
    if a.size and np.abs(a - a.conj().T).max() >= _SYM_TOL * scale:
        raise NotSymmetric("matrix deviates from its conjugate transpose")
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return SpectralDecomposition(eigenvalues=w, eigenvectors=_fix_column_phases(v))


def resolvent_quadratic_form(d: SpectralDecomposition, x, v, lam: float, power: int = 1):
    """Evaluate x^* (lam I - S)^(-power) v through the eigendecomposition of S.

    Parameters
    ----------
    d : SpectralDecomposition
    x, v : array_like vectors
    lam : float
        Must exceed the largest eigenvalue by more than 1e-14.
    power : int
        Resolvent power, >= 1.

    Returns
    -------
    float or complex scalar, matching the field of the inputs.
    """
    if power < 1:
        raise ValueError("power must be a positive integer")
    if lam - d.lambda_max < _POLE_MARGIN:
        raise PoleTooClose(f"lam={lam} too close to lambda_max={d.lambda_max}")
    cx = d.eigenvectors.conj().T @ np.asarray(x)
    cv = d.eigenvectors.conj().T @ np.asarray(v)
    out = np.sum(np.conj(cx) * cv / (lam - d.eigenvalues) ** power)
    if np.iscomplexobj(out):
        return complex(out)
    return float(out)
