"""Haar-distributed orthogonal and unitary matrices.

Sampling is Gram-Schmidt applied to an i.i.d. Gaussian matrix. With the
positive-diagonal convention in :func:`eigenbridge.linalg.gram_schmidt`
the resulting Q is exactly Haar distributed on the relevant group.
"""

from __future__ import annotations

import numpy as np

from .errors import BadParam
from .linalg import SpectralDecomposition, gram_schmidt
from .rand import ComplexGaussian, RealGaussian, RngStream, sample_matrix

__all__ = ["haar_unitary", "haar_orthogonal", "haar_columns", "randomize_eigenspaces"]


def haar_unitary(n: int, rng: RngStream) -> np.ndarray:
    """Sample an n x n Haar unitary matrix."""
    z = sample_matrix(ComplexGaussian(), n, n, rng)
    return gram_schmidt(z).q


def haar_orthogonal(n: int, rng: RngStream) -> np.ndarray:
    """Sample an n x n Haar orthogonal matrix."""
    z = sample_matrix(RealGaussian(), n, n, rng)
    return gram_schmidt(z).q


def haar_columns(n: int, m: int, field: str, rng: RngStream) -> np.ndarray:
    """Sample the first m columns of a Haar matrix without forming the rest.

    Gram-Schmidt on an n x m Gaussian block has the same joint law as the
    leading m columns of a full Haar sample, at O(n m^2) cost.
    """
    if field not in ("real", "complex"):
        raise BadParam(f"field must be 'real' or 'complex', got {field!r}")
    if not 1 <= m <= n:
        raise BadParam(f"need 1 <= m <= n, got m={m}, n={n}")
    law = ComplexGaussian() if field == "complex" else RealGaussian()
    z = sample_matrix(law, n, m, rng)
    return gram_schmidt(z).q


def _group_blocks(eigenvalues: np.ndarray, gap_tol: float) -> list[slice]:
    """Split indices into runs of near-equal eigenvalues.

    Consecutive eigenvalues belong to one run when their gap is below
    gap_tol * (1 + max(|w_i|, |w_{i+1}|)).
    """
    n = len(eigenvalues)
    blocks = []
    start = 0
    for i in range(n - 1):
        scale = 1.0 + max(abs(eigenvalues[i]), abs(eigenvalues[i + 1]))
        if eigenvalues[i + 1] - eigenvalues[i] >= gap_tol * scale:
            blocks.append(slice(start, i + 1))
            start = i + 1
    blocks.append(slice(start, n))
    return blocks


def randomize_eigenspaces(
    d: SpectralDecomposition, gap_tol: float = 1e-9, rng: RngStream | None = None
) -> SpectralDecomposition:
    """Restore the distributional symmetry a deterministic eigensolver breaks.

    Within each block of (numerically) repeated eigenvalues the returned
    columns are the old ones multiplied by an independent Haar matrix of the
    block size; isolated columns get a uniform random sign (real field) or
    phase (complex field). Eigenvalues are unchanged, so the reconstruction
    Q diag(w) Q^* is preserved up to roundoff.
    """
    if rng is None:
        raise BadParam("an RngStream is required")
    if not (0 < gap_tol < 1):
        raise BadParam("gap_tol must lie in (0, 1)")
    vectors = d.eigenvectors.copy()
    is_complex = d.field == "complex"
    gen = rng.generator
    for block in _group_blocks(d.eigenvalues, gap_tol):
        width = block.stop - block.start
        if width == 1:
            if is_complex:
                phase = np.exp(2j * np.pi * gen.random())
                vectors[:, block.start] *= phase
            else:
                vectors[:, block.start] *= float(gen.integers(0, 2) * 2 - 1)
        else:
            rot = haar_unitary(width, rng) if is_complex else haar_orthogonal(width, rng)
            vectors[:, block] = vectors[:, block] @ rot
    return SpectralDecomposition(eigenvalues=d.eigenvalues, eigenvectors=vectors)
