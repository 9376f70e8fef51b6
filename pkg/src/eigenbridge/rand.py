"""Standardized entry laws, reproducible random streams, and sign vectors.

Streams are counter-based (Philox) and keyed by (master_seed, stream_index),
so replicate k of a run always sees the same draws no matter how many
worker threads are active or in what order replicates complete.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadDimension, BadParam

__all__ = [
    "RngStream",
    "RealGaussian",
    "ComplexGaussian",
    "Rademacher",
    "SymmetricTwoPoint",
    "law_from_name",
    "sample_matrix",
    "sign_vector_family",
]


@dataclass
class RngStream:
    """One independent random stream out of a splittable family.

    Rebuilding a stream with the same (master_seed, stream_index) replays
    the identical sequence. Gaussians come from the generator's ziggurat
    transform of the Philox bit stream, fixed for a given numpy build.
    """

    master_seed: int
    stream_index: int
    _gen: np.random.Generator | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise BadParam("master_seed must fit in an unsigned 64-bit integer")
        if self.stream_index < 0:
            raise BadParam("stream_index must be nonnegative")

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.stream_index,))
            self._gen = np.random.Generator(np.random.Philox(seq))
        return self._gen


class RealGaussian:
    """Standard normal entries: mean 0, variance 1, fourth moment 3."""

    kind = "real-gaussian"
    is_complex = False
    fourth_moment = 3.0

    def sample(self, rng: RngStream, rows: int, cols: int) -> np.ndarray:
        return rng.generator.standard_normal((rows, cols))


class ComplexGaussian:
    """Complex entries with i.i.d. N(0, 1/2) real and imaginary parts.

    E|v|^2 = 1 and E|v|^4 = 2.
    """

    kind = "complex-gaussian"
    is_complex = True
    fourth_moment = 2.0

    def sample(self, rng: RngStream, rows: int, cols: int) -> np.ndarray:
        parts = rng.generator.standard_normal((2, rows, cols))
        return np.sqrt(0.5) * (parts[0] + 1j * parts[1])


class Rademacher:
    """Symmetric signs +1/-1: variance 1, fourth moment 1."""

    kind = "rademacher"
    is_complex = False
    fourth_moment = 1.0

    def sample(self, rng: RngStream, rows: int, cols: int) -> np.ndarray:
        bits = rng.generator.integers(0, 2, size=(rows, cols))
        return bits.astype(np.float64) * 2.0 - 1.0


@dataclass(frozen=True)
class SymmetricTwoPoint:
    """Sparse sign law: +-scale with mass 1/(2 scale^2) each, else 0.

    Standardized (variance 1) for any scale >= 1; fourth moment scale^2.
    scale = 1 reduces to Rademacher.
    """

    scale: float = 1.0
    kind = "two-point"
    is_complex = False

    def __post_init__(self):
        if not np.isfinite(self.scale) or self.scale < 1.0:
            raise BadParam("scale must be >= 1 so the hit probability is <= 1")

    @property
    def fourth_moment(self) -> float:
        return self.scale**2

    def sample(self, rng: RngStream, rows: int, cols: int) -> np.ndarray:
        p = 1.0 / self.scale**2
        u = rng.generator.random((rows, cols))
        out = np.zeros((rows, cols))
        out[u < 0.5 * p] = -self.scale
        out[(u >= 0.5 * p) & (u < p)] = self.scale
        return out


_LAW_NAMES = {
    "gaussian": RealGaussian,
    "real-gaussian": RealGaussian,
    "complex-gaussian": ComplexGaussian,
    "rademacher": Rademacher,
}


def law_from_name(name: str):
    """Map a CLI-style law name to a law instance.

    ``two-point:SCALE`` selects the sparse sign law with the given scale.
    """
    key = name.strip().lower()
    if key in _LAW_NAMES:
        return _LAW_NAMES[key]()
    if key.startswith("two-point"):
        _, _, arg = key.partition(":")
        try:
            scale = float(arg) if arg else 1.0
        except ValueError:
            raise BadParam(f"bad two-point scale {arg!r}") from None
        return SymmetricTwoPoint(scale=scale)
    raise BadParam(f"unknown entry law {name!r}")


def sample_matrix(law, rows: int, cols: int, rng: RngStream) -> np.ndarray:
    """Draw a rows x cols matrix of i.i.d. entries from ``law``."""
    if rows < 1 or cols < 1:
        raise BadDimension("rows and cols must be positive")
    return law.sample(rng, rows, cols)


def sign_vector_family(n: int, m: int) -> list[np.ndarray]:
    """First m rows of the 2^m Sylvester sign pattern, tiled to length n.

    Returns m orthonormal vectors with entries +-1/sqrt(n). Requires
    n to be a positive multiple of 2^m.
    """
    if m < 1:
        raise BadDimension("m must be a positive integer")
    size = 1 << m
    if n < size or n % size != 0:
        raise BadDimension(f"n={n} must be a positive multiple of 2^m={size}")
    h = np.array([[1]], dtype=np.int64)
    for _ in range(m):
        h = np.block([[h, h], [h, -h]])
    reps = n // size
    return [np.tile(h[k], reps) / np.sqrt(n) for k in range(m)]
