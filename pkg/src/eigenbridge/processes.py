"""Partial-sum step processes built from orthonormal vector coordinates.

Each constructor turns the coordinates of one or two unit vectors into a
cadlag step function on [0, 1], normalized so that the path starts and
ends at zero and, for vectors with the right distribution, converges
weakly to a Brownian bridge.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, NotOrthogonal, NotUnit
from .linalg import SpectralDecomposition

__all__ = [
    "StepProcess",
    "TimeChangedProcess",
    "diag_process_complex",
    "diag_process_real",
    "cross_process_complex",
    "cross_process_real",
    "time_change",
    "weighted_spectral_cdf",
]

_UNIT_TOL = 1e-10
_ORTH_TOL = 1e-10
# Sequential float summation is fine at bridge scale; switch to compensated
# accumulation once paths get long enough for drift to matter.
_KAHAN_MIN_N = 4096


@dataclass(frozen=True)
class StepProcess:
    """Step function on [0, 1] with values pinned at the endpoints.

    ``values`` has length n + 1; entry j is the path value on
    [j/n, (j+1)/n). Evaluation at time t uses index floor(n t).
    """

    values: np.ndarray
    label: str = ""

    @property
    def n(self) -> int:
        return len(self.values) - 1

    def evaluate(self, t: float) -> float:
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"t={t} outside [0, 1]")
        return float(self.values[min(math.floor(self.n * t), self.n)])

    def sup_abs(self) -> float:
        return float(np.abs(self.values).max())

    def write_csv(self, path) -> None:
        """Write rows (index, t=index/n, value) with a header."""
        n = self.n
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "t", "value"])
            for j, v in enumerate(self.values):
                writer.writerow([j, f"{j / n:.17g}", f"{v:.17g}"])


@dataclass(frozen=True)
class TimeChangedProcess:
    """Path reindexed by spectral location instead of uniform time.

    ``values`` has length n + 1; evaluation at x returns the entry whose
    index counts the eigenvalues <= x, so the path is constant at its
    pinned value for x beyond the top eigenvalue.
    """

    eigenvalues: np.ndarray
    values: np.ndarray

    def evaluate(self, x: float) -> float:
        k = int(np.searchsorted(self.eigenvalues, x, side="right"))
        return float(self.values[k])


def _check_unit(v: np.ndarray, name: str) -> None:
    nrm = float(np.linalg.norm(v))
    if abs(nrm - 1.0) >= _UNIT_TOL:
        raise NotUnit(f"{name} has norm {nrm}")


def _check_orthogonal(u: np.ndarray, w: np.ndarray) -> None:
    ip = abs(np.vdot(u, w))
    if ip >= _ORTH_TOL:
        raise NotOrthogonal(f"|<u, w>| = {float(ip)}")


def _pinned_cumsum(increments: np.ndarray) -> np.ndarray:
    """Prefix sums with a leading zero, compensated for long inputs."""
    n = len(increments)
    if n < _KAHAN_MIN_N:
        body = np.cumsum(increments)
    else:
        body = np.empty(n, dtype=increments.dtype)
        total = increments.dtype.type(0)
        comp = increments.dtype.type(0)
        for i in range(n):
            y = increments[i] - comp
            t = total + y
            comp = (t - total) - y
            total = t
            body[i] = total
    return np.concatenate(([increments.dtype.type(0)], body))


def diag_process_complex(u, label: str = "") -> StepProcess:
    """sqrt(n) * partial sums of (|u_i|^2 - 1/n) for a unit vector u."""
    u = np.asarray(u)
    n = len(u)
    _check_unit(u, "u")
    inc = np.abs(u) ** 2 - 1.0 / n
    return StepProcess(values=np.sqrt(n) * _pinned_cumsum(inc), label=label)


def diag_process_real(y, label: str = "") -> StepProcess:
    """sqrt(n/2) * partial sums of (y_i^2 - 1/n) for a real unit vector y."""
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    _check_unit(y, "y")
    inc = y**2 - 1.0 / n
    return StepProcess(values=np.sqrt(n / 2.0) * _pinned_cumsum(inc), label=label)


def cross_process_complex(u, w, label: str = "") -> tuple[StepProcess, StepProcess]:
    """Real and imaginary parts of sqrt(2n) * partial sums of conj(u_i) w_i.

    u and w must be orthogonal; both returned paths are pinned at zero.
    """
    u = np.asarray(u)
    w = np.asarray(w)
    if len(u) != len(w):
        raise LengthMismatch(f"lengths differ: {len(u)} vs {len(w)}")
    _check_orthogonal(u, w)
    n = len(u)
    inc = np.conj(u) * w
    body = _pinned_cumsum(inc.astype(np.complex128))
    scale = np.sqrt(2.0 * n)
    re = StepProcess(values=scale * body.real, label=label + ":re" if label else "")
    im = StepProcess(values=scale * body.imag, label=label + ":im" if label else "")
    return re, im


def cross_process_real(y1, y2, label: str = "") -> StepProcess:
    """sqrt(n) * partial sums of y1_i y2_i for orthogonal real unit vectors."""
    y1 = np.asarray(y1, dtype=np.float64)
    y2 = np.asarray(y2, dtype=np.float64)
    if len(y1) != len(y2):
        raise LengthMismatch(f"lengths differ: {len(y1)} vs {len(y2)}")
    _check_orthogonal(y1, y2)
    n = len(y1)
    return StepProcess(values=np.sqrt(n) * _pinned_cumsum(y1 * y2), label=label)


def time_change(p: StepProcess, eigenvalues) -> TimeChangedProcess:
    """Reindex a step process by the given nondecreasing eigenvalues."""
    w = np.asarray(eigenvalues, dtype=np.float64)
    if len(w) != p.n:
        raise LengthMismatch(f"need {p.n} eigenvalues, got {len(w)}")
    if np.any(np.diff(w) < 0):
        raise ValueError("eigenvalues must be nondecreasing")
    return TimeChangedProcess(eigenvalues=w, values=p.values)


def weighted_spectral_cdf(d: SpectralDecomposition, v) -> TimeChangedProcess:
    """Cumulative eigenvector mass of a unit vector v along the spectrum.

    At x the value is the sum of |<u_k, v>|^2 over eigenvalues <= x; it
    increases from 0 to 1 like a distribution function.
    """
    v = np.asarray(v)
    _check_unit(v, "v")
    weights = np.abs(d.eigenvectors.conj().T @ v) ** 2
    values = np.concatenate(([0.0], np.cumsum(weights)))
    return TimeChangedProcess(eigenvalues=d.eigenvalues, values=values)
