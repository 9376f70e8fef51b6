"""Distributional checks used to verify simulation output.

Every check returns a :class:`TestReport` whose ``passed`` flag is exactly
``statistic <= threshold``, so reports can be serialized and re-audited
without rerunning the experiment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadVariance, LengthMismatch, TooFewPaths
from .processes import StepProcess

__all__ = [
    "TestReport",
    "kolmogorov_cdf",
    "ks_distance",
    "weighted_ks_distance",
    "bridge_covariance_check",
    "covariance_statistic",
    "cross_independence_check",
    "gaussian_moment_check",
]

_SERIES_CUTOFF = 1e-12
_MIN_PATHS = 500


@dataclass(frozen=True)
class TestReport:
    """One named check: passes iff statistic <= threshold."""

    name: str
    statistic: float
    threshold: float
    replicates: int
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "replicates": self.replicates,
            "pass": self.passed,
            "details": self.details,
        }


def make_report(name: str, statistic: float, threshold: float, replicates: int, **details) -> TestReport:
    return TestReport(
        name=name,
        statistic=float(statistic),
        threshold=float(threshold),
        replicates=int(replicates),
        passed=bool(statistic <= threshold),
        details=details,
    )


def kolmogorov_cdf(x: float) -> float:
    """Distribution function of the supremum of a standard Brownian bridge.

    1 - 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 x^2), truncated once a term
    drops below 1e-12.
    """
    if x <= 0.0:
        return 0.0
    total = 0.0
    sign = 1.0
    j = 1
    while True:
        term = math.exp(-2.0 * j * j * x * x)
        if term < _SERIES_CUTOFF or j > 100000:
            break
        total += sign * term
        sign = -sign
        j += 1
    return min(1.0, max(0.0, 1.0 - 2.0 * total))


def ks_distance(samples, cdf) -> float:
    """Sup distance between the empirical CDF of ``samples`` and ``cdf``."""
    s = np.sort(np.asarray(samples, dtype=np.float64))
    n = len(s)
    if n == 0:
        raise ValueError("need at least one sample")
    vals = np.array([cdf(x) for x in s])
    upper = np.abs(np.arange(1, n + 1) / n - vals).max()
    lower = np.abs(np.arange(0, n) / n - vals).max()
    return float(max(upper, lower))


def weighted_ks_distance(locations, masses, cdf) -> float:
    """Sup distance between a weighted empirical CDF and ``cdf``.

    The weighted CDF jumps by masses[i] at locations[i]; tied locations
    are merged into one jump. The sup over the line is attained at the
    jump points from one side or the other; the left-side comparison
    evaluates ``cdf`` just below the jump (relative offset 1e-9) so that
    reference laws with atoms at the same points are scored correctly.
    """
    loc = np.asarray(locations, dtype=np.float64)
    mas = np.asarray(masses, dtype=np.float64)
    if loc.shape != mas.shape:
        raise LengthMismatch("locations and masses must match")
    uniq, inverse = np.unique(loc, return_inverse=True)
    merged = np.zeros(len(uniq))
    np.add.at(merged, inverse, mas)
    cum = np.cumsum(merged)
    right = np.array([cdf(x) for x in uniq])
    left = np.array([cdf(x - 1e-9 * (1.0 + abs(x))) for x in uniq])
    upper = np.abs(cum - right).max()
    lower = np.abs(np.concatenate(([0.0], cum[:-1])) - left).max()
    return float(max(upper, lower))


def _normalize_grid(grid) -> list[tuple[float, float]]:
    out = []
    for s, t in grid:
        if not (0.0 <= s <= 1.0 and 0.0 <= t <= 1.0):
            raise ValueError(f"grid point ({s}, {t}) outside the unit square")
        out.append((min(s, t), max(s, t)))
    return out


def covariance_statistic(samples_at_time: dict, grid) -> float:
    """Max deviation of empirical covariances from s(1 - t) over the grid.

    ``samples_at_time`` maps a time point to the array of path values at
    that time across replicates.
    """
    worst = 0.0
    for s, t in _normalize_grid(grid):
        a = np.asarray(samples_at_time[s], dtype=np.float64)
        b = np.asarray(samples_at_time[t], dtype=np.float64)
        if len(a) != len(b):
            raise LengthMismatch("sample arrays differ in length")
        emp = float(np.mean(a * b) - np.mean(a) * np.mean(b))
        emp *= len(a) / (len(a) - 1)  # unbiased normalization
        worst = max(worst, abs(emp - s * (1.0 - t)))
    return worst


def bridge_covariance_check(paths: list[StepProcess], grid, threshold: float) -> TestReport:
    """Compare path covariances at grid times against the bridge kernel."""
    if len(paths) < _MIN_PATHS:
        raise TooFewPaths(f"need at least {_MIN_PATHS} paths, got {len(paths)}")
    n = paths[0].n
    if any(p.n != n for p in paths):
        raise LengthMismatch("paths have mixed lengths")
    pairs = _normalize_grid(grid)
    times = sorted({u for st in pairs for u in st})
    samples = {u: np.array([p.evaluate(u) for p in paths]) for u in times}
    stat = covariance_statistic(samples, pairs)
    return make_report("bridge-covariance", stat, threshold, len(paths), grid_points=len(pairs))


def cross_independence_check(pairs, threshold: float | None = None) -> TestReport:
    """Max absolute sample correlation over paired sample arrays.

    Default threshold is 4/sqrt(R), around 4 sigma for independent data.
    """
    if not pairs:
        raise ValueError("need at least one pair")
    worst = 0.0
    length = None
    for a, b in pairs:
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if len(a) != len(b):
            raise LengthMismatch("paired arrays differ in length")
        if length is None:
            length = len(a)
        elif len(a) != length:
            raise LengthMismatch("pairs have mixed lengths")
        sa, sb = a.std(), b.std()
        corr = 0.0 if sa == 0.0 or sb == 0.0 else float(np.corrcoef(a, b)[0, 1])
        worst = max(worst, abs(corr))
    if threshold is None:
        threshold = 4.0 / math.sqrt(length)
    return make_report("cross-independence", worst, threshold, length, n_pairs=len(pairs))


def gaussian_moment_check(samples, target_variance: float, variance_tol: float = 0.1) -> TestReport:
    """Check mean, variance, and excess kurtosis against N(0, target_variance).

    The statistic is the worst of the three deviations, each scaled by its
    own allowance, so the report passes iff statistic <= 1.
    """
    x = np.asarray(samples, dtype=np.float64)
    r = len(x)
    if r < 2:
        raise ValueError("need at least two samples")
    if not np.isfinite(target_variance) or target_variance < 0.0:
        raise BadVariance(f"target variance must be nonnegative, got {target_variance}")
    if target_variance == 0.0:
        # Degenerate target: pass only when the sample is identically zero.
        stat = 0.0 if np.abs(x).max() == 0.0 else np.inf
        return make_report("gaussian-moments", stat, 1.0, r, degenerate=True)
    mean = float(x.mean())
    var = float(x.var(ddof=1))
    centered = x - mean
    m2 = float(np.mean(centered**2))
    kurt = float(np.mean(centered**4) / m2**2 - 3.0) if m2 > 0 else 0.0
    mean_allow = 4.0 * math.sqrt(target_variance / r)
    kurt_allow = 10.0 / math.sqrt(r)
    stat = max(
        abs(mean) / mean_allow,
        abs(var / target_variance - 1.0) / variance_tol,
        abs(kurt) / kurt_allow,
    )
    return make_report(
        "gaussian-moments",
        stat,
        1.0,
        r,
        mean=mean,
        variance=var,
        target_variance=target_variance,
        excess_kurtosis=kurt,
        variance_tol=variance_tol,
    )
