"""Rank-one additive perturbation: detection threshold, top eigenvalue,
eigenvector overlap, and projection statistics.

The top eigenvalue of B = theta v v^* + S above the spectrum of S solves
the secular equation v^* (lam I - S)^{-1} v = 1/theta, and the same
equation against the limit law F yields the asymptotic location. Both are
solved by bisection with bracket validation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadTheta, NoRoot, NotOrthogonal, NotUnit
from .linalg import SpectralDecomposition, resolvent_quadratic_form
from .mp import resolvent_moment

__all__ = [
    "SpikeSolution",
    "build_spiked",
    "largest_eig_secular",
    "top_eigvec_resolvent",
    "detectability_threshold",
    "theoretical_solution",
    "projection_stat",
]

_UNIT_TOL = 1e-10
_ORTH_TOL = 1e-10
_RESIDUAL_TOL = 1e-12
_MAX_BISECT = 200
_EDGE_PROBE = 1e-8
_EDGE_STABILITY = 1e-4


@dataclass(frozen=True)
class SpikeSolution:
    """Limit description of the perturbed top eigenvalue.

    ``lambda1``, ``limit_variance`` and ``limit_norm`` are only defined in
    the supercritical regime and are None otherwise.
    """

    regime: str
    theta: float
    threshold_theta_c: float
    lambda1: float | None = None
    limit_variance: float | None = None
    limit_norm: float | None = None

    @property
    def is_supercritical(self) -> bool:
        return self.regime == "supercritical"


def build_spiked(s, theta: float, v) -> np.ndarray:
    """Form theta v v^* + S, symmetrized to machine precision."""
    if not (np.isfinite(theta) and theta > 0):
        raise BadTheta(f"theta must be positive, got {theta}")
    v = np.asarray(v)
    if abs(np.linalg.norm(v) - 1.0) >= _UNIT_TOL:
        raise NotUnit(f"v has norm {float(np.linalg.norm(v))}")
    s = np.asarray(s)
    b = theta * np.outer(v, np.conj(v)) + s
    return (b + b.conj().T) / 2.0


def largest_eig_secular(d: SpectralDecomposition, theta: float, v) -> float:
    """Top eigenvalue of theta v v^* + S from the spectral data of S.

    Bisection on (lambda_max + eps, lambda_max + theta + 1], with the upper
    bracket doubled if the root is not yet enclosed, down to a residual of
    1e-12 in the secular function.

    Raises
    ------
    NoRoot
        When v carries too little weight near the top of the spectrum for
        a root above lambda_max to exist numerically.
    """
    if not (np.isfinite(theta) and theta > 0):
        raise BadTheta(f"theta must be positive, got {theta}")
    v = np.asarray(v)
    weights = np.abs(d.eigenvectors.conj().T @ v) ** 2
    w = d.eigenvalues
    lam_max = d.lambda_max
    target = 1.0 / theta

    def f(lam: float) -> float:
        return float(np.sum(weights / (lam - w)))

    lo = lam_max + max(1e-13, 1e-12 * (1.0 + abs(lam_max)))
    if f(lo) <= target:
        raise NoRoot("secular function stays below 1/theta above the spectrum")
    hi = lam_max + theta + 1.0
    while f(hi) >= target:
        hi = lam_max + 2.0 * (hi - lam_max)
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # bracket narrowed to float resolution
        fm = f(mid)
        if abs(fm - target) <= _RESIDUAL_TOL:
            return mid
        if fm > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def top_eigvec_resolvent(d: SpectralDecomposition, lam: float, v) -> np.ndarray:
    """Unnormalized top eigenvector direction (lam I - S)^{-1} v."""
    v = np.asarray(v)
    coeffs = d.eigenvectors.conj().T @ v
    return d.eigenvectors @ (coeffs / (lam - d.eigenvalues))


def detectability_threshold(law) -> float:
    """Critical strength 1 / lim of the resolvent moment at the upper edge.

    The limit is probed at edge + 1e-8 and edge + 2e-8. If the two probes
    disagree the edge integral diverges (a law with an atom at its top),
    and the threshold is zero: every positive strength separates.
    """
    edge = law.upper_edge
    g1 = law.resolvent_moment(edge + _EDGE_PROBE, 1)
    g2 = law.resolvent_moment(edge + 2.0 * _EDGE_PROBE, 1)
    if abs(g1 - g2) > _EDGE_STABILITY * max(1.0, abs(g1)):
        return 0.0
    return 1.0 / g1


def theoretical_solution(law, theta: float) -> SpikeSolution:
    """Limit regime and, when supercritical, location and overlap moments.

    In the supercritical regime lambda1 solves
    ``resolvent_moment(law, lambda1, 1) == 1/theta`` above the upper edge;
    the reported variance is the second resolvent moment minus 1/theta^2
    and the reported norm is the square root of the second moment.
    """
    if not (np.isfinite(theta) and theta > 0):
        raise BadTheta(f"theta must be positive, got {theta}")
    threshold = detectability_threshold(law)
    if theta <= threshold:
        return SpikeSolution(regime="subcritical", theta=theta, threshold_theta_c=threshold)
    edge = law.upper_edge
    target = 1.0 / theta
    lo = edge + max(1e-9, _EDGE_PROBE * (1.0 + abs(edge)))
    if law.resolvent_moment(lo, 1) <= target:
        # Strength is inside the threshold's numerical fuzz; treat as subcritical.
        return SpikeSolution(regime="subcritical", theta=theta, threshold_theta_c=threshold)
    hi = edge + theta + 1.0
    while law.resolvent_moment(hi, 1) >= target:
        hi = edge + 2.0 * (hi - edge)
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = law.resolvent_moment(mid, 1)
        if abs(fm - target) <= 1e-11:
            lo = hi = mid
            break
        if fm > target:
            lo = mid
        else:
            hi = mid
    lam1 = 0.5 * (lo + hi)
    m2 = law.resolvent_moment(lam1, 2)
    variance = m2 - target**2
    if variance < 1e-10 * m2:
        # Below the root solver's own resolution; the limit is degenerate.
        variance = 0.0
    return SpikeSolution(
        regime="supercritical",
        theta=theta,
        threshold_theta_c=threshold,
        lambda1=lam1,
        limit_variance=variance,
        limit_norm=float(np.sqrt(m2)),
    )


def projection_stat(d: SpectralDecomposition, lam: float, v, x, field: str):
    """Scaled resolvent projection of a probe direction x against v.

    Returns sqrt(2n) x^* (lam I - S)^{-1} v in the complex field and
    sqrt(n) x^T (lam I - S)^{-1} v in the real field. x must be a unit
    vector orthogonal to v.
    """
    if field not in ("real", "complex"):
        raise ValueError(f"field must be 'real' or 'complex', got {field!r}")
    v = np.asarray(v)
    x = np.asarray(x)
    if abs(np.linalg.norm(x) - 1.0) >= _UNIT_TOL:
        raise NotUnit(f"x has norm {float(np.linalg.norm(x))}")
    if abs(np.vdot(x, v)) >= _ORTH_TOL:
        raise NotOrthogonal(f"|<x, v>| = {float(abs(np.vdot(x, v)))}")
    n = d.n
    scale = np.sqrt(2.0 * n) if field == "complex" else np.sqrt(n)
    return scale * resolvent_quadratic_form(d, x, v, lam, 1)
