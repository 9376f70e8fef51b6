"""Limit spectral laws: Marchenko-Pastur and discrete atomic laws.

The square-root edge singularity of the Marchenko-Pastur density is
removed before quadrature by substituting x = a + (b - a) sin^2(phi),
which makes the transformed integrand analytic on [0, pi/2]. Integrals
are then evaluated adaptively to 1e-12 absolute tolerance, comfortably
inside the 1e-10 contract.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import BadParam, PoleTooClose

__all__ = [
    "MarchenkoPastur",
    "DiscreteLaw",
    "mp_support_edges",
    "mp_density",
    "mp_cdf",
    "resolvent_moment",
]

_QUAD_ABS_TOL = 1e-12
_EDGE_MARGIN = 1e-12


def mp_support_edges(y: float) -> tuple[float, float]:
    """Bulk support edges ((1 - sqrt(y))^2, (1 + sqrt(y))^2)."""
    if not (np.isfinite(y) and y > 0):
        raise BadParam(f"aspect ratio y must be positive, got {y}")
    ry = np.sqrt(y)
    return float((1.0 - ry) ** 2), float((1.0 + ry) ** 2)


@dataclass(frozen=True)
class MarchenkoPastur:
    """Marchenko-Pastur law with aspect ratio y > 0.

    For y > 1 the law has a point mass 1 - 1/y at zero in addition to the
    absolutely continuous bulk on (a, b).
    """

    y: float

    def __post_init__(self):
        mp_support_edges(self.y)  # validates y

    @property
    def edges(self) -> tuple[float, float]:
        return mp_support_edges(self.y)

    @property
    def atom_mass(self) -> float:
        return max(0.0, 1.0 - 1.0 / self.y)

    @property
    def upper_edge(self) -> float:
        return self.edges[1]

    def density(self, x: float) -> float:
        """Bulk density sqrt((x - a)(b - x)) / (2 pi y x), zero off (a, b)."""
        a, b = self.edges
        if x <= a or x >= b:
            return 0.0
        return float(np.sqrt((x - a) * (b - x)) / (2.0 * np.pi * self.y * x))

    def _bulk_integral(self, weight, phi_hi: float) -> float:
        """Integrate weight(x) against the bulk density, in the phi variable."""
        a, b = self.edges
        span = b - a
        coeff = span**2 / (np.pi * self.y)
        if a == 0.0:
            # Exact cancellation of sin^2 against x = span sin^2(phi).
            def f(phi):
                s, c = np.sin(phi), np.cos(phi)
                return span / (np.pi * self.y) * c * c * weight(span * s * s)

        else:

            def f(phi):
                s, c = np.sin(phi), np.cos(phi)
                x = a + span * s * s
                return coeff * s * s * c * c / x * weight(x)

        val, _err = quad(f, 0.0, phi_hi, epsabs=_QUAD_ABS_TOL, epsrel=1e-12, limit=200)
        return float(val)

    def cdf(self, x: float) -> float:
        a, b = self.edges
        if x < 0.0:
            return 0.0
        if x >= b:
            return 1.0
        if x <= a:
            return self.atom_mass
        phi_hi = float(np.arcsin(min(1.0, np.sqrt((x - a) / (b - a)))))
        return min(1.0, self.atom_mass + self._bulk_integral(lambda _: 1.0, phi_hi))

    def resolvent_moment(self, lam: float, power: int = 1) -> float:
        """Integral of (lam - x)^(-power) dF(x) for lam above the upper edge."""
        _check_power(power)
        b = self.upper_edge
        if lam - b <= _EDGE_MARGIN:
            raise PoleTooClose(f"lam={lam} must exceed the upper edge {b}")
        bulk = self._bulk_integral(lambda x: (lam - x) ** (-power), np.pi / 2.0)
        return self.atom_mass / lam**power + bulk


@dataclass(frozen=True)
class DiscreteLaw:
    """Purely atomic law given by locations and masses summing to one."""

    locations: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        loc = np.asarray(self.locations, dtype=np.float64)
        mas = np.asarray(self.masses, dtype=np.float64)
        if loc.shape != mas.shape or loc.ndim != 1 or len(loc) == 0:
            raise BadParam("locations and masses must be matching 1-d arrays")
        if np.any(mas < 0) or abs(mas.sum() - 1.0) > 1e-12:
            raise BadParam("masses must be nonnegative and sum to 1")
        order = np.argsort(loc, kind="stable")
        object.__setattr__(self, "locations", loc[order])
        object.__setattr__(self, "masses", mas[order])

    @property
    def upper_edge(self) -> float:
        return float(self.locations[-1])

    def cdf(self, x: float) -> float:
        return float(self.masses[self.locations <= x].sum())

    def resolvent_moment(self, lam: float, power: int = 1) -> float:
        _check_power(power)
        if lam - self.upper_edge <= _EDGE_MARGIN:
            raise PoleTooClose(f"lam={lam} must exceed the top atom {self.upper_edge}")
        return float(np.sum(self.masses / (lam - self.locations) ** power))


def _check_power(power: int) -> None:
    if power not in (1, 2):
        raise BadParam(f"resolvent power must be 1 or 2, got {power}")


def mp_density(y: float, x: float) -> float:
    return MarchenkoPastur(y).density(x)


def mp_cdf(y: float, x: float) -> float:
    return MarchenkoPastur(y).cdf(x)


def resolvent_moment(law, lam: float, power: int = 1) -> float:
    """Dispatch to the law's resolvent moment (laws expose the same method)."""
    return law.resolvent_moment(lam, power)
