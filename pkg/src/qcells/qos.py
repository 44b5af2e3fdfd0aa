"""QoS bundles: stringency, distance ratios, and area-scaling calibration formulas."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .mathfn import (
    RAYLEIGH,
    DomainError,
    FadingModel,
    cloned_fading_quantile,
    fading_cdf,
    fading_quantile,
    imh,
    mh,
)

BALANCED_TOL = 1e-12


class Regime(str, Enum):
    LAX = "lax"
    BALANCED = "balanced"
    STRINGENT = "stringent"


class UnsupportedFormula(ValueError):
    """A closed form was requested for a fading model it is not stated for."""


@dataclass(frozen=True)
class QosSpec:
    theta: float
    u: float
    alpha: float = 4.0
    fading: FadingModel = field(default=RAYLEIGH)

    def __post_init__(self):
        if not self.theta > 0:
            raise DomainError(f"theta must be positive, got {self.theta}")
        if not 0.0 <= self.u < 1.0:
            raise DomainError(f"u must lie in [0, 1), got {self.u}")
        if not self.alpha > 2:
            raise DomainError(f"alpha must exceed 2, got {self.alpha}")

    @property
    def delta(self) -> float:
        return 2.0 / self.alpha


@dataclass(frozen=True)
class StringencyReport:
    sigma: float
    regime: Regime
    rho: float
    rho_star: float


def _upper_quantile(model: FadingModel, u: float) -> float:
    # F_H^{-1}(1-u); the u = 0 end maps to the top of the support
    if u == 0.0:
        return 1.0 if not (model.signal_fading or model.interferer_fading) else math.inf
    return fading_quantile(model, 1.0 - u)


def stringency_value(theta: float, u: float, model: FadingModel) -> float:
    """sigma(theta, u) = theta / F_H^{-1}(1-u), using closed forms where they exist."""
    p, q = model.p, model.q
    if p == 1 and q == 1:
        return theta * imh(u)
    if p == 0.5 and q == 0.5:
        return theta * math.tan(math.pi * u / 2) ** 2
    if math.isinf(p) and math.isinf(q):
        return theta
    if p == 1 and math.isinf(q):
        return theta / -math.log(u) if u > 0 else 0.0
    if math.isinf(p) and q == 1:
        return -theta * math.log1p(-u)
    return theta / _upper_quantile(model, u)


def classify(sigma: float) -> Regime:
    if abs(sigma - 1.0) <= BALANCED_TOL:
        return Regime.BALANCED
    return Regime.LAX if sigma < 1.0 else Regime.STRINGENT


def cloned_ratio(spec: QosSpec) -> float:
    """rho* = (theta / F_{H*}^{-1}(1-u))^{1/alpha}."""
    m = spec.fading
    if m.is_rayleigh:
        return (spec.theta * imh(math.sqrt(spec.u))) ** (1.0 / spec.alpha)
    if spec.u == 0.0:
        qnt = 0.5 if not (m.signal_fading or m.interferer_fading) else math.inf
    else:
        qnt = cloned_fading_quantile(m, 1.0 - spec.u)
    return (spec.theta / qnt) ** (1.0 / spec.alpha)


def stringency(spec: QosSpec) -> StringencyReport:
    sigma = stringency_value(spec.theta, spec.u, spec.fading)
    return StringencyReport(
        sigma=sigma,
        regime=classify(sigma),
        rho=sigma ** (1.0 / spec.alpha),
        rho_star=cloned_ratio(spec),
    )


def sinc(x: float) -> float:
    """Normalised sinc, sin(pi x)/(pi x)."""
    if x == 0:
        return 1.0
    return math.sin(math.pi * x) / (math.pi * x)


def nu_heuristic(delta: float, g: float) -> float:
    """Heuristic area scaling (sinc delta)^(1 - g (1 - delta)) from refined cells to coverage cells."""
    if not 0.0 <= delta <= 1.0:
        raise DomainError(f"delta must lie in [0, 1], got {delta}")
    if not 0.3 <= g <= 1.0:
        raise DomainError(f"regularity g must lie in [0.3, 1], got {g}")
    return sinc(delta) ** (1.0 - g * (1.0 - delta))


def regularity_of_perturbed_lattice(v: float) -> float:
    """Regularity g of a square lattice with Gaussian perturbation variance v per coordinate."""
    if v < 0:
        raise DomainError(f"variance must be nonnegative, got {v}")
    return max(0.3, 1.0 - 3.5 * v)


REGULARITY = {"square": 1.0, "triangular": 1.0, "ppp": 0.3}


def u_hat(spec: QosSpec, rho: float, nu: float) -> float:
    """Estimated maximum boundary reliability of a cell scaled by area factor nu."""
    if not 0.0 < nu <= 1.0:
        raise DomainError(f"nu must lie in (0, 1], got {nu}")
    x = spec.theta * nu ** (1.0 / spec.delta) * rho ** (-spec.alpha)
    return 1.0 - fading_cdf(spec.fading, x)


def u_hat_rayleigh(u: float, nu: float, delta: float) -> float:
    return mh(nu ** (-1.0 / delta) * imh(u))


def mean_boundary_reliability_estimate(
    u: float, nu: float, delta: float, fading: FadingModel = RAYLEIGH
) -> float:
    """Boundary-averaged reliability of the unscaled refined cell, mh(nu^{1/delta} imh u).

    Only stated for Rayleigh fading; other models must be measured with the oracle.
    """
    if not fading.is_rayleigh:
        raise UnsupportedFormula("boundary reliability estimate is only available for Rayleigh fading")
    return mh(nu ** (1.0 / delta) * imh(u))


def select_nu(
    delta: float,
    *,
    explicit: float | None = None,
    eta_c: float | None = None,
    eta_qstar: float | None = None,
    g: float | None = None,
) -> tuple[float, str]:
    """Pick the area scaling factor: explicit value, then measured MD ratio, then heuristic.

    Returns ``(nu, source)`` with source one of ``explicit``, ``measured_md``, ``heuristic``.
    """
    if explicit is not None:
        if not 0.0 < explicit <= 1.0:
            raise DomainError(f"explicit nu must lie in (0, 1], got {explicit}")
        return float(explicit), "explicit"
    if eta_c is not None:
        if not eta_qstar:
            raise DomainError("measured MD needs a positive refined-cell area fraction")
        return min(1.0, eta_c / eta_qstar), "measured_md"
    if g is None:
        raise DomainError("no nu source given (explicit, measured MD, or regularity g)")
    return nu_heuristic(delta, g), "heuristic"
