"""Scalar special functions: MH transform, incomplete beta, fading-ratio cdfs and quantiles.

The fading ratio ``H = h1/h2`` compares the desired-link power gain ``h1``
(Nakagami shape ``p``) with an interferer's gain ``h2`` (shape ``q``), both
normalised to unit mean.  The interference-cloned ratio ``H* = h1/(h2+h3)``
replaces the interferer by two independent copies at the same distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import special

INF = math.inf


class DomainError(ValueError):
    """Argument outside the domain of a function (poles, bad shapes, u >= 1)."""


@dataclass(frozen=True)
class FadingModel:
    """Nakagami-(p, q) fading; ``math.inf`` marks the no-fading limit of a link."""

    p: float = 1.0
    q: float = 1.0

    def __post_init__(self):
        for name, v in (("p", self.p), ("q", self.q)):
            if not (v > 0):
                raise DomainError(f"fading shape {name} must be positive, got {v!r}")

    @property
    def is_rayleigh(self) -> bool:
        return self.p == 1 and self.q == 1

    @property
    def signal_fading(self) -> bool:
        return math.isfinite(self.p)

    @property
    def interferer_fading(self) -> bool:
        return math.isfinite(self.q)

    @classmethod
    def parse(cls, text: str) -> "FadingModel":
        """Parse ``"p,q"``; either entry may be ``inf``."""
        try:
            a, b = (s.strip() for s in text.split(","))
            return cls(float(a), float(b))
        except ValueError as exc:
            raise DomainError(f"cannot parse fading model {text!r}: expected 'p,q'") from exc


RAYLEIGH = FadingModel(1.0, 1.0)
NO_FADING = FadingModel(INF, INF)
PESSIMISTIC = FadingModel(1.0, INF)
OPTIMISTIC = FadingModel(INF, 1.0)


def mh(x: float) -> float:
    """Forward MH transform x/(1+x)."""
    if x == -1:
        raise DomainError("mh has a pole at x = -1")
    if math.isinf(x):
        return 1.0
    return x / (1.0 + x)


def imh(x: float) -> float:
    """Inverse MH transform x/(1-x)."""
    if x == 1:
        raise DomainError("imh has a pole at x = 1")
    return x / (1.0 - x)


def _check_shapes(p, q):
    if not (p > 0 and q > 0) or math.isinf(p) or math.isinf(q):
        raise DomainError(f"beta shapes must be finite and positive, got ({p}, {q})")


def reg_inc_beta(p: float, q: float, x: float) -> float:
    """Regularized incomplete beta function B_{p,q}(x)."""
    _check_shapes(p, q)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    return float(special.betainc(p, q, x))


def inv_reg_inc_beta(p: float, q: float, u: float) -> float:
    """Inverse of :func:`reg_inc_beta` in its last argument.

    The library quantile is polished by safeguarded Newton steps so that
    ``B_{p,q}(x) = u`` holds to about 1e-12 absolute.
    """
    _check_shapes(p, q)
    if not 0.0 <= u <= 1.0:
        raise DomainError(f"u must lie in [0, 1], got {u}")
    if u == 0.0 or u == 1.0:
        return float(u)
    x = float(special.betaincinv(p, q, u))
    best, best_f = x, abs(special.betainc(p, q, x) - u)
    lo, hi = 0.0, 1.0
    logb = special.betaln(p, q)
    for _ in range(30):
        f = special.betainc(p, q, x) - u
        if abs(f) < best_f:
            best, best_f = x, abs(f)
        if abs(f) <= 1e-15:
            break
        if f > 0:
            hi = x
        else:
            lo = x
        step = -1.0
        if 0.0 < x < 1.0:
            dens = math.exp((p - 1) * math.log(x) + (q - 1) * math.log1p(-x) - logb)
            if dens > 0:
                step = x - f / dens
        x = step if lo < step < hi else 0.5 * (lo + hi)
    return float(best)


def _gamma_quantile(shape: float, u: float) -> float:
    """Quantile of a unit-mean gamma variable."""
    return float(special.gammaincinv(shape, u)) / shape


def _gamma_cdf(shape: float, x: float) -> float:
    return float(special.gammainc(shape, shape * x))


def _check_u(u: float) -> None:
    if not 0.0 <= u < 1.0:
        raise DomainError(f"reliability level must lie in [0, 1), got {u}")


def fading_cdf(model: FadingModel, x: float) -> float:
    """cdf F_H(x) of the fading ratio H = h1/h2."""
    p, q = model.p, model.q
    if x <= 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if model.signal_fading and model.interferer_fading:
        return reg_inc_beta(p, q, mh(x * p / q))
    if model.signal_fading:
        return _gamma_cdf(p, x)
    if model.interferer_fading:
        # 1/H = h2 is unit-mean gamma
        return 1.0 - _gamma_cdf(q, 1.0 / x)
    return 1.0 if x >= 1.0 else 0.0


def fading_quantile(model: FadingModel, u: float) -> float:
    """Quantile F_H^{-1}(u) of the fading ratio H = h1/h2."""
    _check_u(u)
    if u == 0.0:
        return 0.0
    p, q = model.p, model.q
    if model.signal_fading and model.interferer_fading:
        if p == 1 and q == 1:
            return imh(u)
        return (q / p) * imh(inv_reg_inc_beta(p, q, u))
    if model.signal_fading:
        if p == 1:
            return -math.log1p(-u)
        return _gamma_quantile(p, u)
    if model.interferer_fading:
        if q == 1:
            return 1.0 / -math.log(u)
        return 1.0 / _gamma_quantile(q, 1.0 - u)
    return 1.0


def cloned_fading_cdf(model: FadingModel, x: float) -> float:
    """cdf of H* = h1/(h2+h3) with independent, identically faded h2, h3."""
    p, q = model.p, model.q
    if x <= 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if model.signal_fading and model.interferer_fading:
        if p == 1 and q == 1:
            return x * (x + 2.0) / (x + 1.0) ** 2
        return reg_inc_beta(p, 2.0 * q, mh(x * p / q))
    if model.signal_fading:
        return _gamma_cdf(p, 2.0 * x)
    if model.interferer_fading:
        # (h2+h3)/2 is unit-mean gamma with shape 2q
        return 1.0 - _gamma_cdf(2.0 * q, 0.5 / x)
    return 1.0 if x >= 0.5 else 0.0


def cloned_fading_quantile(model: FadingModel, u: float) -> float:
    """Quantile of H* = h1/(h2+h3)."""
    _check_u(u)
    if u == 0.0:
        return 0.0
    p, q = model.p, model.q
    if model.signal_fading and model.interferer_fading:
        if p == 1 and q == 1:
            return (1.0 - u) ** -0.5 - 1.0
        return (q / p) * imh(inv_reg_inc_beta(p, 2.0 * q, u))
    if model.signal_fading:
        return 0.5 * _gamma_quantile(p, u)
    if model.interferer_fading:
        return 0.5 / _gamma_quantile(2.0 * q, 1.0 - u)
    return 0.5
