"""Weighted integrals of an observed field along boundary curves and over
the domain.

For the smooth truncated samples produced by :mod:`sheetmle.random_fields`
the quadratic-mean limits defining ``Z(ds, gamma(s))`` etc. coincide with
the pathwise partial derivatives, so the default ``analytic`` mode
integrates the exact term-wise derivatives.  ``finite_difference`` mode
retains the defining forward difference quotients at step ``fd_step`` and
converges to the analytic values as the step shrinks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .geometry import Curve, ValidatedDomain
from .quadrature import QuadConfig, integrate_1d, integrate_over_G

METHODS = ("analytic", "finite_difference")


@dataclass(frozen=True)
class StochIntConfig:
    method: str = "analytic"
    fd_step: float = 1e-5
    quad: QuadConfig = QuadConfig()

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.fd_step <= 0:
            raise ValueError("fd_step must be positive")


DEFAULT_STOCH = StochIntConfig()


class FieldOps:
    """Value and derivative evaluators for a field under one config."""

    def __init__(self, Z, cfg: StochIntConfig):
        self.value = Z.eval
        if cfg.method == "analytic":
            self.d1, self.d2, self.d12 = Z.d1, Z.d2, Z.d12
            return
        h = cfg.fd_step

        def d1(s, t):
            return (Z.eval(s + h, t) - Z.eval(s, t)) / h

        def d2(s, t):
            return (Z.eval(s, t + h) - Z.eval(s, t)) / h

        def d12(s, t):
            return (Z.eval(s + h, t + h) - Z.eval(s + h, t)
                    - Z.eval(s, t + h) + Z.eval(s, t)) / (h * h)

        self.d1, self.d2, self.d12 = d1, d2, d12


def field_operators(Z, cfg: StochIntConfig | None = None) -> FieldOps:
    return FieldOps(Z, cfg or DEFAULT_STOCH)


def line_ds(Z, y: Callable[[float], float], curve: Curve, lo: float, hi: float,
            cfg: StochIntConfig | None = None,
            flags: list[str] | None = None) -> float:
    """``integral of y(s) Z(ds, curve(s))`` over ``[lo, hi]``: the weighted
    integral of the first-slot increment of ``Z`` along the curve."""
    cfg = cfg or DEFAULT_STOCH
    ops = FieldOps(Z, cfg)
    return integrate_1d(lambda s: y(s) * ops.d1(s, curve(s)), lo, hi,
                        cfg.quad, flags)


def line_dt(Z, y: Callable[[float], float], curve: Curve, t_lo: float,
            t_hi: float, cfg: StochIntConfig | None = None,
            flags: list[str] | None = None) -> float:
    """``integral of y(t) Z(curve^{-1}(t), dt)``: second-slot increments
    along the inverse-parameterized curve; ``y`` is a function of ``t``."""
    cfg = cfg or DEFAULT_STOCH
    ops = FieldOps(Z, cfg)
    return integrate_1d(lambda t: y(t) * ops.d2(curve.inverse(t), t),
                        t_lo, t_hi, cfg.quad, flags)


def area_d1d2(Z, y, domain: ValidatedDomain,
              cfg: StochIntConfig | None = None,
              flags: list[str] | None = None) -> float:
    """``double integral of y(s,t) Z(ds, dt)`` over the domain."""
    cfg = cfg or DEFAULT_STOCH
    ops = FieldOps(Z, cfg)
    return integrate_over_G(lambda s, t: y(s, t) * ops.d12(s, t), domain,
                            cfg.quad, flags)


def area_d1(Z, y, domain: ValidatedDomain,
            cfg: StochIntConfig | None = None,
            flags: list[str] | None = None) -> float:
    """``double integral of y(s,t) Z(ds, t) dt``."""
    cfg = cfg or DEFAULT_STOCH
    ops = FieldOps(Z, cfg)
    return integrate_over_G(lambda s, t: y(s, t) * ops.d1(s, t), domain,
                            cfg.quad, flags)


def area_d2(Z, y, domain: ValidatedDomain,
            cfg: StochIntConfig | None = None,
            flags: list[str] | None = None) -> float:
    """``double integral of y(s,t) Z(s, dt) ds``."""
    cfg = cfg or DEFAULT_STOCH
    ops = FieldOps(Z, cfg)
    return integrate_over_G(lambda s, t: y(s, t) * ops.d2(s, t), domain,
                            cfg.quad, flags)


def area_plain(Z, y, domain: ValidatedDomain,
               cfg: StochIntConfig | None = None,
               flags: list[str] | None = None) -> float:
    """``double integral of y(s,t) Z(s, t) ds dt``."""
    cfg = cfg or DEFAULT_STOCH
    ops = FieldOps(Z, cfg)
    return integrate_over_G(lambda s, t: y(s, t) * ops.value(s, t), domain,
                            cfg.quad, flags)
