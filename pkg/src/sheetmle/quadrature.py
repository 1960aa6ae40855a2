"""Recursive adaptive Simpson quadrature, scalar or vector valued.

The 2-D integrator iterates the 1-D rule: the outer variable runs over the
vertical strips of the domain (split at the boundary breakpoints) and the
inner variable between the exact lower and upper boundary curves, so no
masking error is incurred at the curved boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

MAX_DEPTH_FLAG = "max_depth_exceeded"


@dataclass(frozen=True)
class QuadConfig:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-7
    max_depth: int = 40

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")

    def scaled(self, factor: float) -> "QuadConfig":
        return QuadConfig(self.abs_tol * factor, self.rel_tol * factor,
                          self.max_depth)


DEFAULT_QUAD = QuadConfig()


def _simpson(fa, fm, fb, width):
    return (width / 6.0) * (fa + 4.0 * fm + fb)


def _adapt(f, a, b, fa, fm, fb, whole, tol, depth, cfg, flags):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm = np.asarray(f(lm), dtype=float)
    frm = np.asarray(f(rm), dtype=float)
    left = _simpson(fa, flm, fm, m - a)
    right = _simpson(fm, frm, fb, b - m)
    refined = left + right
    err = refined - whole
    if np.max(np.abs(err)) <= 15.0 * tol or depth >= cfg.max_depth:
        if depth >= cfg.max_depth and np.max(np.abs(err)) > 15.0 * tol:
            if flags is not None:
                flags.append(f"{MAX_DEPTH_FLAG}:[{a:.8g},{b:.8g}]")
        return refined + err / 15.0
    half = 0.5 * tol
    return (_adapt(f, a, m, fa, flm, fm, left, half, depth + 1, cfg, flags)
            + _adapt(f, m, b, fm, frm, fb, right, half, depth + 1, cfg, flags))


def integrate_1d(f: Callable[[float], float | np.ndarray], lo: float, hi: float,
                 cfg: QuadConfig | None = None,
                 flags: list[str] | None = None) -> float | np.ndarray:
    """Adaptive Simpson estimate of the integral of ``f`` over ``[lo, hi]``.

    ``f`` may return a scalar or an ndarray; vector integrands share one
    subdivision driven by the max-norm of the local error.  Acceptance uses
    the Richardson criterion with tolerance ``max(abs_tol, rel_tol * |I0|)``
    where ``I0`` is the first whole-interval estimate.  If ``max_depth`` is
    hit, the best local estimate is kept and a flag is appended to ``flags``.
    """
    cfg = cfg or DEFAULT_QUAD
    if lo == hi:
        probe = np.asarray(f(lo), dtype=float)
        return 0.0 if probe.ndim == 0 else np.zeros_like(probe)
    sign = 1.0
    if lo > hi:
        lo, hi, sign = hi, lo, -1.0
    fa = np.asarray(f(lo), dtype=float)
    fm = np.asarray(f(0.5 * (lo + hi)), dtype=float)
    fb = np.asarray(f(hi), dtype=float)
    scalar = fa.ndim == 0
    whole = _simpson(fa, fm, fb, hi - lo)
    tol = max(cfg.abs_tol, cfg.rel_tol * float(np.max(np.abs(whole))))
    result = sign * _adapt(f, lo, hi, fa, fm, fb, whole, tol, 0, cfg, flags)
    return float(result) if scalar else result


def integrate_over_G(f: Callable[[float, float], float | np.ndarray],
                     domain, cfg: QuadConfig | None = None,
                     flags: list[str] | None = None) -> float | np.ndarray:
    """Iterated integral of ``f(s, t)`` over a validated domain.

    The outer integral over ``s`` is split at the domain breakpoints; the
    inner integral runs between the lower and upper boundary curves and uses
    a tolerance one order tighter so its noise stays below the outer
    acceptance threshold.  Strip results are summed in a fixed order.
    """
    cfg = cfg or DEFAULT_QUAD
    inner_cfg = cfg.scaled(0.1)

    def outer(s: float):
        return integrate_1d(lambda t: f(s, t), domain.lower(s),
                            domain.upper(s), inner_cfg, flags)

    breaks = domain.s_breaks()
    total = None
    for s0, s1 in zip(breaks[:-1], breaks[1:]):
        part = integrate_1d(outer, s0, s1, cfg, flags)
        total = part if total is None else total + part
    return total
