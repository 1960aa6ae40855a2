"""Known regression functions with their first and mixed partial derivatives.

Regressors must be twice continuously differentiable on the closure of the
observation domain; the estimators consume the partials directly, so they
are carried explicitly.  User-supplied functions can be ingested either as
symbolic expressions in ``s`` and ``t`` (partials derived exactly) or as
plain callables (partials by central differences).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import sympy as sp

from .errors import NonPositiveCoordinate

Fn2 = Callable[[float, float], float]


@dataclass(frozen=True)
class Regressor:
    fn: Fn2
    d1: Fn2
    d2: Fn2
    d12: Fn2


@dataclass(frozen=True)
class RegressorSet:
    regressors: tuple[Regressor, ...]

    @property
    def p(self) -> int:
        return len(self.regressors)

    def __iter__(self):
        return iter(self.regressors)

    def __getitem__(self, k: int) -> Regressor:
        return self.regressors[k]

    # Vector evaluators used by the estimators.
    def values(self, s: float, t: float) -> np.ndarray:
        return np.array([r.fn(s, t) for r in self.regressors])

    def d1s(self, s: float, t: float) -> np.ndarray:
        return np.array([r.d1(s, t) for r in self.regressors])

    def d2s(self, s: float, t: float) -> np.ndarray:
        return np.array([r.d2(s, t) for r in self.regressors])

    def d12s(self, s: float, t: float) -> np.ndarray:
        return np.array([r.d12(s, t) for r in self.regressors])

    def drift_value(self, m: Sequence[float], s: float, t: float) -> float:
        return float(np.dot(m, self.values(s, t)))


def polynomial_example_basis() -> RegressorSet:
    """The three-function polynomial basis ``{s^2 + t^2, s + t, s*t}``."""
    return RegressorSet((
        Regressor(fn=lambda s, t: s * s + t * t,
                  d1=lambda s, t: 2.0 * s,
                  d2=lambda s, t: 2.0 * t,
                  d12=lambda s, t: 0.0),
        Regressor(fn=lambda s, t: s + t,
                  d1=lambda s, t: 1.0,
                  d2=lambda s, t: 1.0,
                  d12=lambda s, t: 0.0),
        Regressor(fn=lambda s, t: s * t,
                  d1=lambda s, t: t,
                  d2=lambda s, t: s,
                  d12=lambda s, t: 1.0),
    ))


_S, _T = sp.symbols("s t", real=True)
_EXPR_LOCALS = {"s": _S, "t": _T, "exp": sp.exp, "log": sp.log,
                "sqrt": sp.sqrt, "sin": sp.sin, "cos": sp.cos, "pi": sp.pi}


def _lambdify(expr) -> Fn2:
    f = sp.lambdify((_S, _T), expr, modules="math")
    return lambda s, t: float(f(s, t))


def from_expressions(exprs: Sequence[str | dict]) -> RegressorSet:
    """Build a regressor set from expression strings in ``s`` and ``t``.

    Accepts either plain strings or ``{"expr": "..."}`` records as they
    appear in JSON configs.  ``^`` is understood as exponentiation.  Partials
    are derived symbolically, so they are exact.
    """
    regs = []
    for item in exprs:
        text = item["expr"] if isinstance(item, dict) else item
        expr = sp.sympify(text.replace("^", "**"), locals=_EXPR_LOCALS)
        extra = expr.free_symbols - {_S, _T}
        if extra:
            raise ValueError(f"expression {text!r} uses unknown symbols {extra}")
        regs.append(Regressor(
            fn=_lambdify(expr),
            d1=_lambdify(sp.diff(expr, _S)),
            d2=_lambdify(sp.diff(expr, _T)),
            d12=_lambdify(sp.diff(expr, _S, _T)),
        ))
    return RegressorSet(tuple(regs))


def from_callables(fns: Sequence[Fn2], fd_step: float = 1e-5) -> RegressorSet:
    """Adapter for value-only callables: partials by central differences."""
    h = fd_step
    regs = []
    for fn in fns:
        def d1(s, t, fn=fn):
            return (fn(s + h, t) - fn(s - h, t)) / (2.0 * h)

        def d2(s, t, fn=fn):
            return (fn(s, t + h) - fn(s, t - h)) / (2.0 * h)

        def d12(s, t, fn=fn):
            return (fn(s + h, t + h) - fn(s + h, t - h)
                    - fn(s - h, t + h) + fn(s - h, t - h)) / (4.0 * h * h)

        regs.append(Regressor(fn=fn, d1=d1, d2=d2, d12=d12))
    return RegressorSet(tuple(regs))


def transform_regressors(hset: RegressorSet, alpha: float, beta: float,
                         sigma: float, mode: str) -> RegressorSet:
    """Regressors for the exponentially transformed coordinates.

    In ``stationary`` mode the new functions are
    ``g(u, v) = (2*sqrt(alpha*beta*u*v)/sigma) * h(log(u)/(2*alpha),
    log(v)/(2*beta))``; ``zero_start`` mode shifts both coordinates by one.
    The partials follow from the chain rule in closed form, e.g.
    ``d1 g = sqrt(beta*v)/(sigma*sqrt(alpha*u)) * (alpha*h + d1 h)``.
    """
    if alpha <= 0 or beta <= 0 or sigma <= 0:
        raise ValueError("alpha, beta, sigma must be positive")
    if mode == "stationary":
        shift = 0.0
    elif mode == "zero_start":
        shift = 1.0
    else:
        raise ValueError(f"unknown transform mode {mode!r}")

    def coords(u: float, v: float) -> tuple[float, float]:
        uu, vv = u + shift, v + shift
        if uu <= 0.0 or vv <= 0.0:
            raise NonPositiveCoordinate(
                f"transformed regressor evaluated at ({u}, {v}), "
                f"outside its coordinate range")
        return uu, vv

    def make(reg: Regressor) -> Regressor:
        def fn(u, v):
            uu, vv = coords(u, v)
            x, y = math.log(uu) / (2 * alpha), math.log(vv) / (2 * beta)
            return 2.0 * math.sqrt(alpha * beta * uu * vv) / sigma * reg.fn(x, y)

        def d1(u, v):
            uu, vv = coords(u, v)
            x, y = math.log(uu) / (2 * alpha), math.log(vv) / (2 * beta)
            return (math.sqrt(beta * vv) / (sigma * math.sqrt(alpha * uu))
                    * (alpha * reg.fn(x, y) + reg.d1(x, y)))

        def d2(u, v):
            uu, vv = coords(u, v)
            x, y = math.log(uu) / (2 * alpha), math.log(vv) / (2 * beta)
            return (math.sqrt(alpha * uu) / (sigma * math.sqrt(beta * vv))
                    * (beta * reg.fn(x, y) + reg.d2(x, y)))

        def d12(u, v):
            uu, vv = coords(u, v)
            x, y = math.log(uu) / (2 * alpha), math.log(vv) / (2 * beta)
            combo = (alpha * beta * reg.fn(x, y) + alpha * reg.d2(x, y)
                     + beta * reg.d1(x, y) + reg.d12(x, y))
            return combo / (2.0 * sigma * math.sqrt(alpha * beta * uu * vv))

        return Regressor(fn=fn, d1=d1, d2=d2, d12=d12)

    return RegressorSet(tuple(make(r) for r in hset))
