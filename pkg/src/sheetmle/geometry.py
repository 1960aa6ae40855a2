"""Observation domains bounded by four strictly monotone curves.

A domain ``G`` sits in the open positive quadrant.  Its boundary consists of
a decreasing lower-left arc ``gamma12`` on ``[a, b1]``, an increasing
lower-right arc ``gamma1`` on ``[b1, c]``, an increasing upper-left arc
``gamma2`` on ``[a, b2]`` and a decreasing upper-right arc ``gamma0`` on
``[b2, c]``, with matching values at the shared breakpoints.  ``G`` is the
set of points between the lower and upper boundary; ``b1 == b2`` is allowed
and makes the middle vertical strip empty.

Domains are validated once (monotonicity, endpoint matching, positivity and
disjointness of the inner boundary strips) and then shared immutably.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import (
    CircleNotInPositiveQuadrant,
    EndpointMismatch,
    MonotonicityViolation,
    NonPositiveOrdinate,
    StripOverlap,
)

CurveFn = Callable[[float], float]

_ENDPOINT_TOL = 1e-10
_INVERSE_TOL = 1e-12


@dataclass(frozen=True)
class Curve:
    """Strictly monotone scalar function on ``[lo, hi]`` with an inverse.

    When no closed-form ``inverse_fn`` is supplied the inverse is computed by
    bisection to absolute tolerance 1e-12, which is cheap enough for use
    inside integrands.
    """

    fn: CurveFn
    lo: float
    hi: float
    increasing: bool
    inverse_fn: CurveFn | None = None

    def __call__(self, s: float) -> float:
        return self.fn(s)

    def inverse(self, t: float) -> float:
        if self.inverse_fn is not None:
            return self.inverse_fn(t)
        return self._bisect(t)

    def _bisect(self, t: float) -> float:
        lo, hi = self.lo, self.hi
        flo, fhi = self.fn(lo), self.fn(hi)
        if not self.increasing:
            lo, hi, flo, fhi = hi, lo, fhi, flo
        # Clamp to the achievable range so roundoff at the endpoints is benign.
        if t <= min(flo, fhi):
            return lo if flo <= fhi else hi
        if t >= max(flo, fhi):
            return hi if flo <= fhi else lo
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.fn(mid) < t:
                lo = mid
            else:
                hi = mid
            if abs(hi - lo) <= _INVERSE_TOL:
                break
        return 0.5 * (lo + hi)


@dataclass(frozen=True)
class DomainSpec:
    """Unvalidated description of an observation domain.

    ``meta`` optionally carries a JSON-serializable description (used by
    :func:`domain_spec_to_json`); it has no effect on the geometry.
    """

    a: float
    b1: float
    b2: float
    c: float
    gamma12: Curve
    gamma1: Curve
    gamma2: Curve
    gamma0: Curve
    strip_epsilon: float | None = None
    meta: dict | None = None

    def default_strip_epsilon(self) -> float:
        return min(self.b1 - self.a, self.c - self.b1,
                   self.b2 - self.a, self.c - self.b2) / 10.0


@dataclass(frozen=True)
class ValidatedDomain:
    """Immutable token certifying that a :class:`DomainSpec` passed
    :func:`validate`.  Exposes the piecewise lower/upper boundary and a
    membership test; safe to share across concurrent readers."""

    spec: DomainSpec

    @property
    def a(self) -> float:
        return self.spec.a

    @property
    def b1(self) -> float:
        return self.spec.b1

    @property
    def b2(self) -> float:
        return self.spec.b2

    @property
    def c(self) -> float:
        return self.spec.c

    def lower(self, s: float) -> float:
        sp = self.spec
        return sp.gamma12(s) if s <= sp.b1 else sp.gamma1(s)

    def upper(self, s: float) -> float:
        sp = self.spec
        return sp.gamma2(s) if s <= sp.b2 else sp.gamma0(s)

    def s_breaks(self) -> list[float]:
        """Abscissae splitting the domain into vertical strips."""
        sp = self.spec
        pts = [sp.a, min(sp.b1, sp.b2), max(sp.b1, sp.b2), sp.c]
        out: list[float] = []
        for x in pts:
            if not out or x > out[-1]:
                out.append(x)
        return out

    def contains(self, s: float, t: float) -> bool:
        sp = self.spec
        if s < sp.a or s > sp.c:
            return False
        return self.lower(s) <= t <= self.upper(s)

    def bounding_box(self) -> tuple[float, float, float, float]:
        """(s_min, s_max, t_min, t_max) of the closure of the domain."""
        sp = self.spec
        return (sp.a, sp.c, sp.gamma12(sp.b1), sp.gamma2(sp.b2))


def contains(domain: ValidatedDomain, s: float, t: float) -> bool:
    return domain.contains(s, t)


def circle_domain(cx: float, cy: float, r: float) -> DomainSpec:
    """Disc of radius ``r`` centered at ``(cx, cy)``, so that ``a = cx - r``,
    ``b1 = b2 = cx`` and ``c = cx + r``, with closed-form curve inverses."""
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    if cx - r <= 0 or cy - r <= 0:
        raise CircleNotInPositiveQuadrant(
            f"circle center ({cx}, {cy}) radius {r} touches a coordinate axis")

    def arc(sign_t: float) -> CurveFn:
        def fn(s: float) -> float:
            return cy + sign_t * math.sqrt(max(r * r - (s - cx) ** 2, 0.0))
        return fn

    def arc_inv(sign_s: float) -> CurveFn:
        def fn(t: float) -> float:
            return cx + sign_s * math.sqrt(max(r * r - (t - cy) ** 2, 0.0))
        return fn

    lower, upper = arc(-1.0), arc(+1.0)
    inv_left, inv_right = arc_inv(-1.0), arc_inv(+1.0)
    return DomainSpec(
        a=cx - r, b1=cx, b2=cx, c=cx + r,
        gamma12=Curve(lower, cx - r, cx, increasing=False, inverse_fn=inv_left),
        gamma1=Curve(lower, cx, cx + r, increasing=True, inverse_fn=inv_right),
        gamma2=Curve(upper, cx - r, cx, increasing=True, inverse_fn=inv_left),
        gamma0=Curve(upper, cx, cx + r, increasing=False, inverse_fn=inv_right),
        meta={"kind": "circle", "cx": cx, "cy": cy, "r": r},
    )


# ---------------------------------------------------------------------------
# validation


def _check_monotone(name: str, curve: Curve, grid_points: int) -> None:
    ss = np.linspace(curve.lo, curve.hi, grid_points)
    vals = np.array([curve(float(s)) for s in ss])
    d = np.diff(vals)
    ok = np.all(d > 0) if curve.increasing else np.all(d < 0)
    if not ok:
        idx = int(np.argmax(d <= 0 if curve.increasing else d >= 0))
        raise MonotonicityViolation(
            f"curve {name} is not strictly "
            f"{'increasing' if curve.increasing else 'decreasing'} "
            f"near s={ss[idx]:.6g}")


def _check_endpoint(name: str, got: float, want: float, where: float) -> None:
    if abs(got - want) > _ENDPOINT_TOL * max(1.0, abs(got), abs(want)):
        raise EndpointMismatch(
            f"{name}: values {got:.12g} and {want:.12g} differ at s={where:.6g}")


class _Strip:
    """Inner epsilon-strip of one boundary arc, as a point-membership region.

    Lower arcs extend upward into the domain, upper arcs downward.  Near the
    endpoint where the arc is steep the strip is capped by the arc's extreme
    value instead of a fixed vertical width.
    """

    def __init__(self, name: str, curve: Curve, eps: float,
                 is_lower: bool, steep_at_lo: bool):
        self.name = name
        self.curve = curve
        self.eps = eps
        self.is_lower = is_lower
        self.steep_at_lo = steep_at_lo

    def t_range(self, s: float) -> tuple[float, float] | None:
        cur, eps = self.curve, self.eps
        if s < cur.lo or s > cur.hi:
            return None
        v = cur(s)
        cap_end = cur.lo if self.steep_at_lo else cur.hi
        in_cap = (s <= cur.lo + eps) if self.steep_at_lo else (s >= cur.hi - eps)
        if self.is_lower:
            top = cur(cap_end) if in_cap else v + eps
            return (v, max(v, top))
        bottom = cur(cap_end) if in_cap else v - eps
        return (min(v, bottom), v)

    def member(self, s: float, t: float) -> bool:
        rng = self.t_range(s)
        return rng is not None and rng[0] <= t <= rng[1]

    def sample(self, grid_points: int) -> list[tuple[float, float]]:
        pts = []
        for s in np.linspace(self.curve.lo, self.curve.hi, grid_points):
            rng = self.t_range(float(s))
            if rng is None:
                continue
            t0, t1 = rng
            for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
                pts.append((float(s), t0 + frac * (t1 - t0)))
        return pts


def _check_strips_disjoint(sa: _Strip, sb: _Strip, grid_points: int) -> None:
    for strip, other in ((sa, sb), (sb, sa)):
        for s, t in strip.sample(grid_points):
            if other.member(s, t):
                raise StripOverlap(
                    f"inner strips of {strip.name} and {other.name} "
                    f"intersect near ({s:.6g}, {t:.6g})")


def validate(spec: DomainSpec, grid_points: int = 256) -> ValidatedDomain:
    """Check every structural invariant of ``spec`` and return a shareable
    domain token, or raise the error naming the first violated invariant."""
    if grid_points < 16:
        raise ValueError("grid_points must be at least 16")
    sp = spec
    if not (0.0 < sp.a < sp.b1 < sp.c and sp.a < sp.b2 < sp.c):
        raise ValueError(
            f"breakpoints must satisfy 0 < a < b1, b2 < c; "
            f"got a={sp.a}, b1={sp.b1}, b2={sp.b2}, c={sp.c}")
    curves = {"gamma12": (sp.gamma12, sp.a, sp.b1, False),
              "gamma1": (sp.gamma1, sp.b1, sp.c, True),
              "gamma2": (sp.gamma2, sp.a, sp.b2, True),
              "gamma0": (sp.gamma0, sp.b2, sp.c, False)}
    for name, (cur, lo, hi, increasing) in curves.items():
        if abs(cur.lo - lo) > _ENDPOINT_TOL or abs(cur.hi - hi) > _ENDPOINT_TOL:
            raise ValueError(
                f"curve {name} is defined on [{cur.lo}, {cur.hi}], "
                f"expected [{lo}, {hi}]")
        if cur.increasing != increasing:
            raise MonotonicityViolation(
                f"curve {name} must be {'increasing' if increasing else 'decreasing'}")
        _check_monotone(name, cur, grid_points)

    for name, cur, lo, hi in (("gamma12", sp.gamma12, sp.a, sp.b1),
                              ("gamma1", sp.gamma1, sp.b1, sp.c)):
        vals = [cur(float(s)) for s in np.linspace(lo, hi, grid_points)]
        if min(vals) <= 0.0:
            raise NonPositiveOrdinate(
                f"curve {name} is not strictly positive on [{lo}, {hi}]")

    _check_endpoint("gamma12/gamma1", sp.gamma12(sp.b1), sp.gamma1(sp.b1), sp.b1)
    _check_endpoint("gamma2/gamma0", sp.gamma2(sp.b2), sp.gamma0(sp.b2), sp.b2)
    _check_endpoint("gamma12/gamma2", sp.gamma12(sp.a), sp.gamma2(sp.a), sp.a)
    _check_endpoint("gamma1/gamma0", sp.gamma1(sp.c), sp.gamma0(sp.c), sp.c)

    # The lower boundary may not cross the upper one anywhere.
    dom = ValidatedDomain(spec=spec)
    for s in np.linspace(sp.a, sp.c, grid_points):
        s = float(s)
        if dom.lower(s) > dom.upper(s) + _ENDPOINT_TOL:
            raise StripOverlap(
                f"lower boundary exceeds upper boundary at s={s:.6g}")

    eps = sp.strip_epsilon if sp.strip_epsilon is not None else sp.default_strip_epsilon()
    if eps <= 0:
        raise ValueError("strip_epsilon must be positive")
    strip12 = _Strip("gamma12", sp.gamma12, eps, is_lower=True, steep_at_lo=True)
    strip1 = _Strip("gamma1", sp.gamma1, eps, is_lower=True, steep_at_lo=False)
    strip2 = _Strip("gamma2", sp.gamma2, eps, is_lower=False, steep_at_lo=True)
    strip0 = _Strip("gamma0", sp.gamma0, eps, is_lower=False, steep_at_lo=False)
    _check_strips_disjoint(strip1, strip2, grid_points)
    _check_strips_disjoint(strip12, strip0, grid_points)

    return dom


# ---------------------------------------------------------------------------
# coordinate transforms


def _axis_maps(rate: float, mode: str) -> tuple[CurveFn, CurveFn]:
    """Forward/backward maps for one axis: x -> exp(2*rate*x) (stationary)
    or x -> exp(2*rate*x) - 1 (zero_start)."""
    if mode == "stationary":
        return (lambda x: math.exp(2.0 * rate * x),
                lambda u: math.log(u) / (2.0 * rate))
    if mode == "zero_start":
        return (lambda x: math.exp(2.0 * rate * x) - 1.0,
                lambda u: math.log(u + 1.0) / (2.0 * rate))
    raise ValueError(f"unknown transform mode {mode!r}")


def transform_domain(domain: ValidatedDomain, alpha: float, beta: float,
                     mode: str) -> DomainSpec:
    """Image of the domain under the exponential change of coordinates used
    to reduce Ornstein-Uhlenbeck estimation to the Wiener case.

    Both axis maps are increasing, so each boundary curve keeps its
    monotonicity direction and the inverses compose in closed form.
    """
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")
    fwd_s, back_s = _axis_maps(alpha, mode)
    fwd_t, back_t = _axis_maps(beta, mode)
    sp = domain.spec

    def map_curve(cur: Curve) -> Curve:
        def fn(u: float, _cur=cur) -> float:
            return fwd_t(_cur(back_s(u)))

        def inv(v: float, _cur=cur) -> float:
            return fwd_s(_cur.inverse(back_t(v)))

        return Curve(fn, fwd_s(cur.lo), fwd_s(cur.hi),
                     increasing=cur.increasing, inverse_fn=inv)

    return DomainSpec(
        a=fwd_s(sp.a), b1=fwd_s(sp.b1), b2=fwd_s(sp.b2), c=fwd_s(sp.c),
        gamma12=map_curve(sp.gamma12), gamma1=map_curve(sp.gamma1),
        gamma2=map_curve(sp.gamma2), gamma0=map_curve(sp.gamma0),
    )


# ---------------------------------------------------------------------------
# JSON serialization


def _piecewise_poly_curve(table: dict) -> Curve:
    breaks = [float(x) for x in table["breaks"]]
    coeffs = [list(map(float, c)) for c in table["coeffs"]]
    if len(coeffs) != len(breaks) - 1 or len(breaks) < 2:
        raise ValueError("piecewise polynomial table needs len(breaks) == len(coeffs) + 1")

    def fn(s: float) -> float:
        i = int(np.searchsorted(breaks, s, side="right")) - 1
        i = min(max(i, 0), len(coeffs) - 1)
        return float(np.polyval(coeffs[i], s - breaks[i]))

    return Curve(fn, breaks[0], breaks[-1], increasing=bool(table["increasing"]))


def domain_spec_from_json(obj: dict) -> DomainSpec:
    """Build a :class:`DomainSpec` from its JSON form.

    Supported kinds: ``{"kind": "circle", "cx", "cy", "r"}`` and
    ``{"kind": "curves", "a", "b1", "b2", "c", "gamma12": {breaks, coeffs,
    increasing}, ...}`` with per-curve piecewise-polynomial tables in the
    local variable ``s - break[i]``.
    """
    kind = obj.get("kind")
    if kind == "circle":
        return circle_domain(float(obj["cx"]), float(obj["cy"]), float(obj["r"]))
    if kind == "curves":
        spec = DomainSpec(
            a=float(obj["a"]), b1=float(obj["b1"]),
            b2=float(obj["b2"]), c=float(obj["c"]),
            gamma12=_piecewise_poly_curve(obj["gamma12"]),
            gamma1=_piecewise_poly_curve(obj["gamma1"]),
            gamma2=_piecewise_poly_curve(obj["gamma2"]),
            gamma0=_piecewise_poly_curve(obj["gamma0"]),
            strip_epsilon=(float(obj["strip_epsilon"])
                           if obj.get("strip_epsilon") is not None else None),
            meta=dict(obj),
        )
        return spec
    raise ValueError(f"unknown domain kind {kind!r}")


def domain_spec_to_json(spec: DomainSpec) -> dict:
    if spec.meta is None:
        raise ValueError("domain spec carries no serializable description")
    return dict(spec.meta)
