"""Truncated-series simulation of Wiener and Ornstein-Uhlenbeck sheets.

Each sheet is represented by a double sine series over a simulation
rectangle ``[0, S] x [0, T]`` with independent standard normal coefficients
``omega[j, k]`` (row ``j`` pairs with the ``t`` axis, column ``k`` with the
``s`` axis).  Every term factorizes into a ``t`` factor times an ``s``
factor, so fields and their partial derivatives are evaluated exactly,
term-wise, with no step-size parameter.

Coefficients come from a counter-based generator keyed by ``(seed, j, k)``:
any single entry is reproducible independently of iteration order, which
makes replication-level parallelism bitwise deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtri

from .errors import OutOfRectangle, WrongModelVariant
from .regressors import RegressorSet

VARIANTS = ("wiener", "stationary_ou", "zero_start_ou")

# ---------------------------------------------------------------------------
# counter-based normal generator

_U64 = np.uint64
_GOLD = _U64(0x9E3779B97F4A7C15)
_P1 = _U64(0xBF58476D1CE4E5B9)
_P2 = _U64(0x94D049BB133111EB)
_K1 = _U64(0xC2B2AE3D27D4EB4F)
_K2 = _U64(0x165667B19E3779F9)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U64(30))) * _P1
    z = (z ^ (z >> _U64(27))) * _P2
    return z ^ (z >> _U64(31))


def _counter_hash(seed: int, j: np.ndarray, k: np.ndarray) -> np.ndarray:
    base = _U64(seed & 0xFFFFFFFFFFFFFFFF)
    with np.errstate(over="ignore"):
        z = _mix64(np.asarray(base + _GOLD, dtype=np.uint64))
        z = _mix64(z ^ (j.astype(np.uint64) * _K1))
        z = _mix64(z ^ (k.astype(np.uint64) * _K2))
    return z


def counter_normal(seed: int, j, k) -> np.ndarray:
    """Standard normal draw(s) keyed by ``(seed, j, k)`` via the inverse CDF
    of a 53-bit uniform; deterministic and order-independent."""
    j = np.asarray(j, dtype=np.uint64)
    k = np.asarray(k, dtype=np.uint64)
    bits = _counter_hash(seed, j, k)
    u = ((bits >> _U64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
    return ndtri(u)


def derive_seed(base_seed: int, index: int) -> int:
    """Per-replication seed: hash of the base seed and replication index."""
    z = _counter_hash(base_seed, np.uint64(index + 1), np.uint64(0))
    return int(z)


# ---------------------------------------------------------------------------
# models and samples


@dataclass(frozen=True)
class FieldModel:
    """Driving-noise selector: Wiener sheet or one of the two
    Ornstein-Uhlenbeck sheets with rates ``alpha``, ``beta`` and scale
    ``sigma`` (all required positive for the OU variants)."""

    variant: str
    alpha: float | None = None
    beta: float | None = None
    sigma: float | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant != "wiener":
            for name in ("alpha", "beta", "sigma"):
                val = getattr(self, name)
                if val is None or val <= 0:
                    raise ValueError(
                        f"{self.variant} requires {name} > 0, got {val}")


WIENER = FieldModel("wiener")


def stationary_ou(alpha: float, beta: float, sigma: float) -> FieldModel:
    return FieldModel("stationary_ou", alpha, beta, sigma)


def zero_start_ou(alpha: float, beta: float, sigma: float) -> FieldModel:
    return FieldModel("zero_start_ou", alpha, beta, sigma)


@dataclass(frozen=True, eq=False)
class KLSample:
    """One draw of the series coefficients on ``[0, S] x [0, T]``."""

    n: int
    S: float
    T: float
    omega: np.ndarray
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("truncation order n must be >= 1")
        if self.S <= 0 or self.T <= 0:
            raise ValueError("simulation rectangle bounds must be positive")
        if self.omega.shape != (self.n, self.n):
            raise ValueError("omega must have shape (n, n)")
        if not np.all(np.isfinite(self.omega)):
            raise ValueError("omega entries must be finite")


def draw_kl(n: int, S: float, T: float, seed: int) -> KLSample:
    """Draw the ``n x n`` coefficient matrix for rectangle ``[0,S] x [0,T]``."""
    j = np.arange(1, n + 1, dtype=np.uint64)[:, None]
    k = np.arange(1, n + 1, dtype=np.uint64)[None, :]
    omega = counter_normal(seed, np.broadcast_to(j, (n, n)),
                           np.broadcast_to(k, (n, n)))
    return KLSample(n=n, S=float(S), T=float(T), omega=np.ascontiguousarray(omega),
                    seed=int(seed))


# ---------------------------------------------------------------------------
# separable series factors

# field(s, t) = prefactor * sum_{j,k} omega[j,k] * t_factor_j(t) * s_factor_k(s)


class SeriesFactors:
    """Per-axis mode factors of one sheet variant on a fixed rectangle."""

    def __init__(self, prefactor: float,
                 s_vec: Callable[[float, int], np.ndarray],
                 t_vec: Callable[[float, int], np.ndarray]):
        self.prefactor = prefactor
        self.s_vec = s_vec
        self.t_vec = t_vec


def _wiener_axis(n: int, length: float):
    odd = 2.0 * np.arange(1, n + 1) - 1.0
    freq = math.pi * odd / (2.0 * length)

    def vec(x: float, deriv: int) -> np.ndarray:
        if deriv == 0:
            return np.sin(freq * x) / odd
        return freq * np.cos(freq * x) / odd

    return vec


def _stationary_axis(n: int, rate: float, length: float):
    odd = 2.0 * np.arange(1, n + 1) - 1.0
    half_pi_odd = 0.5 * math.pi * odd

    def vec(x: float, deriv: int) -> np.ndarray:
        decay = math.exp(rate * (length - x))
        arg = math.exp(2.0 * rate * (x - length))
        if deriv == 0:
            return decay * np.sin(half_pi_odd * arg) / odd
        return decay * rate * (math.pi * arg * np.cos(half_pi_odd * arg)
                               - np.sin(half_pi_odd * arg) / odd)

    return vec


def _zero_start_axis(n: int, rate: float, length: float):
    odd = 2.0 * np.arange(1, n + 1) - 1.0
    half_pi_odd = 0.5 * math.pi * odd
    denom = math.expm1(2.0 * rate * length)

    def vec(x: float, deriv: int) -> np.ndarray:
        decay = math.exp(-rate * x)
        ratio = math.expm1(2.0 * rate * x) / denom
        if deriv == 0:
            return decay * np.sin(half_pi_odd * ratio) / odd
        slope = 2.0 * rate * math.exp(2.0 * rate * x) / denom
        return decay * (half_pi_odd * slope * np.cos(half_pi_odd * ratio) / odd
                        - rate * np.sin(half_pi_odd * ratio) / odd)

    return vec


@lru_cache(maxsize=128)
def _factors(variant: str, alpha: float | None, beta: float | None,
             sigma: float | None, n: int, S: float, T: float) -> SeriesFactors:
    if variant == "wiener":
        pref = 8.0 * math.sqrt(S * T) / math.pi ** 2
        return SeriesFactors(pref, _wiener_axis(n, S), _wiener_axis(n, T))
    if variant == "stationary_ou":
        pref = 4.0 * sigma / (math.pi ** 2 * math.sqrt(alpha * beta))
        return SeriesFactors(pref, _stationary_axis(n, alpha, S),
                             _stationary_axis(n, beta, T))
    if variant == "zero_start_ou":
        pref = (4.0 * sigma
                * math.sqrt(math.expm1(2.0 * alpha * S) * math.expm1(2.0 * beta * T))
                / (math.pi ** 2 * math.sqrt(alpha * beta)))
        return SeriesFactors(pref, _zero_start_axis(n, alpha, S),
                             _zero_start_axis(n, beta, T))
    raise ValueError(f"unknown variant {variant!r}")


def series_factors(model: FieldModel, n: int, S: float, T: float) -> SeriesFactors:
    """Shared separable representation used by evaluators and by the
    experiment harness when it compiles score functionals."""
    return _factors(model.variant, model.alpha, model.beta, model.sigma,
                    n, float(S), float(T))


def _check_rect(kl: KLSample, s: float, t: float) -> None:
    slack_s = 1e-12 * max(1.0, kl.S)
    slack_t = 1e-12 * max(1.0, kl.T)
    if s < -slack_s or s > kl.S + slack_s or t < -slack_t or t > kl.T + slack_t:
        raise OutOfRectangle(
            f"point ({s}, {t}) outside simulation rectangle "
            f"[0, {kl.S}] x [0, {kl.T}]")


def _eval_series(fac: SeriesFactors, omega: np.ndarray, s: float, t: float,
                 ds: int = 0, dt: int = 0) -> float:
    return fac.prefactor * float(fac.t_vec(t, dt) @ omega @ fac.s_vec(s, ds))


def eval_wiener(kl: KLSample, s: float, t: float) -> float:
    """Truncated Wiener-sheet partial sum at ``(s, t)``."""
    _check_rect(kl, s, t)
    fac = series_factors(WIENER, kl.n, kl.S, kl.T)
    return _eval_series(fac, kl.omega, s, t)


def eval_stationary_ou(kl: KLSample, model: FieldModel, s: float, t: float) -> float:
    if model.variant != "stationary_ou":
        raise WrongModelVariant(f"expected stationary_ou, got {model.variant}")
    _check_rect(kl, s, t)
    fac = series_factors(model, kl.n, kl.S, kl.T)
    return _eval_series(fac, kl.omega, s, t)


def eval_zero_start_ou(kl: KLSample, model: FieldModel, s: float, t: float) -> float:
    if model.variant != "zero_start_ou":
        raise WrongModelVariant(f"expected zero_start_ou, got {model.variant}")
    _check_rect(kl, s, t)
    fac = series_factors(model, kl.n, kl.S, kl.T)
    return _eval_series(fac, kl.omega, s, t)


# ---------------------------------------------------------------------------
# observable fields (drift + noise) with exact partial derivatives


@dataclass(frozen=True, eq=False)
class Drift:
    regressors: RegressorSet
    m: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "m", np.asarray(self.m, dtype=float))
        if self.m.shape != (self.regressors.p,):
            raise ValueError("parameter vector length must match regressor count")


@dataclass(frozen=True, eq=False)
class FieldSample:
    """Deterministically evaluatable realization ``Z = drift + noise``.

    Either part may be absent.  Evaluation and the exact term-wise partial
    derivatives are pure, so samples are safe to share across threads.
    """

    model: FieldModel | None = None
    kl: KLSample | None = None
    drift: Drift | None = None

    def __post_init__(self):
        if (self.model is None) != (self.kl is None):
            raise ValueError("model and kl must be supplied together")
        if self.model is None and self.drift is None:
            raise ValueError("field sample needs a noise part or a drift part")
        object.__setattr__(self, "_scache", {})

    def _factors(self) -> SeriesFactors:
        return series_factors(self.model, self.kl.n, self.kl.S, self.kl.T)

    def _omega_s(self, s: float, ds: int) -> np.ndarray:
        # The inner integrals of the estimators sweep t at a repeated s, so
        # memoize omega @ s_vec per (s, ds).
        key = (s, ds)
        cache = self._scache
        hit = cache.get(key)
        if hit is None:
            hit = self.kl.omega @ self._factors().s_vec(s, ds)
            if len(cache) > 4096:
                cache.clear()
            cache[key] = hit
        return hit

    def _noise(self, s: float, t: float, ds: int, dt: int) -> float:
        if self.model is None:
            return 0.0
        _check_rect(self.kl, s, t)
        fac = self._factors()
        return fac.prefactor * float(fac.t_vec(t, dt) @ self._omega_s(s, ds))

    def _drift_part(self, s: float, t: float, ds: int, dt: int) -> float:
        if self.drift is None:
            return 0.0
        reg = self.drift.regressors
        table = {(0, 0): reg.values, (1, 0): reg.d1s,
                 (0, 1): reg.d2s, (1, 1): reg.d12s}
        return float(np.dot(self.drift.m, table[(ds, dt)](s, t)))

    def eval(self, s: float, t: float) -> float:
        return self._drift_part(s, t, 0, 0) + self._noise(s, t, 0, 0)

    def d1(self, s: float, t: float) -> float:
        return self._drift_part(s, t, 1, 0) + self._noise(s, t, 1, 0)

    def d2(self, s: float, t: float) -> float:
        return self._drift_part(s, t, 0, 1) + self._noise(s, t, 0, 1)

    def d12(self, s: float, t: float) -> float:
        return self._drift_part(s, t, 1, 1) + self._noise(s, t, 1, 1)


def eval_field(sample: FieldSample, s: float, t: float) -> float:
    return sample.eval(s, t)


def eval_d1(sample: FieldSample, s: float, t: float) -> float:
    return sample.d1(s, t)


def eval_d2(sample: FieldSample, s: float, t: float) -> float:
    return sample.d2(s, t)


def eval_d12(sample: FieldSample, s: float, t: float) -> float:
    return sample.d12(s, t)


class TransformedField:
    """Exponential change of coordinates turning an OU-driven observation
    into a Wiener-driven one on the transformed domain.

    For ``mode="stationary"``::

        Y(u, v) = (2*sqrt(alpha*beta*u*v)/sigma) * Z(log(u)/(2*alpha),
                                                     log(v)/(2*beta))

    ``mode="zero_start"`` shifts both coordinates by one.  Partial
    derivatives follow the product/chain rule exactly, so the wrapper
    satisfies the same field protocol as :class:`FieldSample`.
    """

    def __init__(self, field, alpha: float, beta: float, sigma: float, mode: str):
        if alpha <= 0 or beta <= 0 or sigma <= 0:
            raise ValueError("alpha, beta, sigma must be positive")
        if mode not in ("stationary", "zero_start"):
            raise ValueError(f"unknown transform mode {mode!r}")
        self.field = field
        self.alpha = alpha
        self.beta = beta
        self.sigma = sigma
        self.shift = 0.0 if mode == "stationary" else 1.0

    def _parts(self, u: float, v: float):
        uu, vv = u + self.shift, v + self.shift
        q = 2.0 * math.sqrt(self.alpha * self.beta * uu * vv) / self.sigma
        x = math.log(uu) / (2.0 * self.alpha)
        y = math.log(vv) / (2.0 * self.beta)
        return uu, vv, q, x, y

    def eval(self, u: float, v: float) -> float:
        _, _, q, x, y = self._parts(u, v)
        return q * self.field.eval(x, y)

    def d1(self, u: float, v: float) -> float:
        uu, _, q, x, y = self._parts(u, v)
        return (q / (2.0 * uu)) * self.field.eval(x, y) \
            + q * self.field.d1(x, y) / (2.0 * self.alpha * uu)

    def d2(self, u: float, v: float) -> float:
        _, vv, q, x, y = self._parts(u, v)
        return (q / (2.0 * vv)) * self.field.eval(x, y) \
            + q * self.field.d2(x, y) / (2.0 * self.beta * vv)

    def d12(self, u: float, v: float) -> float:
        uu, vv, q, x, y = self._parts(u, v)
        return (q / (4.0 * uu * vv)) * self.field.eval(x, y) \
            + (q / (2.0 * uu)) * self.field.d2(x, y) / (2.0 * self.beta * vv) \
            + (q / (2.0 * vv)) * self.field.d1(x, y) / (2.0 * self.alpha * uu) \
            + q * self.field.d12(x, y) / (4.0 * self.alpha * self.beta * uu * vv)


def transform_field(field, alpha: float, beta: float, sigma: float,
                    mode: str) -> TransformedField:
    return TransformedField(field, alpha, beta, sigma, mode)


def dump_grid_csv(sample: FieldSample, path, s_lo: float, s_hi: float,
                  t_lo: float, t_hi: float, resolution: int) -> None:
    """Write a gridded realization as CSV with header ``s,t,z`` (row-major:
    ``t`` varies fastest), the same layout the gridded-data adapter reads."""
    ss = np.linspace(s_lo, s_hi, resolution)
    ts = np.linspace(t_lo, t_hi, resolution)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("s,t,z\n")
        for s in ss:
            for t in ts:
                fh.write(f"{s!r},{t!r},{sample.eval(float(s), float(t))!r}\n")
