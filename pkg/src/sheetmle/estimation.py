"""Information matrices, score vectors and the maximum-likelihood estimator.

For each driving-noise variant the log density of the observed field with
respect to the noise law is quadratic in the parameter vector ``m``:
``-pref * (m' A m - 2 zeta' m)`` with a model-dependent positive prefactor.
``A`` is deterministic (assembled from corner, boundary-line and domain-area
integrals of the regressors) and ``zeta`` applies the matching linear
functionals to the observed field, so ``m_hat = A^{-1} zeta``.

Score functionals are represented as explicit term lists shared between the
direct evaluator here and the compiled per-mode form used by the experiment
harness, which keeps the two code paths structurally identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
from scipy.interpolate import RectBivariateSpline

from .errors import OutOfRectangle, SingularMatrix
from .geometry import Curve, ValidatedDomain
from .quadrature import QuadConfig, integrate_1d, integrate_over_G
from .random_fields import FieldModel
from .regressors import RegressorSet
from .stochastic import FieldOps, StochIntConfig

DEFAULT_STOCH = StochIntConfig()


def _coth(x: float) -> float:
    return 1.0 / math.tanh(x)


# ---------------------------------------------------------------------------
# score functionals as term lists

ScalarFn = Callable[[float], float]


@dataclass(frozen=True)
class PointTerm:
    """``weights[k] * Z(s0, t0)``."""
    s0: float
    t0: float
    weights: np.ndarray


@dataclass(frozen=True)
class SLineTerm:
    """``int_lo^hi weight_k(s) * [c_val(s) Z + c_d1(s) Z(ds, .)](s, curve(s)) ds``.

    A coefficient of ``None`` drops that part of the bracket entirely.
    """
    lo: float
    hi: float
    curve: Curve
    weight: Callable[[float], np.ndarray]
    c_val: ScalarFn | None
    c_d1: ScalarFn | None


@dataclass(frozen=True)
class TLineTerm:
    """Same along the inverse-parameterized curve: ``s = curve.inverse(t)``."""
    lo: float
    hi: float
    curve: Curve
    weight: Callable[[float], np.ndarray]
    c_val: ScalarFn | None
    c_d2: ScalarFn | None


@dataclass(frozen=True)
class AreaTerm:
    """``iint_G weight_k(s,t) * [cv Z + c1 Z(ds,t) + c2 Z(s,dt) + c12 Z(ds,dt)]``."""
    weight: Callable[[float, float], np.ndarray]
    c_val: float
    c_d1: float
    c_d2: float
    c_d12: float


ScoreTerm = PointTerm | SLineTerm | TLineTerm | AreaTerm


def _wiener_score_terms(domain: ValidatedDomain,
                        reg: RegressorSet) -> list[ScoreTerm]:
    sp = domain.spec
    a, b1, c = sp.a, sp.b1, sp.c
    g12, g1, g2 = sp.gamma12, sp.gamma1, sp.gamma2
    tb = g12(b1)

    def w_g1(s):
        return reg.d1s(s, g1(s)) / g1(s)

    def w_g12(s):
        t = g12(s)
        return (reg.values(s, t) - s * reg.d1s(s, t)) / (s * s * t)

    def w_t(curve):
        def w(t):
            s = curve.inverse(t)
            return reg.d2s(s, t) / s
        return w

    return [
        PointTerm(b1, tb, reg.values(b1, tb) / (b1 * tb)),
        SLineTerm(b1, c, g1, w_g1, c_val=None, c_d1=lambda s: 1.0),
        SLineTerm(a, b1, g12, w_g12, c_val=lambda s: 1.0, c_d1=lambda s: -s),
        TLineTerm(g2(a), g2(sp.b2), g2, w_t(g2), c_val=None, c_d2=lambda t: 1.0),
        TLineTerm(g12(b1), g12(a), g12, w_t(g12), c_val=None, c_d2=lambda t: 1.0),
        AreaTerm(lambda s, t: reg.d12s(s, t), 0.0, 0.0, 0.0, 1.0),
    ]


def _ou_area_term(reg: RegressorSet, alpha: float, beta: float) -> AreaTerm:
    def w(s, t):
        return (alpha * beta * reg.values(s, t) + beta * reg.d1s(s, t)
                + alpha * reg.d2s(s, t) + reg.d12s(s, t))

    return AreaTerm(w, 1.0, 1.0 / alpha, 1.0 / beta, 1.0 / (alpha * beta))


def _stationary_score_terms(domain: ValidatedDomain, reg: RegressorSet,
                            alpha: float, beta: float) -> list[ScoreTerm]:
    sp = domain.spec
    a, b1, b2, c = sp.a, sp.b1, sp.b2, sp.c
    g12, g1, g2 = sp.gamma12, sp.gamma1, sp.gamma2
    tb = g12(b1)  # == gamma1(b1); evaluated once through the lower-left arc

    def w_g1(s):
        t = g1(s)
        return 2.0 * (alpha * reg.values(s, t) + reg.d1s(s, t))

    def w_g12(s):
        t = g12(s)
        return 2.0 * (alpha * reg.values(s, t) - reg.d1s(s, t))

    def w_t(curve):
        def w(t):
            s = curve.inverse(t)
            return 2.0 * (beta * reg.values(s, t) + reg.d2s(s, t))
        return w

    one = lambda x: 1.0
    return [
        PointTerm(b1, tb, 4.0 * reg.values(b1, tb)),
        SLineTerm(b1, c, g1, w_g1, c_val=one, c_d1=lambda s: 1.0 / alpha),
        SLineTerm(a, b1, g12, w_g12, c_val=one, c_d1=lambda s: -1.0 / alpha),
        TLineTerm(g2(a), g2(b2), g2, w_t(g2), c_val=one, c_d2=lambda t: 1.0 / beta),
        TLineTerm(g12(b1), g12(a), g12, w_t(g12), c_val=one,
                  c_d2=lambda t: 1.0 / beta),
        _ou_area_term(reg, alpha, beta),
    ]


def _zero_start_score_terms(domain: ValidatedDomain, reg: RegressorSet,
                            alpha: float, beta: float) -> list[ScoreTerm]:
    sp = domain.spec
    a, b1, b2, c = sp.a, sp.b1, sp.b2, sp.c
    g12, g1, g2 = sp.gamma12, sp.gamma1, sp.gamma2
    tb = g12(b1)

    corner_w = (1.0 + _coth(alpha * b1)) * (1.0 + _coth(beta * tb))

    def w_g1(s):
        t = g1(s)
        return ((1.0 + _coth(beta * t))
                * (alpha * reg.values(s, t) + reg.d1s(s, t)))

    def w_g12(s):
        t = g12(s)
        return ((1.0 + _coth(beta * t))
                * (alpha * _coth(alpha * s) * reg.values(s, t) - reg.d1s(s, t)))

    def w_t(curve):
        def w(t):
            s = curve.inverse(t)
            return ((1.0 + _coth(alpha * s))
                    * (beta * reg.values(s, t) + reg.d2s(s, t)))
        return w

    one = lambda x: 1.0
    return [
        PointTerm(b1, tb, corner_w * reg.values(b1, tb)),
        SLineTerm(b1, c, g1, w_g1, c_val=one, c_d1=lambda s: 1.0 / alpha),
        SLineTerm(a, b1, g12, w_g12, c_val=lambda s: _coth(alpha * s),
                  c_d1=lambda s: -1.0 / alpha),
        TLineTerm(g2(a), g2(b2), g2, w_t(g2), c_val=one, c_d2=lambda t: 1.0 / beta),
        TLineTerm(g12(b1), g12(a), g12, w_t(g12), c_val=one,
                  c_d2=lambda t: 1.0 / beta),
        _ou_area_term(reg, alpha, beta),
    ]


def score_terms(model: FieldModel, domain: ValidatedDomain,
                reg: RegressorSet) -> list[ScoreTerm]:
    """Term list of the score functional for one model (shared by the direct
    evaluator and the harness's compiled form)."""
    if model.variant == "wiener":
        return _wiener_score_terms(domain, reg)
    if model.variant == "stationary_ou":
        return _stationary_score_terms(domain, reg, model.alpha, model.beta)
    if model.variant == "zero_start_ou":
        return _zero_start_score_terms(domain, reg, model.alpha, model.beta)
    raise ValueError(f"unknown variant {model.variant!r}")


def _eval_terms(terms: Sequence[ScoreTerm], Z, domain: ValidatedDomain,
                cfg: StochIntConfig, flags: list[str] | None) -> np.ndarray:
    ops = FieldOps(Z, cfg)
    total = None
    for term in terms:
        if isinstance(term, PointTerm):
            part = term.weights * ops.value(term.s0, term.t0)
        elif isinstance(term, SLineTerm):
            def f(s, term=term):
                t = term.curve(s)
                combo = 0.0
                if term.c_val is not None:
                    combo += term.c_val(s) * ops.value(s, t)
                if term.c_d1 is not None:
                    combo += term.c_d1(s) * ops.d1(s, t)
                return term.weight(s) * combo
            part = integrate_1d(f, term.lo, term.hi, cfg.quad, flags)
        elif isinstance(term, TLineTerm):
            def f(t, term=term):
                s = term.curve.inverse(t)
                combo = 0.0
                if term.c_val is not None:
                    combo += term.c_val(t) * ops.value(s, t)
                if term.c_d2 is not None:
                    combo += term.c_d2(t) * ops.d2(s, t)
                return term.weight(t) * combo
            part = integrate_1d(f, term.lo, term.hi, cfg.quad, flags)
        else:
            def f(s, t, term=term):
                combo = term.c_val * ops.value(s, t)
                if term.c_d1:
                    combo += term.c_d1 * ops.d1(s, t)
                if term.c_d2:
                    combo += term.c_d2 * ops.d2(s, t)
                if term.c_d12:
                    combo += term.c_d12 * ops.d12(s, t)
                return term.weight(s, t) * combo
            part = integrate_over_G(f, domain, cfg.quad, flags)
        total = part if total is None else total + part
    return np.asarray(total, dtype=float)


def score_wiener(Z, domain: ValidatedDomain, reg: RegressorSet,
                 cfg: StochIntConfig | None = None,
                 flags: list[str] | None = None) -> np.ndarray:
    """Score vector of the Wiener-driven model applied to the field ``Z``."""
    cfg = cfg or DEFAULT_STOCH
    return _eval_terms(_wiener_score_terms(domain, reg), Z, domain, cfg, flags)


def score_stationary_ou(Z, domain: ValidatedDomain, reg: RegressorSet,
                        alpha: float, beta: float,
                        cfg: StochIntConfig | None = None,
                        flags: list[str] | None = None) -> np.ndarray:
    cfg = cfg or DEFAULT_STOCH
    return _eval_terms(_stationary_score_terms(domain, reg, alpha, beta),
                       Z, domain, cfg, flags)


def score_zero_start_ou(Z, domain: ValidatedDomain, reg: RegressorSet,
                        alpha: float, beta: float,
                        cfg: StochIntConfig | None = None,
                        flags: list[str] | None = None) -> np.ndarray:
    if alpha <= 0 or beta <= 0:
        raise ValueError("zero-start estimation requires alpha > 0 and beta > 0")
    cfg = cfg or DEFAULT_STOCH
    return _eval_terms(_zero_start_score_terms(domain, reg, alpha, beta),
                       Z, domain, cfg, flags)


# ---------------------------------------------------------------------------
# information matrices

_TRI = {}  # p -> upper triangle indices


def _tri(p: int):
    if p not in _TRI:
        _TRI[p] = np.triu_indices(p)
    return _TRI[p]


def _upper(mat: np.ndarray) -> np.ndarray:
    iu = _tri(mat.shape[0])
    return mat[iu]


def _unflatten(flat: np.ndarray, p: int) -> np.ndarray:
    iu = _tri(p)
    A = np.zeros((p, p))
    A[iu] = flat
    A = A + A.T
    A[np.diag_indices(p)] /= 2.0
    return A


def fisher_wiener(domain: ValidatedDomain, reg: RegressorSet,
                  cfg: QuadConfig | None = None,
                  flags: list[str] | None = None) -> np.ndarray:
    """Information matrix of the Wiener-driven model: one corner product,
    two boundary integrals in ``s``, two in ``t``, and the domain integral
    of the mixed partials."""
    cfg = cfg or QuadConfig()
    sp = domain.spec
    a, b1, b2, c = sp.a, sp.b1, sp.b2, sp.c
    g12, g1, g2 = sp.gamma12, sp.gamma1, sp.gamma2
    p = reg.p
    tb = g12(b1)

    q = reg.values(b1, tb)
    acc = _upper(np.outer(q, q)) / (b1 * tb)

    def f_g12(s):
        t = g12(s)
        u = reg.values(s, t) - s * reg.d1s(s, t)
        return _upper(np.outer(u, u)) / (s * s * t)

    def f_g1(s):
        t = g1(s)
        u = reg.d1s(s, t)
        return _upper(np.outer(u, u)) / t

    def f_t(curve):
        def f(t):
            s = curve.inverse(t)
            u = reg.d2s(s, t)
            return _upper(np.outer(u, u)) / s
        return f

    def f_area(s, t):
        u = reg.d12s(s, t)
        return _upper(np.outer(u, u))

    acc = acc + integrate_1d(f_g12, a, b1, cfg, flags)
    acc = acc + integrate_1d(f_g1, b1, c, cfg, flags)
    acc = acc + integrate_1d(f_t(g2), g2(a), g2(b2), cfg, flags)
    acc = acc + integrate_1d(f_t(g12), g12(b1), g12(a), cfg, flags)
    acc = acc + integrate_over_G(f_area, domain, cfg, flags)
    return _unflatten(acc, p)


def _ou_area_integrand(reg: RegressorSet, alpha: float, beta: float):
    def f(s, t):
        v = reg.values(s, t)
        u1 = reg.d1s(s, t)
        u2 = reg.d2s(s, t)
        u12 = reg.d12s(s, t)
        return _upper(alpha * beta * np.outer(v, v)
                      + (beta / alpha) * np.outer(u1, u1)
                      + (alpha / beta) * np.outer(u2, u2)
                      + np.outer(u12, u12) / (alpha * beta))
    return f


def fisher_stationary_ou(domain: ValidatedDomain, reg: RegressorSet,
                         alpha: float, beta: float,
                         cfg: QuadConfig | None = None,
                         flags: list[str] | None = None) -> np.ndarray:
    """Information matrix of the stationary-OU model: four corner products,
    four boundary integrals in ``s``, four in ``t``, and the domain integral
    combining values, both first partials and the mixed partials."""
    cfg = cfg or QuadConfig()
    sp = domain.spec
    a, b1, b2, c = sp.a, sp.b1, sp.b2, sp.c
    g12, g1, g2, g0 = sp.gamma12, sp.gamma1, sp.gamma2, sp.gamma0
    p = reg.p

    acc = np.zeros(p * (p + 1) // 2)
    for s0, t0 in ((a, g2(a)), (c, g1(c)), (b1, g1(b1)), (b2, g2(b2))):
        v = reg.values(s0, t0)
        acc = acc + _upper(np.outer(v, v))

    def f_sym_s(curve):
        def f(s):
            t = curve(s)
            v = reg.values(s, t)
            u = reg.d1s(s, t)
            return _upper(alpha * np.outer(v, v) + np.outer(u, u) / alpha)
        return f

    def f_g1(s):
        t = g1(s)
        v, u = reg.values(s, t), reg.d1s(s, t)
        return _upper(np.outer(alpha * v + u, v + u / alpha))

    def f_g2(s):
        t = g2(s)
        v, u = reg.values(s, t), reg.d1s(s, t)
        return _upper(np.outer(alpha * v - u, v - u / alpha))

    def f_g12_t(t):
        s = g12.inverse(t)
        v, u = reg.values(s, t), reg.d2s(s, t)
        return _upper(np.outer(beta * v - u, v - u / beta))

    def f_sym_t(curve):
        def f(t):
            s = curve.inverse(t)
            v, u = reg.values(s, t), reg.d2s(s, t)
            return _upper(beta * np.outer(v, v) + np.outer(u, u) / beta)
        return f

    def f_g0_t(t):
        s = g0.inverse(t)
        v, u = reg.values(s, t), reg.d2s(s, t)
        return _upper(np.outer(beta * v + u, v + u / beta))

    acc = acc + integrate_1d(f_sym_s(g12), a, b1, cfg, flags)
    acc = acc + integrate_1d(f_g1, b1, c, cfg, flags)
    acc = acc + integrate_1d(f_g2, a, b2, cfg, flags)
    acc = acc + integrate_1d(f_sym_s(g0), b2, c, cfg, flags)
    acc = acc + integrate_1d(f_g12_t, g12(b1), g12(a), cfg, flags)
    acc = acc + integrate_1d(f_sym_t(g1), g1(b1), g1(c), cfg, flags)
    acc = acc + integrate_1d(f_sym_t(g2), g2(a), g2(b2), cfg, flags)
    acc = acc + integrate_1d(f_g0_t, g0(c), g0(b2), cfg, flags)
    acc = acc + integrate_over_G(_ou_area_integrand(reg, alpha, beta),
                                 domain, cfg, flags)
    return _unflatten(acc, p)


def fisher_zero_start_ou(domain: ValidatedDomain, reg: RegressorSet,
                         alpha: float, beta: float,
                         cfg: QuadConfig | None = None,
                         flags: list[str] | None = None) -> np.ndarray:
    """Information matrix of the zero-start-OU model: as in the stationary
    case but with hyperbolic-cotangent weights on the corner and boundary
    terms that touch the coordinate axes' influence region."""
    if alpha <= 0 or beta <= 0:
        raise ValueError("zero-start estimation requires alpha > 0 and beta > 0")
    cfg = cfg or QuadConfig()
    sp = domain.spec
    a, b1, b2, c = sp.a, sp.b1, sp.b2, sp.c
    g12, g1, g2, g0 = sp.gamma12, sp.gamma1, sp.gamma2, sp.gamma0
    p = reg.p

    acc = np.zeros(p * (p + 1) // 2)
    for s0, t0, w in ((a, g2(a), _coth(alpha * a) * _coth(beta * g2(a))),
                      (c, g1(c), 1.0),
                      (b1, g1(b1), _coth(beta * g1(b1))),
                      (b2, g2(b2), _coth(alpha * b2))):
        v = reg.values(s0, t0)
        acc = acc + w * _upper(np.outer(v, v))

    def f_g12_s(s):
        t = g12(s)
        v, u = reg.values(s, t), reg.d1s(s, t)
        return _coth(beta * t) * _upper(alpha * np.outer(v, v)
                                        + np.outer(u, u) / alpha)

    def f_g1_s(s):
        t = g1(s)
        v, u = reg.values(s, t), reg.d1s(s, t)
        return _coth(beta * t) * _upper(np.outer(alpha * v + u, v + u / alpha))

    def f_g2_s(s):
        t = g2(s)
        v, u = reg.values(s, t), reg.d1s(s, t)
        ct = _coth(alpha * s)
        return _upper(np.outer(alpha * ct * v - u, ct * v - u / alpha))

    def f_g0_s(s):
        t = g0(s)
        v, u = reg.values(s, t), reg.d1s(s, t)
        return _upper(alpha * np.outer(v, v) + np.outer(u, u) / alpha)

    def f_g12_t(t):
        s = g12.inverse(t)
        v, u = reg.values(s, t), reg.d2s(s, t)
        ct = _coth(beta * t)
        return _coth(alpha * s) * _upper(np.outer(beta * ct * v - u,
                                                  ct * v - u / beta))

    def f_g1_t(t):
        s = g1.inverse(t)
        v, u = reg.values(s, t), reg.d2s(s, t)
        return _upper(beta * np.outer(v, v) + np.outer(u, u) / beta)

    def f_g2_t(t):
        s = g2.inverse(t)
        v, u = reg.values(s, t), reg.d2s(s, t)
        return _coth(alpha * s) * _upper(beta * np.outer(v, v)
                                         + np.outer(u, u) / beta)

    def f_g0_t(t):
        s = g0.inverse(t)
        v, u = reg.values(s, t), reg.d2s(s, t)
        return _upper(np.outer(beta * v + u, v + u / beta))

    acc = acc + integrate_1d(f_g12_s, a, b1, cfg, flags)
    acc = acc + integrate_1d(f_g1_s, b1, c, cfg, flags)
    acc = acc + integrate_1d(f_g2_s, a, b2, cfg, flags)
    acc = acc + integrate_1d(f_g0_s, b2, c, cfg, flags)
    acc = acc + integrate_1d(f_g12_t, g12(b1), g12(a), cfg, flags)
    acc = acc + integrate_1d(f_g1_t, g1(b1), g1(c), cfg, flags)
    acc = acc + integrate_1d(f_g2_t, g2(a), g2(b2), cfg, flags)
    acc = acc + integrate_1d(f_g0_t, g0(c), g0(b2), cfg, flags)
    acc = acc + integrate_over_G(_ou_area_integrand(reg, alpha, beta),
                                 domain, cfg, flags)
    return _unflatten(acc, p)


def fisher_matrix(model: FieldModel, domain: ValidatedDomain,
                  reg: RegressorSet, cfg: QuadConfig | None = None,
                  flags: list[str] | None = None) -> np.ndarray:
    if model.variant == "wiener":
        return fisher_wiener(domain, reg, cfg, flags)
    if model.variant == "stationary_ou":
        return fisher_stationary_ou(domain, reg, model.alpha, model.beta, cfg, flags)
    if model.variant == "zero_start_ou":
        return fisher_zero_start_ou(domain, reg, model.alpha, model.beta, cfg, flags)
    raise ValueError(f"unknown variant {model.variant!r}")


def score_vector(model: FieldModel, Z, domain: ValidatedDomain,
                 reg: RegressorSet, cfg: StochIntConfig | None = None,
                 flags: list[str] | None = None) -> np.ndarray:
    cfg = cfg or DEFAULT_STOCH
    return _eval_terms(score_terms(model, domain, reg), Z, domain, cfg, flags)


# ---------------------------------------------------------------------------
# maximum likelihood


@dataclass(frozen=True, eq=False)
class EstimationResult:
    """Estimate plus everything needed to reconstruct the log density.

    ``a_inverse`` is the inverse information matrix; ``covariance`` carries
    the model prefactor ``sigma^2/(alpha*beta)`` for the OU variants (the
    two coincide for unit parameters).
    """

    model: FieldModel | None
    A: np.ndarray
    zeta: np.ndarray
    m_hat: np.ndarray
    a_inverse: np.ndarray
    covariance: np.ndarray
    diagnostics: tuple[str, ...] = ()

    def rn_prefactor(self) -> float:
        if self.model is None or self.model.variant == "wiener":
            return 0.5
        return self.model.alpha * self.model.beta / (2.0 * self.model.sigma ** 2)

    def log_rn_at(self, m: Sequence[float]) -> float:
        m = np.asarray(m, dtype=float)
        return -self.rn_prefactor() * float(m @ self.A @ m - 2.0 * self.zeta @ m)

    def to_json(self) -> dict:
        model = None
        if self.model is not None:
            model = {"variant": self.model.variant, "alpha": self.model.alpha,
                     "beta": self.model.beta, "sigma": self.model.sigma}
        return {
            "model": model,
            "A": self.A.tolist(),
            "zeta": self.zeta.tolist(),
            "m_hat": self.m_hat.tolist(),
            "a_inverse": self.a_inverse.tolist(),
            "covariance": self.covariance.tolist(),
            "diagnostics": list(self.diagnostics),
        }

    @staticmethod
    def from_json(obj: dict) -> "EstimationResult":
        model = None
        if obj.get("model") is not None:
            m = obj["model"]
            model = FieldModel(m["variant"], m.get("alpha"), m.get("beta"),
                               m.get("sigma"))
        return EstimationResult(
            model=model,
            A=np.asarray(obj["A"], dtype=float),
            zeta=np.asarray(obj["zeta"], dtype=float),
            m_hat=np.asarray(obj["m_hat"], dtype=float),
            a_inverse=np.asarray(obj["a_inverse"], dtype=float),
            covariance=np.asarray(obj["covariance"], dtype=float),
            diagnostics=tuple(obj.get("diagnostics", ())),
        )


def mle(A: np.ndarray, zeta: np.ndarray, model: FieldModel | None = None,
        diagnostics: Sequence[str] = ()) -> EstimationResult:
    """Solve ``A m_hat = zeta`` by Cholesky factorization.

    Raises :class:`SingularMatrix` when ``A`` is not positive definite,
    which for exact arithmetic means the regressors are linearly dependent
    on the observation domain.
    """
    A = np.asarray(A, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    scale = float(np.max(np.abs(A))) or 1.0
    if float(np.max(np.abs(A - A.T))) > 1e-8 * scale:
        raise ValueError("information matrix is not symmetric")
    A = 0.5 * (A + A.T)
    try:
        cho = scipy.linalg.cho_factor(A)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(str(exc)) from exc
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover (alias varies)
        raise SingularMatrix(str(exc)) from exc
    m_hat = scipy.linalg.cho_solve(cho, zeta)
    a_inv = scipy.linalg.cho_solve(cho, np.eye(A.shape[0]))
    a_inv = 0.5 * (a_inv + a_inv.T)
    if model is None or model.variant == "wiener":
        cov = a_inv
    else:
        cov = (model.sigma ** 2 / (model.alpha * model.beta)) * a_inv
    return EstimationResult(model=model, A=A, zeta=zeta, m_hat=m_hat,
                            a_inverse=a_inv, covariance=cov,
                            diagnostics=tuple(diagnostics))


def estimate(model: FieldModel, Z, domain: ValidatedDomain, reg: RegressorSet,
             quad_cfg: QuadConfig | None = None,
             stoch_cfg: StochIntConfig | None = None) -> EstimationResult:
    """Full pipeline: information matrix, score of ``Z``, then the solve."""
    flags: list[str] = []
    A = fisher_matrix(model, domain, reg, quad_cfg, flags)
    zeta = score_vector(model, Z, domain, reg, stoch_cfg, flags)
    return mle(A, zeta, model, diagnostics=flags)


# ---------------------------------------------------------------------------
# gridded observations


class GriddedField:
    """Bicubic-spline view of observations on a regular grid, satisfying the
    same field protocol as simulated samples so that the analytic-derivative
    integrals stay defined.  Interpolation error is the caller's concern."""

    def __init__(self, s_grid: np.ndarray, t_grid: np.ndarray,
                 values: np.ndarray):
        s_grid = np.asarray(s_grid, dtype=float)
        t_grid = np.asarray(t_grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if values.shape != (s_grid.size, t_grid.size):
            raise ValueError("values must have shape (len(s_grid), len(t_grid))")
        for name, g in (("s", s_grid), ("t", t_grid)):
            pitch = np.diff(g)
            if g.size < 4 or np.any(pitch <= 0):
                raise ValueError(f"{name} grid must be increasing with >= 4 points")
            if np.max(np.abs(pitch - pitch[0])) > 1e-9 * max(1.0, abs(pitch[0])):
                raise ValueError(f"{name} grid pitch is not uniform")
        self.s_grid, self.t_grid = s_grid, t_grid
        self._spline = RectBivariateSpline(s_grid, t_grid, values, kx=3, ky=3, s=0)

    @staticmethod
    def from_csv(path) -> "GriddedField":
        """Read ``s,t,z`` rows (header required, row-major regular grid)."""
        data = np.genfromtxt(path, delimiter=",", names=True)
        if data.dtype.names is None or set(data.dtype.names) != {"s", "t", "z"}:
            raise ValueError("grid CSV must have header 's,t,z'")
        s_grid = np.unique(data["s"])
        t_grid = np.unique(data["t"])
        if s_grid.size * t_grid.size != data.size:
            raise ValueError("grid CSV does not cover a complete rectangle")
        order = np.lexsort((data["t"], data["s"]))
        values = data["z"][order].reshape(s_grid.size, t_grid.size)
        return GriddedField(s_grid, t_grid, values)

    def _check(self, s: float, t: float) -> None:
        if not (self.s_grid[0] <= s <= self.s_grid[-1]
                and self.t_grid[0] <= t <= self.t_grid[-1]):
            raise OutOfRectangle(f"point ({s}, {t}) outside gridded data extent")

    def eval(self, s: float, t: float) -> float:
        self._check(s, t)
        return float(self._spline.ev(s, t))

    def d1(self, s: float, t: float) -> float:
        self._check(s, t)
        return float(self._spline.ev(s, t, dx=1))

    def d2(self, s: float, t: float) -> float:
        self._check(s, t)
        return float(self._spline.ev(s, t, dy=1))

    def d12(self, s: float, t: float) -> float:
        self._check(s, t)
        return float(self._spline.ev(s, t, dx=1, dy=1))
