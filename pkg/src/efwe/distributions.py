"""EFWE lifetime distribution and the reference families it is compared against.

The EFWE law has cdf ``F(x) = 1 - exp(-lam * exp(exp(alpha*x - beta/x)))`` on
``x > 0``.  Every evaluator here works from the link ``z = alpha*x - beta/x``
and ``exp(z)`` in log space, because ``exp(exp(z))`` overflows once ``z``
passes ~6.56.

Note that ``F(0+) = 1 - exp(-lam) > 0``: the density integrates to
``exp(-lam)`` over the positive half-line.  :func:`defect` exposes the
missing mass and :class:`SamplePolicy` decides what the sampler does
about it.

All evaluators accept scalars or numpy arrays for ``x``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class DomainError(ValueError):
    """Argument outside the domain of the function."""


class BelowSupportError(DomainError):
    """Requested probability lies in the mass not covered by x > 0."""

    def __init__(self, q: float, threshold: float):
        super().__init__(
            f"q={q!r} does not exceed F(0+) = 1 - exp(-lambda) = {threshold!r}; "
            "no positive quantile exists"
        )
        self.q = q
        self.threshold = threshold


class SampleDefectError(RuntimeError):
    """STRICT sampling drew a uniform inside the defect mass."""

    def __init__(self, defect_mass: float, count: int, u: float):
        super().__init__(
            f"{count} uniform draw(s) fell at or below F(0+) = {defect_mass:.6g} "
            f"(first offending u = {u:.6g}); the positive-support density has "
            f"total mass {1.0 - defect_mass:.6g}"
        )
        self.defect_mass = defect_mass
        self.count = count
        self.u = u


@dataclass(frozen=True)
class EfweParams:
    alpha: float
    beta: float
    lam: float

    def __post_init__(self):
        for name in ("alpha", "beta", "lam"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be a positive finite number, got {v!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.lam])


class SamplePolicy(enum.Enum):
    CONDITIONAL = "conditional"
    STRICT = "strict"


def _positive(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("lifetimes must be strictly positive")
    return x


def _out(v: np.ndarray):
    return float(v) if v.ndim == 0 else v


def _parts(p: EfweParams, x):
    """Return (x, z, exp(z), log of (alpha + beta/x^2))."""
    x = _positive(x)
    z = p.alpha * x - p.beta / x
    with np.errstate(over="ignore"):
        ez = np.exp(z)
    log_a = np.log(p.alpha * x * x + p.beta) - 2.0 * np.log(x)
    return x, z, ez, log_a


def _log_cum_hazard(p: EfweParams, ez: np.ndarray) -> np.ndarray:
    # log(lam * exp(exp(z))) = log(lam) + exp(z); stays finite while H itself overflows
    return math.log(p.lam) + ez


def defect(p: EfweParams) -> float:
    """Probability mass ``1 - exp(-lam)`` not carried by the density on x > 0."""
    return -math.expm1(-p.lam)


def link(p: EfweParams, x):
    x = _positive(x)
    return _out(p.alpha * x - p.beta / x)


def log_survival(p: EfweParams, x):
    _, _, ez, _ = _parts(p, x)
    with np.errstate(over="ignore"):
        return _out(-np.exp(_log_cum_hazard(p, ez)))


def survival(p: EfweParams, x):
    return _out(np.exp(np.asarray(log_survival(p, x))))


def cdf(p: EfweParams, x):
    return _out(-np.expm1(np.asarray(log_survival(p, x))))


def log_pdf(p: EfweParams, x):
    """``log f(x) = log lam + log(alpha + beta/x^2) + z + e^z - lam*e^(e^z)``."""
    _, z, ez, log_a = _parts(p, x)
    with np.errstate(over="ignore", invalid="ignore"):
        log_s = -np.exp(_log_cum_hazard(p, ez))
        out = math.log(p.lam) + log_a + z + ez + log_s
    # z -> +inf makes e^z - lam*e^(e^z) an inf - inf; the limit is -inf
    out = np.where(np.isnan(out), -np.inf, out)
    return _out(out)


def pdf(p: EfweParams, x):
    return _out(np.exp(np.asarray(log_pdf(p, x))))


def log_hazard(p: EfweParams, x):
    _, z, ez, log_a = _parts(p, x)
    return _out(math.log(p.lam) + log_a + z + ez)


def hazard(p: EfweParams, x):
    with np.errstate(over="ignore"):
        return _out(np.exp(np.asarray(log_hazard(p, x))))


def reversed_hazard(p: EfweParams, x):
    """``f(x) / F(x)``, evaluated as ``exp(log f - log F)``."""
    ls = np.asarray(log_survival(p, x))
    log_f_cdf = np.log(-np.expm1(ls))
    return _out(np.exp(np.asarray(log_pdf(p, x)) - log_f_cdf))


def cumulative_hazard(p: EfweParams, x):
    """``-log S(x) = lam * exp(exp(z))``.

    Closed form; it equals the integral of the hazard
    from 0 only up to the constant ``lam`` (``H(0+) = lam``).
    """
    return _out(-np.asarray(log_survival(p, x)))


def _k_of_log_survival(p: EfweParams, log_s: np.ndarray) -> np.ndarray:
    # k = log(log(-log(1 - q) / lam)) written in terms of log S = log(1 - q)
    w = -log_s / p.lam
    return np.log(np.log(w))


def _solve_link(p: EfweParams, k: np.ndarray) -> np.ndarray:
    # positive root of alpha*x^2 - k*x - beta = 0
    disc = np.sqrt(k * k + 4.0 * p.alpha * p.beta)
    with np.errstate(divide="ignore", invalid="ignore"):
        # for k << 0 the '+' branch cancels; use the conjugate form there
        neg = 2.0 * p.beta / (disc - k)
        pos = (k + disc) / (2.0 * p.alpha)
    return np.where(k < 0, neg, pos)


def quantile(p: EfweParams, q):
    """Positive solution ``x`` of ``F(x) = q``.

    Raises:
        BelowSupportError: ``q <= 1 - exp(-lam)``; the quantile would sit in
            the mass that the density does not cover.
        DomainError: ``q >= 1`` or ``q`` not a number.
    """
    q = np.asarray(q, dtype=float)
    if np.any(~(q < 1.0)):
        raise DomainError("quantile order must be < 1")
    threshold = defect(p)
    bad = ~(q > threshold)
    if np.any(bad):
        raise BelowSupportError(float(q[bad].flat[0]), threshold)
    k = _k_of_log_survival(p, np.log1p(-q))
    return _out(_solve_link(p, k))


def sample(
    p: EfweParams,
    n: int,
    seed: int | None = None,
    policy: SamplePolicy = SamplePolicy.CONDITIONAL,
) -> np.ndarray:
    """Inverse-transform sampling.

    ``CONDITIONAL`` draws from the law of X given X > 0, i.e. uniforms on
    ``(1 - exp(-lam), 1)``.  ``STRICT`` draws uniforms on (0, 1) as
    the textbook recipe does and raises :class:`SampleDefectError` if any
    of them lands in the defect mass.
    """
    if n < 0:
        raise DomainError(f"sample size must be >= 0, got {n}")
    rng = np.random.default_rng(seed)
    if policy is SamplePolicy.STRICT:
        u = rng.random(n)
        threshold = defect(p)
        bad = u <= threshold
        if np.any(bad):
            raise SampleDefectError(threshold, int(bad.sum()), float(u[bad][0]))
        return np.asarray(quantile(p, u), dtype=float).reshape(n)

    # survival probability S = exp(-lam) * v with v uniform on (0, 1)
    v = 1.0 - rng.random(n)
    v = np.minimum(v, np.nextafter(1.0, 0.0))
    log_s = -p.lam + np.log(v)
    return _solve_link(p, _k_of_log_survival(p, log_s)).reshape(n)


# ---------------------------------------------------------------------------
# Reference families
# ---------------------------------------------------------------------------

class Family(enum.Enum):
    EFWE = "efwe"
    FWE = "fwe"
    WEIBULL = "weibull"
    LFR = "lfr"

    @property
    def n_params(self) -> int:
        return 3 if self is Family.EFWE else 2

    @property
    def param_names(self) -> tuple[str, ...]:
        return {
            Family.EFWE: ("alpha", "beta", "lambda"),
            Family.FWE: ("alpha", "beta"),
            Family.WEIBULL: ("scale", "shape"),
            Family.LFR: ("a", "b"),
        }[self]


@dataclass(frozen=True)
class RefModel:
    """A two-parameter comparison model.

    FWE: ``(alpha, beta)`` with cdf ``1 - exp(-exp(alpha*x - beta/x))``.
    WEIBULL: ``(scale, shape)`` with cdf ``1 - exp(-(x/scale)**shape)``.
    LFR: ``(a, b)`` with hazard ``a + b*x``; ``b = 0`` is the exponential.
    """

    family: Family
    params: tuple[float, ...]

    def __post_init__(self):
        if self.family is Family.EFWE:
            raise DomainError("EFWE is not a reference family; use EfweParams")
        params = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", params)
        if len(params) != 2:
            raise DomainError(f"{self.family.value} takes 2 parameters, got {len(params)}")
        if not all(math.isfinite(v) for v in params):
            raise DomainError("parameters must be finite")
        if self.family is Family.LFR:
            a, b = params
            if not (a > 0 and b >= 0):
                raise DomainError(f"LFR needs a > 0 and b >= 0, got {params}")
        elif not all(v > 0 for v in params):
            raise DomainError(f"{self.family.value} parameters must be positive, got {params}")


def _ref_log_survival_and_log_hazard(m: RefModel, x: np.ndarray):
    u, v = m.params
    if m.family is Family.FWE:
        z = u * x - v / x
        with np.errstate(over="ignore"):
            ez = np.exp(z)
        log_h = np.log(u * x * x + v) - 2.0 * np.log(x) + z
        return -ez, log_h
    if m.family is Family.WEIBULL:
        r = x / u
        return -(r**v), math.log(v / u) + (v - 1.0) * np.log(r)
    # LFR
    return -(u * x + 0.5 * v * x * x), np.log(u + v * x)


def ref_log_survival(m: RefModel, x):
    x = _positive(x)
    return _out(_ref_log_survival_and_log_hazard(m, x)[0])


def ref_cdf(m: RefModel, x):
    return _out(-np.expm1(np.asarray(ref_log_survival(m, x))))


def ref_survival(m: RefModel, x):
    return _out(np.exp(np.asarray(ref_log_survival(m, x))))


def ref_logpdf(m: RefModel, x):
    x = _positive(x)
    log_s, log_h = _ref_log_survival_and_log_hazard(m, x)
    with np.errstate(invalid="ignore"):
        out = log_h + log_s
    return _out(np.where(np.isnan(out), -np.inf, out))


def ref_pdf(m: RefModel, x):
    return _out(np.exp(np.asarray(ref_logpdf(m, x))))


def ref_hazard(m: RefModel, x):
    x = _positive(x)
    with np.errstate(over="ignore"):
        return _out(np.exp(_ref_log_survival_and_log_hazard(m, x)[1]))


def make_model(family: Family | str, params: Sequence[float]):
    """Build :class:`EfweParams` or :class:`RefModel` from a family tag."""
    family = Family(family)
    if family is Family.EFWE:
        return EfweParams(*params)
    return RefModel(family, tuple(params))


def model_cdf(model, x):
    return cdf(model, x) if isinstance(model, EfweParams) else ref_cdf(model, x)


def model_survival(model, x):
    return survival(model, x) if isinstance(model, EfweParams) else ref_survival(model, x)


def model_logpdf(model, x):
    return log_pdf(model, x) if isinstance(model, EfweParams) else ref_logpdf(model, x)


def model_hazard(model, x):
    return hazard(model, x) if isinstance(model, EfweParams) else ref_hazard(model, x)
