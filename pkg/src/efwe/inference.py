"""Maximum-likelihood fitting, observed information, K-S and model selection.

The EFWE likelihood is the product of EFWE densities over complete
(uncensored) lifetimes.  Since that density only carries mass
``exp(-lam)`` on x > 0, :func:`fit_mle` also offers
``likelihood="conditional"``, which divides each density by ``exp(-lam)``;
this adds ``n * lam`` to the log-likelihood and leaves the Hessian
unchanged.

For EFWE, ``lam`` is profiled out in closed form and the simplex search
runs over ``(log alpha, log beta)``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from statistics import NormalDist
from typing import Callable

import numpy as np

from . import distributions as dist
from .datasets import DataError, as_array
from .distributions import EfweParams, Family, RefModel
from .numerics import kolmogorov_pvalue, minimize

log = logging.getLogger(__name__)

LIKELIHOODS = ("full", "conditional")


class InformationMatrixError(np.linalg.LinAlgError):
    """Observed information is singular or not positive definite."""

    def __init__(self, message: str, eigenvalues: np.ndarray):
        super().__init__(f"{message}; eigenvalues = {np.array2string(eigenvalues, precision=4)}")
        self.eigenvalues = eigenvalues


class DegenerateDataError(DataError):
    pass


class SaturationWarning(RuntimeWarning):
    pass


def _check_likelihood(likelihood: str) -> bool:
    if likelihood not in LIKELIHOODS:
        raise ValueError(f"likelihood must be one of {LIKELIHOODS}, got {likelihood!r}")
    return likelihood == "conditional"


def _terms(x: np.ndarray, alpha: float, beta: float):
    z = alpha * x - beta / x
    with np.errstate(over="ignore"):
        ez = np.exp(z)
    return z, ez


def _logsumexp(v: np.ndarray) -> float:
    m = float(np.max(v))
    if not math.isfinite(m):
        return m
    return m + math.log(float(np.sum(np.exp(v - m))))


# ---------------------------------------------------------------------------
# EFWE likelihood and derivatives
# ---------------------------------------------------------------------------

def loglik(data, p: EfweParams, likelihood: str = "full") -> float:
    """Log-likelihood of complete lifetimes under EFWE.

    ``n log lam + sum log(alpha + beta/x^2) + sum z + sum e^z - lam * sum e^(e^z)``
    """
    conditional = _check_likelihood(likelihood)
    x = as_array(data)
    total = float(np.sum(dist.log_pdf(p, x)))
    return total + x.size * p.lam if conditional else total


def score(data, p: EfweParams, likelihood: str = "full") -> np.ndarray:
    """Gradient of :func:`loglik` with respect to ``(alpha, beta, lam)``."""
    conditional = _check_likelihood(likelihood)
    x = as_array(data)
    a, b, lam = p.alpha, p.beta, p.lam
    _, ez = _terms(x, a, b)
    with np.errstate(over="ignore", invalid="ignore"):
        g = ez * np.exp(ez)  # e^z e^(e^z)
        eez = np.exp(ez)
    d = b + a * x * x
    d_alpha = np.sum(x * x / d) + np.sum(x) + np.sum(x * ez) - lam * np.sum(x * g)
    d_beta = np.sum(1.0 / d) - np.sum(1.0 / x) - np.sum(ez / x) + lam * np.sum(g / x)
    d_lam = x.size / lam - np.sum(eez)
    if conditional:
        d_lam += x.size
    return np.array([d_alpha, d_beta, d_lam])


def hessian(data, p: EfweParams) -> np.ndarray:
    """Second derivatives of the log-likelihood (same for both likelihoods)."""
    x = as_array(data)
    a, b, lam = p.alpha, p.beta, p.lam
    _, ez = _terms(x, a, b)
    with np.errstate(over="ignore", invalid="ignore"):
        g = ez * np.exp(ez)
    d2 = (b + a * x * x) ** 2
    one_ez = 1.0 + ez
    h_aa = -np.sum(x**4 / d2) + np.sum(x * x * ez) - lam * np.sum(x * x * g * one_ez)
    h_ab = -np.sum(x * x / d2) - np.sum(ez) + lam * np.sum(g * one_ez)
    h_al = -np.sum(x * g)
    h_bb = -np.sum(1.0 / d2) + np.sum(ez / (x * x)) - lam * np.sum(g * one_ez / (x * x))
    h_bl = np.sum(g / x)
    h_ll = -x.size / lam**2
    return np.array([
        [h_aa, h_ab, h_al],
        [h_ab, h_bb, h_bl],
        [h_al, h_bl, h_ll],
    ])


@dataclass(frozen=True)
class ObservedInfo:
    matrix: np.ndarray
    inverse: np.ndarray


def _invert_information(info: np.ndarray) -> np.ndarray:
    info = 0.5 * (info + info.T)
    eig = np.linalg.eigvalsh(info)
    if not np.all(np.isfinite(eig)):
        raise InformationMatrixError("observed information is not finite", eig)
    try:
        chol = np.linalg.cholesky(info)
    except np.linalg.LinAlgError:
        raise InformationMatrixError("observed information is not positive definite", eig) from None
    if eig[0] <= eig[-1] * 1e-14:
        raise InformationMatrixError("observed information is numerically singular", eig)
    inv_l = np.linalg.inv(chol)
    cov = inv_l.T @ inv_l
    return 0.5 * (cov + cov.T)


def observed_info(data, p: EfweParams) -> ObservedInfo:
    """Observed information ``-H`` and its inverse (the covariance estimate)."""
    info = -hessian(data, p)
    return ObservedInfo(info, _invert_information(info))


def profile_lambda(data, alpha: float, beta: float, likelihood: str = "full") -> float:
    """Maximizer of the log-likelihood in ``lam`` with ``alpha, beta`` fixed.

    ``n / sum e^(e^z)``, or ``n / sum (e^(e^z) - 1)`` for the conditional
    likelihood.  Emits :class:`SaturationWarning` and returns the smallest
    positive float when the denominator overflows.
    """
    conditional = _check_likelihood(likelihood)
    x = as_array(data)
    log_lam = _log_profile_lambda(x, alpha, beta, conditional)
    lam = math.exp(log_lam) if log_lam > -745.0 else 0.0
    if lam == 0.0 or not math.isfinite(lam):
        warnings.warn(
            f"profiled lambda saturated (log lambda = {log_lam:.4g}) at alpha={alpha}, beta={beta}",
            SaturationWarning,
            stacklevel=2,
        )
        return float(np.nextafter(0.0, 1.0)) if lam == 0.0 else lam
    return lam


def _log_profile_lambda(x: np.ndarray, alpha: float, beta: float, conditional: bool) -> float:
    _, ez = _terms(x, alpha, beta)
    if conditional:
        # log sum (e^(e^z) - 1) = log sum exp(e^z + log(1 - e^(-e^z)))
        with np.errstate(divide="ignore"):
            lse = _logsumexp(ez + np.log(-np.expm1(-ez)))
    else:
        lse = _logsumexp(ez)
    return math.log(x.size) - lse


def _profile_nll(x: np.ndarray, log_ab: np.ndarray, conditional: bool) -> float:
    alpha, beta = np.exp(log_ab)
    if not (np.isfinite(alpha) and np.isfinite(beta) and alpha > 0 and beta > 0):
        return math.inf
    z, ez = _terms(x, alpha, beta)
    log_lam = _log_profile_lambda(x, alpha, beta, conditional)
    if not math.isfinite(log_lam):
        return math.inf
    log_a = np.log(alpha * x * x + beta) - 2.0 * np.log(x)
    # at the profiled lam, lam * sum(e^(e^z)) - [n lam] collapses to n
    ll = x.size * log_lam + np.sum(log_a) + np.sum(z) + np.sum(ez) - x.size
    return -float(ll) if math.isfinite(ll) else math.inf


# ---------------------------------------------------------------------------
# Reference families
# ---------------------------------------------------------------------------

def ref_loglik(data, model: RefModel) -> float:
    return float(np.sum(dist.ref_logpdf(model, as_array(data))))


def _numerical_hessian(fun: Callable[[np.ndarray], float], theta: np.ndarray, rel_step: float = 1e-4) -> np.ndarray:
    k = theta.size
    h = rel_step * np.maximum(np.abs(theta), 1e-8)
    H = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            ei = np.zeros(k)
            ej = np.zeros(k)
            ei[i] = h[i]
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                fun(theta + ei + ej) - fun(theta + ei - ej) - fun(theta - ei + ej) + fun(theta - ei - ej)
            ) / (4.0 * h[i] * h[j])
    return H


def _default_init(family: Family, x: np.ndarray) -> np.ndarray:
    mean = float(np.mean(x))
    med = float(np.median(x))
    if family is Family.FWE:
        a0 = 1.0 / mean
        return np.array([a0, min(max(a0 * med * med, 1e-3), 1e3)])
    if family is Family.WEIBULL:
        return np.array([mean, 1.0])
    if family is Family.LFR:
        a0 = 1.0 / mean
        return np.array([a0, a0 / mean])
    raise ValueError(family)


def _fit_ref(x: np.ndarray, family: Family, init) -> tuple[np.ndarray, bool]:
    start = np.asarray(init if init is not None else _default_init(family, x), dtype=float)

    def nll(v: np.ndarray) -> float:
        try:
            m = RefModel(family, tuple(np.exp(v)))
        except dist.DomainError:
            return math.inf
        return -ref_loglik(x, m)

    best = None
    v0 = np.log(start)
    for _ in range(4):
        res = minimize(nll, v0, tol=1e-9, step=0.2)
        if best is not None and abs(best.fun - res.fun) < 1e-10:
            best = res if res.fun < best.fun else best
            break
        best = res if best is None or res.fun < best.fun else best
        v0 = res.x
    return np.exp(best.x), best.converged


# ---------------------------------------------------------------------------
# Goodness of fit and model selection
# ---------------------------------------------------------------------------

def ks_statistic(data, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """One-sample Kolmogorov-Smirnov distance between the data and ``cdf``.

    Tied observations form one block: the empirical cdf jumps once, from
    the count below the block to the count through it.
    """
    x = as_array(data)
    n = x.size
    u, counts = np.unique(x, return_counts=True)
    upper = np.cumsum(counts) / n
    lower = upper - counts / n
    F = np.asarray(cdf(u), dtype=float)
    return float(max(np.max(upper - F), np.max(F - lower)))


@dataclass(frozen=True)
class InfoCriteria:
    aic: float
    aicc: float
    bic: float


def info_criteria(loglik: float, k: int, n: int) -> InfoCriteria:
    if n <= k + 1:
        raise ValueError(f"AICc needs n > k + 1, got n={n}, k={k}")
    aic = 2.0 * k - 2.0 * loglik
    return InfoCriteria(aic=aic, aicc=aic + 2.0 * k * (k + 1) / (n - k - 1), bic=k * math.log(n) - 2.0 * loglik)


def normal_quantile(p: float) -> float:
    return NormalDist().inv_cdf(p)


# ---------------------------------------------------------------------------
# Fit result
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    family: Family
    model: EfweParams | RefModel
    estimates: np.ndarray
    n: int
    loglik: float
    aic: float
    aicc: float
    bic: float
    ks_stat: float
    ks_pvalue: float
    vcov: np.ndarray | None
    ci: dict[str, tuple[float, float]] | None
    level: float
    converged: bool
    score_norm: float
    defect: float
    likelihood: str = "full"
    notes: tuple[str, ...] = field(default=())

    @property
    def param_names(self) -> tuple[str, ...]:
        return self.family.param_names

    @property
    def k(self) -> int:
        return self.family.n_params

    @property
    def std_errors(self) -> np.ndarray | None:
        return None if self.vcov is None else np.sqrt(np.diag(self.vcov))

    def to_dict(self) -> dict:
        return {
            "model": self.family.value,
            "params": dict(zip(self.param_names, map(float, self.estimates))),
            "loglik": self.loglik,
            "aic": self.aic,
            "aicc": self.aicc,
            "bic": self.bic,
            "ks": self.ks_stat,
            "ks_pvalue": self.ks_pvalue,
            "ci": None if self.ci is None else {k: list(v) for k, v in self.ci.items()},
            "ci_level": self.level,
            "vcov": None if self.vcov is None else self.vcov.tolist(),
            "defect": self.defect,
            "converged": self.converged,
            "score_norm": self.score_norm,
            "n": self.n,
            "likelihood": self.likelihood,
            "notes": list(self.notes),
        }


def wald_ci(fit: FitResult, level: float = 0.95) -> dict[str, tuple[float, float]]:
    """``estimate +/- z_(delta/2) * se`` for each parameter, ``delta = 1 - level``."""
    if fit.vcov is None:
        raise InformationMatrixError("fit has no covariance matrix", np.array([]))
    if not 0.0 <= level < 1.0:
        raise ValueError(f"confidence level must be in [0, 1), got {level}")
    var = np.diag(fit.vcov)
    if np.any(var < 0):
        raise InformationMatrixError("negative variance on the diagonal", np.linalg.eigvalsh(fit.vcov))
    z = normal_quantile(0.5 + 0.5 * level)
    se = np.sqrt(var)
    return {
        name: (float(est - z * s), float(est + z * s))
        for name, est, s in zip(fit.param_names, fit.estimates, se)
    }


def _fit_efwe(x: np.ndarray, init, conditional: bool) -> tuple[EfweParams, bool]:
    likelihood = "conditional" if conditional else "full"
    if init is not None:
        starts = [np.log(np.asarray(init, dtype=float)[:2])]
    else:
        fwe, _ = _fit_ref(x, Family.FWE, None)
        starts = [np.log(fwe), np.log(fwe) + np.array([0.0, math.log(0.5)])]
        log.debug("EFWE seeded from FWE fit %s", fwe)

    best = None
    for s in starts:
        v0 = s
        for _ in range(4):
            res = minimize(lambda v: _profile_nll(x, v, conditional), v0, tol=1e-9, step=0.2)
            done = abs(res.fun - _profile_nll(x, v0, conditional)) < 1e-10
            v0 = res.x
            if done:
                break
        if best is None or res.fun < best.fun:
            best = res
    alpha, beta = np.exp(best.x)
    p = EfweParams(float(alpha), float(beta), profile_lambda(x, alpha, beta, likelihood))

    # a few Newton steps on the analytic score as a polish / certificate
    theta = p.as_array()
    ll = loglik(x, p, likelihood)
    for _ in range(5):
        g = score(x, EfweParams(*theta), likelihood)
        try:
            step = np.linalg.solve(hessian(x, EfweParams(*theta)), -g)
        except np.linalg.LinAlgError:
            break
        cand = theta + step
        if np.any(cand <= 0):
            break
        cand_ll = loglik(x, EfweParams(*cand), likelihood)
        if not cand_ll >= ll:
            break
        theta, ll = cand, cand_ll
    return EfweParams(*map(float, theta)), best.converged


def fit_mle(
    data,
    family: Family | str = Family.EFWE,
    init=None,
    level: float = 0.95,
    likelihood: str = "full",
) -> FitResult:
    """Maximum-likelihood fit of one family to complete lifetimes.

    Args:
        data: :class:`Dataset` or array of positive lifetimes.
        family: ``efwe``, ``fwe``, ``weibull`` or ``lfr``.
        init: Optional starting parameters in the family's natural order
            (only ``alpha, beta`` are used for EFWE).
        level: Confidence level of the Wald intervals.
        likelihood: ``"full"`` (unnormalized density) or ``"conditional"``
            (density renormalized to x > 0). EFWE only.

    Returns:
        A :class:`FitResult`. ``converged`` requires the simplex to have
        converged, the observed information to be positive definite and,
        for EFWE, ``max |score| / n < 1e-4``.

    Raises:
        DegenerateDataError: All observations are equal.
        DataError: Too few observations for the family.
    """
    family = Family(family)
    conditional = _check_likelihood(likelihood)
    if conditional and family is not Family.EFWE:
        raise ValueError("the conditional likelihood only applies to EFWE")
    x = as_array(data)
    n, k = x.size, family.n_params
    if n < k + 2:
        raise DataError(f"{family.value} needs at least {k + 2} observations, got {n}")
    if np.all(x == x[0]):
        raise DegenerateDataError("all observations are equal")

    notes = []
    if family is Family.EFWE:
        model, ok = _fit_efwe(x, init, conditional)
        estimates = model.as_array()
        ll = loglik(x, model, likelihood)
        score_norm = float(np.max(np.abs(score(x, model, likelihood)))) / n
        info_matrix = -hessian(x, model)
        defect = dist.defect(model)
        cdf_fn = lambda t: dist.cdf(model, t)  # noqa: E731
        ok = ok and score_norm < 1e-4
    else:
        estimates, ok = _fit_ref(x, family, init)
        model = RefModel(family, tuple(estimates))

        def ll_of(theta: np.ndarray) -> float:
            try:
                return ref_loglik(x, RefModel(family, tuple(theta)))
            except dist.DomainError:
                return -math.inf

        ll = ll_of(estimates)
        info_matrix = -_numerical_hessian(ll_of, estimates)
        score_norm = float("nan")
        defect = 0.0
        cdf_fn = lambda t: dist.ref_cdf(model, t)  # noqa: E731

    try:
        vcov = _invert_information(info_matrix)
    except InformationMatrixError as exc:
        notes.append(str(exc))
        vcov = None
        ok = False

    crit = info_criteria(ll, k, n)
    ks = ks_statistic(x, cdf_fn)
    fit = FitResult(
        family=family,
        model=model,
        estimates=np.asarray(estimates, dtype=float),
        n=n,
        loglik=ll,
        aic=crit.aic,
        aicc=crit.aicc,
        bic=crit.bic,
        ks_stat=ks,
        ks_pvalue=kolmogorov_pvalue(ks, n),
        vcov=vcov,
        ci=None,
        level=level,
        converged=bool(ok),
        score_norm=score_norm,
        defect=defect,
        likelihood=likelihood,
        notes=tuple(notes),
    )
    if vcov is not None:
        fit = replace(fit, ci=wald_ci(fit, level))
    return fit


# ---------------------------------------------------------------------------
# Kaplan-Meier
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KmCurve:
    """Product-limit survival estimate; ``surv[j]`` holds on ``[times[j], times[j+1])``."""

    times: np.ndarray
    surv: np.ndarray
    at_risk: np.ndarray
    events: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.times, t, side="right") - 1
        out = np.where(idx >= 0, self.surv[np.clip(idx, 0, None)], 1.0)
        return float(out) if out.ndim == 0 else out


def kaplan_meier(data) -> KmCurve:
    x = as_array(data)
    times, events = np.unique(x, return_counts=True)
    at_risk = x.size - np.concatenate([[0], np.cumsum(events)[:-1]])
    surv = np.cumprod(1.0 - events / at_risk)
    return KmCurve(times, surv, at_risk, events)
