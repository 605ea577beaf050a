"""Shape and moment properties of the EFWE law.

Moments and the mgf are computed by quadrature against the density.  The
triple-series closed form for the moments is kept in
:func:`raw_moment_series` as a literal transcription with diagnostics; it
does not agree with the quadrature value and should not be used for
numbers.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np

from . import distributions as dist
from .distributions import EfweParams
from .numerics import QuadSpec, find_root, integrate_semi_infinite

MODE_GRID = np.geomspace(1e-6, 1e6, 400)


class NoInteriorModeError(ArithmeticError):
    pass


@dataclass(frozen=True)
class StationaryPoint:
    x: float
    kind: str  # "max" or "min"
    log_pdf: float


def dlog_pdf(p: EfweParams, x):
    """Derivative of ``log f`` with respect to ``x``.

    ``-2 beta / (x^3 A) + A * (1 + e^z - lam * e^z * e^(e^z))`` with
    ``A = alpha + beta/x^2``.  Returns ``-inf`` once the last term overflows.
    """
    x = np.asarray(x, dtype=float)
    z = p.alpha * x - p.beta / x
    a = (p.alpha * x * x + p.beta) / (x * x)
    with np.errstate(over="ignore", invalid="ignore"):
        ez = np.exp(z)
        pull = np.exp(math.log(p.lam) + z + ez)
        out = -2.0 * p.beta / (x * (p.alpha * x * x + p.beta)) + a * (1.0 + ez - pull)
    out = np.where(np.isnan(out), -np.inf, out)
    return float(out) if out.ndim == 0 else out


def stationary_points(p: EfweParams, grid: np.ndarray = MODE_GRID, tol: float = 1e-12) -> list[StationaryPoint]:
    """All sign changes of ``d log f / dx`` found on ``grid``, refined by root finding."""
    g = dlog_pdf(p, grid)
    points = []
    for i in np.flatnonzero(np.sign(g[:-1]) != np.sign(g[1:])):
        lo, hi = float(grid[i]), float(grid[i + 1])
        x = find_root(lambda t: dlog_pdf(p, t), (lo, hi), tol=tol * max(1.0, lo))
        kind = "max" if g[i] > 0 else "min"
        points.append(StationaryPoint(x, kind, dist.log_pdf(p, x)))
    return points


def is_multimodal(p: EfweParams) -> bool:
    return sum(s.kind == "max" for s in stationary_points(p)) > 1


def mode(p: EfweParams) -> float:
    """Location of the highest local maximum of the density.

    When the density has several local maxima the tallest one is returned;
    use :func:`stationary_points` to see all of them (including the
    antimode between two peaks).
    """
    maxima = [s for s in stationary_points(p) if s.kind == "max"]
    if not maxima:
        raise NoInteriorModeError(f"no interior stationary maximum on [1e-6, 1e6] for {p}")
    return max(maxima, key=lambda s: s.log_pdf).x


def median(p: EfweParams) -> float:
    """Median of F; exists on x > 0 only when ``lam < log 2``."""
    return dist.quantile(p, 0.5)


def bowley_skewness(p: EfweParams) -> float:
    q25, q50, q75 = dist.quantile(p, np.array([0.25, 0.5, 0.75]))
    return float((q75 - 2.0 * q50 + q25) / (q75 - q25))


def moors_kurtosis(p: EfweParams) -> float:
    """Octile kurtosis ``((q7 - q5) + (q3 - q1)) / (q6 - q2)``; positive by construction."""
    q = dist.quantile(p, np.array([0.125, 0.25, 0.375, 0.625, 0.75, 0.875]))
    q125, q25, q375, q625, q75, q875 = q
    return float((q875 - q625 + q375 - q125) / (q75 - q25))


def _location(p: EfweParams) -> float:
    # a central quantile of the positive part, used to scale the quadrature map
    return float(dist.quantile(p, 0.5 * (1.0 + dist.defect(p))))


def raw_moment(p: EfweParams, r: int, spec: QuadSpec | None = None) -> float:
    """``int_0^inf x^r f(x) dx``.

    Because of the defect mass ``r = 0`` gives ``exp(-lam)``, and the
    moments of X given X > 0 are ``raw_moment(p, r) / exp(-lam)``.
    """
    if r < 0:
        raise ValueError(f"moment order must be >= 0, got {r}")

    def integrand(x: float) -> float:
        lp = dist.log_pdf(p, x)
        if lp == -math.inf:
            return 0.0
        return math.exp(r * math.log(x) + lp)

    return integrate_semi_infinite(integrand, spec, scale=_location(p))


def mgf(p: EfweParams, t: float, spec: QuadSpec | None = None) -> float:
    """``int_0^inf exp(t x) f(x) dx``; finite for every real ``t``."""

    def integrand(x: float) -> float:
        lp = dist.log_pdf(p, x)
        if lp == -math.inf:
            return 0.0
        return math.exp(t * x + lp)

    return integrate_semi_infinite(integrand, spec, scale=_location(p))


@dataclass(frozen=True)
class SeriesTruncation:
    max_i: int = 30
    max_j: int = 30
    max_k: int = 30
    term_floor: float = 1e-14

    def __post_init__(self):
        if min(self.max_i, self.max_j, self.max_k) < 0:
            raise ValueError("truncation caps must be >= 0")
        if self.term_floor <= 0:
            raise ValueError("term_floor must be positive")


@dataclass(frozen=True)
class SeriesResult:
    """Partial sum of the triple series and how it behaved.

    ``partial_sums[m]`` is the sum over outer indices ``i <= m``.
    ``growth_ratio`` is ``max |partial sum| / |first partial sum|``.
    ``settled`` is true when the outer index stopped on the term floor
    rather than on its cap.  A settled sum is still not the moment: the
    integrals the series is built from diverge.
    """

    value: float
    partial_sums: np.ndarray = field(repr=False)
    growth_ratio: float
    settled: bool
    skipped_poles: int


def _is_pole(arg: float) -> bool:
    return arg <= 0 and float(arg).is_integer()


def _bracket(p: EfweParams, r: float, j: int, k: int) -> tuple[float, int]:
    val, skipped = 0.0, 0
    a1 = r - k + 1
    if _is_pole(a1):
        skipped += 1
    else:
        val += math.gamma(a1) / (p.alpha ** (r - k) * (j + 1) ** a1)
    a2 = r - k - 1
    if _is_pole(a2):
        skipped += 1
    else:
        val += p.beta * math.gamma(a2) / (p.alpha ** (r - k - 1) * (j + 1) ** a2)
    return val, skipped


def raw_moment_series(p: EfweParams, r: float, trunc: SeriesTruncation | None = None) -> SeriesResult:
    """Evaluate the closed-form triple series for the r-th moment, term by term.

    Gamma factors at non-positive integers are dropped from the bracket
    (only the offending half of the bracket, not the whole term).  Each
    index stops at its cap, or once it is past the peak of its weights and
    the absolute size of its next contribution is below ``term_floor``.
    """
    trunc = trunc or SeriesTruncation()
    if r < 0:
        raise ValueError(f"moment order must be >= 0, got {r}")
    # stopping uses absolute magnitudes so that exact cancellation inside a
    # bracket cannot end a loop early
    total = 0.0
    partial = []
    skipped = 0
    settled = False
    for i in range(trunc.max_i + 1):
        outer = outer_abs = 0.0
        for j in range(trunc.max_j + 1):
            inner = inner_abs = 0.0
            for k in range(trunc.max_k + 1):
                br, sk = _bracket(p, r, j, k)
                skipped += sk
                c = (-1) ** k * p.beta**k * (j + 1) ** k / math.factorial(k) * br
                inner += c
                inner_abs += abs(c)
                if k > r + 1 and abs(c) < trunc.term_floor:
                    break
            w = (i + 1) ** j / math.factorial(j)
            outer += w * inner
            outer_abs += w * inner_abs
            if j > i + 1 and w * inner_abs < trunc.term_floor:
                break
        w = p.lam ** (i + 1) / math.factorial(i)
        total += (-1) ** i * w * outer
        partial.append(total)
        if i > 0 and w * outer_abs < trunc.term_floor:
            settled = True
            break
    partial = np.array(partial)
    first = abs(partial[0]) if partial[0] != 0 else 1.0
    return SeriesResult(
        value=float(total),
        partial_sums=partial,
        growth_ratio=float(np.max(np.abs(partial)) / first),
        settled=settled,
        skipped_poles=skipped,
    )


@dataclass(frozen=True)
class OrderStatSpec:
    r: int
    n: int

    def __post_init__(self):
        if not 1 <= self.r <= self.n:
            raise dist.DomainError(f"order statistic needs 1 <= r <= n, got r={self.r}, n={self.n}")


def order_stat_pdf(p: EfweParams, spec: OrderStatSpec, x):
    """Density of the r-th smallest of n draws.

    ``F^(r-1) S^(n-r) f / B(r, n-r+1)``, assembled in log space.
    """
    r, n = spec.r, spec.n
    log_s = np.asarray(dist.log_survival(p, x))
    log_cdf = np.log(-np.expm1(log_s))
    log_beta = math.lgamma(r) + math.lgamma(n - r + 1) - math.lgamma(n + 1)
    with np.errstate(invalid="ignore"):
        out = np.exp(
            (r - 1) * log_cdf + (n - r) * log_s + np.asarray(dist.log_pdf(p, x)) - log_beta
        )
    out = np.where(np.isnan(out), 0.0, out)
    return float(out) if out.ndim == 0 else out


def order_stat_pdf_expanded(p: EfweParams, spec: OrderStatSpec, x):
    """Same density through the binomial expansion of ``(1 - F)^(n-r)``.

    ``sum_i (-1)^i n! / (i! (r-1)! (n-r-i)!) F^(i+r-1) f``.  The alternating
    sum is accumulated in exact rational arithmetic from the float ``F``;
    in floating point it loses about ``(n-r) log10((1+F)/(1-F))`` digits.
    Provided for cross-checking.
    """
    r, n = spec.r, spec.n
    F = np.atleast_1d(np.asarray(dist.cdf(p, x), dtype=float))
    f = np.atleast_1d(np.asarray(dist.pdf(p, x), dtype=float))
    coefs = [
        (-1) ** i * math.factorial(n) // (math.factorial(i) * math.factorial(r - 1) * math.factorial(n - r - i))
        for i in range(n - r + 1)
    ]
    out = np.empty_like(F)
    for m, (Fm, fm) in enumerate(zip(F, f)):
        q = Fraction(float(Fm))
        total = sum(c * q ** (i + r - 1) for i, c in enumerate(coefs))
        out[m] = float(total) * fm
    return float(out[0]) if np.ndim(x) == 0 else out
