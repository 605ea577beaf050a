"""Numerical kernels shared by the rest of the package.

Bracketed root finding, adaptive quadrature on (0, inf), a Nelder-Mead
simplex minimizer and the asymptotic Kolmogorov distribution.  Everything
here is pure Python on floats (numpy only for vector arithmetic in the
simplex) and has no dependency on the distribution code.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

EPS = np.finfo(float).eps


class NumericsError(ArithmeticError):
    """Base class for failures inside the numerical kernels."""


class BracketError(NumericsError, ValueError):
    """The function does not change sign over the bracket."""


class EvaluationError(NumericsError):
    """The objective returned NaN."""


class QuadratureError(NumericsError):
    """Adaptive quadrature ran out of refinements before meeting tolerance."""

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(f"{message} (estimate={estimate!r}, error bound={error!r})")
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class QuadSpec:
    """Tolerances for :func:`integrate_semi_infinite`.

    ``max_refinements`` bounds the bisection depth of any single panel, so
    the narrowest panel has width ``2**-max_refinements`` in the mapped
    variable.  ``max_panels`` is a global budget on panel evaluations.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_refinements: int = 60
    max_panels: int = 20000

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_refinements < 1:
            raise ValueError("max_refinements must be >= 1")


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------

def _checked(f: Callable[[float], float], x: float) -> float:
    y = float(f(x))
    if math.isnan(y):
        raise EvaluationError(f"objective returned NaN at x={x!r}")
    return y


def find_root(
    f: Callable[[float], float],
    bracket: Bracket | tuple[float, float],
    tol: float = 1e-12,
    maxiter: int = 500,
) -> float:
    """Find a zero of ``f`` inside a sign-change bracket.

    Brent's scheme (inverse quadratic interpolation, secant, bisection).  A
    pure bisection step is forced whenever three consecutive steps fail to
    halve the bracket, and whenever ``f`` returns an infinite value, so the
    width shrinks geometrically no matter how flat or steep ``f`` is.

    Args:
        f: Continuous scalar function.
        bracket: Interval with ``f(lo) * f(hi) <= 0``.
        tol: Absolute width of the final bracket.
        maxiter: Hard cap on iterations (never reached for sane ``tol``).

    Returns:
        A point within ``tol`` of a sign change of ``f``.

    Raises:
        BracketError: No sign change over the bracket.
        EvaluationError: ``f`` produced NaN.
    """
    if not isinstance(bracket, Bracket):
        bracket = Bracket(*bracket)
    xpre, xcur = float(bracket.lo), float(bracket.hi)
    fpre, fcur = _checked(f, xpre), _checked(f, xcur)
    if fpre == 0.0:
        return xpre
    if fcur == 0.0:
        return xcur
    if (fpre > 0) == (fcur > 0):
        raise BracketError(f"no sign change on [{xpre}, {xcur}]: f={fpre!r}, {fcur!r}")

    # xcur: best estimate; xblk: contrapoint with opposite sign
    xblk = fblk = 0.0
    spre = scur = 0.0
    width = abs(xcur - xpre)
    stalls = 0
    for _ in range(maxiter):
        if (fpre > 0) != (fcur > 0):
            xblk, fblk = xpre, fpre
            spre = scur = xcur - xpre
        if abs(fblk) < abs(fcur):
            xpre, xcur, xblk = xcur, xblk, xcur
            fpre, fcur, fblk = fcur, fblk, fcur

        delta = EPS * abs(xcur) + 0.5 * tol
        sbis = 0.5 * (xblk - xcur)
        if fcur == 0.0 or abs(sbis) <= delta:
            return xcur

        new_width = abs(xblk - xcur)
        if new_width > 0.5 * width:
            stalls += 1
        else:
            stalls, width = 0, new_width

        smooth = math.isfinite(fcur) and math.isfinite(fpre) and math.isfinite(fblk)
        if smooth and stalls < 3 and abs(spre) > delta and abs(fcur) < abs(fpre):
            if xpre == xblk:
                stry = -fcur * (xcur - xpre) / (fcur - fpre)
            else:
                dpre = (fpre - fcur) / (xpre - xcur)
                dblk = (fblk - fcur) / (xblk - xcur)
                stry = -fcur * (fblk * dblk - fpre * dpre) / (dblk * dpre * (fblk - fpre))
            if 2.0 * abs(stry) < min(abs(spre), 3.0 * abs(sbis) - delta):
                spre, scur = scur, stry
            else:
                spre = scur = sbis
        else:
            spre = scur = sbis
            if stalls >= 3:
                stalls, width = 0, new_width

        xpre, fpre = xcur, fcur
        xcur += scur if abs(scur) > delta else math.copysign(delta, sbis)
        fcur = _checked(f, xcur)
    return xcur


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

# 15-point Gauss-Kronrod rule with the embedded 7-point Gauss rule on [-1, 1].
_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


def _gk15(g: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    f0 = g(center)
    kronrod = _WGK[7] * f0
    gauss = _WG[3] * f0
    for j in range(7):
        dx = half * _XGK[j]
        pair = g(center - dx) + g(center + dx)
        kronrod += _WGK[j] * pair
        if j % 2 == 1:
            gauss += _WG[j // 2] * pair
    return kronrod * half, abs((kronrod - gauss) * half)


def integrate_semi_infinite(
    f: Callable[[float], float],
    spec: QuadSpec | None = None,
    *,
    scale: float = 1.0,
    initial_panels: int = 16,
) -> float:
    """Integrate ``f`` over (0, inf).

    Substitutes ``x = scale * t / (1 - t)`` and runs globally adaptive
    Gauss-Kronrod (7/15) on ``t`` in (0, 1), always bisecting the panel with
    the largest error estimate.  ``scale`` moves the bulk of the mass
    towards ``t = 1/2`` and should be of the order of the integrand's
    location; it does not change the value.

    Raises:
        QuadratureError: The error estimate never fell below
            ``max(abs_tol, rel_tol * |I|)`` within the refinement budget.
    """
    spec = spec or QuadSpec()
    if scale <= 0:
        raise ValueError("scale must be positive")

    def g(t: float) -> float:
        u = 1.0 - t
        val = f(scale * t / u)
        if val == 0.0:
            return 0.0
        val = val * scale / (u * u)
        if math.isnan(val):
            raise EvaluationError(f"integrand returned NaN at x={scale * t / u!r}")
        return val

    heap: list[tuple[float, float, float, float, int]] = []
    total = err_total = 0.0
    edges = np.linspace(0.0, 1.0, initial_panels + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        val, err = _gk15(g, float(a), float(b))
        total += val
        err_total += err
        heapq.heappush(heap, (-err, float(a), float(b), val, 0))
    panels = initial_panels

    while err_total > max(spec.abs_tol, spec.rel_tol * abs(total)):
        neg_err, a, b, val, depth = heapq.heappop(heap)
        if depth >= spec.max_refinements or panels + 2 > spec.max_panels:
            raise QuadratureError("refinement budget exhausted", total, err_total)
        mid = 0.5 * (a + b)
        v1, e1 = _gk15(g, a, mid)
        v2, e2 = _gk15(g, mid, b)
        total += v1 + v2 - val
        err_total += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, a, mid, v1, depth + 1))
        heapq.heappush(heap, (-e2, mid, b, v2, depth + 1))
        panels += 2
        if len(heap) % 64 == 0:
            # re-sum to stop rounding drift in the running totals
            total = math.fsum(h[3] for h in heap)
            err_total = math.fsum(-h[0] for h in heap)
    return math.fsum(h[3] for h in heap)


# ---------------------------------------------------------------------------
# Nelder-Mead
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MinimizeResult:
    x: np.ndarray
    fun: float
    converged: bool
    iterations: int
    evaluations: int


def minimize(
    objective: Callable[[np.ndarray], float],
    init: Sequence[float],
    tol: float = 1e-8,
    *,
    step: float | Sequence[float] | None = None,
    maxiter: int = 20000,
) -> MinimizeResult:
    """Derivative-free Nelder-Mead minimization.

    Standard coefficients (reflect 1, expand 2, contract 1/2, shrink 1/2).
    Stops once both the simplex diameter (infinity norm, measured from the
    best vertex) and the spread of objective values are below ``tol``, or
    below a few ulps of the best vertex when ``tol`` is finer than that.
    Non-finite objective values are treated as +inf, which lets callers
    encode hard constraints.

    Args:
        objective: Function of a 1-D array.
        init: Starting point; must give a finite objective.
        tol: Convergence tolerance on both simplex size and value spread.
        step: Initial edge length(s). Defaults to 5% of each nonzero
            coordinate and 0.1 for zero coordinates.
        maxiter: Iteration cap; on hitting it the best vertex is returned
            with ``converged=False``.
    """
    x0 = np.asarray(init, dtype=float).ravel()
    n = x0.size
    nev = 0

    def fn(x: np.ndarray) -> float:
        nonlocal nev
        nev += 1
        v = float(objective(x))
        if math.isnan(v):
            return math.inf
        return v

    if step is None:
        steps = np.where(x0 != 0.0, 0.05 * np.abs(x0), 0.1)
    else:
        steps = np.broadcast_to(np.asarray(step, dtype=float), (n,)).copy()

    f0 = fn(x0)
    if not math.isfinite(f0):
        raise EvaluationError(f"objective not finite at the initial point {x0}")

    sim = np.empty((n + 1, n))
    sim[0] = x0
    for i in range(n):
        sim[i + 1] = x0
        sim[i + 1, i] += steps[i]
    fsim = np.array([f0] + [fn(v) for v in sim[1:]])

    it = 0
    converged = False
    while it < maxiter:
        order = np.argsort(fsim, kind="stable")
        sim, fsim = sim[order], fsim[order]
        # tolerances never go below what double precision can resolve
        xtol = np.maximum(tol, 4.0 * EPS * np.abs(sim[0]))
        ftol = max(tol, 4.0 * EPS * abs(fsim[0]))
        if (
            np.all(np.max(np.abs(sim[1:] - sim[0]), axis=0) <= xtol)
            and np.max(np.abs(fsim[1:] - fsim[0])) <= ftol
        ):
            converged = True
            break
        it += 1

        centroid = sim[:-1].mean(axis=0)
        xr = centroid + (centroid - sim[-1])
        fr = fn(xr)
        if fr < fsim[0]:
            xe = centroid + 2.0 * (centroid - sim[-1])
            fe = fn(xe)
            if fe < fr:
                sim[-1], fsim[-1] = xe, fe
            else:
                sim[-1], fsim[-1] = xr, fr
            continue
        if fr < fsim[-2]:
            sim[-1], fsim[-1] = xr, fr
            continue
        if fr < fsim[-1]:
            xc = centroid + 0.5 * (xr - centroid)
            fc = fn(xc)
            if fc <= fr:
                sim[-1], fsim[-1] = xc, fc
                continue
        else:
            xc = centroid + 0.5 * (sim[-1] - centroid)
            fc = fn(xc)
            if fc < fsim[-1]:
                sim[-1], fsim[-1] = xc, fc
                continue
        # shrink towards the best vertex
        sim[1:] = sim[0] + 0.5 * (sim[1:] - sim[0])
        fsim[1:] = [fn(v) for v in sim[1:]]

    best = int(np.argmin(fsim))
    return MinimizeResult(
        x=sim[best].copy(),
        fun=float(fsim[best]),
        converged=converged,
        iterations=it,
        evaluations=nev,
    )


# ---------------------------------------------------------------------------
# Kolmogorov distribution
# ---------------------------------------------------------------------------

def kolmogorov_pvalue(d: float, n: int) -> float:
    """Asymptotic p-value of a one-sample K-S statistic ``d`` from ``n`` points.

    Uses Stephens' finite-sample scaling ``s = d * (sqrt(n) + 0.12 + 0.11/sqrt(n))``
    in the Kolmogorov tail series ``2 * sum (-1)^(k-1) exp(-2 k^2 s^2)``.
    """
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"K-S statistic must lie in [0, 1], got {d}")
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    if d == 0.0:
        return 1.0
    rn = math.sqrt(n)
    s = d * (rn + 0.12 + 0.11 / rn)
    if s < 0.2:
        # the alternating series is useless here; Q(s) = 1 to double precision
        return 1.0
    total = 0.0
    k = 1
    while True:
        term = math.exp(-2.0 * k * k * s * s)
        total += term if k % 2 else -term
        if term < 1e-12:
            break
        k += 1
    return min(1.0, max(0.0, 2.0 * total))
