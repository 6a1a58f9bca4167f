"""Closed-form low-temperature variance bounds and gap tuning.

For a two-level system with gap D at temperature T, the variance of any
temperature estimator is floored by T^2 * f2(D/T) with
f2(x) = 2 (1 + cosh x) / x^2; a three-level system with gaps D1 <= D2 is
floored by T^2 * f3(D1/T, D2/T). Both factors are evaluated with the
largest exponent factored out so they stay finite for arguments up to
several hundred. ``tune_gap`` minimizes the floor over an external
control parameter that moves the gap(s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import minimize

from .errors import InputFormatError
from .fisher import UNBOUNDED, _Unbounded
from .thermal import _validate_temperature

__all__ = [
    "MinimumResult",
    "GapFamily",
    "TuneResult",
    "two_level_factor",
    "three_level_factor",
    "three_level_factor_diagonal",
    "minimize_two_level_factor",
    "minimize_three_level_factor",
    "two_level_crb",
    "gapped_divergence_factor",
    "tune_gap",
    "family_from_dict",
]

# Above this argument cosh overflows float64; switch to the asymptotic branch.
_ASYMPTOTIC_X = 700.0
_GOLDEN = 0.3819660112501051  # 2 - golden ratio
_SQRT_EPS = math.sqrt(np.finfo(float).eps)


def _validate_ratio(x: float, name: str = "x") -> float:
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"{name} must be finite and > 0, got {x!r}")
    return x


def two_level_factor(x: float) -> float:
    """Two-level bound factor 2 (1 + cosh x) / x^2 at x = gap/T.

    Diverges as 4/x^2 for x -> 0 and as e^x/x^2 for x -> infinity. Above
    x = 700 the e^x/x^2 branch is used (relative error ~ 2 e^{-x}); if even
    that exceeds the float64 range the factor saturates to ``inf``.
    """
    x = _validate_ratio(x)
    if x > _ASYMPTOTIC_X:
        t = x - 2.0 * math.log(x)
        return math.exp(t) if t < 709.0 else math.inf
    return 2.0 * (1.0 + math.cosh(x)) / (x * x)


def three_level_factor(x: float, y: float) -> float:
    """Three-level bound factor at x = gap1/T, y = gap2/T.

    Equals e^{-x-y} (e^x + e^y + e^{x+y})^2 /
    ((1+e^y) x^2 - 2xy + (1+e^x) y^2), evaluated here with e^{x+y}
    factored out of numerator and denominator:

        (1 + e^{-x} + e^{-y})^2
        ------------------------------------------
        (x-y)^2 e^{-x-y} + x^2 e^{-x} + y^2 e^{-y}

    which involves only non-positive exponents and is exact for x, y up
    to 700. The denominator is algebraically positive for x, y > 0; it
    can only vanish by underflow (x, y beyond ~745), which is reported
    as an explicit error rather than returned as inf/NaN.
    """
    x = _validate_ratio(x, "x")
    y = _validate_ratio(y, "y")
    ex = math.exp(-x)
    ey = math.exp(-y)
    num = (1.0 + ex + ey) ** 2
    den = (x - y) ** 2 * (ex * ey) + x * x * ex + y * y * ey
    if den == 0.0:
        raise ValueError(
            f"three-level factor denominator vanished (underflow) at x={x!r}, y={y!r}"
        )
    return num / den


def three_level_factor_diagonal(x: float) -> float:
    """Closed form (2 + e^x)^2 / (2 x^2 e^x) of the factor on the x = y diagonal."""
    x = _validate_ratio(x)
    half = math.exp(0.5 * x) if x < 1400.0 else math.inf
    return (2.0 / half + half) ** 2 / (2.0 * x * x)


@dataclass(frozen=True)
class MinimumResult:
    """Located minimum of a bound factor.

    ``argmin`` is the dimensionless gap/T coordinate (a pair for the
    three-level factor); ``refined_argmin`` carries the off-diagonal
    polish result when a 2-D refinement was run.
    """

    argmin: float | tuple[float, float]
    value: float
    converged: bool
    iterations: int
    refined_argmin: tuple[float, float] | None = None


def _brent_min(f, a: float, b: float, xtol: float, max_iter: int = 500):
    """Golden-section / parabolic-interpolation hybrid minimizer on [a, b].

    Returns (x, f(x), evaluations). Resolves x to about
    sqrt(eps)*|x| + xtol, the floor for function-value-only search.
    """
    x = w = v = a + _GOLDEN * (b - a)
    fx = fw = fv = f(x)
    d = e = 0.0
    nev = 1
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        tol1 = _SQRT_EPS * abs(x) + xtol
        tol2 = 2.0 * tol1
        if abs(x - m) <= tol2 - 0.5 * (b - a):
            break
        golden = True
        if abs(e) > tol1:
            # trial parabola through (x, fx), (w, fw), (v, fv)
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            e_prev, e = e, d
            if abs(p) < abs(0.5 * q * e_prev) and q * (a - x) < p < q * (b - x):
                d = p / q
                u = x + d
                if (u - a) < tol2 or (b - u) < tol2:
                    d = tol1 if x < m else -tol1
                golden = False
        if golden:
            e = (b - x) if x < m else (a - x)
            d = _GOLDEN * e
        u = x + d if abs(d) >= tol1 else x + (tol1 if d > 0.0 else -tol1)
        fu = f(u)
        nev += 1
        if fu <= fx:
            if u < x:
                b = x
            else:
                a = x
            v, w, x = w, x, u
            fv, fw, fx = fw, fx, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, w = w, u
                fv, fw = fw, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    return x, fx, nev


def _bisect_increasing(f, lo: float, hi: float, xtol: float, max_iter: int = 200):
    """Bisection root of an increasing function with f(lo) < 0 < f(hi).

    Returns (root, iterations, converged); converged means the bracket
    reached ``xtol`` or the float resolution floor.
    """
    it = 0
    floor_hit = False
    while hi - lo > xtol and it < max_iter:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # float resolution floor
            floor_hit = True
            break
        if f(mid) > 0.0:
            hi = mid
        else:
            lo = mid
        it += 1
    return 0.5 * (lo + hi), it, (hi - lo <= xtol or floor_hit)


def _two_level_stationarity(x: float) -> float:
    """x sinh x - 2 (1 + cosh x); increasing on (0, inf), zero at the factor minimum."""
    return x * math.sinh(x) - 2.0 * (1.0 + math.cosh(x))


def minimize_two_level_factor(
    bracket: tuple[float, float] = (0.5, 10.0),
    tol: float = 1e-10,
) -> MinimumResult:
    """Locate the minimum of the two-level bound factor within ``bracket``.

    The hybrid minimizer localizes the minimum, then bisection on the
    monotone stationarity equation x sinh x = 2 (1 + cosh x) sharpens the
    abscissa to ``tol`` (value-only search bottoms out near sqrt(eps)).
    """
    a, b = float(bracket[0]), float(bracket[1])
    if not (math.isfinite(a) and math.isfinite(b)) or a <= 0.0 or a >= b:
        raise ValueError(f"bracket must satisfy 0 < a < b, got {bracket!r}")
    if tol <= 0.0:
        raise ValueError(f"tol must be > 0, got {tol!r}")
    if _two_level_stationarity(a) >= 0.0 or _two_level_stationarity(b) <= 0.0:
        raise ValueError(f"bracket {bracket!r} does not contain an interior minimum")

    x0, _, nev = _brent_min(two_level_factor, a, b, xtol=tol)
    lo, hi, width = x0, x0, 1e-6
    while _two_level_stationarity(lo) >= 0.0 and lo > a:
        lo = max(a, x0 - width)
        width *= 8.0
    width = 1e-6
    while _two_level_stationarity(hi) <= 0.0 and hi < b:
        hi = min(b, x0 + width)
        width *= 8.0
    xm, nit, ok = _bisect_increasing(_two_level_stationarity, lo, hi, xtol=tol)
    return MinimumResult(
        argmin=xm,
        value=two_level_factor(xm),
        converged=ok,
        iterations=nev + nit,
    )


def _diagonal_stationarity(x: float) -> float:
    """Increasing function whose zero is the diagonal-factor minimum."""
    return 2.0 / (1.0 + 2.0 * math.exp(-x)) - 2.0 / x - 1.0


def minimize_three_level_factor(tol: float = 1e-10) -> MinimumResult:
    """Global minimum of the three-level bound factor over (0, 50]^2.

    The factor is symmetric, so the search restricts to the diagonal
    (closed form (2 + e^x)^2 / (2 x^2 e^x), minimized by the hybrid plus
    a stationarity bisection) and then confirms with an off-diagonal
    Nelder-Mead polish that the diagonal point is a genuine 2-D minimum.
    """
    if tol <= 0.0:
        raise ValueError(f"tol must be > 0, got {tol!r}")
    a, b = 0.5, 10.0
    x0, _, nev = _brent_min(three_level_factor_diagonal, a, b, xtol=tol)
    lo = max(a, x0 - 1e-5)
    hi = min(b, x0 + 1e-5)
    if not (_diagonal_stationarity(lo) < 0.0 < _diagonal_stationarity(hi)):
        lo, hi = a, b
    xd, nit, bisect_ok = _bisect_increasing(_diagonal_stationarity, lo, hi, xtol=tol)
    value = three_level_factor(xd, xd)

    def objective(v):
        if v[0] <= 0.0 or v[1] <= 0.0 or v[0] > 50.0 or v[1] > 50.0:
            return math.inf
        return three_level_factor(v[0], v[1])

    polish = minimize(
        objective,
        x0=np.array([xd, xd]),
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 2000},
    )
    drift = max(abs(polish.x[0] - xd), abs(polish.x[1] - xd))
    improved = value - float(polish.fun)
    converged = bisect_ok and bool(polish.success) and drift <= 1e-6 and improved <= 1e-9 * value
    return MinimumResult(
        argmin=(xd, xd),
        value=value,
        converged=converged,
        iterations=nev + nit + int(polish.nfev),
        refined_argmin=(float(polish.x[0]), float(polish.x[1])),
    )


def two_level_crb(T: float, gap: float) -> float | _Unbounded:
    """Single-shot variance floor T^2 * f2(gap/T) for a two-level system.

    A zero gap carries no temperature information, so the floor is
    :data:`UNBOUNDED` there (the factor diverges as 4/x^2).
    """
    T = _validate_temperature(T)
    gap = float(gap)
    if not math.isfinite(gap) or gap < 0.0:
        raise ValueError(f"gap must be finite and >= 0, got {gap!r}")
    if gap == 0.0:
        return UNBOUNDED
    return T * T * two_level_factor(gap / T)


def gapped_divergence_factor(T: float, gap: float) -> float:
    """Ratio of the two-level floor to its low-T divergence law T^4 e^{gap/T} / gap^2.

    Algebraically two_level_crb(T, gap) * gap^2 / (T^4 e^{gap/T})
    = 2 (1 + cosh x) e^{-x} = (1 + e^{-x})^2 at x = gap/T; the shifted
    form is used so no intermediate can overflow. Tends to 1 as T -> 0.
    """
    T = _validate_temperature(T)
    gap = float(gap)
    if not math.isfinite(gap) or gap <= 0.0:
        raise ValueError(f"gap must be finite and > 0, got {gap!r}")
    ex = math.exp(-gap / T)
    return (1.0 + ex) ** 2


# ---------------------------------------------------------------------------
# Gap families and tuning
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GapFamily:
    """Gap(s) of a tunable system as a function of a control parameter.

    ``evaluate`` maps a control value in [lambda_min, lambda_max] to a
    single gap, or to a pair (gap1, gap2) with gap2 >= gap1 when
    ``pair_valued``. ``kind`` is an optimizer dispatch hint: objectives of
    ``linear`` families are unimodal, ``quadratic`` ones are unimodal on
    each side of ``split_at``, anything else is searched by grid-then-refine.
    """

    evaluate: Callable[[float], float | tuple[float, float]]
    lambda_min: float
    lambda_max: float
    description: str = ""
    kind: str = "custom"
    pair_valued: bool = False
    split_at: float | None = None

    def __post_init__(self):
        lo, hi = float(self.lambda_min), float(self.lambda_max)
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
            raise ValueError(
                f"control range must satisfy lambda_min < lambda_max, got [{lo!r}, {hi!r}]"
            )

    def gap_at(self, lam: float):
        """Evaluate and validate the gap(s) at one control value."""
        if not self.lambda_min <= lam <= self.lambda_max:
            raise ValueError(
                f"control value {lam!r} outside [{self.lambda_min}, {self.lambda_max}]"
            )
        value = self.evaluate(lam)
        if self.pair_valued:
            d1, d2 = float(value[0]), float(value[1])
            if not (math.isfinite(d1) and math.isfinite(d2)) or d1 < 0.0 or d2 < d1:
                raise ValueError(
                    f"gap pair at lambda={lam!r} must satisfy 0 <= gap1 <= gap2, got {value!r}"
                )
            return d1, d2
        gap = float(value)
        if not math.isfinite(gap) or gap < 0.0:
            raise ValueError(f"gap at lambda={lam!r} must be finite and >= 0, got {gap!r}")
        return gap

    @classmethod
    def linear(cls, slope, intercept, lambda_min, lambda_max, description=""):
        """Gap(lambda) = slope * lambda + intercept; must be >= 0 on the range."""
        slope, intercept = float(slope), float(intercept)
        ends = (slope * float(lambda_min) + intercept, slope * float(lambda_max) + intercept)
        if min(ends) < 0.0:
            raise ValueError(f"linear family is negative on the range (endpoint gaps {ends})")
        return cls(
            evaluate=lambda lam: slope * lam + intercept,
            lambda_min=float(lambda_min),
            lambda_max=float(lambda_max),
            description=description or f"linear gap {slope}*lambda + {intercept}",
            kind="linear",
        )

    @classmethod
    def quadratic(cls, curvature, center, gap_min, lambda_min, lambda_max, description=""):
        """Gap(lambda) = curvature * (lambda - center)^2 + gap_min, a gap with a floor."""
        curvature, center, gap_min = float(curvature), float(center), float(gap_min)
        if curvature < 0.0:
            raise ValueError(f"curvature must be >= 0, got {curvature!r}")
        if gap_min < 0.0:
            raise ValueError(f"gap_min must be >= 0, got {gap_min!r}")
        return cls(
            evaluate=lambda lam: curvature * (lam - center) ** 2 + gap_min,
            lambda_min=float(lambda_min),
            lambda_max=float(lambda_max),
            description=description or f"quadratic gap, minimum {gap_min} at {center}",
            kind="quadratic",
            split_at=min(max(center, float(lambda_min)), float(lambda_max)),
        )

    @classmethod
    def from_table(cls, points: Sequence[Sequence[float]], description=""):
        """Monotone-cubic (PCHIP) interpolation through (lambda, gap) pairs."""
        pts = sorted((float(l), float(g)) for l, g in points)
        if len(pts) < 2:
            raise ValueError("table family needs at least 2 points")
        lams = np.array([p[0] for p in pts])
        gaps = np.array([p[1] for p in pts])
        if np.any(np.diff(lams) <= 0.0):
            raise ValueError("table family control values must be distinct")
        if np.any(gaps < 0.0) or not np.all(np.isfinite(gaps)):
            raise ValueError("table family gaps must be finite and >= 0")
        interp = PchipInterpolator(lams, gaps)  # shape-preserving: stays >= 0
        return cls(
            evaluate=lambda lam: float(interp(lam)),
            lambda_min=float(lams[0]),
            lambda_max=float(lams[-1]),
            description=description or f"tabulated gap ({len(pts)} points)",
            kind="table",
        )

    @classmethod
    def three_level(cls, evaluator, lambda_min, lambda_max, description=""):
        """Pair-valued family: evaluator(lambda) -> (gap1, gap2), gap2 >= gap1."""
        return cls(
            evaluate=evaluator,
            lambda_min=float(lambda_min),
            lambda_max=float(lambda_max),
            description=description or "three-level gap pair",
            kind="custom",
            pair_valued=True,
        )


@dataclass(frozen=True)
class TuneResult:
    lambda_star: float
    gap: float | tuple[float, float]
    bound: float


def _family_objective(family: GapFamily, T: float) -> Callable[[float], float]:
    if family.pair_valued:

        def objective(lam: float) -> float:
            d1, d2 = family.gap_at(lam)
            if d1 == 0.0 or d2 == 0.0:
                return math.inf
            return T * T * three_level_factor(d1 / T, d2 / T)

    else:

        def objective(lam: float) -> float:
            gap = family.gap_at(lam)
            if gap == 0.0:
                return math.inf
            return T * T * two_level_factor(gap / T)

    return objective


def tune_gap(family: GapFamily, T: float, tol: float = 1e-10) -> TuneResult:
    """Control value minimizing the variance floor of ``family`` at temperature ``T``.

    Linear families give a unimodal objective and are minimized directly;
    quadratic ones are minimized on each monotone side of the gap minimum;
    tabulated/custom/pair families are scanned on a 1000-point grid and
    refined in the winning cell. Endpoints always compete, so boundary
    optima are exact.
    """
    T = _validate_temperature(T)
    if tol <= 0.0:
        raise ValueError(f"tol must be > 0, got {tol!r}")
    objective = _family_objective(family, T)
    lo, hi = family.lambda_min, family.lambda_max

    candidates = [lo, hi]
    if family.kind == "linear":
        candidates.append(_brent_min(objective, lo, hi, xtol=tol)[0])
    elif family.kind == "quadratic":
        split = family.split_at if family.split_at is not None else 0.5 * (lo + hi)
        candidates.append(split)
        if split - lo > tol:
            candidates.append(_brent_min(objective, lo, split, xtol=tol)[0])
        if hi - split > tol:
            candidates.append(_brent_min(objective, split, hi, xtol=tol)[0])
    else:
        grid = np.linspace(lo, hi, 1000)
        values = [objective(lam) for lam in grid]
        i = int(np.argmin(values))
        candidates.append(grid[i])
        a = grid[max(i - 1, 0)]
        b = grid[min(i + 1, len(grid) - 1)]
        if b > a:
            candidates.append(_brent_min(objective, a, b, xtol=tol)[0])

    best_lam = min(candidates, key=objective)
    best = objective(best_lam)
    if math.isinf(best):
        probe = np.linspace(lo, hi, 101)
        gaps = [family.gap_at(lam) for lam in probe]
        flat = [g for pair in gaps for g in (pair if family.pair_valued else (pair,))]
        if max(flat) == 0.0:
            raise ValueError(
                "gap vanishes on the whole control range; the bound is unbounded everywhere"
            )
    return TuneResult(lambda_star=float(best_lam), gap=family.gap_at(best_lam), bound=best)


# ---------------------------------------------------------------------------
# Gap-family configuration block
# ---------------------------------------------------------------------------

def _require_number(data: dict, key: str) -> float:
    if key not in data:
        raise InputFormatError(f"gap family is missing the '{key}' field")
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputFormatError(f"'{key}' must be a number, got {value!r}")
    return float(value)


def family_from_dict(data: dict) -> GapFamily:
    """Parse a gap-family configuration block.

    kind "linear":    slope, intercept, lambda_min, lambda_max
    kind "quadratic": curvature, center, gap_min, lambda_min, lambda_max
    kind "table":     points = [[lambda, gap], ...] (range inferred)
    """
    if not isinstance(data, dict):
        raise InputFormatError("gap family must be an object with a 'kind' field")
    kind = data.get("kind")
    description = data.get("description", "")
    try:
        if kind == "linear":
            return GapFamily.linear(
                _require_number(data, "slope"),
                _require_number(data, "intercept"),
                _require_number(data, "lambda_min"),
                _require_number(data, "lambda_max"),
                description=description,
            )
        if kind == "quadratic":
            return GapFamily.quadratic(
                _require_number(data, "curvature"),
                _require_number(data, "center"),
                _require_number(data, "gap_min"),
                _require_number(data, "lambda_min"),
                _require_number(data, "lambda_max"),
                description=description,
            )
        if kind == "table":
            points = data.get("points")
            if not isinstance(points, list) or not points:
                raise InputFormatError("table family needs a non-empty 'points' array")
            for i, pt in enumerate(points):
                if not isinstance(pt, (list, tuple)) or len(pt) != 2:
                    raise InputFormatError(f"points[{i}] must be a [lambda, gap] pair")
            return GapFamily.from_table(points, description=description)
    except ValueError as exc:
        if isinstance(exc, InputFormatError):
            raise
        raise InputFormatError(f"invalid gap family: {exc}") from exc
    raise InputFormatError(
        f"unknown gap-family kind {kind!r} (expected linear, quadratic, or table)"
    )
