"""Volume-growth analytics for Ricci-pinched closed G2-structures.

Everything here is scalar analysis of two competing radial functions:
an exponential volume lower bound with rate 6*sqrt(3)*k1^2 / (sqrt(7)*k2^(3/2))
that holds under the two-sided Ricci pinch -k2 g <= Ric <= -k1 g, and the
hyperbolic comparison volume with curvature -K2, K2 = k2/6, whose radial
density integrates to a sinh combination.  When the exponential rate exceeds
the comparison growth rate 6*sqrt(K2) = sqrt(6 k2), the ratio of the two
cannot stay nondecreasing, which rules out completeness; the ratio's
turning point then bounds the length of some geodesic.

The crossover happens exactly at k1/k2 = (7/18)^(1/4).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PinchingParams",
    "GrowthProfile",
    "VOL_S6",
    "growth_exponent",
    "comparison_volume",
    "monotone_profile",
    "log_monotone_profile",
    "pinching_threshold",
    "contradiction_predicate",
    "geodesic_bound",
    "growth_profile",
    "predicate_flip_interval",
    "derivative_sign_changes",
]

# Volume of the unit 6-sphere, 16 pi^3 / 15.
VOL_S6 = 16.0 * math.pi**3 / 15.0


@dataclass(frozen=True)
class PinchingParams:
    """Two-sided Ricci pinch scales: -k2 g <= Ric <= -k1 g with 0 < k1 <= k2."""

    k1: float
    k2: float

    def __post_init__(self):
        object.__setattr__(self, "k1", float(self.k1))
        object.__setattr__(self, "k2", float(self.k2))
        if not (0.0 < self.k1 <= self.k2) or not math.isfinite(self.k2):
            raise ValueError(
                f"pinching scales need 0 < k1 <= k2, got k1={self.k1}, k2={self.k2}")

    @property
    def K2(self) -> float:
        """Comparison space curvature scale, k2 / 6."""
        return self.k2 / 6.0

    @property
    def ratio(self) -> float:
        return self.k1 / self.k2


def growth_exponent(p: PinchingParams) -> float:
    """Exponential volume growth rate 6*sqrt(3)*k1^2 / (sqrt(7)*k2^(3/2))."""
    return 6.0 * math.sqrt(3.0) * p.k1**2 / (math.sqrt(7.0) * p.k2**1.5)


# -- the sinh combination ----------------------------------------------------
#
# N(X) = sinh(6X) - 9 sinh(4X) + 45 sinh(2X) - 60X is 192 * integral of
# sinh^6 over [0, X].  Its Taylor series cancels through X^5, so for small
# X the direct formula loses all precision and the series from the X^7
# term is used instead.  Past X ~ 118 the leading exponential overflows,
# so the large-X regime factors out e^{6X}/2 and works with the bounded
# polynomial S(u), u = e^{-2X}.

_LOG_REGIME = 20.0  # e^{-2X} correction ~ 4e-18 here, S safe to 1 ulp
_TAYLOR_REGIME = 1.0


def _taylor_terms(X: float):
    # c_m = (6^{2m+1} - 9*4^{2m+1} + 45*2^{2m+1}) / (2m+1)!  vanishes for m < 3
    total_n = 0.0
    total_d = 0.0
    for m in range(3, 60):
        k = 2 * m + 1
        c = (6.0**k - 9.0 * 4.0**k + 45.0 * 2.0**k) / math.factorial(k)
        term = c * X**k
        total_n += term
        total_d += k * c * X ** (k - 1)
        if term < 1e-18 * total_n:
            break
    return total_n, total_d


def _large_x_factors(X: float):
    # N = e^{6X}/2 * S,  N' = e^{6X}/2 * S'
    u = math.exp(-2.0 * X)
    S = 1.0 - 9.0 * u + 45.0 * u**2 - 120.0 * X * u**3 - 45.0 * u**4 + 9.0 * u**5 - u**6
    Sp = 6.0 - 36.0 * u + 90.0 * u**2 - 120.0 * u**3 + 90.0 * u**4 - 36.0 * u**5 + 6.0 * u**6
    return S, Sp


def _numerator(X: float) -> float:
    """N(X) = sinh(6X) - 9 sinh(4X) + 45 sinh(2X) - 60X, cancellation-safe."""
    if X < 0.0:
        return -_numerator(-X)
    if X < _TAYLOR_REGIME:
        return _taylor_terms(X)[0]
    if X < _LOG_REGIME:
        return math.sinh(6.0 * X) - 9.0 * math.sinh(4.0 * X) + 45.0 * math.sinh(2.0 * X) - 60.0 * X
    S, _ = _large_x_factors(X)
    # overflows to inf only past X ~ 118.5 where the value has no float home
    try:
        return 0.5 * math.exp(6.0 * X) * S
    except OverflowError:
        return math.inf


def _log_numerator(X: float) -> float:
    """log N(X) for X > 0, finite for all X where N > 0."""
    if X <= 0.0:
        raise ValueError("log of nonpositive argument")
    if X < _LOG_REGIME:
        return math.log(_numerator(X))
    S, _ = _large_x_factors(X)
    return 6.0 * X - math.log(2.0) + math.log(S)


def _derivative_combination(X: float, weight: float, rate: float) -> float:
    """sign-stable evaluation of weight * N'(X) - rate * N(X).

    This is the numerator of F'(r) e^{rate r} with X = weight * r; its
    unique zero above the pinching threshold locates the turning point.
    """
    if X < _TAYLOR_REGIME:
        n, d = _taylor_terms(X)
        return weight * d - rate * n
    if X < _LOG_REGIME:
        d = 6.0 * math.cosh(6.0 * X) - 36.0 * math.cosh(4.0 * X) + 90.0 * math.cosh(2.0 * X) - 60.0
        return weight * d - rate * _numerator(X)
    S, Sp = _large_x_factors(X)
    # common positive factor e^{6X}/2 dropped, sign preserved
    return weight * Sp - rate * S


def comparison_volume(r, K2: float):
    """Hyperbolic ball volume in curvature -K2: Vol(S^6) * int_0^r (sinh(sqrt(K2) s)/sqrt(K2))^6 ds.

    Accepts scalar or array r.  Evaluated through the closed-form
    antiderivative N/192; the adaptive-quadrature cross-check lives in the
    verification suite.
    """
    if K2 <= 0.0:
        raise ValueError(f"comparison curvature scale must be positive, got {K2}")
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0.0):
        raise ValueError("ball radius must be nonnegative")
    s = math.sqrt(K2)
    out = np.vectorize(_numerator)(r_arr * s) * (VOL_S6 / (192.0 * s * K2**3))
    if np.isscalar(r) or r_arr.ndim == 0:
        return float(out)
    return out


def monotone_profile(r, p: PinchingParams):
    """F(r) = N(sqrt(K2) r) / exp(rate * r), the comparison-to-bound ratio.

    Nondecreasing in r whenever the pinch is consistent with a complete
    metric; above the threshold it rises and then decays, and that decay
    is the contradiction the nonexistence argument exploits.  Computed in
    log space so large radii neither overflow nor lose the tail.
    """
    rate = growth_exponent(p)
    s = math.sqrt(p.K2)

    def f(ri: float) -> float:
        if ri <= 0.0:
            return 0.0 if ri == 0.0 else -f(-ri)
        e = _log_numerator(ri * s) - rate * ri
        return math.exp(e) if e < 700.0 else math.inf

    r_arr = np.asarray(r, dtype=float)
    out = np.vectorize(f)(r_arr)
    if np.isscalar(r) or r_arr.ndim == 0:
        return float(out)
    return out


def log_monotone_profile(r: float, p: PinchingParams) -> float:
    """log F(r), exact at radii where F itself would over- or underflow.

    The limit of log F(r) / r is 6 sqrt(K2) - rate, approached with a
    -log(2)/r correction from the leading sinh's 1/2 prefactor.
    """
    if r <= 0.0:
        raise ValueError("radius must be positive")
    return _log_numerator(r * math.sqrt(p.K2)) - growth_exponent(p) * r


def pinching_threshold() -> float:
    """Critical pinching ratio (7/18)^(1/4), about 0.78969.

    Self-checks on every call that substituting k1 = t*k2 makes the growth
    rate equal the comparison rate sqrt(6 k2) across scales.
    """
    t = (7.0 / 18.0) ** 0.25
    for k2 in (0.1, 1.0, 10.0):
        lhs = growth_exponent(PinchingParams(t * k2, k2))
        rhs = math.sqrt(6.0 * k2)
        if abs(lhs - rhs) > 1e-12 * rhs:
            raise AssertionError(
                f"threshold self-check failed at k2={k2}: rate {lhs} vs {rhs}")
    return t


def contradiction_predicate(p: PinchingParams) -> bool:
    """True iff the growth rate strictly beats the comparison rate sqrt(6 k2).

    Evaluated both directly and through the ratio form k1/k2 > (7/18)^(1/4);
    the two must agree.
    """
    comparison = math.sqrt(6.0 * p.k2)
    rate = growth_exponent(p)
    direct = rate > comparison
    via_ratio = p.ratio > (7.0 / 18.0) ** 0.25
    if direct == via_ratio:
        return direct
    if abs(rate - comparison) <= 5e-15 * comparison:
        # the formulations can only split inside the rounding window at the
        # exact boundary, where strictness makes the answer false
        return False
    raise AssertionError(
        f"inconsistent threshold formulations at k1={p.k1}, k2={p.k2}")


def geodesic_bound(p: PinchingParams, tol: float = 1e-10) -> float:
    """Length scale C(k1, k2)/sqrt(k2) past which some geodesic stops extending.

    Only defined above the pinching threshold.  Works in units with k2 = 1,
    brackets the unique sign change of F' geometrically and bisects it down
    to ``tol``, then restores units (lengths scale like 1/sqrt(k2)).
    """
    if not contradiction_predicate(p):
        raise ValueError(
            f"no geodesic bound implied: k1/k2 = {p.ratio:.6g} is below the "
            f"pinching threshold {pinching_threshold():.6g}")
    q = PinchingParams(p.ratio, 1.0)
    rate = growth_exponent(q)
    s = math.sqrt(q.K2)

    def dsign(r: float) -> float:
        return _derivative_combination(r * s, s, rate)

    lo, hi = 1e-3, 50.0
    # F' > 0 near zero always; shrink lo if the default start sits past the root
    for _ in range(200):
        if dsign(lo) > 0.0:
            break
        lo /= 4.0
    else:
        raise RuntimeError("failed to bracket turning point from below")
    for _ in range(200):
        if dsign(hi) < 0.0:
            break
        hi *= 2.0
    else:
        raise RuntimeError("failed to bracket turning point from above")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if dsign(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi) / math.sqrt(p.k2)


@dataclass(frozen=True)
class GrowthProfile:
    """Sampled growth comparison: rate, comparison curvature, and a table of
    (r, lowerBound, comparisonVolume, F) rows.

    lowerBound is the exponential bound normalized to 1 at r = 0; the
    absolute prefactor (the volume of a small starting ball) depends on
    the manifold and drops out of every conclusion drawn here.
    """

    rate: float
    K2: float
    samples: np.ndarray  # columns (r, lowerBound, comparisonVolume, F)

    def rows(self) -> list:
        keys = ("r", "lowerBound", "comparisonVolume", "F")
        return [dict(zip(keys, map(float, row))) for row in self.samples]


def growth_profile(p: PinchingParams, r_values=None) -> GrowthProfile:
    """Tabulate the bound, the comparison volume and their ratio F."""
    if r_values is None:
        r_values = np.geomspace(0.01, 50.0, 160)
    r_values = np.asarray(r_values, dtype=float)
    if r_values.ndim != 1 or np.any(r_values < 0.0):
        raise ValueError("radii must be a 1-d nonnegative array")
    rate = growth_exponent(p)
    lower = np.exp(np.minimum(rate * r_values, 700.0))
    comp = comparison_volume(r_values, p.K2)
    F = monotone_profile(r_values, p)
    samples = np.column_stack([r_values, lower, comp, F])
    return GrowthProfile(rate=rate, K2=p.K2, samples=samples)


def predicate_flip_interval(k2: float = 1.0, width: float = 1e-12) -> tuple:
    """Bisect the ratio axis to localize where the predicate flips.

    Returns (lo, hi) with hi - lo <= width, predicate false at lo*k2 and
    true at hi*k2.
    """
    lo, hi = 0.5, 1.0
    if contradiction_predicate(PinchingParams(lo * k2, k2)):
        raise RuntimeError("flip search needs a false lower endpoint")
    if not contradiction_predicate(PinchingParams(hi * k2, k2)):
        raise RuntimeError("flip search needs a true upper endpoint")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if contradiction_predicate(PinchingParams(mid * k2, k2)):
            hi = mid
        else:
            lo = mid
    return lo, hi


def derivative_sign_changes(p: PinchingParams, r_min=0.01, r_max=100.0, n=2000) -> list:
    """Locations where F' changes sign on a log grid, refined by bisection.

    The theory allows at most one above the threshold and none below;
    returning the full list lets the suite assert exactly that.
    """
    rate = growth_exponent(p)
    s = math.sqrt(p.K2)
    grid = np.geomspace(r_min, r_max, n)
    vals = [_derivative_combination(r * s, s, rate) for r in grid]
    roots = []
    for i in range(len(grid) - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(float(grid[i]))
        elif a * b < 0.0:
            lo, hi = float(grid[i]), float(grid[i + 1])
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                v = _derivative_combination(mid * s, s, rate)
                if v == 0.0:
                    break
                if (v > 0.0) == (a > 0.0):
                    lo = mid
                else:
                    hi = mid
            roots.append(0.5 * (lo + hi))
    return roots
