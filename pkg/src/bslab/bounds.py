"""Closed-form bounds and thresholds for the zero/one dynamics.

All functions are pure and evaluate the displayed formulas exactly;
nothing here simulates.  Monte Carlo and exact-solve modules cross-check
these values from independent routes.  q denotes the per-bit probability
of a zero, q = 1 - p, and d the (maximum) degree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp

__all__ = [
    "stick_good_lb",
    "block2_nice_lb",
    "hat_L",
    "theta_4block",
    "tilde_L",
    "block2_asymptote",
    "theta_asymptote",
    "domination_density",
    "T1",
    "T2",
    "cond_h_upper",
    "h_window",
    "choose_h",
    "q0",
    "q0_d2_closed_form",
    "q0_simple",
    "drift_bounds",
    "DriftBounds",
    "theta_4block_highprec",
    "q0_highprec",
    "BoundReport",
    "evaluate_formula",
    "FORMULAS",
]


def _check_pd(p: float, d: int) -> None:
    if not (0.0 < p < 1.0):
        raise ValueError("p must lie strictly between 0 and 1")
    if d < 1:
        raise ValueError("d must be a positive integer")


def stick_good_lb(L: float, q: float, a: int) -> float:
    """P(a stick of length L proposes zeros on a target set of size a):
    exp(-L (1 - q^a))."""
    if L < 0 or not (0.0 < q < 1.0) or a < 0:
        raise ValueError("need L >= 0, 0 < q < 1, a >= 0")
    return math.exp(-L * (1.0 - q**a))


def block2_nice_lb(L: float, p: float, d: int) -> float:
    """Lower bound for a two-block being nice, clipped to [0, 1]:
    exp(-2L(d-1)p) (exp(-L(1-q^2)) - exp(-L))^2."""
    _check_pd(p, d)
    if L < 0:
        raise ValueError("L must be nonnegative")
    q = 1.0 - p
    val = math.exp(-2.0 * L * (d - 1) * p) * (math.exp(-L * (1.0 - q * q)) - math.exp(-L)) ** 2
    return min(max(val, 0.0), 1.0)


def hat_L(p: float, d: int) -> float:
    """Window length maximizing block2_nice_lb:
    (1/q^2) ln(1 + q^2 / ((q + d) p))."""
    _check_pd(p, d)
    q = 1.0 - p
    return math.log1p(q * q / ((q + d) * p)) / (q * q)


def theta_4block(L: float, p: float, d: int) -> float:
    """Lower bound for a four-block being nice:
    exp((2q^3/3 + 4q^2/3 + (4d-6)q - (4d-2)) L)
    (exp(L q^2 / 3) - 1)^2 (exp(L q^3 / 3) - 1)^4."""
    _check_pd(p, d)
    if L < 0:
        raise ValueError("L must be nonnegative")
    q = 1.0 - p
    coeff = 2.0 * q**3 / 3.0 + 4.0 * q * q / 3.0 + (4 * d - 6) * q - (4 * d - 2)
    return math.exp(coeff * L) * math.expm1(L * q * q / 3.0) ** 2 * math.expm1(L * q**3 / 3.0) ** 4


def tilde_L(p: float, d: int) -> float:
    """Near-optimal four-block window: 3 ln(1 / (2 p d))."""
    _check_pd(p, d)
    if 2.0 * p * d >= 1.0:
        raise ValueError("tilde_L needs 2 p d < 1")
    return 3.0 * math.log(1.0 / (2.0 * p * d))


def block2_asymptote(p: float, d: int) -> float:
    """Small-p expansion of block2_nice_lb(hat_L): 1 - 2(d+1) p ln(1/p)."""
    _check_pd(p, d)
    return 1.0 - 2.0 * (d + 1) * p * math.log(1.0 / p)


def theta_asymptote(p: float, d: int) -> float:
    """Small-p expansion of theta_4block(tilde_L): 1 - 12(d+1) p ln(1/p)."""
    _check_pd(p, d)
    return 1.0 - 12.0 * (d + 1) * p * math.log(1.0 / p)


def domination_density(p: float, d: int) -> float:
    """Density of the dominated product field:
    1 - 3 sqrt(2 (d+1) p ln(1/p)).  May be negative for large p; the
    report path flags that instead of raising."""
    _check_pd(p, d)
    return 1.0 - 3.0 * math.sqrt(2.0 * (d + 1) * p * math.log(1.0 / p))


def T1(q: float, d: int) -> float:
    """Lower edge of the drift weight window:
    (q(d+1) - 1) / (d q^2 + q(1 - (1-q)^d))."""
    if not (0.0 < q < 1.0):
        raise ValueError("q must lie strictly between 0 and 1")
    return (q * (d + 1) - 1.0) / (d * q * q + q * (1.0 - (1.0 - q) ** d))


def T2(q: float, d: int) -> float:
    """Ratio (2 - q(d+1)) / (1 + d(1 - q - q^2) + q(1-q)^d).

    This is the type-2 negativity edge only while the denominator is
    positive; h_window handles the sign change."""
    if not (0.0 < q < 1.0):
        raise ValueError("q must lie strictly between 0 and 1")
    return (2.0 - q * (d + 1)) / _t2_den(q, d)


def _t2_den(q: float, d: int) -> float:
    return 1.0 + d * (1.0 - q - q * q) + q * (1.0 - q) ** d


def cond_h_upper(q: float, d: int) -> float:
    """Weight ceiling 1 / (q + d - d q) from the type-2 reduction."""
    return 1.0 / (q + d - d * q)


def h_window(q: float, d: int) -> tuple[float, float] | None:
    """Feasible weights h in (0,1): both typed drift bounds negative and
    h below cond_h_upper.  Returns (lo, hi) or None when empty.

    While the T2 denominator is positive the window is the displayed
    (T1, min(1, T2, 1/(q+d-dq))); when it turns negative the type-2
    condition h*den < 2-q(d+1) flips into a lower bound (or into no
    constraint if 2-q(d+1) >= 0).
    """
    lo = max(T1(q, d), 0.0)
    hi = min(1.0, cond_h_upper(q, d))
    num = 2.0 - q * (d + 1)
    den = _t2_den(q, d)
    if den > 0.0:
        hi = min(hi, num / den)
    elif den == 0.0:
        if num <= 0.0:
            return None
    else:
        if num < 0.0:
            lo = max(lo, num / den)
        elif num == 0.0:
            return None
    if lo < hi:
        return (lo, hi)
    return None


def choose_h(q: float, d: int) -> float:
    """Midpoint of the feasible weight window; error when empty."""
    win = h_window(q, d)
    if win is None:
        raise ValueError(f"no feasible weight h for q={q}, d={d}")
    return 0.5 * (win[0] + win[1])


def q0(d: int, tol: float = 1e-12) -> float:
    """Largest q below which the weight window is nonempty (bisection)."""
    if d < 2:
        raise ValueError("d must be at least 2")
    lo = 1.0 / (d + 1) + 1e-9
    hi = 1.0 - 1e-12
    if h_window(lo, d) is None:
        raise RuntimeError("window unexpectedly empty just above 1/(d+1)")
    if h_window(hi, d) is not None:
        raise RuntimeError("window unexpectedly nonempty near q=1")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if h_window(mid, d) is None:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def q0_d2_closed_form() -> float:
    """Trigonometric real root of q^3 - 7q^2 + 10q - 3 (the degree-2
    window-closing point): 7/3 - (2 sqrt(19)/3) sin(arctan(9 sqrt(107)/137)/3 + pi/6)."""
    return 7.0 / 3.0 - (2.0 * math.sqrt(19.0) / 3.0) * math.sin(
        math.atan(9.0 * math.sqrt(107.0) / 137.0) / 3.0 + math.pi / 6.0
    )


def q0_simple(d: int) -> float:
    """Cruder threshold from the untyped drift at h = 1/(d^2+3):
    1 / (d + 1 - 4h (d + 1 + sqrt((d+1)^2 - 8h))^{-1})."""
    if d < 1:
        raise ValueError("d must be a positive integer")
    h = 1.0 / (d * d + 3.0)
    root = math.sqrt((d + 1.0) ** 2 - 8.0 * h)
    return 1.0 / (d + 1.0 - 4.0 * h / (d + 1.0 + root))


@dataclass(frozen=True)
class DriftBounds:
    type1_bound: float
    type2_bound: float | None
    n_drift_bound: float
    cond_h_ok: bool


def drift_bounds(q: float, d: int, h: float, frac_type2: float = 0.0) -> DriftBounds:
    """Evaluate the displayed drift bounds at weight h.

    type1: q(d+1) - h(d q^2 + q(1-(1-q)^d)) - 1.
    type2: q(d+1) - 2 + h(1 + d(1-q-q^2) + q(1-q)^d), valid only under
    h < 1/(q+d-dq) (None otherwise).
    n_drift: (d+1) q - 1 - frac_type2, the particle-count drift bound at
    the given type-2 fraction n2/(n1+n2).
    """
    if not (0.0 < q < 1.0):
        raise ValueError("q must lie strictly between 0 and 1")
    if not (0.0 <= frac_type2 <= 1.0):
        raise ValueError("frac_type2 must lie in [0, 1]")
    t1 = q * (d + 1) - h * (d * q * q + q * (1.0 - (1.0 - q) ** d)) - 1.0
    ok = h < cond_h_upper(q, d)
    t2 = q * (d + 1) - 2.0 + h * _t2_den(q, d) if ok else None
    nd = (d + 1) * q - 1.0 - frac_type2
    return DriftBounds(t1, t2, nd, ok)


def theta_4block_highprec(L: float, p: float, d: int, dps: int = 40) -> float:
    """theta_4block evaluated with mpmath at `dps` digits (128-bit class
    cross-check path)."""
    _check_pd(p, d)
    with mp.workdps(dps):
        q = mp.mpf(1) - mp.mpf(repr(p))
        Lm = mp.mpf(repr(L))
        coeff = 2 * q**3 / 3 + 4 * q**2 / 3 + (4 * d - 6) * q - (4 * d - 2)
        val = mp.e ** (coeff * Lm) * (mp.expm1(Lm * q**2 / 3)) ** 2 * (mp.expm1(Lm * q**3 / 3)) ** 4
        return float(val)


def q0_highprec(d: int, dps: int = 40) -> float:
    """q0 bisection run with mpmath at `dps` digits."""
    with mp.workdps(dps):

        def window_empty(q: mp.mpf) -> bool:
            t1 = (q * (d + 1) - 1) / (d * q**2 + q * (1 - (1 - q) ** d))
            lo = max(t1, mp.mpf(0))
            hi = min(mp.mpf(1), 1 / (q + d - d * q))
            num = 2 - q * (d + 1)
            den = 1 + d * (1 - q - q**2) + q * (1 - q) ** d
            if den > 0:
                hi = min(hi, num / den)
            elif den == 0:
                if num <= 0:
                    return True
            else:
                if num < 0:
                    lo = max(lo, num / den)
                elif num == 0:
                    return True
            return not (lo < hi)

        lo = mp.mpf(1) / (d + 1) + mp.mpf("1e-9")
        hi = mp.mpf(1) - mp.mpf("1e-20")
        for _ in range(200):
            mid = (lo + hi) / 2
            if window_empty(mid):
                hi = mid
            else:
                lo = mid
        return float((lo + hi) / 2)


@dataclass(frozen=True)
class BoundReport:
    formula: str
    inputs: dict
    value: float
    flags: tuple[str, ...]


def evaluate_formula(formula: str, **inputs) -> BoundReport:
    """Evaluate a named formula into a report with validity flags."""
    flags: list[str] = []
    if formula == "stick_good_lb":
        value = stick_good_lb(inputs["L"], inputs["q"], inputs["a"])
    elif formula == "block2_nice_lb":
        value = block2_nice_lb(inputs["L"], inputs["p"], inputs["d"])
    elif formula == "hat_L":
        value = hat_L(inputs["p"], inputs["d"])
    elif formula == "theta_4block":
        value = theta_4block(inputs["L"], inputs["p"], inputs["d"])
        if not (0.0 <= value <= 1.0):
            flags.append("outside_unit_interval")
    elif formula == "tilde_L":
        value = tilde_L(inputs["p"], inputs["d"])
    elif formula == "block2_asymptote":
        value = block2_asymptote(inputs["p"], inputs["d"])
    elif formula == "theta_asymptote":
        value = theta_asymptote(inputs["p"], inputs["d"])
    elif formula == "domination_density":
        value = domination_density(inputs["p"], inputs["d"])
        if value <= 0.0:
            flags.append("nonpositive_density")
    elif formula == "T1":
        value = T1(inputs["q"], inputs["d"])
    elif formula == "T2":
        value = T2(inputs["q"], inputs["d"])
        if _t2_den(inputs["q"], inputs["d"]) <= 0.0:
            flags.append("denominator_nonpositive")
    elif formula == "q0_simple":
        value = q0_simple(inputs["d"])
    elif formula == "q0":
        value = q0(inputs["d"])
    else:
        raise ValueError(f"unknown formula {formula!r}")
    return BoundReport(formula, dict(inputs), float(value), tuple(flags))


FORMULAS = (
    "stick_good_lb",
    "block2_nice_lb",
    "hat_L",
    "theta_4block",
    "tilde_L",
    "block2_asymptote",
    "theta_asymptote",
    "domination_density",
    "T1",
    "T2",
    "q0_simple",
    "q0",
)
