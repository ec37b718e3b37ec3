"""Estimators for the reported quantities: ultimatum rates, per-position
matrices, least-squares fits with R^2, and the paired t-test.

Only the estimators the experiments need; nothing general-purpose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .engine import SimulationOutcome


@dataclass(frozen=True)
class RegressionResult:
    coefficients: dict[str, float]
    r_squared: float
    n_points: int

    def __post_init__(self) -> None:
        if self.n_points <= len(self.coefficients):
            raise ValueError(
                f"need more points ({self.n_points}) than coefficients "
                f"({len(self.coefficients)})"
            )


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    degrees_of_freedom: int
    p_value: float
    two_tailed: bool = True


def mean_std(values: Sequence[float]) -> tuple[float, float]:
    """Arithmetic mean and sample (n-1) standard deviation; std is 0 for n = 1."""
    n = len(values)
    if n == 0:
        raise ValueError("mean_std of an empty sequence")
    mean = sum(values) / n
    if n == 1:
        return mean, 0.0
    var = sum((x - mean) ** 2 for x in values) / (n - 1)
    return mean, math.sqrt(var)


def iau_rate(outcomes: Sequence[SimulationOutcome]) -> tuple[float, float]:
    """Fraction of runs with at least one ultimatum, with the indicator's sample std."""
    if not outcomes:
        raise ValueError("iau_rate of an empty batch")
    indicators = [1.0 if o.had_ultimatum else 0.0 for o in outcomes]
    return mean_std(indicators)


def per_position_rates(
    outcomes: Sequence[SimulationOutcome], n_authors: int
) -> tuple[float, ...]:
    """Issuance rate by initial byline position over a fixed-size corpus."""
    if not outcomes:
        raise ValueError("per_position_rates of an empty batch")
    hits = [0] * n_authors
    for o in outcomes:
        if len(o.initial_order) != n_authors:
            raise ValueError(
                f"outcome has {len(o.initial_order)} authors, expected {n_authors}"
            )
        seen = set()
        for event in o.events:
            pos = o.initial_order.index(event.issuer) + 1
            if pos not in seen:
                hits[pos - 1] += 1
                seen.add(pos)
    return tuple(h / len(outcomes) for h in hits)


def r_squared(predicted: Sequence[float], actual: Sequence[float]) -> float:
    """1 - SS_res/SS_tot; a zero-variance response scores 1 on a perfect fit, else 0."""
    if len(predicted) != len(actual) or len(actual) == 0:
        raise ValueError("predicted and actual must be equal-length and nonempty")
    actual_arr = np.asarray(actual, dtype=float)
    pred_arr = np.asarray(predicted, dtype=float)
    ss_res = float(np.sum((actual_arr - pred_arr) ** 2))
    ss_tot = float(np.sum((actual_arr - actual_arr.mean()) ** 2))
    if ss_tot == 0.0:
        # Zero-variance response: a perfect fit scores 1, anything else 0.
        # Equality is judged against float dust from the solver.
        scale = 1.0 + float(np.sum(actual_arr**2))
        return 1.0 if ss_res <= 1e-18 * scale else 0.0
    return 1.0 - ss_res / ss_tot


def _least_squares(design: np.ndarray, response: np.ndarray) -> np.ndarray:
    coeffs, _, rank, _ = np.linalg.lstsq(design, response, rcond=None)
    if rank < design.shape[1]:
        raise ValueError("design matrix is rank deficient")
    return coeffs


def ols_fit_planar(points: Sequence[tuple[float, float, float]]) -> RegressionResult:
    """Least-squares plane P ~ a + b_u*U + b_c*C over (U, C, P) triples."""
    if len(points) < 4:
        raise ValueError(f"planar fit needs at least 4 points, got {len(points)}")
    arr = np.asarray(points, dtype=float)
    design = np.column_stack([np.ones(len(arr)), arr[:, 0], arr[:, 1]])
    response = arr[:, 2]
    intercept, b_u, b_c = _least_squares(design, response)
    predicted = design @ np.array([intercept, b_u, b_c])
    return RegressionResult(
        coefficients={
            "intercept": float(intercept),
            "u_slope": float(b_u),
            "c_slope": float(b_c),
        },
        r_squared=r_squared(predicted.tolist(), response.tolist()),
        n_points=len(arr),
    )


def log_fit(points: Sequence[tuple[float, float]]) -> RegressionResult:
    """Least squares of P on ln(A) over (A, P) pairs; requires A >= 1."""
    if len(points) < 3:
        raise ValueError(f"log fit needs at least 3 points, got {len(points)}")
    arr = np.asarray(points, dtype=float)
    if np.any(arr[:, 0] < 1.0):
        raise ValueError("log fit requires every A >= 1")
    design = np.column_stack([np.ones(len(arr)), np.log(arr[:, 0])])
    response = arr[:, 1]
    intercept, slope = _least_squares(design, response)
    predicted = design @ np.array([intercept, slope])
    return RegressionResult(
        coefficients={"intercept": float(intercept), "log_slope": float(slope)},
        r_squared=r_squared(predicted.tolist(), response.tolist()),
        n_points=len(arr),
    )


def paired_t_test(x: Sequence[float], y: Sequence[float]) -> TTestResult:
    """Two-tailed paired t-test on the differences x - y."""
    if len(x) != len(y):
        raise ValueError("paired samples must have equal length")
    n = len(x)
    if n < 2:
        raise ValueError(f"paired t-test needs n >= 2, got {n}")
    diffs = [a - b for a, b in zip(x, y)]
    mean, sd = mean_std(diffs)
    if sd == 0.0:
        if mean == 0.0:
            # Identical samples: no evidence of a difference.
            return TTestResult(0.0, n - 1, 1.0, two_tailed=True)
        raise ValueError("paired differences have zero variance")
    t = mean / (sd / math.sqrt(n))
    df = n - 1
    return TTestResult(
        t_statistic=t,
        degrees_of_freedom=df,
        p_value=student_t_two_tailed_p(t, df),
        two_tailed=True,
    )


def student_t_two_tailed_p(t: float, df: int) -> float:
    """P(|T_df| >= |t|) via the regularized incomplete beta function."""
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(0.5 * df, 0.5, x)


_BETA_TOL = 1e-12
_BETA_MAX_ITER = 400


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) by continued fraction, accurate to well below 1e-10."""
    if a <= 0 or b <= 0:
        raise ValueError("incomplete beta requires a > 0 and b > 0")
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # The continued fraction converges fastest for x below the distribution
    # mean; use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) otherwise.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    # Modified Lentz evaluation of the standard continued fraction for I_x.
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_TOL:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")
