"""Scoring statistics: Welch's two-sample t-test, SUS scoring, log times.

The two-sided p-value comes from the Student-t CDF computed through the
regularized incomplete beta function (continued-fraction evaluation), good
to well below 1e-9 absolute error against reference implementations.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass


class InsufficientData(ValueError):
    def __init__(self, n: int):
        self.n = n
        super().__init__(f"need at least 2 values per sample, got {n}")


class ZeroVariance(ValueError):
    def __init__(self, which: str):
        super().__init__(f"sample {which} has zero variance")


class OutOfRange(ValueError):
    pass


class WrongLength(ValueError):
    pass


class NonPositiveTime(ValueError):
    def __init__(self, value: float):
        super().__init__(f"times must be positive to be logged, got {value}")


_EPS = 3e-16
_FPMIN = 1e-300
_MAX_ITER = 300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified
    Lentz's method)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must be in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_bt = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    bt = math.exp(ln_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for T ~ Student-t with df degrees of freedom."""
    if df <= 0:
        raise ValueError(f"degrees of freedom must be positive, got {df}")
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p: float


def welch_t_test(sample_a: list[float], sample_b: list[float]) -> WelchResult:
    """Welch's unequal-variance two-sample t-test, two-sided.

    Both samples need at least two values and nonzero variance
    (Welch-Satterthwaite degrees of freedom are undefined otherwise).
    """
    a = [float(x) for x in sample_a]
    b = [float(x) for x in sample_b]
    if len(a) < 2:
        raise InsufficientData(len(a))
    if len(b) < 2:
        raise InsufficientData(len(b))
    mean_a, mean_b = statistics.fmean(a), statistics.fmean(b)
    var_a = statistics.variance(a, mean_a)
    var_b = statistics.variance(b, mean_b)
    if var_a == 0.0:
        raise ZeroVariance("a")
    if var_b == 0.0:
        raise ZeroVariance("b")
    return _welch_from_moments(mean_a, var_a, len(a), mean_b, var_b, len(b))


def _welch_from_moments(
    mean_a: float, var_a: float, n_a: int, mean_b: float, var_b: float, n_b: int
) -> WelchResult:
    sa = var_a / n_a
    sb = var_b / n_b
    se2 = sa + sb
    t = (mean_a - mean_b) / math.sqrt(se2)
    df = se2 * se2 / (sa * sa / (n_a - 1) + sb * sb / (n_b - 1))
    return WelchResult(t=t, df=df, p=student_t_two_sided_p(t, df))


def sus_score(answers: list[int]) -> float:
    """System Usability Scale: 10 answers in 1..5 mapped to 0..100.

    Odd-numbered items contribute (answer - 1), even-numbered items
    (5 - answer); the sum is scaled by 2.5.
    """
    if len(answers) != 10:
        raise WrongLength(f"SUS needs exactly 10 answers, got {len(answers)}")
    total = 0
    for i, answer in enumerate(answers):
        if not isinstance(answer, int) or not 1 <= answer <= 5:
            raise OutOfRange(f"answer #{i + 1} must be an integer in 1..5, got {answer!r}")
        if i % 2 == 0:  # items 1, 3, 5, 7, 9
            total += answer - 1
        else:  # items 2, 4, 6, 8, 10
            total += 5 - answer
    return total * 2.5


def log_times(seconds: list[float]) -> list[float]:
    """Natural log of each duration; rejects non-positive values."""
    for value in seconds:
        if value <= 0:
            raise NonPositiveTime(value)
    return [math.log(value) for value in seconds]
