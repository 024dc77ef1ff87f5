"""Distribution summaries and significance tests for score comparisons.

Implements the machinery needed to compare two systems by their score
distributions rather than single numbers: quartile/percentile summaries,
approximate (Monte Carlo) and exact randomization tests on per-sentence
match counts, Bonferroni correction, the two-sample Kolmogorov-Smirnov
test, the Brown-Forsythe equal-variance test, Spearman rank correlation,
and paired win-rate/median-difference comparisons.

Everything here is pure; the Monte Carlo test owns a private generator
seeded per call, so results are deterministic given (inputs, iterations,
seed) and safe to compute from concurrent workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError
from .rng import Rng
from .scorer import MatchCounts, corpus_prf

_CHUNK_ROWS = 1 << 15
_TIE_SLACK = 1e-12  # absorbs last-ulp drift between algebraically equal F1s


@dataclass(frozen=True)
class ScoreSummary:
    n: int
    min: float
    q1: float
    median: float
    q3: float
    max: float
    mean: float
    sd: float
    p95: float


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    method: str  # "randomization" | "ks" | "brown_forsythe"


@dataclass(frozen=True)
class PairedComparison:
    n_configs: int
    win_rate_a: float
    win_rate_b: float
    tie_rate: float
    delta_median: float


def summarize(scores: Sequence[float]) -> ScoreSummary:
    """Five-number summary plus mean, sample sd and 95th percentile.

    Quantiles interpolate linearly between order statistics at position
    p*(n-1); sd uses the n-1 divisor (0 for a single observation). The
    rule is fixed so reports are bit-reproducible.
    """
    if len(scores) == 0:
        raise InvalidInputError("cannot summarize an empty score list")
    # Sorting first makes every field exactly permutation-invariant
    # (float summation is order-sensitive in the last ulp).
    arr = np.sort(np.asarray(scores, dtype=np.float64))
    q1, med, q3, p95 = np.quantile(arr, [0.25, 0.5, 0.75, 0.95], method="linear")
    sd = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return ScoreSummary(
        n=int(arr.size),
        min=float(arr.min()),
        q1=float(q1),
        median=float(med),
        q3=float(q3),
        max=float(arr.max()),
        mean=float(arr.mean()),
        sd=sd,
        p95=float(p95),
    )


# -- randomization tests ------------------------------------------------

def _count_arrays(counts: Sequence[MatchCounts]) -> np.ndarray:
    return np.array([[c.tp, c.fp, c.fn] for c in counts], dtype=np.float64)


def _f1_vector(tp: np.ndarray, fp: np.ndarray, fn: np.ndarray) -> np.ndarray:
    # Same operation sequence as scorer.prf_from_sums, vectorized, so a
    # swap pattern that reproduces the observed counts reproduces the
    # observed statistic bit for bit.
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(tp + fp > 0, tp / (tp + fp), 0.0)
        r = np.where(tp + fn > 0, tp / (tp + fn), 0.0)
        return np.where(p + r > 0, 2.0 * p * r / (p + r), 0.0)


def _swap_statistics(a: np.ndarray, b: np.ndarray, swap: np.ndarray) -> np.ndarray:
    """|F1(a') - F1(b')| for every swap pattern (rows of ``swap``)."""
    totals_a = a.sum(axis=0)
    totals_b = b.sum(axis=0)
    delta = b - a  # [n, 3]
    moved = swap.astype(np.float64) @ delta  # [rows, 3]
    sa = totals_a + moved
    sb = totals_b - moved
    f1a = _f1_vector(sa[:, 0], sa[:, 1], sa[:, 2])
    f1b = _f1_vector(sb[:, 0], sb[:, 1], sb[:, 2])
    return np.abs(f1a - f1b)


def _observed_statistic(a: Sequence[MatchCounts], b: Sequence[MatchCounts]) -> float:
    return abs(corpus_prf(a).f1 - corpus_prf(b).f1)


def _validate_paired_counts(a: Sequence[MatchCounts], b: Sequence[MatchCounts]) -> None:
    if len(a) != len(b):
        raise InvalidInputError(f"sentence count mismatch: {len(a)} vs {len(b)}")
    if len(a) == 0:
        raise InvalidInputError("need at least one sentence")


def approx_randomization_test(
    a: Sequence[MatchCounts],
    b: Sequence[MatchCounts],
    iterations: int,
    seed: int,
) -> TestResult:
    """Monte Carlo randomization test on the absolute corpus-F1 difference.

    Each iteration swaps the two systems' counts per sentence with
    probability 1/2 and recomputes the statistic; the p-value estimator
    is (c+1)/(R+1), which can never be exactly zero.
    """
    _validate_paired_counts(a, b)
    if iterations < 1:
        raise InvalidInputError("iterations must be >= 1")
    arr_a, arr_b = _count_arrays(a), _count_arrays(b)
    d = _observed_statistic(a, b)
    rng = Rng(seed)
    n = len(a)
    exceed = 0
    remaining = iterations
    while remaining > 0:
        rows = min(remaining, _CHUNK_ROWS)
        swap = rng.random_array((rows, n)) < 0.5
        stats = _swap_statistics(arr_a, arr_b, swap)
        exceed += int((stats >= d - _TIE_SLACK).sum())
        remaining -= rows
    p = (exceed + 1) / (iterations + 1)
    return TestResult(statistic=d, p_value=p, method="randomization")


def exact_randomization_test(a: Sequence[MatchCounts], b: Sequence[MatchCounts]) -> TestResult:
    """Enumerate all 2^n swap patterns (n <= 20; cost guard)."""
    _validate_paired_counts(a, b)
    n = len(a)
    if n > 20:
        raise InvalidInputError(f"exact enumeration refused for n={n} > 20 sentences")
    arr_a, arr_b = _count_arrays(a), _count_arrays(b)
    d = _observed_statistic(a, b)
    total = 1 << n
    bit_cols = np.arange(n, dtype=np.uint32)
    exceed = 0
    for start in range(0, total, _CHUNK_ROWS):
        stop = min(start + _CHUNK_ROWS, total)
        patterns = np.arange(start, stop, dtype=np.uint32)
        swap = (patterns[:, None] >> bit_cols[None, :]) & 1
        stats = _swap_statistics(arr_a, arr_b, swap.astype(bool))
        exceed += int((stats >= d - _TIE_SLACK).sum())
    return TestResult(statistic=d, p_value=exceed / total, method="randomization")


def bonferroni(p: float, m: int) -> float:
    """Family-wise correction: min(1, p*m)."""
    if m < 1:
        raise InvalidInputError("number of comparisons must be >= 1")
    return min(1.0, p * m)


# -- Kolmogorov-Smirnov --------------------------------------------------

def ks_two_sample(x: Sequence[float], y: Sequence[float]) -> TestResult:
    """Two-sample KS test with the asymptotic-series p-value.

    D is the supremum ECDF distance over all sample points; the p-value
    is 2*sum_k (-1)^(k-1) exp(-2 k^2 lambda^2) with lambda =
    D*sqrt(nm/(n+m)), truncated once a term's magnitude drops below
    1e-10 and clamped to [0, 1]. No small-sample continuity correction
    is applied, so treat p as approximate below n ~ 10.
    """
    if len(x) == 0 or len(y) == 0:
        raise InvalidInputError("both samples must be nonempty")
    xs = np.sort(np.asarray(x, dtype=np.float64))
    ys = np.sort(np.asarray(y, dtype=np.float64))
    n, m = xs.size, ys.size
    pooled = np.concatenate([xs, ys])
    fx = np.searchsorted(xs, pooled, side="right") / n
    fy = np.searchsorted(ys, pooled, side="right") / m
    d = float(np.abs(fx - fy).max())
    lam = d * math.sqrt(n * m / (n + m))
    return TestResult(statistic=d, p_value=_ks_series_p(lam), method="ks")


def _ks_series_p(lam: float) -> float:
    if lam < 1e-4:  # series degenerates; the survival probability tends to 1
        return 1.0
    total = 0.0
    sign = 1.0
    k = 1
    while True:
        term = math.exp(-2.0 * k * k * lam * lam)
        total += sign * term
        if term < 1e-10 or k > 100_000:
            break
        sign = -sign
        k += 1
    return min(1.0, max(0.0, 2.0 * total))


# -- Brown-Forsythe -------------------------------------------------------

def brown_forsythe(groups: Sequence[Sequence[float]]) -> TestResult:
    """Equal-variance test: one-way ANOVA on |x - median(group)|."""
    if len(groups) < 2:
        raise InvalidInputError("need at least two groups")
    zs = []
    for i, g in enumerate(groups):
        if len(g) < 2:
            raise InvalidInputError(f"group {i} has fewer than 2 observations")
        arr = np.asarray(g, dtype=np.float64)
        zs.append(np.abs(arr - np.median(arr)))
    k = len(zs)
    total_n = sum(z.size for z in zs)
    grand = sum(float(z.sum()) for z in zs) / total_n
    ss_between = sum(z.size * (float(z.mean()) - grand) ** 2 for z in zs)
    ss_within = sum(float(((z - z.mean()) ** 2).sum()) for z in zs)
    df1, df2 = k - 1, total_n - k
    if df2 <= 0:
        raise InvalidInputError("not enough observations for within-group variance")
    if ss_between <= 0.0:
        return TestResult(statistic=0.0, p_value=1.0, method="brown_forsythe")
    if ss_within <= 0.0:
        return TestResult(statistic=math.inf, p_value=0.0, method="brown_forsythe")
    f = (ss_between / df1) / (ss_within / df2)
    # Survival function of F(df1, df2) via the regularized incomplete beta.
    p = regularized_incomplete_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f))
    return TestResult(statistic=f, p_value=min(1.0, max(0.0, p)), method="brown_forsythe")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) by Lentz's continued fraction (abs. error < 1e-10)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    max_iter = 500
    eps = 1e-15
    fpmin = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    return h  # converged to working precision for all realistic dfs


# -- rank correlation -----------------------------------------------------

def _average_ranks(v: np.ndarray) -> np.ndarray:
    order = np.argsort(v, kind="stable")
    ranks = np.empty(v.size, dtype=np.float64)
    sorted_v = v[order]
    i = 0
    while i < v.size:
        j = i
        while j + 1 < v.size and sorted_v[j + 1] == sorted_v[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0  # average of 1-based ranks
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Rank correlation with average ranks for ties."""
    if len(x) != len(y):
        raise InvalidInputError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise InvalidInputError("need at least two observations")
    rx = _average_ranks(np.asarray(x, dtype=np.float64))
    ry = _average_ranks(np.asarray(y, dtype=np.float64))
    dx, dy = rx - rx.mean(), ry - ry.mean()
    vx, vy = float((dx * dx).sum()), float((dy * dy).sum())
    if vx == 0.0 or vy == 0.0:
        raise InvalidInputError("constant input has no rank variance")
    rho = float((dx * dy).sum()) / math.sqrt(vx * vy)
    return min(1.0, max(-1.0, rho))


# -- paired comparisons ---------------------------------------------------

def paired_comparison(a_scores: Sequence[float], b_scores: Sequence[float]) -> PairedComparison:
    """Win rates and median signed difference over paired configurations."""
    if len(a_scores) != len(b_scores):
        raise InvalidInputError(f"length mismatch: {len(a_scores)} vs {len(b_scores)}")
    if len(a_scores) == 0:
        raise InvalidInputError("need at least one paired configuration")
    a = np.asarray(a_scores, dtype=np.float64)
    b = np.asarray(b_scores, dtype=np.float64)
    wins_a = int((a > b).sum())
    wins_b = int((b > a).sum())
    n = a.size
    return PairedComparison(
        n_configs=n,
        win_rate_a=wins_a / n,
        win_rate_b=wins_b / n,
        tie_rate=(n - wins_a - wins_b) / n,
        delta_median=float(np.median(a - b)),
    )
