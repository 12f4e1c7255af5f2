"""Association test statistics with permutation significance.

The observed statistic and every permutation split statistic go through one
shared arithmetic path (2 * subset-sum - total), so the strict ``>``
comparison is exact even when all association values coincide. Sampled mode
draws equal splits uniformly with replacement from a generator derived from
(seed, test name), making every result reproducible independently of thread
count or test order.
"""

from __future__ import annotations

import hashlib
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lexicon import ResolvedTest

MODES = ("exact", "sampled")
STDDEV_CONVENTIONS = ("population", "sample")
TIE_POLICIES = ("strict", "inclusive")


@dataclass(frozen=True)
class PermutationPlan:
    """How to compute significance.

    mode=None picks "exact" when the number of equal splits C(2n, n) fits
    under ``exact_threshold`` and "sampled" otherwise. Forcing mode="exact"
    past the threshold is an error (the enumeration would be unbounded).
    """

    mode: str | None = None
    sample_count: int = 10_000
    seed: int = 0
    exact_threshold: int = 20_000

    def __post_init__(self):
        if self.mode is not None and self.mode not in MODES:
            raise ValueError(f"mode must be None or one of {MODES}, got {self.mode!r}")
        if self.sample_count < 1:
            raise ValueError(f"sample_count must be >= 1, got {self.sample_count}")
        if self.exact_threshold < 1:
            raise ValueError(
                f"exact_threshold must be >= 1, got {self.exact_threshold}"
            )
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed!r}")


@dataclass(frozen=True)
class TestResult:
    """Everything one association test produced, ready for reporting."""

    test_name: str
    statistic: float
    effect_size: float
    p_value: float
    permutations_used: int
    mode: str
    degenerate: bool
    stddev_convention: str
    tie_policy: str
    oov: tuple[tuple[str, str], ...] = ()
    truncated: tuple[tuple[str, str], ...] = ()
    composition_oov: tuple[str, ...] = ()


def derived_rng(seed: int, test_name: str) -> np.random.Generator:
    """Generator for one named test: seed entropy + 4 words of the name hash."""
    digest = hashlib.sha256(test_name.encode("utf-8")).digest()
    words = struct.unpack("<4I", digest[:16])
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *words])))


def _rows(vectors, what: str) -> np.ndarray:
    M = np.atleast_2d(np.ascontiguousarray(vectors, dtype=np.float64))
    if M.ndim != 2 or M.shape[0] < 1:
        raise ValueError(f"{what} must be a non-empty stack of vectors")
    return M


def _unit_rows(M: np.ndarray, what: str) -> np.ndarray:
    norms = np.linalg.norm(M, axis=1)
    if np.any(norms == 0.0):
        raise ValueError(f"{what} contains a zero vector; cosine is undefined")
    return M / norms[:, None]


def _association_values(T, A, B, *, what: str = "targets") -> np.ndarray:
    """Mean cosine of each target row to A minus mean cosine to B."""
    T = _unit_rows(_rows(T, what), what)
    A = _unit_rows(_rows(A, "attribute list A"), "attribute list A")
    B = _unit_rows(_rows(B, "attribute list B"), "attribute list B")
    if not (T.shape[1] == A.shape[1] == B.shape[1]):
        raise ValueError(
            f"dimension mismatch: targets {T.shape[1]}, A {A.shape[1]}, B {B.shape[1]}"
        )
    return (T @ A.T).mean(axis=1) - (T @ B.T).mean(axis=1)


def word_association(w, A, B) -> float:
    """Association of one word vector with attribute lists A and B."""
    return float(_association_values(np.atleast_2d(w), A, B, what="word")[0])


def test_statistic(X, Y, A, B) -> float:
    """Sum of target associations for X minus the sum for Y."""
    sx = _association_values(X, A, B, what="target list X")
    sy = _association_values(Y, A, B, what="target list Y")
    return float(sx.sum() - sy.sum())


def effect_size(X, Y, A, B, *, convention: str = "population") -> float:
    """Standardized mean association gap; NaN when the spread is zero."""
    if convention not in STDDEV_CONVENTIONS:
        raise ValueError(
            f"convention must be one of {STDDEV_CONVENTIONS}, got {convention!r}"
        )
    sx = _association_values(X, A, B, what="target list X")
    sy = _association_values(Y, A, B, what="target list Y")
    pooled = np.concatenate([sx, sy])
    sd = float(pooled.std(ddof=0 if convention == "population" else 1))
    if sd == 0.0:
        return math.nan
    return float((sx.mean() - sy.mean()) / sd)


def _split_stats(s: np.ndarray, idx: np.ndarray, total: float) -> np.ndarray:
    # one arithmetic path for observed and permuted statistics (tie safety)
    return 2.0 * s[idx].sum(axis=1) - total


def _resolve_mode(plan: PermutationPlan, n: int) -> tuple[str, int]:
    splits = math.comb(2 * n, n)
    if plan.mode == "exact" and splits > plan.exact_threshold:
        raise ValueError(
            f"exact mode would enumerate {splits} splits, over the threshold "
            f"of {plan.exact_threshold}; raise exact_threshold or sample"
        )
    if plan.mode == "exact" or (plan.mode is None and splits <= plan.exact_threshold):
        return "exact", splits
    return "sampled", plan.sample_count


def _p_value_details(
    X, Y, A, B,
    plan: PermutationPlan,
    *,
    tie_policy: str = "strict",
    rng: np.random.Generator | None = None,
) -> tuple[float, int, str]:
    if tie_policy not in TIE_POLICIES:
        raise ValueError(
            f"tie_policy must be one of {TIE_POLICIES}, got {tie_policy!r}"
        )
    sx = _association_values(X, A, B, what="target list X")
    sy = _association_values(Y, A, B, what="target list Y")
    if sx.shape[0] != sy.shape[0]:
        raise ValueError(
            f"target lists must be equal sized, got {sx.shape[0]} and {sy.shape[0]}"
        )
    n = sx.shape[0]
    s = np.concatenate([sx, sy])
    total = float(s.sum())
    observed = float(_split_stats(s, np.arange(n)[None, :], total)[0])

    mode, used = _resolve_mode(plan, n)
    if mode == "exact":

        idx = np.fromiter(
            (i for combo in combinations(range(2 * n), n) for i in combo),
            dtype=np.intp,
            count=used * n,
        ).reshape(used, n)
    else:
        if rng is None:
            rng = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence([plan.seed]))
            )
        keys = rng.random((used, 2 * n))
        # ascending index order inside each draw: summation order then
        # matches the enumerated path bit for bit, so a split that ties the
        # observed statistic ties in both modes
        idx = np.sort(np.argsort(keys, axis=1)[:, :n], axis=1)
    stats = _split_stats(s, idx, total)
    if tie_policy == "strict":
        hits = int(np.count_nonzero(stats > observed))
    else:
        hits = int(np.count_nonzero(stats >= observed))
    return hits / used, used, mode


def p_value(
    X, Y, A, B,
    plan: PermutationPlan,
    *,
    tie_policy: str = "strict",
    rng: np.random.Generator | None = None,
) -> float:
    """Fraction of equal target splits whose statistic beats the observed one."""
    p, _, _ = _p_value_details(X, Y, A, B, plan, tie_policy=tie_policy, rng=rng)
    return p


def run_weat(
    resolved: ResolvedTest,
    plan: PermutationPlan,
    *,
    stddev_convention: str = "population",
    tie_policy: str = "strict",
) -> TestResult:
    """Statistic, effect size, and significance for one resolved test."""
    X, Y = resolved.x_vectors, resolved.y_vectors
    A, B = resolved.a_vectors, resolved.b_vectors
    stat = test_statistic(X, Y, A, B)
    effect = effect_size(X, Y, A, B, convention=stddev_convention)
    rng = derived_rng(plan.seed, resolved.name)
    p, used, mode = _p_value_details(
        X, Y, A, B, plan, tie_policy=tie_policy, rng=rng
    )
    return TestResult(
        test_name=resolved.name,
        statistic=stat,
        effect_size=effect,
        p_value=p,
        permutations_used=used,
        mode=mode,
        degenerate=math.isnan(effect),
        stddev_convention=stddev_convention,
        tie_policy=tie_policy,
        oov=resolved.oov,
        truncated=resolved.truncated,
    )


def run_tests(
    resolved: Sequence[ResolvedTest],
    plan: PermutationPlan,
    *,
    stddev_convention: str = "population",
    tie_policy: str = "strict",
    jobs: int = 1,
) -> list[TestResult]:
    """Run many resolved tests, preserving input order.

    Each test draws from its own (seed, name)-derived generator, so the
    results are identical whatever ``jobs`` is set to.
    """
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")

    def one(r: ResolvedTest) -> TestResult:
        return run_weat(
            r, plan, stddev_convention=stddev_convention, tie_policy=tie_policy
        )

    if jobs == 1 or len(resolved) <= 1:
        return [one(r) for r in resolved]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, resolved))
