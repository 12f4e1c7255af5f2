"""Statistic, effect size, and permutation significance against brute oracles.

The oracle below shares no code with the package kernel: cosines via
math.fsum over explicit loops, splits via itertools, p-values by counting.
"""

import math
from itertools import combinations

import numpy as np
import pytest

from embias import (
    AssociationTest,
    PermutationPlan,
    WordList,
    effect_size,
    p_value,
    run_tests,
    run_weat,
    word_association,
)
from embias import test_statistic as assoc_statistic
from embias.lexicon import ResolvedTest
from embias.weat import derived_rng


# ---------------------------------------------------------------- oracle

def _cos(u, v):
    num = math.fsum(a * b for a, b in zip(u, v))
    nu = math.sqrt(math.fsum(a * a for a in u))
    nv = math.sqrt(math.fsum(b * b for b in v))
    return num / (nu * nv)


def _assoc(w, A, B):
    sa = math.fsum(_cos(w, a) for a in A) / len(A)
    sb = math.fsum(_cos(w, b) for b in B) / len(B)
    return sa - sb


def _stat(X, Y, A, B):
    return math.fsum(_assoc(x, A, B) for x in X) - math.fsum(
        _assoc(y, A, B) for y in Y
    )


def _effect(X, Y, A, B, convention):
    s = [_assoc(w, A, B) for w in list(X) + list(Y)]
    mean_x = math.fsum(s[: len(X)]) / len(X)
    mean_y = math.fsum(s[len(X):]) / len(Y)
    mu = math.fsum(s) / len(s)
    var = math.fsum((v - mu) ** 2 for v in s)
    var /= len(s) if convention == "population" else len(s) - 1
    sd = math.sqrt(var)
    return (mean_x - mean_y) / sd if sd > 0 else float("nan")


def _exact_p(X, Y, A, B, inclusive=False):
    pool = list(X) + list(Y)
    n = len(X)
    s = [_assoc(w, A, B) for w in pool]
    obs = math.fsum(s[:n]) - math.fsum(s[n:])
    hits = 0
    total = 0
    for side in combinations(range(2 * n), n):
        left = math.fsum(s[i] for i in side)
        right = math.fsum(s[i] for i in range(2 * n) if i not in side)
        stat = left - right
        total += 1
        if stat > obs or (inclusive and stat >= obs):
            hits += 1
    return hits / total, total


def _random_resolved(rng, n, m, dim, name="case"):
    def names(p, k):
        return tuple(f"{p}{j}" for j in range(k))

    test = AssociationTest(
        name=name, kind="weat", category="BM", variant="language-specific",
        x=WordList("x", names("x", n)), y=WordList("y", names("y", n)),
        a=WordList("a", names("a", m)), b=WordList("b", names("b", m)),
    )
    return ResolvedTest(
        test=test,
        x_words=names("x", n), y_words=names("y", n),
        a_words=names("a", m), b_words=names("b", m),
        x_vectors=rng.standard_normal((n, dim)),
        y_vectors=rng.standard_normal((n, dim)),
        a_vectors=rng.standard_normal((m, dim)),
        b_vectors=rng.standard_normal((m, dim)),
    )


# ----------------------------------------------------------- hand values

def hand_case():
    X = np.array([[1.0, 0.0]])
    Y = np.array([[0.0, 1.0]])
    A = np.array([[1.0, 0.0]])
    B = np.array([[0.0, 1.0]])
    return X, Y, A, B


def test_hand_statistic():
    X, Y, A, B = hand_case()
    assert abs(assoc_statistic(X, Y, A, B) - 2.0) <= 1e-9
    assert abs(word_association(X[0], A, B) - 1.0) <= 1e-9
    assert abs(word_association(Y[0], A, B) + 1.0) <= 1e-9


def test_hand_effect_sizes():
    X, Y, A, B = hand_case()
    assert abs(effect_size(X, Y, A, B) - 2.0) <= 1e-9
    assert abs(effect_size(X, Y, A, B, convention="sample") - math.sqrt(2)) <= 1e-9


def test_hand_exact_p_over_two_splits():
    X, Y, A, B = hand_case()
    p, used, mode = (
        p_value(X, Y, A, B, PermutationPlan(mode="exact", seed=0)),
        2,
        "exact",
    )
    assert p == 0.0
    r = run_weat(
        _resolved_from_arrays(X, Y, A, B), PermutationPlan(mode="exact", seed=0)
    )
    assert r.p_value == 0.0
    assert r.permutations_used == used
    assert r.mode == mode


def _resolved_from_arrays(X, Y, A, B, name="hand"):
    rng = np.random.default_rng(0)
    r = _random_resolved(rng, X.shape[0], A.shape[0], X.shape[1], name)
    return ResolvedTest(
        test=r.test,
        x_words=r.x_words, y_words=r.y_words,
        a_words=r.a_words, b_words=r.b_words,
        x_vectors=X, y_vectors=Y, a_vectors=A, b_vectors=B,
    )


# -------------------------------------------------------- oracle battles

def test_statistic_and_effect_match_oracle():
    rng = np.random.default_rng(11)
    for i in range(40):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(2, 5))
        r = _random_resolved(rng, n, m, 4, f"o{i}")
        X, Y, A, B = r.x_vectors, r.y_vectors, r.a_vectors, r.b_vectors
        assert abs(assoc_statistic(X, Y, A, B) - _stat(X, Y, A, B)) < 1e-10
        for conv in ("population", "sample"):
            got = effect_size(X, Y, A, B, convention=conv)
            want = _effect(X, Y, A, B, conv)
            assert abs(got - want) < 1e-10


def test_exact_p_matches_oracle_both_policies():
    rng = np.random.default_rng(12)
    for i in range(30):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, 4))
        r = _random_resolved(rng, n, m, 4, f"e{i}")
        X, Y, A, B = r.x_vectors, r.y_vectors, r.a_vectors, r.b_vectors
        for inclusive in (False, True):
            policy = "inclusive" if inclusive else "strict"
            got = run_weat(
                r, PermutationPlan(mode="exact", seed=0), tie_policy=policy
            )
            want_p, want_total = _exact_p(X, Y, A, B, inclusive)
            assert got.permutations_used == want_total
            assert abs(got.p_value - want_p) < 1e-12, (i, policy)


def test_exact_identity_split_is_included():
    # the all-in-order split IS a valid split, so strict p can be 0 but the
    # inclusive p can never be: the identity split always ties itself
    rng = np.random.default_rng(13)
    r = _random_resolved(rng, 3, 3, 4)
    strict = run_weat(r, PermutationPlan(mode="exact", seed=0))
    inclusive = run_weat(
        r, PermutationPlan(mode="exact", seed=0), tie_policy="inclusive"
    )
    used = strict.permutations_used
    strict_hits = round(strict.p_value * used)
    inclusive_hits = round(inclusive.p_value * used)
    assert inclusive_hits >= strict_hits + 1


def test_constant_association_values():
    # all targets identical: every split statistic equals the observed one
    X = np.array([[1.0, 1.0], [1.0, 1.0]])
    A = np.array([[1.0, 0.0], [1.0, 0.0]])
    B = np.array([[0.0, 1.0], [0.0, 1.0]])
    r = _resolved_from_arrays(X, X.copy(), A, B, "const")
    strict = run_weat(r, PermutationPlan(mode="exact", seed=0))
    assert strict.p_value == 0.0
    assert strict.degenerate
    assert math.isnan(strict.effect_size)
    inclusive = run_weat(
        r, PermutationPlan(mode="exact", seed=0), tie_policy="inclusive"
    )
    assert inclusive.p_value == 1.0
    sampled = run_weat(
        r, PermutationPlan(mode="sampled", sample_count=500, seed=1)
    )
    assert sampled.p_value == 0.0


def test_attribute_swap_negates():
    rng = np.random.default_rng(14)
    r = _random_resolved(rng, 3, 3, 5)
    X, Y, A, B = r.x_vectors, r.y_vectors, r.a_vectors, r.b_vectors
    assert abs(assoc_statistic(X, Y, A, B) + assoc_statistic(X, Y, B, A)) < 1e-12
    assert abs(effect_size(X, Y, A, B) + effect_size(X, Y, B, A)) < 1e-12
    assert abs(assoc_statistic(X, Y, A, B) + assoc_statistic(Y, X, A, B)) < 1e-12


def test_row_scaling_invariance():
    # cosine kills per-vector magnitude, so any positive row scaling is a no-op
    rng = np.random.default_rng(15)
    r = _random_resolved(rng, 3, 4, 5)
    X, Y, A, B = r.x_vectors, r.y_vectors, r.a_vectors, r.b_vectors
    scale = lambda M: M * rng.uniform(0.1, 10.0, size=(M.shape[0], 1))
    a = assoc_statistic(X, Y, A, B)
    b = assoc_statistic(scale(X), scale(Y), scale(A), scale(B))
    assert abs(a - b) < 1e-10


def test_sampled_p_is_reproducible_and_name_dependent():
    rng = np.random.default_rng(16)
    r1 = _random_resolved(rng, 6, 6, 5, "alpha")
    plan = PermutationPlan(mode="sampled", sample_count=2000, seed=9)
    a = run_weat(r1, plan)
    b = run_weat(r1, plan)
    assert a.p_value == b.p_value
    # same data under another name draws a different split sample
    r2 = ResolvedTest(
        test=AssociationTest(
            name="beta", kind="weat", category="BM",
            variant="language-specific",
            x=r1.test.x, y=r1.test.y, a=r1.test.a, b=r1.test.b,
        ),
        x_words=r1.x_words, y_words=r1.y_words,
        a_words=r1.a_words, b_words=r1.b_words,
        x_vectors=r1.x_vectors, y_vectors=r1.y_vectors,
        a_vectors=r1.a_vectors, b_vectors=r1.b_vectors,
    )
    c = run_weat(r2, plan)
    assert a.statistic == c.statistic
    assert a.p_value != c.p_value  # 2000 draws over C(12,6) splits; ties absurd


def test_derived_rng_is_stable():
    # frozen draws: platform or thread scheduling must never change them
    a = derived_rng(0, "gender-bm-maths-arts").random(3)
    b = derived_rng(0, "gender-bm-maths-arts").random(3)
    np.testing.assert_array_equal(a, b)
    c = derived_rng(1, "gender-bm-maths-arts").random(3)
    assert not np.array_equal(a, c)


def test_auto_mode_picks_exact_under_threshold():
    rng = np.random.default_rng(17)
    r = _random_resolved(rng, 4, 3, 4)
    res = run_weat(r, PermutationPlan(seed=0))
    assert res.mode == "exact"
    assert res.permutations_used == math.comb(8, 4)
    small = run_weat(r, PermutationPlan(seed=0, exact_threshold=10, sample_count=77))
    assert small.mode == "sampled"
    assert small.permutations_used == 77


def test_forced_exact_over_threshold_is_an_error():
    rng = np.random.default_rng(18)
    r = _random_resolved(rng, 8, 3, 4)
    with pytest.raises(ValueError, match="exact"):
        run_weat(r, PermutationPlan(mode="exact", seed=0, exact_threshold=100))


def test_plan_validation():
    with pytest.raises(ValueError):
        PermutationPlan(mode="guess")
    with pytest.raises(ValueError):
        PermutationPlan(sample_count=0)
    with pytest.raises(ValueError):
        PermutationPlan(seed=-1)
    with pytest.raises(ValueError):
        PermutationPlan(exact_threshold=0)


def test_run_tests_parallel_results_are_equal():
    rng = np.random.default_rng(19)
    resolved = [_random_resolved(rng, 5, 4, 6, f"par{i}") for i in range(8)]
    plan = PermutationPlan(mode="sampled", sample_count=3000, seed=2)
    serial = run_tests(resolved, plan, jobs=1)
    threaded = run_tests(resolved, plan, jobs=4)
    for a, b in zip(serial, threaded):
        assert a == b


def test_run_tests_rejects_bad_jobs():
    with pytest.raises(ValueError, match="jobs"):
        run_tests([], PermutationPlan(), jobs=0)
