"""Seeded instance corpus for the randomized acceptance tests.

Roughly three quarters of the cases draw generous constraint patterns and
are almost always solvable; the rest are built to be unsolvable in one of
three ways (bound sums that cannot match the total, budgets nobody can
afford, or a pinned rent gap no envy-free allocation tolerates), so every
certificate kind shows up with known ground truth.
"""

import random
from fractions import Fraction

from rentdiv import Instance, make_instance
from rentdiv.model import NEG_INF, POS_INF

SEED = 20260815
SIZE = 1000


def _rat(rng, lo, hi):
    den = rng.choice([1, 1, 2, 4])
    return Fraction(rng.randint(lo * den, hi * den), den)


def _valuations(rng, n):
    return [[_rat(rng, 0, 100) for _ in range(n)] for _ in range(n)]


def _wide_bounds(rng, n, total):
    # Each room brackets the uniform rent, so the sums bracket the total.
    share = total / n
    lower = [share - _rat(rng, 1, 120) for _ in range(n)]
    upper = [share + _rat(rng, 1, 120) for _ in range(n)]
    return lower, upper


def _generous_budgets(rng, n, total):
    floor = total / n + 100
    return [[floor + _rat(rng, 0, 80) for _ in range(n)] for _ in range(n)]


def _feasible_leaning(rng, n):
    vals = _valuations(rng, n)
    total = _rat(rng, 0, 60 * n)
    style = rng.choice(["plain", "plain", "bounds", "budgets", "both"])
    kwargs = {}
    if style in ("bounds", "both"):
        kwargs["lower_bounds"], kwargs["upper_bounds"] = _wide_bounds(rng, n, total)
    if style in ("budgets", "both"):
        kwargs["budgets"] = _generous_budgets(rng, n, total)
    return make_instance(vals, total, **kwargs)


def _forced_bound_sum(rng, n):
    # Upper bounds that sum to strictly less than the total rent.  Built
    # without make_instance because that constructor rejects the mismatch;
    # the solvers re-validate and turn it into a certificate.
    vals = _valuations(rng, n)
    total = Fraction(rng.randint(n, 60 * n))
    upper = tuple(total / n - 1 - _rat(rng, 0, 3) for _ in range(n))
    return Instance(
        n=n,
        valuations=tuple(tuple(v for v in row) for row in vals),
        total_rent=total,
        lower_bounds=(NEG_INF,) * n,
        upper_bounds=upper,
        budgets=tuple((POS_INF,) * n for _ in range(n)),
    )


def _forced_budget(rng, n):
    # Every budget sits below the average rent, so some room is unaffordable.
    vals = _valuations(rng, n)
    total = Fraction(rng.randint(n, 60 * n))
    cap = total / n - 1
    budgets = [[cap - _rat(rng, 0, 3) for _ in range(n)] for _ in range(n)]
    return make_instance(vals, total, budgets=budgets)


def _forced_envy_gap(rng, n):
    # Pin two rooms more than the largest valuation apart: whoever takes the
    # expensive room envies the cheap one at any envy-free candidate.
    vals = _valuations(rng, n)
    p0 = Fraction(-60) - _rat(rng, 0, 10)
    p1 = p0 + 101 + _rat(rng, 0, 10)
    lower = [Fraction(-500)] * n
    upper = [Fraction(500)] * n
    lower[0] = upper[0] = p0
    lower[1] = upper[1] = p1
    if n == 2:
        total = p0 + p1
    else:
        total = _rat(rng, 0, 30 * n)
    return make_instance(vals, total, lower_bounds=lower, upper_bounds=upper)


_FORCED = [_forced_bound_sum, _forced_budget, _forced_envy_gap]


def generate_corpus(seed=SEED, size=SIZE):
    rng = random.Random(seed)
    cases = []
    for i in range(size):
        n = rng.randint(2, 5)
        if i % 4 == 3:
            inst = _FORCED[(i // 4) % 3](rng, n)
        else:
            inst = _feasible_leaning(rng, n)
        cases.append((f"case{i:04d}", inst))
    return cases
