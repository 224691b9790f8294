"""Seeded random instances for the solvers, shared by the benchmarks and the tests."""

import itertools
import math
import random
from typing import List, Optional

from src.core.forms import MultilinearForm, coprimality_profile


def pairwise_coprime_coefficients(rng: random.Random, count: int, bound: int = 9) -> List[int]:
    if count == 1:
        return [rng.choice([-1, 1])]
    pool = [c for c in range(-bound, bound + 1) if c != 0]
    chosen: List[int] = []
    while len(chosen) < count:
        c = rng.choice(pool)
        if all(math.gcd(c, other) == 1 for other in chosen):
            chosen.append(c)
    return chosen


def random_pairwise_form(rng: random.Random, max_n: int = 6, min_d: int = 2, max_d: Optional[int] = None,
                         bound: int = 9, max_terms: int = 6) -> MultilinearForm:
    """Coprime form with pairwise coprime coefficients."""
    n = rng.randint(max(min_d, 1), max_n)
    d = rng.randint(min_d, min(n, max_d or n))
    index_sets = list(itertools.combinations(range(1, n + 1), d))
    count = rng.randint(1, min(len(index_sets), max_terms))
    chosen = rng.sample(index_sets, count)
    return MultilinearForm.from_terms(zip(chosen, pairwise_coprime_coefficients(rng, count, bound)), n=n)


def random_codimension_one_form(rng: random.Random, max_d: int = 5, bound: int = 9) -> MultilinearForm:
    """(d+1, d)-form with at least one coprime pair of coefficients."""
    while True:
        d = rng.randint(1, max_d)
        n = d + 1
        index_sets = list(itertools.combinations(range(1, n + 1), d))
        count = rng.randint(2, n)
        chosen = rng.sample(index_sets, count)
        pool = [c for c in range(-bound, bound + 1) if c != 0]
        form = MultilinearForm.from_terms([(i, rng.choice(pool)) for i in chosen], n=n)
        if coprimality_profile(form).has_coprime_pair:
            return form


def random_target(rng: random.Random, bound: int = 50) -> int:
    b = 0
    while b == 0:
        b = rng.randint(-bound, bound)
    return b
