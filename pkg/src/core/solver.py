import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import sympy

from config import settings
from src.core.errors import (BudgetExceededError, PreconditionError, SearchExhaustedError,
                             UnrepresentableError, VerificationError)
from src.core.forms import (Assignment, MultilinearForm, ProductForm, coprimality_profile, general_bound,
                            normalize, prop4_bound, vector_norm)
from src.core.intlinalg import ext_gcd
from src.core import oracle

logger = logging.getLogger(__name__)

LINEAR = 'linear'
THM1A = 'thm1a'
THM1B = 'thm1b'
PROP2 = 'prop2'
PROP4 = 'prop4'
SEARCH = 'search'

# Dispatch order used by solve_auto.
METHOD_PRIORITY = (LINEAR, PROP4, THM1A, THM1B, PROP2)
METHODS = METHOD_PRIORITY + (SEARCH,)


@dataclass(frozen=True)
class SolveReport:
    """
    A verified solution of F(a) = b.

    Construction evaluates F at the solution and raises VerificationError on
    any mismatch, so a SolveReport that exists is always correct.
    """

    form: Union[MultilinearForm, ProductForm]
    b: int
    solution: Assignment
    method: str
    bound_value: Optional[int] = None
    details: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'solution', tuple(int(v) for v in self.solution))
        value = self.form.evaluate(self.solution)
        if value != self.b:
            raise VerificationError(
                f'{self.method} produced {self.solution} with value {value}, expected {self.b}',
                {'method': self.method, 'solution': [str(v) for v in self.solution]})

    @property
    def sup_norm(self) -> int:
        return vector_norm(self.solution)

    @property
    def within_bound(self) -> Optional[bool]:
        if self.bound_value is None:
            return None
        return self.sup_norm <= self.bound_value

    def to_json(self) -> Dict[str, Any]:
        return {
            'form': self.form.render(),
            'b': str(self.b),
            'solution': [str(v) for v in self.solution],
            'evaluation': str(self.form.evaluate(self.solution)),
            'method': self.method,
            'sup_norm': str(self.sup_norm),
            'bound_value': None if self.bound_value is None else str(self.bound_value),
            'within_bound': self.within_bound,
            'details': {k: (str(v) if isinstance(v, int) and not isinstance(v, bool) else v)
                        for k, v in self.details.items()},
        }


def _require_coprime(form: MultilinearForm, method: str):
    g = form.content()
    if g != 1:
        raise PreconditionError(f'{method}: form is not coprime (gcd of coefficients is {g})',
                                {'method': method, 'gcd': str(g)})


def _require_pairwise(form: MultilinearForm, method: str):
    _require_coprime(form, method)
    profile = coprimality_profile(form)
    if not profile.pairwise_coprime:
        first, second = profile.failing_pair
        c1, c2 = form.coefficient(first), form.coefficient(second)
        raise PreconditionError(
            f'{method}: coefficients {c1} of {list(first)} and {c2} of {list(second)} are not coprime',
            {'method': method, 'failing_pair': [list(first), list(second)],
             'coefficients': [str(c1), str(c2)], 'gcd': str(math.gcd(c1, c2))})


def _single_monomial(form: MultilinearForm, b: int) -> List[int]:
    (index_set, coefficient), = form.monomials
    values = [1] * form.n
    # coefficient is +-1 here, so coefficient * coefficient * b == b
    values[index_set[0] - 1] = coefficient * b
    return values


def _two_monomials(form: MultilinearForm, b: int) -> List[int]:
    (first, f1), (second, f2) = form.monomials
    k = min(set(first) - set(second))
    m = min(set(second) - set(first))
    g, u, v = ext_gcd(f1, f2)
    if g != 1:
        raise PreconditionError(f'coefficients {f1} and {f2} are not coprime', {'gcd': str(g)})
    values = [1] * form.n
    values[k - 1] = b * u
    values[m - 1] = b * v
    return values


def _pivot(counts: Dict[int, int]) -> int:
    """Variable occurring in the most monomials, lowest index on ties."""
    return max(counts, key=lambda i: (counts[i], -i))


def _construct_pairwise(form: MultilinearForm, b: int) -> List[int]:
    if b == 0:
        return [0] * form.n
    if len(form.monomials) == 1:
        return _single_monomial(form, b)
    if len(form.monomials) == 2:
        return _two_monomials(form, b)

    normalized = normalize(form)
    reduced = normalized.form
    counts = reduced.occurrences()
    pivot = _pivot(counts)
    ell = len(reduced.monomials)

    if counts[pivot] == ell - 1:
        # F = x_p * G + f_J * x_J; solve G = 1 and back-substitute x_p.
        cofactor, rest = reduced.factor_out(pivot)
        (index_set, coefficient), = rest
        values = _construct_pairwise(cofactor, 1)
        values[pivot - 1] = b - coefficient * math.prod(values[i - 1] for i in index_set)
        logger.debug('thm1a case A on %s: pivot x%d', reduced.render(), pivot)
    else:
        values = _construct_pairwise(reduced.restrict_zero(pivot), b)
        values[pivot - 1] = 0
        logger.debug('thm1a case B on %s: x%d := 0', reduced.render(), pivot)
    return list(normalized.reconstruct(values))


def solve_thm1a(form: MultilinearForm, b: int) -> SolveReport:
    """
    Solve F(a) = b for a coprime form with pairwise coprime coefficients.

    Args:
        form: Multilinear form meeting the pairwise-coprime hypothesis
        b: Target integer

    Returns:
        SolveReport with bound |b| * (2|F|)^nu_d
    """
    _require_pairwise(form, THM1A)
    values = _construct_pairwise(form, b)
    return SolveReport(form, b, values, THM1A, general_bound(form, b))


def _missing_index(index_set: Sequence[int], n: int) -> int:
    (missing,) = set(range(1, n + 1)) - set(index_set)
    return missing


def _construct_codimension_one(form: MultilinearForm, b: int) -> List[int]:
    n = form.n
    if b == 0:
        return [0] * n
    if form.d == 1:
        g, u, v = ext_gcd(form.coefficient((1,)), form.coefficient((2,)))
        return [b * u, b * v]

    first, second = coprimality_profile(form).coprime_pair
    j, m = sorted((_missing_index(first, n), _missing_index(second, n)))
    # Send the coprime pair's missing indices to n-1 and n; the pivot lands on 1.
    order = [i for i in range(1, n + 1) if i not in (j, m)] + [j, m]
    permutation = {original: position + 1 for position, original in enumerate(order)}
    permuted = form.relabel(permutation, n)

    cofactor, _ = permuted.factor_out(1)
    shifted = cofactor.relabel({i: i - 1 for i in range(2, n + 1)}, n - 1)
    partial = _construct_codimension_one(shifted, 1)
    leading = permuted.coefficient(tuple(range(2, n + 1)))
    permuted_values = [b - leading * math.prod(partial)] + partial

    return [permuted_values[permutation[i] - 1] for i in range(1, n + 1)]


def solve_thm1b(form: MultilinearForm, b: int) -> SolveReport:
    """Solve F(a) = b for an (d+1, d)-form having a coprime coefficient pair."""
    if form.n != form.d + 1:
        raise PreconditionError(f'{THM1B}: needs n = d + 1, got n={form.n}, d={form.d}',
                                {'method': THM1B, 'n': form.n, 'd': form.d})
    profile = coprimality_profile(form)
    if not profile.has_coprime_pair:
        raise PreconditionError(f'{THM1B}: no pair of coprime coefficients', {'method': THM1B})
    values = _construct_codimension_one(form, b)
    first, second = profile.coprime_pair
    return SolveReport(form, b, values, THM1B, general_bound(form, b),
                       {'coprime_pair': [list(first), list(second)]})


def solve_linear(form: MultilinearForm, b: int) -> SolveReport:
    """
    Solve a linear form by folding the coefficients through ext_gcd.

    No sup-norm bound is claimed for the result.

    Args:
        form: Linear form (d = 1)
        b: Target integer

    Returns:
        SolveReport tagged "linear"
    """
    if not form.is_linear:
        raise PreconditionError(f'{LINEAR}: form has degree {form.d}', {'method': LINEAR, 'd': form.d})
    content = form.content()
    if b % content:
        raise UnrepresentableError(f'gcd {content} of the coefficients does not divide {b}',
                                   {'gcd': str(content), 'b': str(b)})

    variables = [index_set[0] for index_set in form.index_sets]
    coefficients = list(form.coefficients)
    running = abs(coefficients[0])
    multipliers = [1 if coefficients[0] > 0 else -1]
    for coefficient in coefficients[1:]:
        running, u, v = ext_gcd(running, coefficient)
        multipliers = [u * x for x in multipliers] + [v]

    scale = b // running
    values = [0] * form.n
    for variable, multiplier in zip(variables, multipliers):
        values[variable - 1] = multiplier * scale
    return SolveReport(form, b, values, LINEAR, None, {'gcd': content})


def _unit_solution(form: MultilinearForm) -> List[int]:
    """G(a) = 1 for a coprime, pairwise coprime linear G with |a| <= |G|."""
    values = [0] * form.n
    if len(form.monomials) == 1:
        ((variable,), coefficient), = form.monomials
        values[variable - 1] = coefficient
        return values
    ((v1,), f1), ((v2,), f2) = form.monomials[:2]
    _, u, v = ext_gcd(f1, f2)
    values[v1 - 1] = u
    values[v2 - 1] = v
    return values


def _construct_quadratic(form: MultilinearForm, b: int) -> List[int]:
    if b == 0:
        return [0] * form.n
    counts = form.occurrences()
    pivot = _pivot(counts)
    ell = len(form.monomials)

    if counts[pivot] == ell:
        cofactor, _ = form.factor_out(pivot)
        values = _unit_solution(cofactor)
        values[pivot - 1] = b
    elif ell == 2:
        # Disjoint monomials f1*x_k*x_i + f2*x_m*x_j.
        ((k, i), f1), ((m, j), f2) = form.monomials
        _, u, v = ext_gcd(f1, f2)
        values = [0] * form.n
        values[k - 1], values[m - 1] = u, v
        values[i - 1], values[j - 1] = b, b
    elif counts[pivot] == ell - 1:
        cofactor, rest = form.factor_out(pivot)
        (index_set, coefficient), = rest
        values = _unit_solution(cofactor)
        values[pivot - 1] = b - coefficient * math.prod(values[i - 1] for i in index_set)
    else:
        values = _construct_quadratic(form.restrict_zero(pivot), b)
        values[pivot - 1] = 0
    return values


def solve_prop4(form: MultilinearForm, b: int) -> SolveReport:
    """Quadratic pairwise-coprime forms with the sharper bound |b| + |F|^3."""
    if form.d != 2:
        raise PreconditionError(f'{PROP4}: needs a quadratic form, got degree {form.d}',
                                {'method': PROP4, 'd': form.d})
    _require_pairwise(form, PROP4)
    values = _construct_quadratic(form, b)
    return SolveReport(form, b, values, PROP4, prop4_bound(form, b))


def prop2_form(p: int) -> MultilinearForm:
    """6*x1*x2 + 2p*x1*x3 + 3p*x2*x3."""
    return MultilinearForm.from_terms({(1, 2): 6, (1, 3): 2 * p, (2, 3): 3 * p}, n=3)


def _check_prop2_parameter(p: int):
    if p < 5 or math.gcd(p, 6) != 1:
        raise PreconditionError(f'{PROP2}: needs p >= 5 with gcd(p, 6) = 1, got p={p}',
                                {'method': PROP2, 'p': str(p)})


def prop2_parameter(form: MultilinearForm) -> Optional[int]:
    """The p for which form is exactly 6x1x2 + 2p*x1x3 + 3p*x2x3, else None."""
    if form.n != 3 or form.d != 2 or len(form.monomials) != 3:
        return None
    if form.coefficient((1, 2)) != 6:
        return None
    doubled = form.coefficient((1, 3))
    if doubled % 2:
        return None
    p = doubled // 2
    if form.coefficient((2, 3)) != 3 * p or p < 5 or math.gcd(p, 6) != 1:
        return None
    return p


def _ordered_divisors(value: int) -> List[int]:
    """Positive divisors ascending, then their negatives in the same order."""
    positive = sympy.divisors(abs(value))
    return [int(d) for d in positive] + [-int(d) for d in positive]


def _prop2_fallback(p: int, b: int) -> Tuple[Tuple[int, int, int], Dict[str, Any]]:
    """Search z = 2, -2, 3, -3, ... factoring b + p^2 z^2 = (2x + pz)(3y + pz)."""
    limit = settings.PROP2_MAX_Z_FACTOR * p * p
    for magnitude in range(2, limit + 1):
        for z in (magnitude, -magnitude):
            pz = p * z
            target = b + pz * pz
            if target == 0:
                continue
            for u in _ordered_divisors(target):
                v = target // u
                if (u - pz) % 2 == 0 and (v - pz) % 3 == 0:
                    return ((u - pz) // 2, (v - pz) // 3, z), {'z': z, 'fallback': 'factor'}

    logger.info('prop2 fallback exhausted |z| <= %d for p=%d; trying box search', limit, p)
    found = oracle.box_search(prop2_form(p), b, limit)
    if found is None:
        raise SearchExhaustedError(f'{PROP2}: no solution found for p={p}, b={b}',
                                   {'p': str(p), 'b': str(b), 'radius': str(limit)})
    return tuple(found), {'fallback': 'box_search'}


def solve_prop2(p: int, b: int) -> SolveReport:
    """
    Solve 6xy + 2p*xz + 3p*yz = b.

    For b != -p^2 the factorization (2x + pz)(3y + pz) = b + p^2 with
    z = +-1 is used; the branch follows the parity of the power of 2 in
    b + p^2 and p mod 3. b = -p^2 goes through the fallback search.

    Args:
        p: Parameter with p >= 5 and gcd(p, 6) = 1
        b: Target integer

    Returns:
        SolveReport tagged "prop2"
    """
    _check_prop2_parameter(p)
    form = prop2_form(p)
    if b == 0:
        return SolveReport(form, b, (0, 0, 0), PROP2, None, {'p': p})

    square = p * p
    if b != -square:
        total = b + square
        alpha = (abs(total) & -abs(total)).bit_length() - 1
        odd_part = total // (1 << alpha)
        if p % 3 == 1:
            z = 1 if alpha % 2 == 0 else -1
        else:
            z = 1 if alpha % 2 == 1 else -1
        y, remainder_y = divmod((1 << alpha) - p * z, 3)
        x, remainder_x = divmod(odd_part - p * z, 2)
        if remainder_x or remainder_y:
            raise VerificationError(f'{PROP2}: parity branch failed for p={p}, b={b}')
        return SolveReport(form, b, (x, y, z), PROP2, None, {'p': p, 'alpha': alpha, 'z': z})

    solution, details = _prop2_fallback(p, b)
    details['p'] = p
    return SolveReport(form, b, solution, PROP2, None, details)


def classify(form: MultilinearForm) -> FrozenSet[str]:
    """Every method whose precondition the form satisfies."""
    profile = coprimality_profile(form)
    tags = set()
    coprime = profile.overall_gcd == 1
    if form.is_linear and coprime:
        tags.add(LINEAR)
    if coprime and profile.pairwise_coprime:
        tags.add(THM1A)
        if form.d == 2:
            tags.add(PROP4)
    if form.n == form.d + 1 and profile.has_coprime_pair:
        tags.add(THM1B)
    if prop2_parameter(form) is not None:
        tags.add(PROP2)
    return frozenset(tags)


def solve_with(method: str, form: MultilinearForm, b: int) -> SolveReport:
    """Run one named method; preconditions are always checked."""
    if method == PROP2:
        p = prop2_parameter(form)
        if p is None:
            raise PreconditionError(f'{PROP2}: form is not 6x1x2 + 2p*x1x3 + 3p*x2x3',
                                    {'method': PROP2})
        report = solve_prop2(p, b)
        return SolveReport(form, b, report.solution, PROP2, None, report.details)
    solvers: Dict[str, Callable[[MultilinearForm, int], SolveReport]] = {
        LINEAR: solve_linear,
        THM1A: solve_thm1a,
        THM1B: solve_thm1b,
        PROP4: solve_prop4,
    }
    if method not in solvers:
        raise PreconditionError(f'unknown method {method!r}', {'method': method})
    return solvers[method](form, b)


def default_search_radius(form: MultilinearForm, b: int, budget: int) -> int:
    """|b| * (2|F|)^nu_d, capped so that (2R + 1)^n stays within budget."""
    root, _ = sympy.integer_nthroot(budget, form.n)
    cap = (int(root) - 1) // 2
    if cap < 0:
        raise BudgetExceededError(f'budget {budget} cannot cover even the zero vector',
                                  {'budget': str(budget)})
    return min(general_bound(form, b), cap)


def solve_auto(form: MultilinearForm, b: int, search_radius: Optional[int] = None,
               budget: Optional[int] = None) -> SolveReport:
    """
    Dispatch to the first applicable method, falling back to box search.

    Args:
        form: Multilinear form
        b: Target integer
        search_radius: Radius for the search fallback (default: |b|(2|F|)^nu_d
            capped by the budget)
        budget: Box-search point budget (default from settings)

    Returns:
        SolveReport verified by evaluation
    """
    content, primitive = form.primitive_part()
    if b % content:
        raise UnrepresentableError(f'gcd {content} of the coefficients does not divide {b}',
                                   {'gcd': str(content), 'b': str(b)})
    target = b // content
    tags = classify(primitive)

    for method in METHOD_PRIORITY:
        if method in tags:
            logger.info('solve_auto: %s for %s = %d', method, primitive.render(), target)
            report = solve_with(method, primitive, target)
            if content == 1:
                return report
            details = dict(report.details, content=content)
            return SolveReport(form, b, report.solution, report.method, report.bound_value, details)

    if b == 0:
        return SolveReport(form, b, (0,) * form.n, SEARCH, None, {'radius': 0})
    budget = settings.get_evaluation_budget() if budget is None else budget
    radius = default_search_radius(form, b, budget) if search_radius is None else search_radius
    logger.info('solve_auto: no method applies to %s, box search radius %d', form.render(), radius)
    found = oracle.box_search(form, b, radius, budget=budget)
    if found is None:
        raise SearchExhaustedError(f'no solution with sup-norm <= {radius}',
                                   {'radius': str(radius), 'b': str(b)})
    return SolveReport(form, b, found, SEARCH, None, {'radius': radius})
