import itertools
import json
import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from src.core.errors import DimensionError, FormParseError

logger = logging.getLogger(__name__)

# Strictly increasing, 1-based variable indices of one monomial.
IndexSet = Tuple[int, ...]
Assignment = Tuple[int, ...]

_TERM_PATTERN = re.compile(r'([+-]?)(?:(\d+)\*)?(x\d+(?:\*x\d+)*)')
_FACTOR_PATTERN = re.compile(r'\(([^()]*)\)')


@dataclass(frozen=True)
class MultilinearForm:
    """
    Integer multilinear (n, d)-form stored as a sparse, canonical map from
    index sets to nonzero coefficients.

    Monomials are kept as a tuple of (index set, coefficient) pairs sorted
    lexicographically by index set, which makes equal forms compare and
    hash equal.
    """

    n: int
    d: int
    monomials: Tuple[Tuple[IndexSet, int], ...]

    def __post_init__(self):
        if self.n < 1:
            raise FormParseError(f'variable count must be >= 1, got {self.n}')
        if not 1 <= self.d <= self.n:
            raise FormParseError(f'degree must satisfy 1 <= d <= n, got d={self.d}, n={self.n}')
        if not self.monomials:
            raise FormParseError('empty form: no monomials')
        previous = None
        for index_set, coefficient in self.monomials:
            if len(index_set) != self.d:
                raise FormParseError(f'monomial {index_set} does not have degree {self.d}')
            if any(b <= a for a, b in zip(index_set, index_set[1:])):
                raise FormParseError(f'index set {index_set} is not strictly increasing')
            if index_set[0] < 1 or index_set[-1] > self.n:
                raise FormParseError(f'index set {index_set} outside 1..{self.n}',
                                     {'n': self.n, 'indices': list(index_set)})
            if coefficient == 0:
                raise FormParseError(f'zero coefficient stored for {index_set}')
            if previous is not None and index_set <= previous:
                raise FormParseError('monomials are not in canonical order or repeat')
            previous = index_set

    @classmethod
    def from_terms(cls, terms: Union[Mapping[Sequence[int], int], Iterable[Tuple[Sequence[int], int]]],
                   n: Optional[int] = None) -> 'MultilinearForm':
        """
        Build a canonical form from (indices, coefficient) terms.

        Duplicate index sets are merged by adding coefficients and zero
        results are dropped.

        Args:
            terms: Mapping or iterable of (variable indices, coefficient)
            n: Declared variable count (inferred from the largest index if None)

        Returns:
            Canonical MultilinearForm
        """
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: Dict[IndexSet, int] = {}
        degree = None
        largest = 0
        for indices, coefficient in items:
            ordered = tuple(sorted(int(i) for i in indices))
            if not ordered:
                raise FormParseError('constant terms are not allowed')
            if len(set(ordered)) != len(ordered):
                raise FormParseError(f'repeated variable in monomial {list(indices)}',
                                     {'indices': list(indices)})
            if ordered[0] < 1:
                raise FormParseError(f'variable indices start at 1, got {ordered[0]}')
            if degree is None:
                degree = len(ordered)
            elif len(ordered) != degree:
                raise FormParseError(f'form is not homogeneous: degrees {degree} and {len(ordered)}')
            if n is not None and ordered[-1] > n:
                raise FormParseError(f'index x{ordered[-1]} out of declared range 1..{n}',
                                     {'n': n, 'index': ordered[-1]})
            largest = max(largest, ordered[-1])
            merged[ordered] = merged.get(ordered, 0) + int(coefficient)

        kept = tuple(sorted((k, v) for k, v in merged.items() if v != 0))
        if not kept:
            raise FormParseError('empty form after merging duplicate monomials')
        return cls(n=n if n is not None else largest, d=degree, monomials=kept)

    @property
    def coefficients(self) -> Tuple[int, ...]:
        return tuple(c for _, c in self.monomials)

    @property
    def index_sets(self) -> Tuple[IndexSet, ...]:
        return tuple(i for i, _ in self.monomials)

    @property
    def is_linear(self) -> bool:
        return self.d == 1

    def coefficient(self, index_set: Sequence[int]) -> int:
        """Coefficient of x_I, 0 when the monomial is absent."""
        key = tuple(sorted(index_set))
        for candidate, coefficient in self.monomials:
            if candidate == key:
                return coefficient
        return 0

    def evaluate(self, values: Sequence[int]) -> int:
        if len(values) != self.n:
            raise DimensionError(f'expected {self.n} values, got {len(values)}',
                                 {'expected': self.n, 'actual': len(values)})
        total = 0
        for index_set, coefficient in self.monomials:
            total += coefficient * math.prod(values[i - 1] for i in index_set)
        return total

    def sup_norm(self) -> int:
        return max(abs(c) for c in self.coefficients)

    def content(self) -> int:
        """Positive gcd of all coefficients."""
        return math.gcd(*self.coefficients)

    def variables(self) -> Tuple[int, ...]:
        """Variables that occur in at least one monomial."""
        return tuple(sorted({i for index_set in self.index_sets for i in index_set}))

    def occurrences(self) -> Dict[int, int]:
        """Number of monomials containing each variable 1..n."""
        counts = {i: 0 for i in range(1, self.n + 1)}
        for index_set in self.index_sets:
            for i in index_set:
                counts[i] += 1
        return counts

    def restrict_zero(self, variable: int) -> 'MultilinearForm':
        """The form F with x_variable := 0 (same n, monomials without the variable)."""
        kept = [(i, c) for i, c in self.monomials if variable not in i]
        return MultilinearForm.from_terms(kept, n=self.n)

    def factor_out(self, variable: int) -> Tuple['MultilinearForm', List[Tuple[IndexSet, int]]]:
        """
        Split F = x_variable * G + rest.

        Returns:
            G as a degree d-1 form over the same n variables, and the list of
            monomials of F that do not contain the variable
        """
        if self.d < 2:
            raise FormParseError('cannot factor a variable out of a linear form')
        cofactor = [(tuple(j for j in i if j != variable), c) for i, c in self.monomials if variable in i]
        rest = [(i, c) for i, c in self.monomials if variable not in i]
        return MultilinearForm.from_terms(cofactor, n=self.n), rest

    def relabel(self, mapping: Mapping[int, int], n: int) -> 'MultilinearForm':
        """Rename variables through mapping (old index -> new index)."""
        return MultilinearForm.from_terms(
            [(tuple(mapping[i] for i in index_set), c) for index_set, c in self.monomials], n=n)

    def primitive_part(self) -> Tuple[int, 'MultilinearForm']:
        g = self.content()
        if g == 1:
            return 1, self
        return g, MultilinearForm(self.n, self.d, tuple((i, c // g) for i, c in self.monomials))

    def render(self) -> str:
        """Render in the text grammar accepted by parse_form."""
        parts = []
        for position, (index_set, coefficient) in enumerate(self.monomials):
            variables = '*'.join(f'x{i}' for i in index_set)
            magnitude = abs(coefficient)
            body = variables if magnitude == 1 else f'{magnitude}*{variables}'
            if position == 0:
                parts.append(('-' if coefficient < 0 else '') + body)
            else:
                parts.append(('- ' if coefficient < 0 else '+ ') + body)
        return ' '.join(parts)

    def to_json(self) -> Dict[str, Any]:
        return {
            'n': self.n,
            'monomials': [{'vars': list(i), 'coef': str(c)} for i, c in self.monomials],
        }

    @classmethod
    def from_json(cls, payload: Union[str, Mapping[str, Any]]) -> 'MultilinearForm':
        """Read the JSON interchange format; coefficients are decimal strings."""
        data = json.loads(payload) if isinstance(payload, str) else payload
        try:
            n = int(data['n'])
            terms = [(m['vars'], int(str(m['coef']))) for m in data['monomials']]
        except (KeyError, TypeError, ValueError) as e:
            raise FormParseError(f'invalid form JSON: {e}')
        return cls.from_terms(terms, n=n)

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class ProductForm:
    """
    Product of integer linear forms L_1 * ... * L_m over n shared variables.

    Not multilinear in general; the oracle searches and obstruction checks
    accept it through the same evaluate/n protocol.
    """

    factors: Tuple[MultilinearForm, ...]
    n: int = field(default=0)

    def __post_init__(self):
        if not self.factors:
            raise FormParseError('product form needs at least one linear factor')
        for factor in self.factors:
            if not factor.is_linear:
                raise FormParseError(f'factor {factor.render()} is not linear')
        width = max(f.n for f in self.factors)
        if self.n == 0:
            object.__setattr__(self, 'n', width)
        elif self.n < width:
            raise FormParseError(f'declared n={self.n} smaller than factor width {width}')
        # Every factor shares the same variable count.
        object.__setattr__(self, 'factors', tuple(
            f if f.n == self.n else MultilinearForm(self.n, 1, f.monomials) for f in self.factors))

    @property
    def m(self) -> int:
        return len(self.factors)

    @property
    def d(self) -> int:
        return len(self.factors)

    def coefficient_rows(self) -> Tuple[Tuple[int, ...], ...]:
        """Rows are the coefficient vectors of the factors."""
        return tuple(tuple(f.coefficient((j,)) for j in range(1, self.n + 1)) for f in self.factors)

    def evaluate(self, values: Sequence[int]) -> int:
        if len(values) != self.n:
            raise DimensionError(f'expected {self.n} values, got {len(values)}',
                                 {'expected': self.n, 'actual': len(values)})
        return math.prod(f.evaluate(values) for f in self.factors)

    def render(self) -> str:
        return '*'.join(f'({f.render()})' for f in self.factors)

    def to_json(self) -> Dict[str, Any]:
        return {'n': self.n, 'factors': [f.to_json() for f in self.factors]}

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class CoprimalityProfile:
    overall_gcd: int
    pairwise_coprime: bool
    has_coprime_pair: bool
    # First non-coprime pair in canonical order, if any.
    failing_pair: Optional[Tuple[IndexSet, IndexSet]] = None
    # First coprime pair in canonical order, if any.
    coprime_pair: Optional[Tuple[IndexSet, IndexSet]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'overall_gcd': str(self.overall_gcd),
            'pairwise_coprime': self.pairwise_coprime,
            'has_coprime_pair': self.has_coprime_pair,
            'failing_pair': [list(i) for i in self.failing_pair] if self.failing_pair else None,
            'coprime_pair': [list(i) for i in self.coprime_pair] if self.coprime_pair else None,
        }


@dataclass(frozen=True)
class NormalizedForm:
    """
    Result of normalize(): a reduced form plus what is needed to lift its
    solutions back to the original variables.
    """

    form: MultilinearForm
    original_n: int
    # index_map[k] is the original index of reduced variable k + 1.
    index_map: Tuple[int, ...]
    # Original variables present in every monomial, fixed to 1.
    fixed: Tuple[int, ...]
    # Original variables absent from every monomial, set to 1.
    free: Tuple[int, ...]

    def reconstruct(self, values: Sequence[int]) -> Assignment:
        if len(values) != self.form.n:
            raise DimensionError(f'expected {self.form.n} values, got {len(values)}')
        result = [1] * self.original_n
        for position, original in enumerate(self.index_map):
            result[original - 1] = values[position]
        return tuple(result)


def parse_form(text: str, n: Optional[int] = None) -> MultilinearForm:
    """
    Parse a form written as e.g. "6*x1*x2 + 10*x1*x3 + 15*x2*x3".

    Args:
        text: Form expression; whitespace is insignificant
        n: Declared variable count (inferred if None)

    Returns:
        Canonical MultilinearForm
    """
    compact = re.sub(r'\s+', '', text or '')
    if not compact:
        raise FormParseError('empty form text')

    terms = []
    position = 0
    while position < len(compact):
        match = _TERM_PATTERN.match(compact, position)
        if not match or match.end() == position:
            raise FormParseError(f'syntax error at position {position}: {compact[position:position + 12]!r}',
                                 {'position': position})
        sign, coefficient, variables = match.groups()
        if position > 0 and not sign:
            raise FormParseError(f'expected "+" or "-" at position {position}', {'position': position})
        value = int(coefficient) if coefficient else 1
        if sign == '-':
            value = -value
        indices = [int(v[1:]) for v in variables.split('*')]
        if any(i < 1 for i in indices):
            raise FormParseError('variable indices start at x1', {'indices': indices})
        if len(set(indices)) != len(indices):
            raise FormParseError(f'repeated variable in term {match.group(0)!r}; forms must be multilinear',
                                 {'term': match.group(0)})
        terms.append((indices, value))
        position = match.end()

    return MultilinearForm.from_terms(terms, n=n)


def parse_product(text: str, n: Optional[int] = None) -> ProductForm:
    """Parse "(x1+x2+x3)*(-x1+x2+x3)" into a ProductForm."""
    compact = re.sub(r'\s+', '', text or '')
    if not re.fullmatch(r'\([^()]+\)(\*\([^()]+\))*', compact):
        raise FormParseError(f'expected a product of parenthesized linear forms: {text!r}')
    factors = [parse_form(inner, n=n) for inner in _FACTOR_PATTERN.findall(compact)]
    return ProductForm(tuple(factors), n or 0)


def parse_linear_forms(texts: Sequence[str], n: Optional[int] = None) -> ProductForm:
    return ProductForm(tuple(parse_form(t, n=n) for t in texts), n or 0)


def parse_any(text: str, n: Optional[int] = None) -> Union[MultilinearForm, ProductForm]:
    """Product syntax when parentheses appear, plain multilinear syntax otherwise."""
    if '(' in (text or ''):
        return parse_product(text, n=n)
    return parse_form(text, n=n)


def evaluate(form: Union[MultilinearForm, ProductForm], values: Sequence[int]) -> int:
    return form.evaluate(values)


def sup_norm(form: MultilinearForm) -> int:
    return form.sup_norm()


def vector_norm(values: Sequence[int]) -> int:
    """Sup-norm of an integer vector (0 for the empty vector)."""
    return max((abs(v) for v in values), default=0)


def coprimality_profile(form: MultilinearForm) -> CoprimalityProfile:
    """
    Coefficient gcd predicates that gate the solvers.

    pairwise_coprime is vacuously true for a single monomial; has_coprime_pair
    needs two stored coefficients.
    """
    monomials = form.monomials
    failing = None
    coprime = None
    for (i1, c1), (i2, c2) in itertools.combinations(monomials, 2):
        if math.gcd(c1, c2) == 1:
            if coprime is None:
                coprime = (i1, i2)
        elif failing is None:
            failing = (i1, i2)
        if failing is not None and coprime is not None:
            break
    return CoprimalityProfile(
        overall_gcd=form.content(),
        pairwise_coprime=failing is None,
        has_coprime_pair=coprime is not None,
        failing_pair=failing,
        coprime_pair=coprime,
    )


def nu(d: int) -> int:
    """Exponent sum_{k=0}^{d} d!/k! of the general search bound."""
    if d < 1:
        raise ValueError(f'degree must be >= 1, got {d}')
    total = 0
    term = 1
    # term runs through d!/d!, d!/(d-1)!, ..., d!/0!
    for k in range(d, -1, -1):
        total += term
        term *= k
    return total


def nu_upper_bound_holds(d: int, terms: int = 30) -> bool:
    """
    Exact check of nu(d) < d! * e.

    Compares against the truncated series sum_{k<=K} 1/k!, which is below e,
    so a strict inequality against it implies the claim.
    """
    terms = max(terms, d + 1)
    lower_e = sum(Fraction(1, math.factorial(k)) for k in range(terms + 1))
    return Fraction(nu(d)) < math.factorial(d) * lower_e


def general_bound(form: MultilinearForm, b: int) -> int:
    """|b| * (2|F|)^nu_d."""
    return abs(b) * (2 * form.sup_norm()) ** nu(form.d)


def prop4_bound(form: MultilinearForm, b: int) -> int:
    """|b| + |F|^3 for quadratic forms."""
    return abs(b) + form.sup_norm() ** 3


def normalize(form: MultilinearForm) -> NormalizedForm:
    """
    Drop variables absent from every monomial, set variables present in all
    monomials to 1, and relabel the rest to 1..n'.

    Args:
        form: Form to reduce

    Returns:
        NormalizedForm with the reduced form and the reconstruction data
    """
    counts = form.occurrences()
    total = len(form.monomials)
    free = tuple(i for i, c in counts.items() if c == 0)
    fixed = tuple(i for i, c in counts.items() if c == total)
    kept = tuple(i for i, c in counts.items() if 0 < c < total)
    if not kept:
        raise FormParseError('normalization removes every variable (constant form)',
                             {'fixed': list(fixed)})
    mapping = {original: position + 1 for position, original in enumerate(kept)}
    fixed_set = set(fixed)
    reduced = MultilinearForm.from_terms(
        [(tuple(mapping[i] for i in index_set if i not in fixed_set), c) for index_set, c in form.monomials],
        n=len(kept),
    )
    if fixed or free:
        logger.debug('normalize: fixed=%s free=%s reduced=%s', fixed, free, reduced.render())
    return NormalizedForm(form=reduced, original_n=form.n, index_map=kept, fixed=fixed, free=free)
