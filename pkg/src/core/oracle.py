"""
Exhaustive verification and exploration tools.

Box searches walk [-R, R]^n in lexicographic order (leftmost coordinate
most significant) and return the first hit, so their result never depends
on how the work is split across processes. Modular obstruction checks
enumerate (Z/M)^n once per (form, M) and cache the residue set.
"""

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd

from config import settings
from src.core.errors import BudgetExceededError, PreconditionError, VerificationError
from src.core.forms import Assignment, MultilinearForm, ProductForm, vector_norm
from src.utils.helpers import export_report

logger = logging.getLogger(__name__)

Evaluable = Union[MultilinearForm, ProductForm]

SOLVED = 'solved'
OBSTRUCTED = 'obstructed'
UNKNOWN = 'unknown'


@dataclass(frozen=True)
class ObstructionCertificate:
    """No residue vector a mod `modulus` has F(a) = target_residue (mod modulus)."""

    modulus: int
    target_residue: int

    def verify(self, form: Evaluable) -> bool:
        """Re-enumerate (Z/M)^n and confirm the residue is never attained."""
        return self.target_residue not in _enumerate_residues.__wrapped__(form, self.modulus)

    def to_json(self) -> Dict[str, Any]:
        return {'modulus': str(self.modulus), 'target_residue': str(self.target_residue)}


def box_size(n: int, radius: int) -> int:
    return (2 * radius + 1) ** n


def _charge(points: int, budget: Optional[int], what: str) -> None:
    budget = settings.get_evaluation_budget() if budget is None else budget
    if points > budget:
        raise BudgetExceededError(f'{what} needs {points} points, budget is {budget}',
                                  {'points': str(points), 'budget': str(budget)})


def _check_radius(radius: int) -> None:
    if radius < 0:
        raise PreconditionError(f'search radius must be >= 0, got {radius}', {'radius': radius})


def _split_last(form: MultilinearForm) -> Tuple[List[Tuple[Tuple[int, ...], int]], List[Tuple[Tuple[int, ...], int]]]:
    """F = x_n * slope(x') + offset(x'); both parts as (prefix indices, coefficient)."""
    n = form.n
    slope = [(index_set[:-1], c) for index_set, c in form.monomials if index_set[-1] == n]
    offset = [(index_set, c) for index_set, c in form.monomials if index_set[-1] != n]
    return slope, offset


def _affine_value(terms, prefix: Sequence[int]) -> int:
    return sum(c * math.prod(prefix[i - 1] for i in index_set) for index_set, c in terms)


def _search_slab(form: MultilinearForm, b: int, radius: int,
                 leading: Sequence[int]) -> Optional[Assignment]:
    """Lexicographically first solution whose first coordinate lies in `leading`."""
    slope_terms, offset_terms = _split_last(form)
    coordinates = range(-radius, radius + 1)
    if form.n == 1:
        prefixes: Iterable[Tuple[int, ...]] = [()]
    else:
        prefixes = (
            (head,) + tail
            for head in leading
            for tail in itertools.product(coordinates, repeat=form.n - 2)
        )
    for prefix in prefixes:
        slope = _affine_value(slope_terms, prefix)
        remainder = b - _affine_value(offset_terms, prefix)
        if slope == 0:
            if remainder == 0:
                return prefix + (-radius,)
            continue
        last, rest = divmod(remainder, slope)
        if rest == 0 and -radius <= last <= radius:
            return prefix + (last,)
    return None


def _partition(values: Sequence[int], parts: int) -> List[List[int]]:
    size = max(1, math.ceil(len(values) / parts))
    return [list(values[i:i + size]) for i in range(0, len(values), size)]


def _enumerate_box(form: Evaluable, b: int, radius: int) -> Optional[Assignment]:
    for candidate in itertools.product(range(-radius, radius + 1), repeat=form.n):
        if form.evaluate(candidate) == b:
            return candidate
    return None


def box_search(form: Evaluable, b: int, radius: int, budget: Optional[int] = None,
               workers: Optional[int] = None) -> Optional[Assignment]:
    """
    Lexicographically smallest a with |a| <= radius and F(a) = b.

    Multilinear forms are affine in their last variable, so only the
    (2R+1)^(n-1) prefixes are walked and x_n is solved exactly. The budget is
    still charged on the full box (2R+1)^n.

    Args:
        form: Multilinear or product form
        b: Target integer
        radius: Sup-norm radius R >= 0
        budget: Maximum box size (default from settings)
        workers: Process count (default from settings); the leading
            coordinate is split across processes

    Returns:
        Solution tuple, or None when the box holds no solution
    """
    _check_radius(radius)
    _charge(box_size(form.n, radius), budget, 'box search')
    if isinstance(form, ProductForm):
        return _enumerate_box(form, b, radius)

    workers = settings.get_search_workers() if workers is None else workers
    leading = list(range(-radius, radius + 1))
    if workers <= 1 or form.n < 2 or len(leading) < 2:
        return _search_slab(form, b, radius, leading)

    slabs = _partition(leading, workers)
    logger.info('box search over %d slabs with %d workers', len(slabs), workers)
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(_search_slab, form, b, radius, slab) for slab in slabs]
        found = [f.result() for f in futures]
    hits = [hit for hit in found if hit is not None]
    return min(hits) if hits else None


def product_box_search(factors: Union[ProductForm, Sequence[MultilinearForm]], b: int, radius: int,
                       budget: Optional[int] = None) -> Optional[Assignment]:
    """Lexicographically smallest a in the box with prod L_i(a) = b."""
    form = factors if isinstance(factors, ProductForm) else ProductForm(tuple(factors))
    _check_radius(radius)
    _charge(box_size(form.n, radius), budget, 'product box search')
    return _enumerate_box(form, b, radius)


@lru_cache(maxsize=256)
def _enumerate_residues(form: Evaluable, modulus: int) -> FrozenSet[int]:
    residues = set()
    for vector in itertools.product(range(modulus), repeat=form.n):
        residues.add(form.evaluate(vector) % modulus)
        if len(residues) == modulus:
            break
    logger.debug('residues of %s mod %d: %d of %d', form.render(), modulus, len(residues), modulus)
    return frozenset(residues)


def residue_set(form: Evaluable, modulus: int, budget: Optional[int] = None) -> FrozenSet[int]:
    """All values of F on (Z/M)^n, reduced mod M."""
    if modulus < 2:
        raise PreconditionError(f'modulus must be >= 2, got {modulus}', {'modulus': modulus})
    budget = settings.get_modular_budget() if budget is None else budget
    points = modulus ** form.n
    if points > budget:
        raise BudgetExceededError(f'modulus {modulus} needs {points} residue vectors, budget is {budget}',
                                  {'modulus': str(modulus), 'points': str(points), 'budget': str(budget)})
    return _enumerate_residues(form, modulus)


def modular_obstruction(form: Evaluable, b: int, modulus: int,
                        budget: Optional[int] = None) -> Optional[ObstructionCertificate]:
    """
    Certificate that F(a) = b has no solution mod M, or None.

    Args:
        form: Multilinear or product form
        b: Target integer
        modulus: M >= 2
        budget: Maximum M^n (default from settings)

    Returns:
        ObstructionCertificate or None
    """
    target = b % modulus
    if target in residue_set(form, modulus, budget):
        return None
    return ObstructionCertificate(modulus, target)


def find_obstruction(form: Evaluable, b: int, modulus_max: int,
                     budget: Optional[int] = None) -> Optional[ObstructionCertificate]:
    """Smallest M in 2..modulus_max yielding a certificate."""
    if modulus_max < 2:
        raise PreconditionError(f'modulus ceiling must be >= 2, got {modulus_max}',
                                {'modulus_max': modulus_max})
    for modulus in range(2, modulus_max + 1):
        certificate = modular_obstruction(form, b, modulus, budget)
        if certificate is not None:
            return certificate
    return None


def minimal_representation(form: Evaluable, b: int, radius: int,
                           budget: Optional[int] = None) -> Optional[Assignment]:
    """
    A solution of least sup-norm within the box, lexicographically smallest
    among those.

    Radii are tried in increasing order, so the first hit at radius R has
    sup-norm exactly R.
    """
    _check_radius(radius)
    for current in range(radius + 1):
        found = box_search(form, b, current, budget)
        if found is not None:
            return found
    return None


@dataclass(frozen=True)
class ProbeOutcome:
    b: int
    status: str
    solution: Optional[Assignment] = None
    certificate: Optional[ObstructionCertificate] = None
    reason: Optional[str] = None
    moduli_checked: Optional[int] = None

    def to_record(self) -> Dict[str, Any]:
        return {
            'b': str(self.b),
            'status': self.status,
            'solution': None if self.solution is None else ','.join(str(v) for v in self.solution),
            'sup_norm': None if self.solution is None else str(vector_norm(self.solution)),
            'modulus': None if self.certificate is None else str(self.certificate.modulus),
            'reason': self.reason,
            'moduli_checked': None if self.moduli_checked is None else str(self.moduli_checked),
        }


@dataclass
class ProbeReport:
    """Per-target classification gathered by probe()."""

    form: Evaluable
    radius: int
    modulus_max: int
    outcomes: List[ProbeOutcome] = field(default_factory=list)

    def counts(self) -> Dict[str, int]:
        tally = {SOLVED: 0, OBSTRUCTED: 0, UNKNOWN: 0}
        for outcome in self.outcomes:
            tally[outcome.status] += 1
        return tally

    def unknown_targets(self) -> List[int]:
        return [o.b for o in self.outcomes if o.status == UNKNOWN]

    def to_records(self) -> List[Dict[str, Any]]:
        return [o.to_record() for o in self.outcomes]

    def to_frame(self) -> pd.DataFrame:
        """One row per target; integers are kept as decimal strings."""
        columns = ['b', 'status', 'solution', 'sup_norm', 'modulus', 'reason', 'moduli_checked']
        return pd.DataFrame(self.to_records(), columns=columns)

    def export(self, path: str) -> str:
        return export_report(self.to_frame(), path)

    def to_json(self) -> Dict[str, Any]:
        return {
            'form': self.form.render(),
            'radius': str(self.radius),
            'modulus_max': str(self.modulus_max),
            'counts': self.counts(),
            'outcomes': self.to_records(),
        }


def _obstruction_stage(form: Evaluable, b: int, modulus_max: int,
                       budget: Optional[int]) -> Tuple[Optional[ObstructionCertificate], int]:
    """Try M = 2, 3, ... until a certificate, the ceiling, or the first M^n over budget."""
    checked = 1
    for modulus in range(2, modulus_max + 1):
        try:
            certificate = modular_obstruction(form, b, modulus, budget)
        except BudgetExceededError as e:
            logger.info('probe b=%d: obstruction search stopped at M=%d: %s', b, modulus, e.message)
            break
        checked = modulus
        if certificate is not None:
            return certificate, checked
    return None, checked


def probe_target(form: Evaluable, b: int, radius: int, modulus_max: int,
                 budget: Optional[int] = None) -> ProbeOutcome:
    """
    Obstruction first, then bounded search.

    Moduli whose residue enumeration exceeds the budget are skipped and the
    box search still runs; `moduli_checked` records the last modulus fully
    enumerated. A box search over budget makes the target unknown.
    """
    certificate, checked = _obstruction_stage(form, b, modulus_max, budget)
    if certificate is not None:
        return ProbeOutcome(b, OBSTRUCTED, certificate=certificate, moduli_checked=checked)
    try:
        found = box_search(form, b, radius, budget)
    except BudgetExceededError as e:
        logger.info('probe b=%d: %s', b, e.message)
        return ProbeOutcome(b, UNKNOWN, reason='budget', moduli_checked=checked)
    if found is None:
        return ProbeOutcome(b, UNKNOWN, reason='radius', moduli_checked=checked)
    if form.evaluate(found) != b:
        raise VerificationError(f'search returned {found} which does not evaluate to {b}')
    return ProbeOutcome(b, SOLVED, solution=tuple(found), moduli_checked=checked)


def probe(form: Evaluable, targets: Iterable[int], radius: int, modulus_max: int,
          budget: Optional[int] = None) -> ProbeReport:
    """
    Classify each target as solved, obstructed or unknown.

    Unknown entries are data for the representation question, not claims
    about it.

    Args:
        form: Form to probe
        targets: Finite collection of targets b
        radius: Box-search radius
        modulus_max: Largest modulus tried for obstructions
        budget: Point budget shared by both stages

    Returns:
        ProbeReport in target order
    """
    if isinstance(form, MultilinearForm) and form.content() != 1:
        logger.warning('probing a non-coprime form (gcd %d): %s', form.content(), form.render())
    report = ProbeReport(form, radius, modulus_max)
    for b in targets:
        report.outcomes.append(probe_target(form, b, radius, modulus_max, budget))
    logger.info('probe %s: %s', form.render(), report.counts())
    return report
