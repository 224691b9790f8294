import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from config import settings
from src.core.errors import (BudgetExceededError, DimensionError, PreconditionError, UnrepresentableError,
                             VerificationError)
from src.core.forms import MultilinearForm, ProductForm
from src.core.intlinalg import (IntMatrix, determinant, heger_check, minor_max_abs, minor_min_abs_nonzero,
                                minors_gcd, smith_normal_form, solve_linear_system)
from src.core.solver import SolveReport

logger = logging.getLogger(__name__)

PRODUCT_LINEAR = 'product_linear'
PRODUCT_BOUNDED = 'product_bounded'


@dataclass(frozen=True)
class DetFormInstance:
    """
    An r x s block A placed in the top-left corner of an n x n determinant
    whose remaining entries are the unknowns.
    """

    A: IntMatrix
    n: int

    def __post_init__(self):
        r, s = self.A.shape
        if not (1 <= s <= r <= self.n and s < self.n):
            raise DimensionError(f'need 1 <= s <= r <= n and s < n, got r={r}, s={s}, n={self.n}',
                                 {'r': r, 's': s, 'n': self.n})

    @property
    def r(self) -> int:
        return self.A.rows

    @property
    def s(self) -> int:
        return self.A.cols

    @property
    def minor_order(self) -> int:
        """r + s - n; the condition is vacuous when this is <= 0."""
        return self.r + self.s - self.n


@dataclass(frozen=True)
class DetSolution:
    """X fills rows r..n-1 under A (None when r = n); Y is the last n - s columns."""

    X: Optional[IntMatrix]
    Y: IntMatrix
    b: int = 0
    details: Dict[str, Any] = field(default_factory=dict, compare=False)

    def assemble(self, A: IntMatrix) -> IntMatrix:
        left = A.to_list() + (self.X.to_list() if self.X is not None else [])
        return IntMatrix([row + list(self.Y.row(i)) for i, row in enumerate(left)])

    def determinant(self, A: IntMatrix) -> int:
        return determinant(self.assemble(A))

    def to_json(self) -> Dict[str, Any]:
        return {
            'b': str(self.b),
            'X': None if self.X is None else self.X.to_json(),
            'Y': self.Y.to_json(),
        }


def representable(inst: DetFormInstance) -> bool:
    """
    Whether det(...) = b is solvable for every b.

    Condition (i) r + s <= n always holds the answer true. Otherwise the
    order r+s-n minors must be coprime; the count of unit invariant
    factors gives the same answer and both are checked.
    """
    k = inst.minor_order
    if k <= 0:
        return True
    by_minors = minors_gcd(inst.A, k) == 1
    by_factors = smith_normal_form(inst.A).unit_factor_count() >= k
    if by_minors != by_factors:
        raise VerificationError(f'minor gcd and invariant factors disagree at order {k}',
                                {'order': k, 'minors': by_minors, 'invariant_factors': by_factors})
    return by_minors


def _require_representable(inst: DetFormInstance) -> None:
    if not representable(inst):
        k = inst.minor_order
        g = minors_gcd(inst.A, k)
        raise UnrepresentableError(f'minors of order {k} of A are not coprime (gcd {g})',
                                   {'order': k, 'minor_gcd': str(g)})


def _complete_diagonal(factors: Sequence[int], r: int, s: int, n: int) -> List[List[int]]:
    """
    Complete the padded r x s diagonal block to an n x n matrix of
    determinant +-1.

    Unit diagonal entries are their own pivots. Every other diagonal
    position i < s takes a spare row rho and spare column kappa with
    N[rho][i] = N[i][kappa] = 1, which forms the block [[s_i, 1], [1, 0]].
    Rows s..r-1 of the block are zero and each takes a spare column.
    """
    N = [[0] * n for _ in range(n)]
    spare_rows = iter(range(r, n))
    spare_cols = iter(range(s, n))
    for i in range(s):
        value = factors[i] if i < len(factors) else 0
        N[i][i] = value
        if value != 1:
            rho, kappa = next(spare_rows), next(spare_cols)
            N[rho][i] = 1
            N[i][kappa] = 1
    for i in range(s, r):
        N[i][next(spare_cols)] = 1
    for rho, kappa in zip(spare_rows, spare_cols):
        N[rho][kappa] = 1
    return N


def _block_diagonal(block: IntMatrix, size: int) -> IntMatrix:
    entries = [[1 if i == j else 0 for j in range(size)] for i in range(size)]
    for i in range(block.rows):
        for j in range(block.cols):
            entries[i][j] = block[i, j]
    return IntMatrix(entries)


def complete_unimodular(inst: DetFormInstance) -> IntMatrix:
    """
    An n x n matrix with A in its top-left block and determinant exactly +1.

    Built from the Smith decomposition A = U S V as
    diag(U, I) * N * diag(V, I) with N completing the diagonal S.

    Args:
        inst: Representable instance

    Returns:
        IntMatrix M, det M = 1 verified exactly
    """
    _require_representable(inst)
    r, s, n = inst.r, inst.s, inst.n
    snf = smith_normal_form(inst.A)
    try:
        N = IntMatrix(_complete_diagonal(snf.invariant_factors, r, s, n))
    except StopIteration:
        raise VerificationError('ran out of spare rows or columns while completing', {'r': r, 's': s, 'n': n})

    M = _block_diagonal(snf.U, n) @ N @ _block_diagonal(snf.V, n)
    det = determinant(M)
    if det == -1:
        entries = M.to_list()
        for row in entries:
            row[n - 1] = -row[n - 1]
        M = IntMatrix(entries)
        det = determinant(M)
    if det != 1:
        raise VerificationError(f'completion has determinant {det}, expected 1', {'determinant': str(det)})
    if M.submatrix(range(r), range(s)) != inst.A:
        raise VerificationError('completion does not contain A in its top-left block')
    logger.debug('completed %dx%d block to %dx%d unimodular matrix', r, s, n, n)
    return M


def solve_detform(inst: DetFormInstance, b: int, completion: Optional[IntMatrix] = None) -> DetSolution:
    """
    Solve det [[A, Y_top], [X, Y_bottom]] = b.

    One completion serves every b: the first y-column is scaled by b.

    Args:
        inst: Representable instance
        b: Target determinant
        completion: Output of complete_unimodular(inst), reused when given

    Returns:
        DetSolution whose assembled determinant is exactly b
    """
    M = completion if completion is not None else complete_unimodular(inst)
    r, s, n = inst.r, inst.s, inst.n
    entries = M.to_list()
    for row in entries:
        row[s] *= b
    scaled = IntMatrix(entries)
    X = scaled.submatrix(range(r, n), range(s)) if r < n else None
    Y = scaled.submatrix(range(n), range(s, n))
    solution = DetSolution(X, Y, b)
    det = solution.determinant(inst.A)
    if det != b:
        raise VerificationError(f'assembled determinant {det} differs from target {b}')
    return solution


def detform_bound(inst: DetFormInstance, b: int) -> int:
    """
    n^2 |b| alpha beta (beta + 1)^(n-2) with beta = (n-1)! D^n + 1.

    alpha is the largest |entry| of A and D the smallest nonzero |order-s
    minor|. The value is informational; no solution is checked against it.
    """
    n, s = inst.n, inst.s
    if inst.r != n:
        raise PreconditionError(f'bound needs r = n, got r={inst.r}, n={n}', {'r': inst.r, 'n': n})
    g = minors_gcd(inst.A, s)
    if g != 1:
        raise PreconditionError(f'minors of order {s} are not coprime (gcd {g})', {'minor_gcd': str(g)})
    D = minor_min_abs_nonzero(inst.A, s)
    if D is None:
        raise PreconditionError(f'all minors of order {s} vanish', {'order': s})
    alpha = inst.A.max_abs_entry()
    beta = math.factorial(n - 1) * D ** n + 1
    return n * n * abs(b) * alpha * beta * (beta + 1) ** (n - 2)


def _bounded_system_search(A: IntMatrix, rhs: Sequence[int], radius: int,
                           budget: Optional[int] = None) -> Optional[Tuple[int, ...]]:
    """Lexicographically smallest x in [-radius, radius]^n with A x = rhs."""
    budget = settings.get_evaluation_budget() if budget is None else budget
    points = (2 * radius + 1) ** A.cols
    if points > budget:
        raise BudgetExceededError(f'bounded search needs {points} points, budget is {budget}',
                                  {'points': str(points), 'budget': str(budget)})
    rows = A.to_list()
    target = list(rhs)
    for candidate in itertools.product(range(-radius, radius + 1), repeat=A.cols):
        if all(sum(a * x for a, x in zip(row, candidate)) == c for row, c in zip(rows, target)):
            return candidate
    return None


def solve_product_linear(forms: Union[ProductForm, Sequence[MultilinearForm]], b: int,
                         bounded: bool = False, n: Optional[int] = None,
                         budget: Optional[int] = None) -> SolveReport:
    """
    Represent b by a product of m < n linear forms.

    Solves L_1(a) = b and L_i(a) = 1 for i >= 2 as the system A x = (b, 1, ..., 1).

    Args:
        forms: Linear factors, or a ProductForm
        b: Target integer
        bounded: Search the box of radius mu(A, b-vector) for the
            lexicographically smallest solution instead of using the SNF
        n: Variable count; by default the widest factor, padded to m + 1
            when there are not enough variables
        budget: Point budget for the bounded search

    Returns:
        SolveReport on the product form
    """
    if isinstance(forms, ProductForm):
        product = forms if n is None or n == forms.n else ProductForm(forms.factors, n)
    else:
        product = ProductForm(tuple(forms), n or 0)
    if n is None and product.n <= product.m:
        product = ProductForm(product.factors, product.m + 1)
    A = IntMatrix(product.coefficient_rows())
    m, width = A.shape
    if m >= width:
        raise PreconditionError(f'need fewer factors than variables, got m={m}, n={width}',
                                {'m': m, 'n': width})

    b_vector = (b,) + (1,) * (m - 1)
    g = minors_gcd(A, m)
    if g != 1:
        details = {'gcd': str(g), 'b_vector': [str(v) for v in b_vector]}
        message = f'maximal minors of the coefficient matrix are not coprime: gcd(A) = {g}'
        if not heger_check(A, b_vector):
            details['construction_unrepresentable'] = True
            message += f'; A x = {b_vector} has no integer solution'
        raise PreconditionError(message, details)

    mu = minor_max_abs(A.augment(b_vector), m)
    if bounded:
        solution = _bounded_system_search(A, b_vector, mu, budget)
        method = PRODUCT_BOUNDED
    else:
        solution = solve_linear_system(A, b_vector)
        method = PRODUCT_LINEAR
    if solution is None:
        raise VerificationError(f'no solution of A x = {b_vector} although gcd(A) = 1',
                                {'mu': str(mu)})
    return SolveReport(product, b, solution, method, mu if bounded else None,
                       {'mu': mu, 'b_vector': [str(v) for v in b_vector]})
