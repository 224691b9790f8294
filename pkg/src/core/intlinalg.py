import itertools
import json
import logging
import math
import re
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.errors import DimensionError, FormParseError, VerificationError

logger = logging.getLogger(__name__)


class IntMatrix:
    """
    Dense exact-integer matrix.

    Entries live in a read-only numpy array of dtype=object, so every entry
    is a Python int and products never overflow.
    """

    def __init__(self, entries: Union[Sequence[Sequence[int]], np.ndarray]):
        rows = [[int(v) for v in row] for row in entries]
        if not rows or not rows[0]:
            raise DimensionError('matrix needs at least one row and one column')
        width = len(rows[0])
        if any(len(row) != width for row in rows):
            raise DimensionError('all matrix rows must have the same length',
                                 {'lengths': [len(row) for row in rows]})
        data = np.empty((len(rows), width), dtype=object)
        for i, row in enumerate(rows):
            for j, value in enumerate(row):
                data[i, j] = value
        data.setflags(write=False)
        self._data = data

    @classmethod
    def identity(cls, size: int) -> 'IntMatrix':
        return cls([[1 if i == j else 0 for j in range(size)] for i in range(size)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> 'IntMatrix':
        return cls([[0] * cols for _ in range(rows)])

    @classmethod
    def column(cls, values: Sequence[int]) -> 'IntMatrix':
        return cls([[v] for v in values])

    @classmethod
    def parse(cls, text: str) -> 'IntMatrix':
        """
        Parse the text format "2 4; 6 8" (rows split by ';', entries by whitespace).

        Args:
            text: Matrix text

        Returns:
            IntMatrix
        """
        rows = []
        for chunk in (text or '').split(';'):
            tokens = chunk.split()
            if not tokens:
                raise FormParseError(f'empty matrix row in {text!r}')
            for token in tokens:
                if not re.fullmatch(r'[+-]?\d+', token):
                    raise FormParseError(f'matrix entry {token!r} is not an integer', {'entry': token})
            rows.append([int(t) for t in tokens])
        if any(len(row) != len(rows[0]) for row in rows):
            raise FormParseError(f'matrix rows have different lengths in {text!r}')
        return cls(rows)

    @classmethod
    def from_json(cls, payload: Union[str, Mapping[str, Any]]) -> 'IntMatrix':
        data = json.loads(payload) if isinstance(payload, str) else payload
        try:
            matrix = cls([[int(str(v)) for v in row] for row in data['entries']])
        except (KeyError, TypeError, ValueError) as e:
            raise FormParseError(f'invalid matrix JSON: {e}')
        if matrix.shape != (int(data.get('rows', matrix.rows)), int(data.get('cols', matrix.cols))):
            raise DimensionError('declared rows/cols do not match entries')
        return matrix

    @property
    def rows(self) -> int:
        return self._data.shape[0]

    @property
    def cols(self) -> int:
        return self._data.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self._data.shape

    def __getitem__(self, key: Tuple[int, int]) -> int:
        return self._data[key]

    def to_list(self) -> List[List[int]]:
        return [list(row) for row in self._data]

    def to_numpy(self) -> np.ndarray:
        return self._data.copy()

    def row(self, i: int) -> Tuple[int, ...]:
        return tuple(self._data[i, :])

    def col(self, j: int) -> Tuple[int, ...]:
        return tuple(self._data[:, j])

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> 'IntMatrix':
        return IntMatrix(self._data[np.ix_(list(rows), list(cols))])

    def hstack(self, other: 'IntMatrix') -> 'IntMatrix':
        if other.rows != self.rows:
            raise DimensionError(f'cannot stack {self.shape} with {other.shape}')
        return IntMatrix(np.hstack([self._data, other._data]))

    def augment(self, vector: Sequence[int]) -> 'IntMatrix':
        """The augmented matrix (A | c)."""
        if len(vector) != self.rows:
            raise DimensionError(f'vector length {len(vector)} does not match {self.rows} rows')
        return self.hstack(IntMatrix.column(vector))

    def dot(self, vector: Sequence[int]) -> Tuple[int, ...]:
        if len(vector) != self.cols:
            raise DimensionError(f'vector length {len(vector)} does not match {self.cols} columns')
        column = np.array([int(v) for v in vector], dtype=object)
        return tuple(int(v) for v in np.dot(self._data, column))

    def __matmul__(self, other: 'IntMatrix') -> 'IntMatrix':
        if self.cols != other.rows:
            raise DimensionError(f'cannot multiply {self.shape} by {other.shape}')
        return IntMatrix(np.dot(self._data, other._data))

    def max_abs_entry(self) -> int:
        return max(abs(v) for v in self._data.flat)

    def to_json(self) -> Dict[str, Any]:
        return {'rows': self.rows, 'cols': self.cols,
                'entries': [[str(v) for v in row] for row in self._data]}

    def render(self) -> str:
        width = max(len(str(v)) for v in self._data.flat)
        return '\n'.join(' '.join(str(v).rjust(width) for v in row) for row in self._data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self.shape == other.shape and self.to_list() == other.to_list()

    def __hash__(self) -> int:
        return hash((self.shape, tuple(self._data.flat)))

    def __repr__(self) -> str:
        return f'IntMatrix({self.to_list()!r})'


@dataclass(frozen=True)
class SnfDecomposition:
    """
    A = U * S * V with U, V unimodular and S = diag(invariant_factors, 0, ...).

    U_inv and V_inv are the inverse transforms: U_inv * A * V_inv = S.
    """

    U: IntMatrix
    V: IntMatrix
    invariant_factors: Tuple[int, ...]
    U_inv: IntMatrix
    V_inv: IntMatrix

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    def diagonal(self) -> IntMatrix:
        """The r x c matrix S."""
        rows, cols = self.U.rows, self.V.rows
        entries = [[0] * cols for _ in range(rows)]
        for i, s in enumerate(self.invariant_factors):
            entries[i][i] = s
        return IntMatrix(entries)

    def unit_factor_count(self) -> int:
        return sum(1 for s in self.invariant_factors if s == 1)

    def verify(self, matrix: IntMatrix) -> None:
        """Raise VerificationError unless every decomposition invariant holds."""
        if self.U @ self.diagonal() @ self.V != matrix:
            raise VerificationError('U*S*V does not reproduce the matrix')
        if abs(determinant(self.U)) != 1 or abs(determinant(self.V)) != 1:
            raise VerificationError('transform is not unimodular')
        for a, b in zip(self.invariant_factors, self.invariant_factors[1:]):
            if b % a:
                raise VerificationError(f'divisibility chain broken: {a} does not divide {b}')

    def to_json(self) -> Dict[str, Any]:
        return {
            'U': self.U.to_json(),
            'V': self.V.to_json(),
            'invariant_factors': [str(s) for s in self.invariant_factors],
            'rank': self.rank,
        }


def ext_gcd(a: int, b: int) -> Tuple[int, int, int]:
    """
    Extended Euclidean algorithm.

    Args:
        a: First integer
        b: Second integer, (a, b) != (0, 0)

    Returns:
        (g, u, v) with u*a + v*b = g = gcd(a, b) > 0 and |u|, |v| <= max(|a|, |b|)
    """
    if a == 0 and b == 0:
        raise ValueError('ext_gcd(0, 0) is undefined')
    old_r, r = abs(a), abs(b)
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    u = old_s if a >= 0 else -old_s
    v = old_t if b >= 0 else -old_t
    return old_r, u, v


def _det_small(rows: List[List[int]]) -> int:
    size = len(rows)
    if size == 1:
        return rows[0][0]
    if size == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    (a, b, c), (d, e, f), (g, h, i) = rows
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


def _det_bareiss(rows: List[List[int]]) -> int:
    m = [list(row) for row in rows]
    size = len(m)
    sign = 1
    previous = 1
    for k in range(size - 1):
        if m[k][k] == 0:
            for i in range(k + 1, size):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                # Exact: Sylvester's identity guarantees divisibility.
                m[i][j] = (m[i][j] * pivot - m[i][k] * m[k][j]) // previous
        previous = pivot
    return sign * m[size - 1][size - 1]


def _determinant_rows(rows: List[List[int]]) -> int:
    if len(rows) <= 3:
        return _det_small(rows)
    return _det_bareiss(rows)


def determinant(matrix: IntMatrix) -> int:
    """Exact determinant: cofactor expansion up to 3x3, fraction-free Bareiss above."""
    if matrix.rows != matrix.cols:
        raise DimensionError(f'determinant needs a square matrix, got {matrix.shape}')
    return _determinant_rows(matrix.to_list())


def _check_order(matrix: IntMatrix, k: int) -> None:
    if not 1 <= k <= min(matrix.shape):
        raise DimensionError(f'minor order {k} outside 1..{min(matrix.shape)}',
                             {'order': k, 'shape': list(matrix.shape)})


def iter_minors(matrix: IntMatrix, k: int) -> Iterator[int]:
    """All k x k minors, rows and columns chosen in lexicographic order."""
    _check_order(matrix, k)
    rows = matrix.to_list()
    for row_set in itertools.combinations(range(matrix.rows), k):
        for col_set in itertools.combinations(range(matrix.cols), k):
            yield _determinant_rows([[rows[i][j] for j in col_set] for i in row_set])


def minors_gcd(matrix: IntMatrix, k: int) -> int:
    """
    gcd of all k x k minors (0 when all vanish).

    Enumerates every row and column subset; meant for desk-scale matrices.
    """
    g = 0
    for minor in iter_minors(matrix, k):
        g = math.gcd(g, minor)
        if g == 1:
            break
    return g


def minor_max_abs(matrix: IntMatrix, k: int) -> int:
    return max(abs(minor) for minor in iter_minors(matrix, k))


def minor_min_abs_nonzero(matrix: IntMatrix, k: int) -> Optional[int]:
    """Smallest nonzero |k x k minor|, None when all minors vanish."""
    nonzero = [abs(m) for m in iter_minors(matrix, k) if m != 0]
    return min(nonzero) if nonzero else None


def _identity_rows(size: int) -> List[List[int]]:
    return [[1 if i == j else 0 for j in range(size)] for i in range(size)]


class _SmithReducer:
    """
    Working state of the Smith reduction.

    Keeps A = U*B*V and U_inv*A*V_inv = B true after every elementary step.
    """

    def __init__(self, matrix: IntMatrix):
        self.r, self.c = matrix.shape
        self.B = matrix.to_list()
        self.U = _identity_rows(self.r)
        self.U_inv = _identity_rows(self.r)
        self.V = _identity_rows(self.c)
        self.V_inv = _identity_rows(self.c)

    def swap_rows(self, i: int, j: int):
        if i == j:
            return
        self.B[i], self.B[j] = self.B[j], self.B[i]
        self.U_inv[i], self.U_inv[j] = self.U_inv[j], self.U_inv[i]
        for row in self.U:
            row[i], row[j] = row[j], row[i]

    def swap_cols(self, i: int, j: int):
        if i == j:
            return
        for row in self.B:
            row[i], row[j] = row[j], row[i]
        for row in self.V_inv:
            row[i], row[j] = row[j], row[i]
        self.V[i], self.V[j] = self.V[j], self.V[i]

    def add_row(self, target: int, source: int, q: int):
        """row_target += q * row_source."""
        for row in (self.B, self.U_inv):
            row[target] = [a + q * b for a, b in zip(row[target], row[source])]
        for row in self.U:
            row[source] -= q * row[target]

    def add_col(self, target: int, source: int, q: int):
        """col_target += q * col_source."""
        for rows in (self.B, self.V_inv):
            for row in rows:
                row[target] += q * row[source]
        self.V[source] = [a - q * b for a, b in zip(self.V[source], self.V[target])]

    def negate_row(self, i: int):
        self.B[i] = [-v for v in self.B[i]]
        self.U_inv[i] = [-v for v in self.U_inv[i]]
        for row in self.U:
            row[i] = -row[i]

    def min_pivot(self, t: int) -> Optional[Tuple[int, int]]:
        """Nonzero entry of least absolute value in B[t:, t:], ties row-major."""
        best = None
        for i in range(t, self.r):
            for j in range(t, self.c):
                value = self.B[i][j]
                if value and (best is None or abs(value) < best[0]):
                    best = (abs(value), i, j)
        return None if best is None else (best[1], best[2])

    def reduce(self) -> Tuple[int, ...]:
        factors = []
        for t in range(min(self.r, self.c)):
            pivot = self.min_pivot(t)
            if pivot is None:
                break
            while True:
                i, j = pivot
                self.swap_rows(t, i)
                self.swap_cols(t, j)
                p = self.B[t][t]
                dirty = False
                for i in range(t + 1, self.r):
                    q = self.B[i][t] // p
                    if q:
                        self.add_row(i, t, -q)
                    dirty = dirty or self.B[i][t] != 0
                for j in range(t + 1, self.c):
                    q = self.B[t][j] // p
                    if q:
                        self.add_col(j, t, -q)
                    dirty = dirty or self.B[t][j] != 0
                if not dirty:
                    offender = next(((i, j) for i in range(t + 1, self.r) for j in range(t + 1, self.c)
                                     if self.B[i][j] % p), None)
                    if offender is None:
                        break
                    self.add_row(t, offender[0], 1)
                pivot = self.min_pivot(t)
            if self.B[t][t] < 0:
                self.negate_row(t)
            factors.append(self.B[t][t])
        return tuple(factors)


def smith_normal_form(matrix: IntMatrix) -> SnfDecomposition:
    """
    Smith normal form with accumulated unimodular transforms.

    Args:
        matrix: Any integer matrix

    Returns:
        SnfDecomposition with A = U*S*V, positive invariant factors forming a
        divisibility chain
    """
    reducer = _SmithReducer(matrix)
    factors = reducer.reduce()
    logger.debug('smith_normal_form %s -> factors %s', matrix.shape, factors)
    return SnfDecomposition(
        U=IntMatrix(reducer.U),
        V=IntMatrix(reducer.V),
        invariant_factors=factors,
        U_inv=IntMatrix(reducer.U_inv),
        V_inv=IntMatrix(reducer.V_inv),
    )


def solve_linear_system(matrix: IntMatrix, rhs: Sequence[int],
                        snf: Optional[SnfDecomposition] = None) -> Optional[Tuple[int, ...]]:
    """
    Integer solution of A x = c, or None when none exists.

    Args:
        matrix: Coefficient matrix A
        rhs: Right-hand side c (length = rows of A)
        snf: Precomputed decomposition of A, if available

    Returns:
        Solution tuple or None
    """
    if len(rhs) != matrix.rows:
        raise DimensionError(f'right-hand side has length {len(rhs)}, expected {matrix.rows}',
                             {'expected': matrix.rows, 'actual': len(rhs)})
    snf = snf or smith_normal_form(matrix)
    transformed = snf.U_inv.dot(rhs)
    y = [0] * matrix.cols
    for i, value in enumerate(transformed):
        if i < snf.rank:
            s = snf.invariant_factors[i]
            if value % s:
                return None
            y[i] = value // s
        elif value != 0:
            return None
    solution = snf.V_inv.dot(y)
    if matrix.dot(solution) != tuple(int(v) for v in rhs):
        raise VerificationError('linear system solution failed substitution check')
    return solution


def heger_check(matrix: IntMatrix, rhs: Sequence[int]) -> bool:
    """
    Heger's criterion: gcd of maximal minors of A equals that of (A | c).

    Args:
        matrix: m x n coefficient matrix with m <= n
        rhs: Right-hand side of length m

    Returns:
        True iff the two gcds agree
    """
    m = matrix.rows
    if m > matrix.cols:
        raise DimensionError(f'Heger criterion needs rows <= cols, got {matrix.shape}')
    return minors_gcd(matrix, m) == minors_gcd(matrix.augment(rhs), m)
