import random
import unittest

from src.core import detforms
from src.core.errors import DimensionError, PreconditionError, UnrepresentableError
from src.core.forms import parse_form, parse_product
from src.core.intlinalg import IntMatrix, determinant, minors_gcd


def column(*values):
    return IntMatrix.column(values)


class TestRepresentable(unittest.TestCase):
    """Test cases for the representability criterion."""

    def test_examples(self):
        """Test the documented instances."""
        self.assertTrue(detforms.representable(detforms.DetFormInstance(column(6, 10, 15), 3)))
        self.assertFalse(detforms.representable(detforms.DetFormInstance(column(2, 4), 2)))
        self.assertTrue(detforms.representable(detforms.DetFormInstance(IntMatrix.parse('2 4; 6 8'), 4)))

    def test_instance_shape(self):
        """Test 1 <= s <= r <= n and s < n."""
        for matrix, n in [(IntMatrix.parse('1 2'), 3), (column(1, 2, 3), 2), (IntMatrix.identity(2), 2)]:
            with self.subTest(shape=matrix.shape, n=n):
                with self.assertRaises(DimensionError):
                    detforms.DetFormInstance(matrix, n)

    def test_routes_agree_on_random_instances(self):
        """Minor gcd and unit invariant factors give the same answer."""
        rng = random.Random(5)
        for _ in range(200):
            n = rng.randint(2, 5)
            s = rng.randint(1, n - 1)
            r = rng.randint(s, n)
            A = IntMatrix([[rng.randint(-6, 6) for _ in range(s)] for _ in range(r)])
            inst = detforms.DetFormInstance(A, n)
            k = r + s - n
            expected = k <= 0 or minors_gcd(A, k) == 1
            self.assertEqual(detforms.representable(inst), expected)


class TestCompletion(unittest.TestCase):
    """Test cases for unimodular completion."""

    def test_unit_column(self):
        """Test (1, 0, 0) completes to the identity."""
        inst = detforms.DetFormInstance(column(1, 0, 0), 3)
        self.assertEqual(detforms.complete_unimodular(inst), IntMatrix.identity(3))

    def test_prop2_column(self):
        """Test (6, 10, 15)."""
        inst = detforms.DetFormInstance(column(6, 10, 15), 3)
        M = detforms.complete_unimodular(inst)

        self.assertEqual(determinant(M), 1)
        self.assertEqual(M.col(0), (6, 10, 15))

    def test_square_block(self):
        """Test a 2x2 block in a 4x4 determinant."""
        A = IntMatrix.parse('2 4; 6 8')
        M = detforms.complete_unimodular(detforms.DetFormInstance(A, 4))

        self.assertEqual(determinant(M), 1)
        self.assertEqual(M.submatrix([0, 1], [0, 1]), A)

    def test_not_representable(self):
        """Test the error carries the minor gcd."""
        with self.assertRaises(UnrepresentableError) as ctx:
            detforms.complete_unimodular(detforms.DetFormInstance(column(2, 4), 2))
        self.assertEqual(ctx.exception.details['minor_gcd'], '2')

    def test_random_completions(self):
        """Every representable random instance completes to det 1 around A."""
        rng = random.Random(7)
        completed = 0
        while completed < 100:
            n = rng.randint(2, 5)
            s = rng.randint(1, n - 1)
            r = rng.randint(s, n)
            A = IntMatrix([[rng.randint(-9, 9) for _ in range(s)] for _ in range(r)])
            inst = detforms.DetFormInstance(A, n)
            if not detforms.representable(inst):
                continue
            M = detforms.complete_unimodular(inst)
            self.assertEqual(determinant(M), 1)
            self.assertEqual(M.submatrix(range(r), range(s)), A)
            completed += 1


class TestSolveDetform(unittest.TestCase):
    """Test cases for det [[A, *], [*, *]] = b."""

    def setUp(self):
        """Set up test fixtures."""
        self.inst = detforms.DetFormInstance(column(6, 10, 15), 3)

    def test_all_targets_from_one_completion(self):
        """Scaling the first y-column reaches every b in [-10, 10]."""
        completion = detforms.complete_unimodular(self.inst)
        for b in range(-10, 11):
            solution = detforms.solve_detform(self.inst, b, completion)
            self.assertEqual(solution.determinant(self.inst.A), b)
            self.assertIsNone(solution.X)
            self.assertEqual(solution.Y.shape, (3, 2))

    def test_b_one_is_completion(self):
        """Test b = 1 returns the completion's columns."""
        completion = detforms.complete_unimodular(self.inst)
        solution = detforms.solve_detform(self.inst, 1, completion)
        self.assertEqual(solution.assemble(self.inst.A), completion)

    def test_b_zero(self):
        """Test b = 0 zeroes the first y-column."""
        solution = detforms.solve_detform(self.inst, 0)
        self.assertEqual(solution.Y.col(0), (0, 0, 0))

    def test_x_block(self):
        """Test r < n produces an X block."""
        A = column(3, 5)
        inst = detforms.DetFormInstance(A, 3)
        solution = detforms.solve_detform(inst, -7)

        self.assertEqual(solution.X.shape, (1, 1))
        self.assertEqual(solution.Y.shape, (3, 2))
        self.assertEqual(solution.determinant(A), -7)


class TestDetformBound(unittest.TestCase):
    """Test cases for the informational search bound."""

    def test_values(self):
        """Test the hand-evaluated formula values."""
        self.assertEqual(detforms.detform_bound(detforms.DetFormInstance(column(6, 10, 15), 3), 1), 25369470)
        self.assertEqual(detforms.detform_bound(detforms.DetFormInstance(column(1, 0, 0), 3), 1), 108)
        self.assertEqual(detforms.detform_bound(detforms.DetFormInstance(column(6, 10, 15), 3), 0), 0)

    def test_preconditions(self):
        """Test r != n and non-coprime minors."""
        with self.assertRaises(PreconditionError):
            detforms.detform_bound(detforms.DetFormInstance(column(3, 5), 3), 1)
        with self.assertRaises(PreconditionError):
            detforms.detform_bound(detforms.DetFormInstance(column(2, 4, 6), 3), 1)


class TestProductLinear(unittest.TestCase):
    """Test cases for products of linear forms."""

    def setUp(self):
        """Set up test fixtures."""
        self.forms = [parse_form('x1 + x2 + x3'), parse_form('x2 - x3', n=3)]

    def test_fast_path(self):
        """Test the SNF route."""
        report = detforms.solve_product_linear(self.forms, 6)

        self.assertEqual(report.form.evaluate(report.solution), 6)
        self.assertEqual(self.forms[0].evaluate(report.solution), 6)
        self.assertEqual(self.forms[1].evaluate(report.solution), 1)
        self.assertEqual(report.details['mu'], 7)

    def test_bounded_path(self):
        """Test the lexicographic search within mu(A, b)."""
        report = detforms.solve_product_linear(self.forms, 6, bounded=True)

        self.assertEqual(report.solution, (-7, 7, 6))
        self.assertEqual(report.bound_value, 7)
        self.assertTrue(report.within_bound)

    def test_single_factor(self):
        """Test L = (x1) with n = 3."""
        report = detforms.solve_product_linear([parse_form('x1')], 5, n=3)
        self.assertEqual(report.solution, (5, 0, 0))

    def test_counterexample(self):
        """Test gcd(A) = 2 is reported with the Heger verdict."""
        with self.assertRaises(PreconditionError) as ctx:
            detforms.solve_product_linear(parse_product('(x1+x2+x3)*(-x1+x2+x3)'), 6)

        self.assertEqual(ctx.exception.details['gcd'], '2')
        self.assertTrue(ctx.exception.details['construction_unrepresentable'])

    def test_too_many_factors(self):
        """Test m < n when n is given."""
        with self.assertRaises(PreconditionError):
            detforms.solve_product_linear([parse_form('x1 + x2'), parse_form('x1 - x2')], 1, n=2)

    def test_default_width_is_padded(self):
        """Without n, m factors get at least m + 1 variables."""
        report = detforms.solve_product_linear([parse_form('x1')], 5)

        self.assertEqual(report.form.n, 2)
        self.assertEqual(report.solution, (5, 0))


if __name__ == '__main__':
    unittest.main()
