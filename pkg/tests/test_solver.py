import itertools
import math
import random
import unittest

from hypothesis import given, settings, strategies as st

from src.core import solver
from src.core.errors import PreconditionError, UnrepresentableError, VerificationError
from src.core.forms import MultilinearForm, general_bound, parse_form, prop4_bound
from src.utils.sampling import random_codimension_one_form, random_pairwise_form, random_target

PROP2_PARAMETERS = (5, 7, 11, 13, 25, 35, 49)


class TestPairwiseSolver(unittest.TestCase):
    """Test cases for pairwise-coprime forms."""

    def test_three_monomials(self):
        """Test case A with pivot x1."""
        form = parse_form('2*x1*x2 + 3*x1*x3 + 5*x2*x3')
        report = solver.solve_thm1a(form, 4)

        self.assertEqual(report.solution, (9, -1, 1))
        self.assertEqual(report.method, 'thm1a')
        self.assertEqual(report.bound_value, general_bound(form, 4))
        self.assertTrue(report.within_bound)

    def test_two_monomials(self):
        """Test the two-monomial base case."""
        report = solver.solve_thm1a(parse_form('2*x1*x2 + 3*x3*x4'), 5)
        self.assertEqual(report.solution, (-5, 1, 5, 1))

    def test_zero_target(self):
        """Test b = 0 gives the zero vector."""
        self.assertEqual(solver.solve_thm1a(parse_form('x1*x2'), 0).solution, (0, 0))

    def test_single_monomial(self):
        """Test a unit single monomial."""
        report = solver.solve_thm1a(parse_form('-x1*x2*x3'), 7)
        self.assertEqual(report.form.evaluate(report.solution), 7)

    def test_single_monomial_norm(self):
        """Single-monomial solutions have sup-norm max(1, |b|)."""
        rng = random.Random(3)
        for _ in range(200):
            n = rng.randint(1, 6)
            index_set = tuple(sorted(rng.sample(range(1, n + 1), rng.randint(1, n))))
            form = MultilinearForm.from_terms([(index_set, rng.choice((-1, 1)))], n=n)
            b = random_target(rng)
            report = solver.solve_thm1a(form, b)
            self.assertEqual(report.sup_norm, max(1, abs(b)), (form.render(), b))

    def test_two_monomial_norm(self):
        """Two-monomial solutions have sup-norm at most |b| |F|."""
        rng = random.Random(5)
        checked = 0
        while checked < 200:
            n = rng.randint(2, 6)
            d = rng.randint(1, n - 1)
            first, second = rng.sample(list(itertools.combinations(range(1, n + 1), d)), 2)
            f1, f2 = rng.randint(-30, 30), rng.randint(-30, 30)
            if f1 == 0 or f2 == 0 or math.gcd(f1, f2) != 1:
                continue
            form = MultilinearForm.from_terms([(first, f1), (second, f2)], n=n)
            b = random_target(rng)
            report = solver.solve_thm1a(form, b)
            self.assertLessEqual(report.sup_norm, abs(b) * form.sup_norm(), (form.render(), b))
            checked += 1

    def test_case_b(self):
        """Test a pivot that is zeroed out."""
        form = parse_form('x1*x2 + 3*x1*x3 + 5*x1*x4 + 7*x2*x3 + 2*x3*x4')
        report = solver.solve_thm1a(form, -9)

        self.assertEqual(form.evaluate(report.solution), -9)
        self.assertTrue(report.within_bound)

    def test_not_pairwise(self):
        """Test the precondition error names the failing pair."""
        with self.assertRaises(PreconditionError) as ctx:
            solver.solve_thm1a(parse_form('6*x1*x2 + 10*x1*x3 + 15*x2*x3'), 1)
        self.assertEqual(ctx.exception.details['coefficients'], ['6', '10'])

    def test_not_coprime(self):
        """Test a single non-unit monomial."""
        with self.assertRaises(PreconditionError):
            solver.solve_thm1a(parse_form('3*x1*x2'), 3)

    def test_randomized_bound(self):
        """500 seeded forms: exact value and |a| <= |b| (2|F|)^nu_d."""
        rng = random.Random(1)
        for _ in range(500):
            form = random_pairwise_form(rng, max_n=6)
            b = random_target(rng)
            report = solver.solve_thm1a(form, b)
            self.assertEqual(form.evaluate(report.solution), b)
            self.assertLessEqual(report.sup_norm, general_bound(form, b), form.render())


class TestCodimensionOneSolver(unittest.TestCase):
    """Test cases for (d+1, d)-forms with a coprime pair."""

    def test_example(self):
        """Test the pivot-x1 construction."""
        form = parse_form('5*x1*x2 + 3*x1*x3 + 2*x2*x3')
        report = solver.solve_thm1b(form, 1)

        self.assertEqual(report.solution, (5, -1, 2))
        self.assertEqual(report.details['coprime_pair'], [[1, 2], [1, 3]])

    def test_linear_base_case(self):
        """Test d = 1."""
        report = solver.solve_thm1b(parse_form('3*x1 + 5*x2'), 2)
        self.assertEqual(report.solution, (4, -2))

    def test_permutation(self):
        """Test a coprime pair that is not the last two index sets."""
        form = parse_form('4*x1*x2 + 6*x1*x3 + 9*x2*x3')
        report = solver.solve_thm1b(form, 11)
        self.assertEqual(form.evaluate(report.solution), 11)

    def test_preconditions(self):
        """Test n != d + 1 and the missing coprime pair."""
        with self.assertRaises(PreconditionError):
            solver.solve_thm1b(parse_form('x1*x2 + x3*x4'), 1)
        with self.assertRaises(PreconditionError):
            solver.solve_thm1b(parse_form('6*x1*x2 + 10*x1*x3 + 15*x2*x3'), 1)

    def test_randomized_bound(self):
        """200 seeded (d+1, d)-forms, d <= 5."""
        rng = random.Random(2)
        for _ in range(200):
            form = random_codimension_one_form(rng, max_d=5)
            b = random_target(rng)
            report = solver.solve_thm1b(form, b)
            self.assertEqual(form.evaluate(report.solution), b)
            self.assertLessEqual(report.sup_norm, general_bound(form, b), form.render())


class TestLinear(unittest.TestCase):
    """Test cases for linear forms."""

    def test_examples(self):
        """Test gcd-chain solutions."""
        self.assertEqual(solver.solve_linear(parse_form('3*x1 + 5*x2'), 1).solution, (2, -1))
        self.assertEqual(solver.solve_linear(parse_form('6*x1 + 10*x2 + 15*x3'), 1).solution, (-14, 7, 1))

    def test_scaling_by_gcd(self):
        """Test a non-coprime linear form with g | b."""
        report = solver.solve_linear(parse_form('4*x1 + 6*x2', n=3), 10)
        self.assertEqual(report.form.evaluate(report.solution), 10)
        self.assertEqual(report.solution[2], 0)
        self.assertIsNone(report.within_bound)

    def test_unrepresentable(self):
        """Test g does not divide b."""
        with self.assertRaises(UnrepresentableError) as ctx:
            solver.solve_linear(parse_form('4*x1 + 6*x2'), 3)
        self.assertEqual(ctx.exception.details['gcd'], '2')

    def test_not_linear(self):
        """Test the degree check."""
        with self.assertRaises(PreconditionError):
            solver.solve_linear(parse_form('x1*x2'), 1)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.integers(-50, 50).filter(lambda c: c != 0), min_size=1, max_size=6),
           st.integers(-1000, 1000))
    def test_any_multiple_of_gcd(self, coefficients, k):
        """Every multiple of the content is reached."""
        form = parse_form(' + '.join(f'{c}*x{i + 1}' for i, c in enumerate(coefficients)).replace('+ -', '- '))
        b = k * form.content()
        self.assertEqual(form.evaluate(solver.solve_linear(form, b).solution), b)


class TestQuadraticSolver(unittest.TestCase):
    """Test cases for quadratic pairwise-coprime forms."""

    def test_disjoint_monomials(self):
        """Test x1x2 + x3x4 = 9."""
        self.assertEqual(solver.solve_prop4(parse_form('x1*x2 + x3*x4'), 9).solution, (0, 9, 1, 9))

    def test_common_variable(self):
        """Test a variable present in every monomial."""
        form = parse_form('2*x1*x2 + 3*x1*x3')
        report = solver.solve_prop4(form, -8)

        self.assertEqual(report.solution[0], -8)
        self.assertEqual(form.evaluate(report.solution), -8)

    def test_degree_check(self):
        """Test the quadratic precondition."""
        with self.assertRaises(PreconditionError):
            solver.solve_prop4(parse_form('x1*x2*x3'), 1)

    def test_randomized_bound(self):
        """200 seeded quadratic forms: |a| <= |b| + |F|^3."""
        rng = random.Random(4)
        for _ in range(200):
            form = random_pairwise_form(rng, max_n=6, min_d=2, max_d=2)
            b = random_target(rng)
            report = solver.solve_prop4(form, b)
            self.assertEqual(form.evaluate(report.solution), b)
            self.assertLessEqual(report.sup_norm, prop4_bound(form, b), form.render())


class TestProp2Family(unittest.TestCase):
    """Test cases for 6xy + 2p xz + 3p yz."""

    def test_example(self):
        """Test p = 5, b = 1."""
        self.assertEqual(solver.solve_prop2(5, 1).solution, (4, -1, 1))

    def test_fallback(self):
        """Test the b = -p^2 branch."""
        report = solver.solve_prop2(5, -25)

        self.assertEqual(report.solution, (-5, 5, 5))
        self.assertEqual(report.details['fallback'], 'factor')

    def test_parameter_check(self):
        """Test p must be >= 5 and prime to 6."""
        for p in (1, 3, 6, 9, 10):
            with self.subTest(p=p):
                with self.assertRaises(PreconditionError):
                    solver.solve_prop2(p, 1)

    def test_all_targets(self):
        """Every b in [-100, 100] for each parameter."""
        for p in PROP2_PARAMETERS:
            form = solver.prop2_form(p)
            for b in range(-100, 101):
                report = solver.solve_prop2(p, b)
                self.assertEqual(form.evaluate(report.solution), b, (p, b))

    def test_factorization_branch(self):
        """Outside 0 and -p^2 the solution has z = +-1 and factors b + p^2."""
        for p in PROP2_PARAMETERS:
            for b in range(-100, 101):
                if b in (0, -p * p):
                    continue
                x, y, z = solver.solve_prop2(p, b).solution
                self.assertIn(z, (-1, 1), (p, b))
                self.assertEqual((2 * x + p * z) * (3 * y + p * z), b + p * p, (p, b))

    def test_parameter_recognition(self):
        """Test prop2_parameter on matching and near-miss forms."""
        self.assertEqual(solver.prop2_parameter(parse_form('6*x1*x2 + 10*x1*x3 + 15*x2*x3')), 5)
        self.assertEqual(solver.prop2_parameter(solver.prop2_form(49)), 49)
        self.assertIsNone(solver.prop2_parameter(parse_form('6*x1*x2 + 12*x1*x3 + 18*x2*x3')))
        self.assertIsNone(solver.prop2_parameter(parse_form('6*x1*x2 + 10*x1*x3 + 14*x2*x3')))


class TestSolveReport(unittest.TestCase):
    """Test cases for the verified result type."""

    def test_rejects_wrong_solution(self):
        """Test construction-time verification."""
        with self.assertRaises(VerificationError):
            solver.SolveReport(parse_form('x1*x2'), 3, (1, 1), 'thm1a')

    def test_json_round_trip(self):
        """Test solutions are emitted as decimal strings."""
        report = solver.solve_thm1a(parse_form('2*x1*x2 + 3*x3*x4'), 5)
        payload = report.to_json()

        self.assertEqual(payload['solution'], ['-5', '1', '5', '1'])
        self.assertEqual(payload['evaluation'], '5')
        self.assertEqual(report.form.evaluate([int(v) for v in payload['solution']]), 5)


class TestDispatch(unittest.TestCase):
    """Test cases for classify and solve_auto."""

    def test_classify(self):
        """Test the documented method sets."""
        self.assertEqual(solver.classify(parse_form('6*x1*x2 + 10*x1*x3 + 15*x2*x3')), {'prop2'})
        self.assertEqual(solver.classify(parse_form('x1*x2')), {'thm1a', 'prop4'})
        self.assertIn('thm1b', solver.classify(parse_form('5*x1*x2 + 3*x1*x3 + 2*x2*x3')))
        self.assertEqual(solver.classify(parse_form('3*x1 + 5*x2')), {'linear', 'thm1a', 'thm1b'})

    def test_solve_auto_prop2(self):
        """Test dispatch to the prop2 construction."""
        report = solver.solve_auto(parse_form('6*x1*x2 + 10*x1*x3 + 15*x2*x3'), 1)

        self.assertEqual(report.solution, (4, -1, 1))
        self.assertEqual(report.method, 'prop2')

    def test_solve_auto_priority(self):
        """Test prop4 wins over thm1a for quadratic forms."""
        report = solver.solve_auto(parse_form('2*x1*x2 + 3*x3*x4'), 5)

        self.assertEqual(report.method, 'prop4')
        self.assertEqual(report.solution, (-1, 5, 1, 5))

    def test_solve_auto_content(self):
        """Test gcd scaling and the definitive gcd failure."""
        form = parse_form('4*x1*x2 + 6*x3*x4')
        report = solver.solve_auto(form, 10)

        self.assertEqual(form.evaluate(report.solution), 10)
        self.assertEqual(report.details['content'], 2)
        with self.assertRaises(UnrepresentableError):
            solver.solve_auto(parse_form('4*x1 + 6*x2'), 3)

    def test_solve_auto_search_fallback(self):
        """Test a form outside every construction."""
        form = parse_form('6*x1*x2 + 10*x3*x4 + 15*x5*x6')
        report = solver.solve_auto(form, 1, search_radius=2)

        self.assertEqual(report.method, 'search')
        self.assertEqual(form.evaluate(report.solution), 1)
        self.assertLessEqual(report.sup_norm, 2)

    def test_forced_method_checks_preconditions(self):
        """Test solve_with never skips precondition checks."""
        with self.assertRaises(PreconditionError):
            solver.solve_with('thm1a', parse_form('6*x1*x2 + 10*x1*x3 + 15*x2*x3'), 1)
        with self.assertRaises(PreconditionError):
            solver.solve_with('prop2', parse_form('x1*x2'), 1)


if __name__ == '__main__':
    unittest.main()
