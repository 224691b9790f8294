import json
import os
import random
import shutil
import tempfile
import unittest

import pandas as pd
from hypothesis import given, settings, strategies as st

from src.core import oracle, solver
from src.core.errors import BudgetExceededError, PreconditionError
from src.core.forms import parse_form, parse_product, vector_norm
from src.utils.sampling import random_pairwise_form, random_target
from tests.generators import forms, forms_with_point

HYP_SETTINGS = dict(max_examples=100, deadline=None)

COUNTEREXAMPLE = '(x1+x2+x3)*(-x1+x2+x3)'
PROP2_FORM = '6*x1*x2 + 10*x1*x3 + 15*x2*x3'


class TestBoxSearch(unittest.TestCase):
    """Test cases for the lexicographic box search."""

    def setUp(self):
        """Set up test fixtures."""
        self.xy = parse_form('x1*x2')

    def test_examples(self):
        """Test the first hit in lexicographic order."""
        self.assertEqual(oracle.box_search(self.xy, 4, 2), (-2, -2))
        self.assertEqual(oracle.box_search(self.xy, 0, 2), (-2, 0))
        self.assertEqual(oracle.box_search(parse_form('2*x1*x2 + 3*x3*x4'), 1, 1), (-1, 1, -1, -1))

    def test_radius_zero(self):
        """Radius 0 checks only the zero vector."""
        self.assertEqual(oracle.box_search(self.xy, 0, 0), (0, 0))
        self.assertIsNone(oracle.box_search(self.xy, 1, 0))

    def test_no_solution(self):
        """Test an even form and an odd target."""
        self.assertIsNone(oracle.box_search(parse_form('2*x1*x2 + 4*x3*x4'), 3, 3))

    def test_negative_radius(self):
        """Test the radius precondition."""
        with self.assertRaises(PreconditionError):
            oracle.box_search(self.xy, 1, -1)

    def test_budget(self):
        """Test the full box is charged against the budget."""
        with self.assertRaises(BudgetExceededError) as ctx:
            oracle.box_search(self.xy, 1, 10, budget=100)
        self.assertEqual(ctx.exception.details['points'], '441')

    def test_linear_form(self):
        """Test a single variable form."""
        self.assertEqual(oracle.box_search(parse_form('3*x1'), -6, 5), (-2,))
        self.assertIsNone(oracle.box_search(parse_form('3*x1'), 7, 5))

    @settings(**HYP_SETTINGS)
    @given(forms(max_n=3), st.integers(min_value=-12, max_value=12), st.integers(min_value=0, max_value=3))
    def test_matches_plain_enumeration(self, form, b, radius):
        """Solving for the last coordinate agrees with walking the whole box."""
        self.assertEqual(oracle.box_search(form, b, radius, workers=1), oracle._enumerate_box(form, b, radius))

    def test_workers_do_not_change_the_result(self):
        """Test the parallel split returns the same first hit."""
        form = parse_form('2*x1*x2 + 3*x3*x4 - 5*x1*x4')
        for b in (1, 7, -11):
            with self.subTest(b=b):
                self.assertEqual(oracle.box_search(form, b, 3, workers=2), oracle.box_search(form, b, 3, workers=1))


class TestProductBoxSearch(unittest.TestCase):
    """Test cases for products of linear forms."""

    def setUp(self):
        """Set up test fixtures."""
        self.product = parse_product(COUNTEREXAMPLE)

    def test_six_is_not_found(self):
        """Test the counterexample target within radius 20."""
        self.assertIsNone(oracle.product_box_search(self.product, 6, 20))

    def test_three(self):
        """Test the first hit for b = 3."""
        found = oracle.product_box_search(self.product, 3, 2)

        self.assertEqual(found, (-1, -2, 0))
        self.assertEqual(self.product.evaluate(found), 3)

    def test_factor_list(self):
        """Test a plain list of linear forms."""
        self.assertEqual(oracle.product_box_search([parse_form('x1')], 5, 5), (5,))

    def test_box_search_accepts_products(self):
        """Test box_search falls back to enumeration for products."""
        self.assertEqual(oracle.box_search(self.product, 3, 2), (-1, -2, 0))


class TestObstructions(unittest.TestCase):
    """Test cases for modular certificates."""

    def setUp(self):
        """Set up test fixtures."""
        self.product = parse_product(COUNTEREXAMPLE)

    def test_counterexample_mod_four(self):
        """(y+z)^2 - x^2 is never 2 mod 4."""
        certificate = oracle.modular_obstruction(self.product, 6, 4)

        self.assertEqual(certificate, oracle.ObstructionCertificate(4, 2))
        self.assertTrue(certificate.verify(self.product))
        self.assertEqual(oracle.residue_set(self.product, 4), frozenset({0, 1, 3}))
        self.assertEqual(certificate.to_json(), {'modulus': '4', 'target_residue': '2'})

    def test_verify_enumerates_afresh(self):
        """Certificate checks bypass the residue cache."""
        oracle._enumerate_residues.cache_clear()

        self.assertTrue(oracle.ObstructionCertificate(4, 2).verify(self.product))
        self.assertFalse(oracle.ObstructionCertificate(4, 1).verify(self.product))
        self.assertEqual(oracle._enumerate_residues.cache_info().currsize, 0)

    def test_represented_target(self):
        """Test no certificate for a represented value."""
        self.assertIsNone(oracle.modular_obstruction(parse_form(PROP2_FORM), 1, 4))

    def test_find_smallest_modulus(self):
        """Test the modulus scan."""
        self.assertEqual(oracle.find_obstruction(self.product, 6, 8).modulus, 4)
        self.assertIsNone(oracle.find_obstruction(parse_form('x1*x2'), 1, 12))
        self.assertEqual(oracle.find_obstruction(parse_form('2*x1*x2'), 3, 4).modulus, 2)

    def test_preconditions(self):
        """Test modulus validation."""
        with self.assertRaises(PreconditionError):
            oracle.find_obstruction(self.product, 6, 1)
        with self.assertRaises(PreconditionError):
            oracle.modular_obstruction(self.product, 6, 1)

    def test_budget(self):
        """Test M^n is charged against the modular budget."""
        with self.assertRaises(BudgetExceededError):
            oracle.modular_obstruction(self.product, 6, 4, budget=63)

    @settings(**HYP_SETTINGS)
    @given(forms_with_point(max_entry=10), st.integers(min_value=2, max_value=6))
    def test_attained_values_are_never_obstructed(self, form_and_point, modulus):
        """A value F(a0) has no certificate for any modulus."""
        form, point = form_and_point
        self.assertIsNone(oracle.modular_obstruction(form, form.evaluate(point), modulus))

    @settings(**HYP_SETTINGS)
    @given(forms(max_n=3), st.integers(min_value=-20, max_value=20))
    def test_certificate_excludes_search_hits(self, form, b):
        """Whenever a certificate exists, the box holds no solution."""
        certificate = oracle.find_obstruction(form, b, 6)
        if certificate is None:
            return
        self.assertTrue(certificate.verify(form))
        self.assertIsNone(oracle.box_search(form, b, 3))


class TestMinimalRepresentation(unittest.TestCase):
    """Test cases for least sup-norm solutions."""

    def test_linear(self):
        """3x1 + 5x2 = 1 needs sup-norm 2."""
        form = parse_form('3*x1 + 5*x2')

        self.assertEqual(oracle.minimal_representation(form, 1, 3), (2, -1))
        self.assertIsNone(oracle.box_search(form, 1, 1))

    def test_product_of_variables(self):
        """Test x1*x2 = 4."""
        self.assertEqual(oracle.minimal_representation(parse_form('x1*x2'), 4, 3), (-2, -2))

    def test_zero_target(self):
        """Test b = 0 gives the zero vector."""
        self.assertEqual(oracle.minimal_representation(parse_form(PROP2_FORM), 0, 5), (0, 0, 0))

    def test_out_of_radius(self):
        """Test None when the radius is too small."""
        self.assertIsNone(oracle.minimal_representation(parse_form('3*x1 + 5*x2'), 1, 1))


class TestProbe(unittest.TestCase):
    """Test cases for the representation probe."""

    def setUp(self):
        """Set up test fixtures."""
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        """Clean up test fixtures."""
        shutil.rmtree(self.temp_dir)

    def test_prop2_form_all_solved(self):
        """Every b in [-10, 10] is found within radius 30."""
        form = parse_form(PROP2_FORM)
        report = oracle.probe(form, range(-10, 11), 30, 8)

        self.assertEqual(report.counts(), {oracle.SOLVED: 21, oracle.OBSTRUCTED: 0, oracle.UNKNOWN: 0})
        for outcome in report.outcomes:
            self.assertEqual(form.evaluate(outcome.solution), outcome.b)
            self.assertLessEqual(vector_norm(outcome.solution), 30)

    def test_non_coprime_form_obstructed(self):
        """Test parity obstructs odd targets of a gcd-2 form."""
        form = parse_form('2*x1*x2 + 4*x1*x3 + 6*x2*x3')
        with self.assertLogs('src.core.oracle', level='WARNING'):
            report = oracle.probe(form, [3], 2, 8)

        (outcome,) = report.outcomes
        self.assertEqual(outcome.status, oracle.OBSTRUCTED)
        self.assertEqual(outcome.certificate.modulus, 2)

    def test_xy_all_solved(self):
        """Test x1*x2 over b in [-3, 3]."""
        report = oracle.probe(parse_form('x1*x2'), range(-3, 4), 3, 8)
        self.assertEqual(report.counts()[oracle.SOLVED], 7)

    def test_budget_zero(self):
        """A zero budget marks every target unknown."""
        report = oracle.probe(parse_form(PROP2_FORM), range(-2, 3), 5, 4, budget=0)

        self.assertEqual(report.unknown_targets(), [-2, -1, 0, 1, 2])
        self.assertTrue(all(o.reason == 'budget' for o in report.outcomes))

    def test_obstruction_budget_still_searches(self):
        """Moduli over budget are skipped and the box search still settles the target."""
        form = parse_form('x1*x2 + x3*x4 + x5*x6 + x7*x8')
        outcome = oracle.probe_target(form, 1, 1, 8, budget=10 ** 7)

        self.assertEqual(outcome.status, oracle.SOLVED)
        self.assertEqual(outcome.solution, (-1, -1, -1, -1, -1, 0, -1, 1))
        self.assertEqual(outcome.moduli_checked, 7)
        self.assertEqual(outcome.to_record()['moduli_checked'], '7')

    def test_budget_zero_skips_every_modulus(self):
        """Test a zero budget records no enumerated modulus."""
        outcome = oracle.probe_target(parse_form('x1*x2'), 1, 1, 4, budget=0)

        self.assertEqual(outcome.reason, 'budget')
        self.assertEqual(outcome.moduli_checked, 1)

    def test_radius_unknown(self):
        """Test a radius too small to settle the target."""
        outcome = oracle.probe_target(parse_form('3*x1 + 5*x2'), 1, 1, 1)

        self.assertEqual(outcome.status, oracle.UNKNOWN)
        self.assertEqual(outcome.reason, 'radius')

    def test_frame_columns(self):
        """Test the tabular report."""
        report = oracle.probe(parse_form('x1*x2'), [4, 5], 3, 4)
        frame = report.to_frame()

        self.assertEqual(list(frame.columns), ['b', 'status', 'solution', 'sup_norm', 'modulus', 'reason', 'moduli_checked'])
        self.assertEqual(frame.loc[0, 'solution'], '-2,-2')
        self.assertEqual(frame.loc[0, 'sup_norm'], '2')

    def test_export_formats(self):
        """Test csv, jsonl and xlsx exports."""
        report = oracle.probe(parse_form('2*x1*x2'), [2, 3], 2, 4)

        csv_path = report.export(os.path.join(self.temp_dir, 'probe.csv'))
        self.assertEqual(pd.read_csv(csv_path, dtype=str)['status'].tolist(), ['solved', 'obstructed'])

        jsonl_path = report.export(os.path.join(self.temp_dir, 'probe.jsonl'))
        with open(jsonl_path, encoding='utf-8') as f:
            records = [json.loads(line) for line in f if line.strip()]
        self.assertEqual([r['b'] for r in records], ['2', '3'])
        self.assertEqual(records[1]['modulus'], '2')

        xlsx_path = report.export(os.path.join(self.temp_dir, 'probe.xlsx'))
        self.assertEqual(pd.read_excel(xlsx_path, dtype=str)['b'].tolist(), ['2', '3'])

    def test_export_rejects_unknown_extension(self):
        """Test the format check."""
        report = oracle.probe(parse_form('x1*x2'), [1], 1, 2)
        with self.assertRaises(ValueError):
            report.export(os.path.join(self.temp_dir, 'probe.txt'))


class TestCrossValidation(unittest.TestCase):
    """The box search agrees with the constructive solvers."""

    def test_counterexample_end_to_end(self):
        """Mod-4 certificate and an empty radius-20 box for b = 6."""
        product = parse_product(COUNTEREXAMPLE)

        certificate = oracle.modular_obstruction(product, 6, 4)
        self.assertIsNotNone(certificate)
        self.assertTrue(certificate.verify(product))
        self.assertIsNone(oracle.product_box_search(product, 6, 20))

    def test_search_finds_what_the_solver_builds(self):
        """Box search within the constructed solution's norm always succeeds."""
        rng = random.Random(10)
        checked = 0
        attempts = 0
        while checked < 100 and attempts < 5000:
            attempts += 1
            form = random_pairwise_form(rng, max_n=4, max_d=3, bound=5, max_terms=4)
            b = random_target(rng, 10)
            report = solver.solve_auto(form, b)
            radius = report.sup_norm
            if oracle.box_size(form.n, radius) > 10 ** 6:
                continue
            found = oracle.box_search(form, b, radius)

            self.assertIsNotNone(found)
            self.assertEqual(form.evaluate(found), b)
            self.assertLessEqual(vector_norm(found), radius)
            checked += 1
        self.assertGreaterEqual(checked, 50)


if __name__ == '__main__':
    unittest.main()
