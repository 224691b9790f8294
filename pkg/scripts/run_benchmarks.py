"""
Timed acceptance runs.

Each check re-verifies its results exactly and reports the elapsed time
next to its target. Usage:

    python scripts/run_benchmarks.py [--out report.csv]
"""

import argparse
import logging
import os
import random
import sys

import pandas as pd

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.core import detforms, oracle, solver  # noqa: E402
from src.core.forms import general_bound, nu, nu_upper_bound_holds, parse_form, parse_product  # noqa: E402
from src.core.intlinalg import IntMatrix, determinant, minors_gcd, smith_normal_form  # noqa: E402
from src.utils.helpers import export_report, time_call  # noqa: E402
from src.utils.sampling import random_codimension_one_form, random_pairwise_form, random_target  # noqa: E402

logger = logging.getLogger('benchmarks')


def check_thm1a():
    rng = random.Random(1)
    for _ in range(500):
        form, b = random_pairwise_form(rng), random_target(rng)
        report = solver.solve_thm1a(form, b)
        assert report.within_bound, report.to_json()
    return 500


def check_thm1b():
    rng = random.Random(2)
    for _ in range(200):
        form, b = random_codimension_one_form(rng), random_target(rng)
        report = solver.solve_thm1b(form, b)
        assert report.within_bound, report.to_json()
    return 200


def check_prop4():
    rng = random.Random(4)
    for _ in range(200):
        form = random_pairwise_form(rng, min_d=2, max_d=2)
        report = solver.solve_prop4(form, random_target(rng))
        assert report.within_bound, report.to_json()
    return 200


def check_prop2():
    count = 0
    for p in (5, 7, 11, 13, 25, 35, 49):
        for b in range(-100, 101):
            solver.solve_prop2(p, b)
            count += 1
    return count


def check_counterexample():
    product = parse_product('(x1+x2+x3)*(-x1+x2+x3)')
    certificate = oracle.modular_obstruction(product, 6, 4)
    assert certificate is not None and certificate.verify(product)
    assert oracle.product_box_search(product, 6, 20) is None
    return 1


def check_snf():
    rng = random.Random(20240601)
    for _ in range(200):
        rows, cols = rng.randint(1, 6), rng.randint(1, 6)
        matrix = IntMatrix([[rng.randint(-20, 20) for _ in range(cols)] for _ in range(rows)])
        snf = smith_normal_form(matrix)
        snf.verify(matrix)
        previous = 1
        for i in range(1, snf.rank + 1):
            d_i = minors_gcd(matrix, i)
            assert snf.invariant_factors[i - 1] * previous == d_i
            previous = d_i
    return 200


def check_detform():
    inst = detforms.DetFormInstance(IntMatrix.column((6, 10, 15)), 3)
    completion = detforms.complete_unimodular(inst)
    for b in range(-10, 11):
        solution = detforms.solve_detform(inst, b, completion)
        assert determinant(solution.assemble(inst.A)) == b
    assert not detforms.representable(detforms.DetFormInstance(IntMatrix.column((2, 4)), 2))
    assert detforms.detform_bound(inst, 1) == 25369470
    return 21


def check_product_bound():
    forms = [parse_form('x1 + x2 + x3'), parse_form('x2 - x3', n=3)]
    report = detforms.solve_product_linear(forms, 6, bounded=True)
    assert report.details['mu'] == 7 and report.within_bound
    return 1


def check_nu():
    assert nu(1) == 2 and [nu(d) for d in (2, 3, 4)] == [5, 16, 65]
    for d in range(2, 11):
        assert nu(d) == 1 + d * nu(d - 1)
        assert nu_upper_bound_holds(d)
    return 10


def check_cross_validation():
    rng = random.Random(10)
    checked = 0
    while checked < 100:
        form = random_pairwise_form(rng, max_n=4, max_d=3, bound=5, max_terms=4)
        b = random_target(rng, 10)
        report = solver.solve_auto(form, b)
        radius = min(report.sup_norm, general_bound(form, b))
        if oracle.box_size(form.n, radius) > 10 ** 6:
            continue
        found = oracle.box_search(form, b, radius)
        assert found is not None and form.evaluate(found) == b
        checked += 1
    return checked


CHECKS = [
    ('thm1a bound', check_thm1a, 10),
    ('thm1b bound', check_thm1b, 10),
    ('prop4 bound', check_prop4, 5),
    ('prop2 all targets', check_prop2, 5),
    ('counterexample', check_counterexample, 5),
    ('snf integrity', check_snf, 20),
    ('detform end to end', check_detform, 1),
    ('product bound', check_product_bound, 1),
    ('nu table', check_nu, 1),
    ('oracle cross-validation', check_cross_validation, 60),
]


def main() -> int:
    parser = argparse.ArgumentParser(description='Run the timed acceptance checks')
    parser.add_argument('--out', help='write the timing table (.csv, .json, .jsonl or .xlsx)')
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format='%(asctime)s %(levelname)s %(name)s: %(message)s')

    rows = []
    for name, check, target in CHECKS:
        outcome = time_call(check)
        elapsed = outcome['execution_time_seconds']
        rows.append({
            'check': name,
            'instances': outcome['result'],
            'passed': outcome['success'],
            'seconds': elapsed,
            'target_seconds': target,
            'within_target': outcome['success'] and elapsed < target,
            'error': outcome['error'],
        })
        level = logging.INFO if outcome['success'] else logging.ERROR
        logger.log(level, '%-24s %s in %.2fs', name, 'ok' if outcome['success'] else outcome['error'], elapsed)

    frame = pd.DataFrame(rows)
    print(frame.to_string(index=False))
    if args.out:
        export_report(frame, args.out)
    return 0 if all(r['passed'] for r in rows) else 1


if __name__ == '__main__':
    sys.exit(main())
