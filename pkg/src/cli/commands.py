"""
Command implementations behind main.py.

Each cmd_* function takes already-split arguments, runs the library and
returns a CommandResult; library errors are mapped to outcomes and exit
codes in one place (result_from_error).
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence

from config import settings
from src.core import detforms, oracle, solver
from src.core.errors import (BudgetExceededError, MulrepError, SearchExhaustedError, UnrepresentableError,
                             VerificationError)
from src.core.forms import (MultilinearForm, coprimality_profile, general_bound, nu, nu_upper_bound_holds,
                            parse_any, parse_form, parse_linear_forms, prop4_bound)
from src.core.intlinalg import IntMatrix, smith_normal_form
from src.utils.helpers import format_vector, indent_block, stringify_integers
from src.utils.validators import validate_vector

logger = logging.getLogger(__name__)

SOLVED = 'solved'
OK = 'ok'
UNREPRESENTABLE = 'unrepresentable'
OBSTRUCTED = 'obstructed'
UNKNOWN = 'unknown'
ERROR = 'error'

EXIT_SUCCESS = 0
EXIT_UNREPRESENTABLE = 1
EXIT_UNKNOWN = 2
EXIT_INPUT_ERROR = 3
EXIT_VERIFICATION = 4

EXIT_CODES = {
    SOLVED: EXIT_SUCCESS,
    OK: EXIT_SUCCESS,
    UNREPRESENTABLE: EXIT_UNREPRESENTABLE,
    OBSTRUCTED: EXIT_UNREPRESENTABLE,
    UNKNOWN: EXIT_UNKNOWN,
    ERROR: EXIT_INPUT_ERROR,
}


@dataclass
class CommandResult:
    command: str
    outcome: str
    payload: Dict[str, Any] = field(default_factory=dict)
    text: str = ''
    exit_code: Optional[int] = None
    report: Optional[oracle.ProbeReport] = None

    def __post_init__(self):
        if self.exit_code is None:
            self.exit_code = EXIT_CODES[self.outcome]

    def to_json(self) -> Dict[str, Any]:
        return stringify_integers({'command': self.command, 'outcome': self.outcome, **self.payload})


def result_from_error(command: str, error: Exception) -> CommandResult:
    """Map a library exception onto the outcome/exit-code contract."""
    details = dict(getattr(error, 'details', {}) or {})
    message = getattr(error, 'message', str(error))
    payload = {'error': type(error).__name__, 'message': message, 'details': details}
    if isinstance(error, VerificationError):
        logger.error('%s: internal verification failed: %s', command, message)
        return CommandResult(command, ERROR, payload, f'internal verification failure: {message}',
                             EXIT_VERIFICATION)
    if isinstance(error, UnrepresentableError):
        return CommandResult(command, UNREPRESENTABLE, payload, f'unrepresentable: {message}')
    if isinstance(error, (BudgetExceededError, SearchExhaustedError)):
        return CommandResult(command, UNKNOWN, payload, f'unknown: {message}')
    if isinstance(error, (MulrepError, ValueError)):
        return CommandResult(command, ERROR, payload, f'error: {message}')
    raise error


def _method_label(method: str, form: MultilinearForm) -> str:
    if method == solver.PROP2:
        return f'prop2(p={solver.prop2_parameter(form)})'
    return method


def _ordered_methods(form: MultilinearForm) -> List[str]:
    tags = solver.classify(form)
    return [_method_label(m, form) for m in solver.METHOD_PRIORITY if m in tags]


def _render_solve(report: solver.SolveReport) -> str:
    lines = [
        f'form:        {report.form.render()}',
        f'target:      {report.b}',
        f'solution:    {format_vector(report.solution)}',
        f'evaluation:  {report.form.evaluate(report.solution)}',
        f'method:      {report.method}',
        f'sup-norm:    {report.sup_norm}',
    ]
    if report.bound_value is not None:
        lines.append(f'bound:       {report.bound_value}')
        lines.append(f'within:      {"yes" if report.within_bound else "NO"}')
    return '\n'.join(lines)


def cmd_solve(form_text: str, b: int, method: Optional[str] = None, radius: Optional[int] = None,
              n: Optional[int] = None) -> CommandResult:
    """
    Solve F(a) = b by dispatch or by a forced method.

    A forced method still checks its preconditions.
    """
    try:
        form = parse_form(form_text, n=n)
        if method is None:
            report = solver.solve_auto(form, b, search_radius=radius)
        elif method == solver.SEARCH:
            radius = settings.DEFAULT_PROBE_RADIUS if radius is None else radius
            found = oracle.box_search(form, b, radius)
            if found is None:
                raise SearchExhaustedError(f'no solution with sup-norm <= {radius}', {'radius': radius})
            report = solver.SolveReport(form, b, found, solver.SEARCH, None, {'radius': radius})
        else:
            report = solver.solve_with(method, form, b)
    except Exception as e:
        return result_from_error('solve', e)
    return CommandResult('solve', SOLVED, report.to_json(), _render_solve(report))


def cmd_check(form_text: str, n: Optional[int] = None) -> CommandResult:
    """Coprimality profile, applicable methods and the |b| = 1 bounds."""
    try:
        form = parse_form(form_text, n=n)
    except Exception as e:
        return result_from_error('check', e)

    profile = coprimality_profile(form)
    methods = _ordered_methods(form)
    payload = {
        'form': form.render(),
        'n': form.n,
        'd': form.d,
        'sup_norm': form.sup_norm(),
        'profile': profile.to_dict(),
        'methods': methods,
        'nu': nu(form.d),
        'nu_below_d_factorial_e': nu_upper_bound_holds(form.d),
        'general_bound_b1': general_bound(form, 1),
        'prop4_bound_b1': prop4_bound(form, 1) if form.d == 2 else None,
    }
    lines = [
        f'form:             {form.render()}',
        f'n, d:             {form.n}, {form.d}',
        f'|F|:              {form.sup_norm()}',
        f'gcd:              {profile.overall_gcd} ({"coprime" if profile.overall_gcd == 1 else "not coprime"})',
        f'pairwise coprime: {"yes" if profile.pairwise_coprime else "no"}',
        f'coprime pair:     {"yes" if profile.has_coprime_pair else "no"}',
        f'methods:          {", ".join(methods) if methods else "none (search only)"}',
        f'nu_d:             {nu(form.d)}',
        f'bound (|b|=1):    {general_bound(form, 1)}',
    ]
    return CommandResult('check', OK, payload, '\n'.join(lines))


def cmd_eval(form_text: str, at: str, n: Optional[int] = None) -> CommandResult:
    try:
        form = parse_any(form_text, n=n)
        checked = validate_vector(at, form.n)
        if not checked['is_valid']:
            raise ValueError(checked['error'])
        values = checked['parsed_value']
        value = form.evaluate(values)
    except Exception as e:
        return result_from_error('eval', e)
    payload = {'form': form.render(), 'at': values, 'value': value}
    return CommandResult('eval', OK, payload, f'F{format_vector(values)} = {value}')


def cmd_bound(form_text: str, b: int, n: Optional[int] = None) -> CommandResult:
    try:
        form = parse_form(form_text, n=n)
    except Exception as e:
        return result_from_error('bound', e)
    payload = {
        'form': form.render(),
        'b': b,
        'nu': nu(form.d),
        'general_bound': general_bound(form, b),
        'prop4_bound': prop4_bound(form, b) if form.d == 2 else None,
    }
    lines = [f'nu_{form.d} = {nu(form.d)}', f'|b|(2|F|)^nu = {payload["general_bound"]}']
    if form.d == 2:
        lines.append(f'|b| + |F|^3 = {payload["prop4_bound"]}')
    return CommandResult('bound', OK, payload, '\n'.join(lines))


def cmd_snf(matrix_text: str) -> CommandResult:
    """Smith normal form with U and V; the decomposition is re-verified."""
    try:
        matrix = IntMatrix.parse(matrix_text)
        snf = smith_normal_form(matrix)
        snf.verify(matrix)
    except Exception as e:
        return result_from_error('snf', e)
    payload = {'matrix': matrix.to_json(), **snf.to_json()}
    text = '\n'.join([
        'invariant factors: ' + ', '.join(str(s) for s in snf.invariant_factors),
        'U:', indent_block(snf.U.render()),
        'V:', indent_block(snf.V.render()),
    ])
    return CommandResult('snf', OK, payload, text)


def cmd_detsolve(matrix_text: str, n: int, b: int) -> CommandResult:
    try:
        inst = detforms.DetFormInstance(IntMatrix.parse(matrix_text), n)
        solution = detforms.solve_detform(inst, b)
        assembled = solution.assemble(inst.A)
        det = solution.determinant(inst.A)
    except Exception as e:
        return result_from_error('detsolve', e)
    payload = {**solution.to_json(), 'assembled': assembled.to_json(), 'determinant': det, 'n': n}
    parts = ['assembled matrix:', indent_block(assembled.render()), f'determinant: {det}']
    if solution.X is not None:
        parts[1:1] = ['X:', indent_block(solution.X.render())]
    return CommandResult('detsolve', SOLVED, payload, '\n'.join(parts))


def cmd_detbound(matrix_text: str, n: int, b: int) -> CommandResult:
    try:
        inst = detforms.DetFormInstance(IntMatrix.parse(matrix_text), n)
        bound = detforms.detform_bound(inst, b)
    except Exception as e:
        return result_from_error('detbound', e)
    return CommandResult('detbound', OK, {'n': n, 'b': b, 'bound': bound},
                         f'n^2 |b| alpha beta (beta+1)^(n-2) = {bound} (informational)')


def cmd_prodsolve(form_texts: Sequence[str], b: int, bounded: bool = False,
                  n: Optional[int] = None) -> CommandResult:
    try:
        product = parse_linear_forms(form_texts, n=n)
        report = detforms.solve_product_linear(product, b, bounded=bounded, n=n)
    except Exception as e:
        return result_from_error('prodsolve', e)
    payload = report.to_json()
    text = _render_solve(report) + f'\nmu(A, b):    {report.details["mu"]}'
    return CommandResult('prodsolve', SOLVED, payload, text)


def cmd_search(form_text: str, b: int, radius: int, n: Optional[int] = None) -> CommandResult:
    try:
        form = parse_any(form_text, n=n)
        found = oracle.box_search(form, b, radius)
    except Exception as e:
        return result_from_error('search', e)
    if found is None:
        return CommandResult('search', UNKNOWN, {'form': form.render(), 'b': b, 'radius': radius},
                             f'no solution with sup-norm <= {radius}')
    payload = {'form': form.render(), 'b': b, 'radius': radius, 'solution': list(found),
               'evaluation': form.evaluate(found)}
    return CommandResult('search', SOLVED, payload, f'solution: {format_vector(found)}')


def cmd_obstruct(form_text: str, b: int, modulus_max: int, n: Optional[int] = None) -> CommandResult:
    try:
        form = parse_any(form_text, n=n)
        certificate = oracle.find_obstruction(form, b, modulus_max)
    except Exception as e:
        return result_from_error('obstruct', e)
    if certificate is None:
        return CommandResult('obstruct', UNKNOWN, {'form': form.render(), 'b': b, 'modulus_max': modulus_max},
                             f'no obstruction with modulus <= {modulus_max}')
    payload = {'form': form.render(), 'b': b, 'certificate': certificate.to_json()}
    return CommandResult('obstruct', OBSTRUCTED, payload,
                         f'F(a) = {b} has no solution mod {certificate.modulus}: not represented')


def cmd_minrep(form_text: str, b: int, radius: int, n: Optional[int] = None) -> CommandResult:
    try:
        form = parse_any(form_text, n=n)
        found = oracle.minimal_representation(form, b, radius)
    except Exception as e:
        return result_from_error('minrep', e)
    if found is None:
        return CommandResult('minrep', UNKNOWN, {'form': form.render(), 'b': b, 'radius': radius},
                             f'no solution with sup-norm <= {radius}')
    norm = max((abs(v) for v in found), default=0)
    payload = {'form': form.render(), 'b': b, 'solution': list(found), 'sup_norm': norm,
               'evaluation': form.evaluate(found)}
    return CommandResult('minrep', SOLVED, payload, f'minimal solution: {format_vector(found)} (sup-norm {norm})')


def cmd_probe(form_text: str, targets: Iterable[int], radius: int, modulus_max: int,
              n: Optional[int] = None, budget: Optional[int] = None,
              on_outcome: Optional[Callable[[oracle.ProbeOutcome], None]] = None) -> CommandResult:
    """
    Classify a range of targets; each outcome is handed to on_outcome as
    soon as it is known.
    """
    try:
        form = parse_any(form_text, n=n)
    except Exception as e:
        return result_from_error('probe', e)
    if isinstance(form, MultilinearForm) and form.content() != 1:
        logger.warning('probing a non-coprime form (gcd %d): %s', form.content(), form.render())

    report = oracle.ProbeReport(form, radius, modulus_max)
    try:
        for b in targets:
            outcome = oracle.probe_target(form, b, radius, modulus_max, budget)
            report.outcomes.append(outcome)
            if on_outcome is not None:
                on_outcome(outcome)
    except Exception as e:
        return result_from_error('probe', e)

    counts = report.counts()
    if counts[oracle.UNKNOWN]:
        outcome = UNKNOWN
    elif counts[oracle.OBSTRUCTED]:
        outcome = OBSTRUCTED
    else:
        outcome = SOLVED
    text = f'solved {counts[oracle.SOLVED]}, obstructed {counts[oracle.OBSTRUCTED]}, unknown {counts[oracle.UNKNOWN]}'
    return CommandResult('probe', outcome, report.to_json(), text, report=report)
