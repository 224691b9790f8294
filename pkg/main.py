import argparse
import json
import logging
import re
import sys
from typing import List, Optional, Sequence

from config import settings
from src.cli import commands
from src.core.errors import ConfigurationError
from src.core.solver import METHODS
from src.utils.helpers import export_payload_to_json, stringify_integers
from src.utils.validators import validate_integer, validate_output_path, validate_target_range

logger = logging.getLogger(__name__)

# Arguments such as "-x1*x2+x3*x4" or "-3*x1" are forms, not options.
_NEGATIVE_FORM = re.compile(r'^-\s*(\d+\s*\*\s*)?x\d+')

DESCRIPTION = '''\
Integer solutions of F(a) = b for multilinear forms, determinant forms and
products of linear forms, with exact search bounds, Smith normal forms and
modular obstruction certificates.

Exit codes: 0 solved, 1 unrepresentable/obstructed, 2 unknown (budget or
radius exhausted), 3 input error, 4 internal verification failure.
'''


def integer_arg(minimum: Optional[int] = None):
    def parse(text: str) -> int:
        result = validate_integer(text, minimum=minimum)
        if not result['is_valid']:
            raise argparse.ArgumentTypeError(result['error'])
        return result['parsed_value']
    return parse


def protect_negative_forms(argv: Sequence[str]) -> List[str]:
    """Prefix form arguments that start with '-' so argparse keeps them positional."""
    return [' ' + token if _NEGATIVE_FORM.match(token) else token for token in argv]


class MulrepArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with the input-error code instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(commands.EXIT_INPUT_ERROR, f'{self.prog}: error: {message}\n')


def build_parser() -> argparse.ArgumentParser:
    parser = MulrepArgumentParser(prog='mulrep', description=DESCRIPTION,
                                  formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument('--json', action='store_true', help='machine-readable JSON output')
    parser.add_argument('--out', help='write the JSON report (probe: .json/.jsonl/.csv/.xlsx)')
    parser.add_argument('--log-level', help='override MULREP_LOG_LEVEL')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('solve', help='solve F(a) = b')
    p.add_argument('form')
    p.add_argument('b', type=integer_arg())
    p.add_argument('--method', choices=METHODS)
    p.add_argument('--radius', type=integer_arg(0), help='search radius for the fallback')
    p.add_argument('--n', type=integer_arg(1), help='declared variable count')

    p = sub.add_parser('check', help='coprimality profile and applicable methods')
    p.add_argument('form')
    p.add_argument('--n', type=integer_arg(1))

    p = sub.add_parser('eval', help='evaluate a form at a point')
    p.add_argument('form')
    p.add_argument('--at', required=True, help='comma-separated point, e.g. --at=4,-1,1')
    p.add_argument('--n', type=integer_arg(1))

    p = sub.add_parser('bound', help='general and quadratic search bounds')
    p.add_argument('form')
    p.add_argument('b', type=integer_arg())
    p.add_argument('--n', type=integer_arg(1))

    p = sub.add_parser('snf', help='Smith normal form of a matrix like "2 4; 6 8"')
    p.add_argument('matrix')

    for name, helptext in (('detsolve', 'solve det [[A, *], [*, *]] = b'),
                           ('detbound', 'informational search bound for a determinant form')):
        p = sub.add_parser(name, help=helptext)
        p.add_argument('matrix')
        p.add_argument('n', type=integer_arg(1))
        p.add_argument('b', type=integer_arg())

    p = sub.add_parser('prodsolve', help='represent b by a product of linear forms')
    p.add_argument('items', nargs='+', metavar='FORM... B')
    p.add_argument('--bounded', action='store_true', help='lexicographic search within mu(A, b)')
    p.add_argument('--n', type=integer_arg(1))

    p = sub.add_parser('search', help='exhaustive box search')
    p.add_argument('form')
    p.add_argument('b', type=integer_arg())
    p.add_argument('--radius', type=integer_arg(0), default=settings.DEFAULT_PROBE_RADIUS)
    p.add_argument('--n', type=integer_arg(1))

    p = sub.add_parser('obstruct', help='smallest modulus certifying non-representation')
    p.add_argument('form')
    p.add_argument('b', type=integer_arg())
    p.add_argument('--mmax', type=integer_arg(2), default=settings.DEFAULT_PROBE_MODULUS)
    p.add_argument('--n', type=integer_arg(1))

    p = sub.add_parser('minrep', help='solution of least sup-norm')
    p.add_argument('form')
    p.add_argument('b', type=integer_arg())
    p.add_argument('--radius', type=integer_arg(0), default=settings.DEFAULT_PROBE_RADIUS)
    p.add_argument('--n', type=integer_arg(1))

    p = sub.add_parser('probe', help='classify a range of targets')
    p.add_argument('form')
    p.add_argument('--bmin', type=integer_arg(), default=-10)
    p.add_argument('--bmax', type=integer_arg(), default=10)
    p.add_argument('--radius', type=integer_arg(0), default=settings.DEFAULT_PROBE_RADIUS)
    p.add_argument('--mmax', type=integer_arg(1), default=settings.DEFAULT_PROBE_MODULUS)
    p.add_argument('--n', type=integer_arg(1))
    return parser


def run_command(args: argparse.Namespace) -> commands.CommandResult:
    command = args.command
    if command == 'solve':
        return commands.cmd_solve(args.form, args.b, args.method, args.radius, args.n)
    if command == 'check':
        return commands.cmd_check(args.form, args.n)
    if command == 'eval':
        return commands.cmd_eval(args.form, args.at, args.n)
    if command == 'bound':
        return commands.cmd_bound(args.form, args.b, args.n)
    if command == 'snf':
        return commands.cmd_snf(args.matrix)
    if command == 'detsolve':
        return commands.cmd_detsolve(args.matrix, args.n, args.b)
    if command == 'detbound':
        return commands.cmd_detbound(args.matrix, args.n, args.b)
    if command == 'prodsolve':
        if len(args.items) < 2:
            return commands.result_from_error('prodsolve', ValueError('need at least one form and a target b'))
        target = validate_integer(args.items[-1], name='b')
        if not target['is_valid']:
            return commands.result_from_error('prodsolve', ValueError(target['error']))
        return commands.cmd_prodsolve(args.items[:-1], target['parsed_value'], args.bounded, args.n)
    if command == 'search':
        return commands.cmd_search(args.form, args.b, args.radius, args.n)
    if command == 'obstruct':
        return commands.cmd_obstruct(args.form, args.b, args.mmax, args.n)
    if command == 'minrep':
        return commands.cmd_minrep(args.form, args.b, args.radius, args.n)
    if command == 'probe':
        checked = validate_target_range(args.bmin, args.bmax)
        if not checked['is_valid']:
            return commands.result_from_error('probe', ValueError(checked['error']))
        stream = None
        if args.json:
            def stream(outcome):
                print(json.dumps(stringify_integers(outcome.to_record())), flush=True)
        return commands.cmd_probe(args.form, range(args.bmin, args.bmax + 1), args.radius, args.mmax,
                                  args.n, on_outcome=stream)
    raise ValueError(f'unknown command {command!r}')


def write_output(result: commands.CommandResult, path: str) -> None:
    checked = validate_output_path(path)
    if not checked['is_valid']:
        raise ValueError(checked['error'])
    if result.report is not None:
        result.report.export(path)
    elif checked['extension'] == '.json':
        export_payload_to_json(result.to_json(), path)
    else:
        raise ValueError(f'{result.command} reports can only be written as .json')


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = protect_negative_forms(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)

    try:
        level = logging.getLevelName(args.log_level.upper()) if args.log_level else settings.get_log_level()
        if not isinstance(level, int):
            raise ConfigurationError(f'not a logging level: {args.log_level!r}')
        logging.basicConfig(level=level, format=settings.LOG_FORMAT, stream=sys.stderr)
        result = run_command(args)
    except ConfigurationError as e:
        result = commands.result_from_error(args.command, e)

    if args.json:
        if args.command != 'probe' or result.report is None:
            print(json.dumps(result.to_json(), indent=2))
    else:
        print(result.text)

    if args.out:
        try:
            write_output(result, args.out)
        except (OSError, ValueError) as e:
            print(f'error writing {args.out}: {e}', file=sys.stderr)
            return commands.EXIT_INPUT_ERROR
    return result.exit_code


if __name__ == '__main__':
    sys.exit(main())
