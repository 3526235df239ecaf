import argparse
import sys

from qes_spectra import list_presets
from qes_spectra.constants import RESIDUAL_HALF_WIDTH, RESIDUAL_SAMPLES, SCAN_ZETA_GRID, THRESHOLD_ZETA_HI

METHODS = ('closed', 'matrix', 'recursion')


class ArgumentParser(argparse.ArgumentParser):
    """ argparse parser whose usage errors exit with code 1. """

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f'{self.prog}: error: {message}\n')


class ParseZetaGrid(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        grid = []
        for value in values.split(','):
            value = value.strip()
            if not value:
                continue
            try:
                grid.append(float(value))
            except ValueError:
                parser.error(f"invalid zeta value '{value}' in {option_string}")
        if not grid:
            parser.error(f"{option_string} needs at least one value")
        setattr(namespace, self.dest, tuple(grid))


def _common_args():
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument(
        "--preset",
        type=str,
        default=None,
        choices=list_presets(),
        help="Named problem preset supplying variant, m, zeta and sweep defaults. Explicit flags win.",
    )
    parser.add_argument(
        "--variant",
        type=str,
        default=None,
        choices=['plus', 'minus'],
        help="Potential family: plus = -(zeta cosh 2x - iM)^2, minus = -(zeta sinh 2x - iM)^2.",
    )
    parser.add_argument("--zeta", type=float, default=None, help="Real coupling zeta.")
    parser.add_argument("--m", type=int, default=None, help="Positive integer M, the number of QES levels.")
    parser.add_argument(
        "--format",
        type=str,
        default='csv',
        choices=['csv', 'json'],
        help="Output table format.",
    )
    parser.add_argument(
        "--out",
        type=str,
        default=None,
        help="Output path or fsspec URL. Tables go to stdout when omitted.",
    )
    parser.add_argument(
        "--tol-real",
        type=float,
        default=None,
        help="Relative |Im E| bound for classifying an energy as real.",
    )
    parser.add_argument("--debug", default=False, action="store_true", help="Debug logging.")
    parser.add_argument("--log-file", type=str, default=None, help="Also write the log to this file.")
    parser.add_argument(
        "--no-progress",
        dest="progress",
        default=True,
        action="store_false",
        help="Disable progress bars.",
    )
    return parser


def parse_args(args):
    common = _common_args()
    parser = ArgumentParser(prog='qes-spectra', description="QES spectra of the cosh / sinh complex potentials.")
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True

    p = sub.add_parser('spectrum', parents=[common], help="Spectrum of one potential by one or all routes.")
    p.add_argument(
        "--method",
        type=str,
        default='matrix',
        choices=METHODS + ('all',),
        help="Solution route; 'all' runs every applicable route and cross-checks them.",
    )

    p = sub.add_parser('sweep', parents=[common], help="Spectra on a uniform zeta grid with level tracking.")
    p.add_argument("--method", type=str, default='matrix', choices=METHODS, help="Solution route per grid point.")
    p.add_argument("--zeta-min", type=float, default=None, help="Lower end of the zeta grid.")
    p.add_argument("--zeta-max", type=float, default=None, help="Upper end of the zeta grid.")
    p.add_argument("--steps", type=int, default=None, help="Number of grid points, at least 2.")

    p = sub.add_parser('threshold', parents=[common], help="Bisect the zeta where the spectrum leaves the real axis.")
    p.add_argument("--method", type=str, default='matrix', choices=METHODS, help="Solution route per probe.")
    p.add_argument("--zeta-hi", type=float, default=THRESHOLD_ZETA_HI, help="Upper end of the search interval.")

    p = sub.add_parser('conjecture-scan', parents=[common], help="Reality scan over M = 1..m_max and a zeta grid.")
    p.add_argument("--m-max", type=int, default=12, help="Largest M in the scan.")
    p.add_argument(
        "--zeta-grid",
        type=str,
        default=SCAN_ZETA_GRID,
        action=ParseZetaGrid,
        help="Comma separated zeta values.",
    )

    sub.add_parser('verify', parents=[common], help="Run the full cross-validation suite.")

    p = sub.add_parser('wavefunction', parents=[common], help="Sample psi of one level with its ODE residual.")
    p.add_argument("--method", type=str, default='matrix', choices=METHODS, help="Route supplying E and phi.")
    p.add_argument("--level", type=int, default=0, help="Level index in the sorted spectrum.")
    p.add_argument("--x-min", type=float, default=-RESIDUAL_HALF_WIDTH, help="Left end of the x grid.")
    p.add_argument("--x-max", type=float, default=RESIDUAL_HALF_WIDTH, help="Right end of the x grid.")
    p.add_argument("--samples", type=int, default=RESIDUAL_SAMPLES, help="Number of x samples.")
    p.add_argument("--fd", default=False, action="store_true", help="Finite-difference residual instead of analytic.")

    args = parser.parse_args(args)
    return args
