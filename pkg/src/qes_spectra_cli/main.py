import itertools
import logging
import sys
from typing import Dict, List, Optional

import torch

from qes_spectra import EigensolverFailure, NonConvergence, RouteDisagreement, Spectrum, Variant, \
    __version__, create_numerics_cfg, create_spec, eval_psi, from_level, get_preset_config, multiset_deviation, \
    pointwise_residual

from .file_utils import write_table
from .logger import setup_logging
from .params import parse_args
from .sweep import conjecture_scan, find_threshold, run_sweep, solve_spectrum, zeta_grid
from .verify import run_verify

SPECTRUM_COLUMNS = ['zeta', 'level_index', 're_E', 'im_E', 'reality', 'pair_id', 'method']


def _numerics(args):
    return create_numerics_cfg(args.preset, tol_real=args.tol_real)


def _preset_field(args, key):
    preset_cfg = get_preset_config(args.preset) if args.preset else None
    return preset_cfg.get(key) if preset_cfg else None


def _variant_and_m(args, default_variant: Optional[str] = None):
    variant = args.variant or _preset_field(args, 'variant') or default_variant
    m = args.m if args.m is not None else _preset_field(args, 'm')
    if variant is None or m is None:
        raise ValueError("Both --variant and --m are required (or a --preset that supplies them).")
    return Variant(variant), m


def _meta(args, cfg, **extra) -> Dict:
    meta = dict(command=args.command, tol_real=cfg.tol_real, version=__version__)
    meta.update(extra)
    return meta


def _level_rows(spectrum: Spectrum, order=None, **extra) -> List[Dict]:
    order = order if order is not None else range(len(spectrum.levels))
    rows = []
    for k, i in enumerate(order):
        level = spectrum.levels[i]
        rows.append(dict(
            zeta=spectrum.spec.zeta,
            level_index=k,
            re_E=level.energy.real,
            im_E=level.energy.imag,
            reality=level.reality.value,
            pair_id=level.pair_id,
            method=spectrum.method.value,
            **extra,
        ))
    return rows


def cmd_spectrum(args) -> int:
    cfg = _numerics(args)
    spec = create_spec(args.preset, variant=args.variant, zeta=args.zeta, m=args.m)
    if args.method == 'all':
        methods = (['closed'] if spec.m <= 4 else []) + ['matrix', 'recursion']
    else:
        methods = [args.method]
    spectra = {name: solve_spectrum(spec, name, cfg) for name in methods}

    deviations = {}
    for a, b in itertools.combinations(methods, 2):
        deviations[f'{a}-{b}'] = multiset_deviation(spectra[a].energies, spectra[b].energies)
        logging.info(f'Route deviation {a} vs {b}: {deviations[f"{a}-{b}"]:.3e}.')

    rows = [row for name in methods for row in _level_rows(spectra[name])]
    meta = _meta(args, cfg, variant=spec.variant.value, m=spec.m, zeta=spec.zeta, method=args.method,
                 deviations=deviations)
    write_table(rows, SPECTRUM_COLUMNS, args.format, args.out, meta, int_columns=('level_index', 'pair_id'))

    scale = max(1., max(abs(e) for s in spectra.values() for e in s.energies))
    failed = {k: v for k, v in deviations.items() if v > cfg.route_tol * scale}
    if failed:
        raise RouteDisagreement(f'Solution routes disagree for {spec}: {failed}.')
    return 0


def cmd_sweep(args) -> int:
    cfg = _numerics(args)
    variant, m = _variant_and_m(args)
    sweep_cfg = _preset_field(args, 'sweep') or {}
    bounds = dict(
        zeta_min=args.zeta_min if args.zeta_min is not None else sweep_cfg.get('zeta_min'),
        zeta_max=args.zeta_max if args.zeta_max is not None else sweep_cfg.get('zeta_max'),
        steps=args.steps if args.steps is not None else sweep_cfg.get('steps'),
    )
    missing = [k for k, v in bounds.items() if v is None]
    if missing:
        raise ValueError(f"Sweep needs {', '.join(missing)}; pass the flags or a preset with a sweep block.")
    grid = zeta_grid(bounds['zeta_min'], bounds['zeta_max'], bounds['steps'])
    result = run_sweep(variant, m, grid, args.method, cfg, progress=args.progress)

    rows = []
    for spectrum, order, max_imag in zip(result.spectra, result.tracks, result.max_imag):
        rows.extend(_level_rows(spectrum, order, max_imag=max_imag))
    meta = _meta(args, cfg, variant=variant.value, m=m, method=args.method, **bounds)
    write_table(rows, SPECTRUM_COLUMNS + ['max_imag'], args.format, args.out, meta,
                int_columns=('level_index', 'pair_id'))
    return 0


def cmd_threshold(args) -> int:
    cfg = _numerics(args)
    variant, m = _variant_and_m(args, default_variant='plus')
    result = find_threshold(variant, m, cfg, zeta_hi=args.zeta_hi, method=args.method)
    if result.zeta_c is None:
        logging.info(f'No threshold for {variant.value} M={m}: {result.note}.')
    else:
        logging.info(f'zeta_c = {result.zeta_c:.12f} for {variant.value} M={m} (bracket {result.bracket_width:.1e}).')
    rows = [dict(m=result.m, variant=result.variant.value, zeta_c=result.zeta_c,
                 bracket_width=result.bracket_width, note=result.note)]
    meta = _meta(args, cfg, variant=variant.value, m=m, zeta_hi=args.zeta_hi)
    write_table(rows, ['m', 'variant', 'zeta_c', 'bracket_width', 'note'], args.format, args.out, meta)
    return 0


def cmd_conjecture_scan(args) -> int:
    cfg = _numerics(args)
    variant = Variant(args.variant or _preset_field(args, 'variant') or 'minus')
    report = conjecture_scan(args.m_max, args.zeta_grid, variant, cfg, progress=args.progress)
    columns = ['m', 'zeta', 'max_rel_imag', 'n_complex', 'certificate_dev', 'closed_form_dev']
    rows = [{c: getattr(r, c) for c in columns} for r in report.rows]
    meta = _meta(args, cfg, variant=variant.value, m_max=args.m_max, zeta_grid=list(args.zeta_grid),
                 verdict=report.verdict, max_rel_imag=report.max_rel_imag,
                 max_certificate_dev=report.max_certificate_dev)
    write_table(rows, columns, args.format, args.out, meta, int_columns=('m', 'n_complex'))
    return 0


def cmd_verify(args) -> int:
    cfg = _numerics(args)
    results = run_verify(cfg)
    columns = ['name', 'passed', 'worst', 'tol', 'cases', 'detail']
    rows = [{c: getattr(r, c) for c in columns} for r in results]
    passed = all(r.passed for r in results)
    meta = _meta(args, cfg, passed=passed, failed=[r.name for r in results if not r.passed])
    write_table(rows, columns, args.format, args.out, meta, int_columns=('cases',))
    if not passed:
        logging.error(f'{sum(not r.passed for r in results)} of {len(results)} checks failed.')
        return 1
    logging.info(f'All {len(results)} checks passed.')
    return 0


def cmd_wavefunction(args) -> int:
    cfg = _numerics(args)
    spec = create_spec(args.preset, variant=args.variant, zeta=args.zeta, m=args.m)
    if args.samples < 1:
        raise ValueError(f"--samples must be >= 1, got {args.samples}.")
    spectrum = solve_spectrum(spec, args.method, cfg)
    if not 0 <= args.level < spec.m:
        raise ValueError(f"--level must lie in [0, {spec.m - 1}], got {args.level}.")
    level = spectrum.levels[args.level]
    wf = from_level(spec, level)
    xs = torch.linspace(args.x_min, args.x_max, args.samples, dtype=torch.float64)
    psi = eval_psi(wf, xs)
    mode = 'fd' if args.fd else 'analytic'
    residual = pointwise_residual(wf, xs, mode)
    logging.info(f'Level {args.level} at E = {level.energy}: max {mode} residual {float(residual.max()):.3e}.')
    rows = [
        dict(x=float(x), re_psi=float(p.real), im_psi=float(p.imag), residual=float(r))
        for x, p, r in zip(xs.tolist(), psi.tolist(), residual.tolist())
    ]
    meta = _meta(args, cfg, variant=spec.variant.value, m=spec.m, zeta=spec.zeta, method=args.method,
                 level=args.level, re_E=level.energy.real, im_E=level.energy.imag, residual_mode=mode,
                 phi_coeffs=[[c.real, c.imag] for c in level.phi_coeffs])
    write_table(rows, ['x', 're_psi', 'im_psi', 'residual'], args.format, args.out, meta)
    return 0


COMMANDS = {
    'spectrum': cmd_spectrum,
    'sweep': cmd_sweep,
    'threshold': cmd_threshold,
    'conjecture-scan': cmd_conjecture_scan,
    'verify': cmd_verify,
    'wavefunction': cmd_wavefunction,
}


def main(args):
    try:
        args = parse_args(args)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1

    args.log_level = logging.DEBUG if args.debug else logging.INFO
    setup_logging(args.log_file, args.log_level)

    try:
        return COMMANDS[args.command](args)
    except RouteDisagreement as e:
        logging.error(str(e))
        return 2
    except (NonConvergence, EigensolverFailure) as e:
        logging.error(f'{type(e).__name__}: {e}')
        return 3
    except ValueError as e:
        # UnsupportedM, ZetaZero, DomainError, VariantMismatch and malformed input
        logging.error(f'{type(e).__name__}: {e}')
        return 1


def cli():
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    cli()
