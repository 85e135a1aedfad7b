"""
Command-line front end for ghzmetro: states, QFI, PPT cuts, Bell bounds,
estimation runs and figure data.
"""
import csv
import io
import sys
import logging
import argparse
from fractions import Fraction

import numpy as np

import bell
import estimation
import ptranspose
import qfi
import state_core
from common_utils import (
    CrossCheckError, DomainError, GhzMetroError, SizeLimitError, bell_limit,
    dumps_json, format_number, parse_fraction, provenance, setup_logging,
)

logger = logging.getLogger(__name__)

ORACLE_TOLERANCE = 1e-9
DEFAULT_RATIOS = (Fraction(1, 8), Fraction(1, 4), Fraction(3, 8))


def parse_range(text):
    """'4..10' or '7' -> inclusive range of ints."""
    try:
        if '..' in text:
            lo, hi = text.split('..', 1)
            lo, hi = int(lo), int(hi)
        else:
            lo = hi = int(text)
    except ValueError:
        raise DomainError(f"Expected N or LO..HI, got {text!r}")
    if lo > hi:
        raise DomainError(f"Empty range {text!r}")
    return range(lo, hi + 1)


def _sort_key(row):
    a = row.get('a')
    return (row.get('n', 0), row.get('k') or 0, a if a is not None else 0, row.get('m') or 0)


# Output helpers
def render(rows, args, meta, single=False, notes=None):
    exact = getattr(args, 'exact', False)
    notes = notes or {}
    if args.format == 'json':
        body = {'provenance': meta}
        if notes:
            body['summary'] = notes
        if single:
            body['result'] = rows[0]
        else:
            body['rows'] = rows
        return dumps_json(body, exact=exact) + '\n'

    buffer = io.StringIO()
    for key in ('command', 'version', 'seed', 'timestamp'):
        if key in meta:
            buffer.write(f"# {key}: {meta[key]}\n")
    for key, value in notes.items():
        buffer.write(f"# {key}: {_cell(value, exact)}\n")
    if not rows:
        return buffer.getvalue()
    if args.format == 'text' and single:
        for key, value in rows[0].items():
            buffer.write(f"{key}: {_cell(value, exact)}\n")
        return buffer.getvalue()
    columns = list(rows[0].keys())
    if args.format == 'csv':
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(col), exact) for col in columns])
    else:
        buffer.write('\t'.join(columns) + '\n')
        for row in rows:
            buffer.write('\t'.join(_cell(row.get(col), exact) for col in columns) + '\n')
    return buffer.getvalue()


def _cell(value, exact):
    if value is None:
        return ''
    if isinstance(value, (list, tuple)):
        return ' '.join(_cell(v, exact) for v in value)
    if isinstance(value, dict):
        return dumps_json(value, exact=exact).replace('\n', '')
    return format_number(value, exact)


def emit(text, args):
    if args.output:
        with open(args.output, 'w', encoding='utf-8') as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def check_oracle(deviation, what):
    logger.info(f"Oracle deviation for {what}: {deviation:.3g}")
    if deviation > ORACLE_TOLERANCE:
        raise CrossCheckError(f"{what}: oracle deviation {deviation:.3g} exceeds {ORACLE_TOLERANCE}")
    return deviation


def select_state(args):
    if args.n is None:
        raise DomainError("--n is required")
    if args.ghz:
        return state_core.pure_ghz(args.n)
    if args.k is None:
        raise DomainError("--k is required unless --ghz is given")
    if args.m:
        return state_core.build_rho_nkm(args.n, args.k, args.m, getattr(args, 'mixing_range', None))
    return state_core.build_rho_nk(args.n, args.k)


# Commands
def cmd_state(args):
    state = select_state(args)
    summary = state.describe()
    if args.oracle:
        dense = np.sort(np.linalg.eigvalsh(state_core.to_dense(state)))
        exact_values = np.array([float(v) for v in state.spectrum()])
        check_oracle(float(np.max(np.abs(dense - exact_values))), 'dense spectrum')
    notes = {
        'label': summary['label'],
        'trace': summary['trace'],
        'normalized': summary['trace'] == 1,
        'pure_sectors': summary['pure_sectors'],
        'mixed_sectors': summary['mixed_sectors'],
        'empty_sectors': summary['empty_sectors'],
    }
    if args.format == 'json':
        return [state_core.state_to_dict(state)], True, notes
    rows = [
        {
            'i': i,
            'bits': state_core.bitstring(state.n, i),
            'w': state_core.weight(state.n, i),
            'lambda_plus': p,
            'lambda_minus': m,
        }
        for i, (p, m) in enumerate(zip(state.lambda_plus, state.lambda_minus))
        if p or m
    ]
    logger.info(f"{summary['label']}: trace {summary['trace']}, {summary['pure_sectors']} pure, "
                f"{summary['mixed_sectors']} mixed sectors")
    return rows, False, notes


def cmd_qfi(args):
    if args.check_bounds:
        rows = [
            {'n': n, 'k': k, 'm': 0, 'f_q': qfi.qfi_closed_nk(n, k), 'bound': qfi.qfi_lower_bound_nk(n, k)}
            for n, k in qfi.bound_nk_deviations(args.check_bounds)
        ]
        rows += [
            {'n': n, 'k': k, 'm': m, 'f_q': f_q, 'bound': bound}
            for n, k, m, f_q, bound in qfi.bound_nkm_deviations(args.check_bounds)
        ]
        if rows:
            raise CrossCheckError(f"{len(rows)} bound violations up to n = {args.check_bounds}", rows=rows)
        return [{'n_max': args.check_bounds, 'violations': 0}], True
    if args.eps is not None:
        if args.n is None:
            raise DomainError("--n is required")
        return [qfi.sublinear_report(args.n, args.c, args.eps)], True
    if args.a:
        rows = [qfi.asymptotic_report(n, a).as_row() for n in args.n_range for a in args.a]
        return sorted(rows, key=_sort_key), False
    if args.n is None:
        raise DomainError("--n is required")
    if args.ghz:
        state = state_core.pure_ghz(args.n)
        f_q = qfi.qfi_ghz_diagonal(state)
        row = {'n': args.n, 'label': state.label, 'f_q': f_q, 'snl_ratio': f_q / args.n,
               'verdict': qfi.separability_test(f_q, args.n)}
    else:
        if args.k is None:
            raise DomainError("--k is required unless --ghz or --a is given")
        row = qfi.qfi_report(args.n, args.k, args.m).as_row()
        state = select_state(args) if args.oracle else None
    if args.oracle:
        exact = qfi.qfi_ghz_diagonal(state)
        if exact != row['f_q']:
            raise CrossCheckError(f"Closed form {row['f_q']} disagrees with sector formula {exact}")
        row['oracle_deviation'] = check_oracle(abs(qfi.qfi_dense(state) - float(exact)), 'spectral QFI')
    return [row], True


def cmd_ppt(args):
    state = select_state(args)
    rows = []
    if args.qubits:
        subset = ptranspose.QubitSubset.from_qubits(state.n, args.qubits)
        spectrum = ptranspose.pt_spectrum(state, subset)
        row = {'qubits': subset.qubits, 'min_eigenvalue': spectrum.min_eigenvalue(),
               'status': 'PPT' if spectrum.is_positive() else 'NPPT'}
        if args.oracle:
            row['oracle_deviation'] = check_oracle(ptranspose.oracle_deviation(state, subset), 'PT spectrum')
        return [row], True
    certificate = ptranspose.ppt_single_qubit_certificate(state)
    for cut in ptranspose.cut_classification(state, seed=args.seed):
        rows.append({
            'cut_size': cut.cut_size,
            'status': cut.status,
            'witness_mask': cut.witness_mask,
            'witness_qubits': cut.witness_qubits,
            'min_eigenvalue': cut.min_eigenvalue,
            'subsets_checked': cut.subsets_checked,
            'exhaustive': cut.exhaustive,
            'non_unlockable': certificate.holds,
        })
    if args.oracle:
        subsets = [ptranspose.QubitSubset.from_qubits(state.n, [q]) for q in range(1, state.n + 1)]
        subsets += [ptranspose.QubitSubset(state.n, row['witness_mask']) for row in rows if row['witness_mask']]
        deviation = check_oracle(
            max(ptranspose.oracle_deviation(state, subset) for subset in subsets), 'PT spectra')
        for row in rows:
            row['oracle_deviation'] = deviation
    return rows, False


def cmd_bell(args):
    state = select_state(args)
    row = bell.detection_comparison(state)
    result = {
        'n': row.n,
        'k': None if args.ghz else args.k,
        'f_q': row.f_q,
        'f_q_over_n': row.f_q_over_n,
        'hs_norm_sq': bell.hs_norm_sq(state, exact=True) if args.exact else row.hs_norm_sq,
        'xy_plane_sum': row.xy_plane_sum,
        'lower_bound': row.lower_bound,
        'verdict': row.verdict,
        'xy_verdict': row.xy_verdict,
    }
    if args.tensor:
        summary = bell.tensor_summary(state)
        result['nonzero_elements'] = {
            ''.join('xyz'[k - 1] for k in key): value
            for key, value in sorted(summary.nonzero_elements.items())
        }
    if args.oracle:
        result['oracle_deviation'] = check_oracle(bell.tensor_deviation(state), 'correlation tensor')
    return [result], True


def cmd_estimate(args):
    state = select_state(args)
    run = estimation.run_monte_carlo(state, args.theta, args.model, args.shots, args.repetitions, args.seed)
    result = run.to_dict()
    result['state_params'] = {'n': args.n, 'k': args.k, 'm': args.m, 'ghz': args.ghz, 'label': state.label}
    if args.oracle:
        fast = estimation.outcome_distribution(state, args.theta, args.model).probabilities
        dense = estimation.outcome_distribution_dense(state, args.theta, args.model)
        result['oracle_deviation'] = check_oracle(float(np.max(np.abs(fast - dense))), 'outcome distribution')
    return [result], True


def figure_2(args):
    ks = args.k or [2, 3]
    rows = []
    for k in ks:
        for n in range(2 * k + 1, args.n_max + 1):
            f_q = qfi.qfi_closed_nk(n, k)
            rows.append({'n': n, 'k': k, 'f_q': f_q, 'n_times_k': n * k, 'ratio': f_q / (n * k)})
    return rows


def figure_3(args):
    n_values = args.n_range or range(8, 121)
    rows = []
    for a in args.a or DEFAULT_RATIOS:
        for n in n_values:
            report = qfi.asymptotic_report(n, a)
            rows.append({
                'n': n, 'a': a, 'k': report.k, 'f_q': report.f_q, 'bound13': report.bound_nk,
                'ratio_paper15': report.ratio_quadratic,
                'ratio_13asymptotic': report.ratio_bound_quadratic,
            })
    return rows


def figure_4(args):
    n_values = args.n_range or range(4, 11)
    if max(n_values) > bell_limit():
        raise SizeLimitError(f"Correlation bounds limited to n <= {bell_limit()}, got {max(n_values)}")
    rows = []
    for k in args.k or [2, 3]:
        for n in n_values:
            if 2 * k > n:
                continue
            row = bell.detection_comparison(state_core.build_rho_nk(n, k))
            rows.append({
                'n': n, 'k': k, 'f_q_over_n': row.f_q_over_n, 'hs_norm_sq': row.hs_norm_sq,
                'verdict': row.verdict, 'xy_plane_sum': row.xy_plane_sum, 'xy_verdict': row.xy_verdict,
            })
    return rows


FIGURES = {2: figure_2, 3: figure_3, 4: figure_4}


def cmd_figure(args):
    rows = FIGURES[args.id](args)
    return sorted(rows, key=_sort_key), False


COMMANDS = {
    'state': cmd_state,
    'qfi': cmd_qfi,
    'ppt': cmd_ppt,
    'bell': cmd_bell,
    'estimate': cmd_estimate,
    'figure': cmd_figure,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--format', choices=('text', 'csv', 'json'), default='text')
    common.add_argument('--output', help='write to this file instead of stdout')
    common.add_argument('--exact', action='store_true', help='print rationals as p/q')
    common.add_argument('--no-timestamp', action='store_true', help='omit the provenance timestamp')
    common.add_argument('--oracle', action='store_true', help='cross-check against dense oracles')
    common.add_argument('--seed', type=int, default=0)
    common.add_argument('--verbose', action='store_true')

    family = argparse.ArgumentParser(add_help=False)
    family.add_argument('--n', type=int)
    family.add_argument('--k', type=int)
    family.add_argument('--m', type=int, default=0)
    family.add_argument('--ghz', action='store_true', help='pure GHZ state instead of rho_{n,k}')

    parser = argparse.ArgumentParser(prog='ghzmetro', description=__doc__)
    sub = parser.add_subparsers(dest='command', required=True)

    state = sub.add_parser('state', parents=[common, family], help='eigenvalue table of a family state')
    state.add_argument('--mixing-range', type=int, nargs=2, metavar=('LO', 'HI'))

    qfi_parser = sub.add_parser('qfi', parents=[common, family], help='quantum Fisher information')
    qfi_parser.add_argument('--a', type=parse_fraction, action='append', help='scaling ratio for k = round(a n)')
    qfi_parser.add_argument('--n-range', type=parse_range)
    qfi_parser.add_argument('--check-bounds', type=int, metavar='N_MAX')
    qfi_parser.add_argument('--c', type=parse_fraction, default=Fraction(1, 4))
    qfi_parser.add_argument('--eps', type=parse_fraction)

    ppt = sub.add_parser('ppt', parents=[common, family], help='partial transpose cuts')
    ppt.add_argument('--cuts', choices=('all',), default='all')
    ppt.add_argument('--qubits', type=lambda s: [int(q) for q in s.split(',')], help='e.g. 1,3')

    bell_parser = sub.add_parser('bell', parents=[common, family], help='correlation tensor bounds')
    bell_parser.add_argument('--tensor', action='store_true', help='list nonzero tensor elements')

    est = sub.add_parser('estimate', parents=[common, family], help='Monte Carlo phase estimation')
    est.add_argument('--theta', type=float, required=True)
    est.add_argument('--shots', type=int, default=10000)
    est.add_argument('--repetitions', type=int, default=200)
    est.add_argument('--model', choices=estimation.MODELS, default=estimation.GLOBAL_PARITY)

    figure = sub.add_parser('figure', parents=[common], help='figure data')
    figure.add_argument('--id', type=int, choices=sorted(FIGURES), required=True)
    figure.add_argument('--n-max', type=int, default=60)
    figure.add_argument('--n', dest='n_range', type=parse_range)
    figure.add_argument('--k', type=int, action='append')
    figure.add_argument('--a', type=parse_fraction, action='append')
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    setup_logging('DEBUG' if args.verbose else None)
    if args.command == 'qfi' and args.n_range is None:
        args.n_range = [args.n] if args.n is not None else None
        if args.a and args.n_range is None:
            args.n_range = range(8, 121)
    meta = provenance('ghzmetro ' + ' '.join(argv), args.seed, timestamp=not args.no_timestamp)
    try:
        result = COMMANDS[args.command](args)
        rows, single = result[:2]
        notes = result[2] if len(result) > 2 else None
        emit(render(rows, args, meta, single, notes), args)
    except GhzMetroError as e:
        logger.error(f"{args.command} failed: {e}")
        if e.rows:
            emit(render(e.rows, args, meta), args)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    return 0


if __name__ == '__main__':
    sys.exit(main())
