"""Command line front end: ``susy-dfs simulate|verify|diagonalize|benchmark|emit``."""
import json
import logging
import sys
from argparse import ArgumentParser

from susy_dfs import __version__
from susy_dfs.evolution import benchmark_engines
from susy_dfs.simulator import Simulator, emit_scenario, load_scenario
from susy_dfs.verification import SUITES, run_suites

logger = logging.getLogger(__name__)


def _simulate(args):
    simulator = Simulator(workers=args.workers)
    result = simulator.run(load_scenario(args.scenario))
    if result.tainted:
        logger.warning('Scenario %s leaked %.3g past the boson cutoff; raise the cutoff to at least %s',
                       result.scenario.name, result.max_leakage, result.required_cutoff)
    if args.out:
        for path in simulator.write_results(result, args.out, args.format):
            print(path)
    elif args.format == 'json':
        json.dump([r.to_dict() for r in result.records], sys.stdout, indent=2)
        sys.stdout.write('\n')
    else:
        simulator.write_csv(result, sys.stdout)
    return 0


def _verify(args):
    report = run_suites(args.suite, seed=args.seed)
    print(report.format_table())
    return 0 if report.passed else 1


def _diagonalize(args):
    document = Simulator().diagonalize(load_scenario(args.scenario))
    json.dump(document, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write('\n')
    return 0


def _benchmark(args):
    print('%8s %10s %14s %14s %14s' % ('modes', 'dimension', 'quasi_s', 'dense_s', 'deviation'))
    for row in benchmark_engines(args.sizes, seed=args.seed, cutoff=args.cutoff):
        dense = '%14.3e' % row.dense_seconds if row.dense_seconds is not None else '%14s' % 'skipped'
        deviation = '%14.3e' % row.max_deviation if row.max_deviation is not None else '%14s' % '-'
        print('%8s %10s %14.3e %s %s' % (row.n_modes, row.total_dim, row.quasi_seconds, dense, deviation))
    return 0


def _emit(args):
    document = emit_scenario(load_scenario(args.scenario), args.out)
    if not args.out:
        json.dump(document, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write('\n')
    return 0


def build_parser():
    a = ArgumentParser(prog='susy-dfs', description='Oscillator-network decoherence-free subspace simulations')
    a.add_argument('--version', action='version', version='%(prog)s ' + (__version__ or 'unknown'))
    a.add_argument('-v', '--verbose', action='store_true', help='log progress at INFO level')
    a.add_argument('--debug', action='store_true', help='log at DEBUG level')
    subparsers = a.add_subparsers(dest='command')
    subparsers.required = True

    simulate = subparsers.add_parser('simulate', help='run a scenario file')
    simulate.add_argument('scenario', type=str)
    simulate.add_argument('--out', type=str, help='directory for the results and the .meta.json sidecar')
    simulate.add_argument('--format', choices=('csv', 'json'), default='csv')
    simulate.add_argument('--workers', type=int, default=1)
    simulate.set_defaults(func=_simulate)

    verify = subparsers.add_parser('verify', help='run the verification suites')
    verify.add_argument('--suite', choices=SUITES + ('all',), default='all')
    verify.add_argument('--seed', type=int, default=0)
    verify.set_defaults(func=_verify)

    diagonalize = subparsers.add_parser('diagonalize', help='print U and Omega of every sector as JSON')
    diagonalize.add_argument('scenario', type=str)
    diagonalize.set_defaults(func=_diagonalize)

    benchmark = subparsers.add_parser('benchmark', help='time the quasi and dense engines')
    benchmark.add_argument('--sizes', type=int, nargs='+', default=[2, 4, 6, 8, 10, 12])
    benchmark.add_argument('--seed', type=int, default=0)
    benchmark.add_argument('--cutoff', type=int, default=1)
    benchmark.set_defaults(func=_benchmark)

    emit = subparsers.add_parser('emit', help='print a scenario with every default filled in')
    emit.add_argument('scenario', type=str)
    emit.add_argument('--out', type=str, help='write to this file instead of stdout')
    emit.set_defaults(func=_emit)
    return a


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.debug else logging.INFO if args.verbose else logging.WARNING
    logging.basicConfig(level=level, format='%(asctime)s %(name)s %(levelname)s: %(message)s')
    try:
        return args.func(args)
    except (ValueError, TypeError, OSError) as e:
        print('susy-dfs %s: %s' % (args.command, e), file=sys.stderr)
        return 2


if __name__ == '__main__':
    sys.exit(main())
