import os
import sys
import yaml
from argparse import ArgumentParser

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from susy_dfs.simulator import Simulator
from integration_tests.scenario_checks import generate_scenarios_expected_output, test_all_scenarios

BUNDLED = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'susy_dfs', 'scenarios')


def main():
    a = ArgumentParser()
    a.add_argument('--scenario_dir', type=str)
    a.add_argument('--workers', type=int)
    a.add_argument('--config', type=str, required=True)
    a.add_argument('--generate_config', action='store_true')
    args = a.parse_args()

    config = {}
    if os.path.isfile(args.config):
        with open(args.config, 'r') as open_file:
            config = yaml.safe_load(open_file) or {}

    scenario_dir = args.scenario_dir or config.get('run', {}).get('scenario_dir') or BUNDLED
    if not os.path.isdir(scenario_dir):
        print('Scenario directory %s does not exist' % scenario_dir)
        a.print_help()
        return 1
    workers = args.workers or config.get('run', {}).get('workers', 1)

    simulator = Simulator(workers=workers)

    if args.generate_config:
        config['scenarios'] = generate_scenarios_expected_output(simulator, scenario_dir)
        with open(args.config, 'w') as open_file:
            yaml.dump(config, open_file, width=180, indent=4)
    else:
        return 1 if test_all_scenarios(simulator, scenario_dir, config.get('scenarios', {})) else 0


if __name__ == '__main__':
    sys.exit(main())
