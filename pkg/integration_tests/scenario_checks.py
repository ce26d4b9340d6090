import glob
import os

from susy_dfs.simulator import load_scenario

SUMMARY_TOLERANCE = 1e-9


def _summary(values):
    return {
        'first': float(values[0]),
        'last': float(values[-1]),
        'min': float(min(values)),
        'max': float(max(values)),
    }


def _observable_values(result):
    values = {}
    for record in result.records:
        values.setdefault(record.observable, []).append(record.value)
    return values


class ScenarioCheck:
    """Run one scenario and compare each observable's summary with the stored expectation."""

    def __init__(self, simulator, scenario, expected):
        self.scenario = scenario
        self.result = simulator.run(self.scenario)
        self.expected = expected

    def summaries(self):
        return dict((name, _summary(values)) for name, values in _observable_values(self.result).items())

    def test_observables(self):
        failures = 0
        observed = self.summaries()
        for name in sorted(set(self.expected) | set(observed)):
            if name not in observed or name not in self.expected:
                print('In testing %s observable %s is only on one side' % (self.scenario.name, name))
                failures += 1
                continue
            for key, exp in self.expected[name].items():
                obs = observed[name][key]
                if abs(exp - obs) > SUMMARY_TOLERANCE * max(1.0, abs(exp)):
                    print('In testing %s comparing %s of %s expected and observed' % (self.scenario.name, key, name))
                    print('exp: ' + repr(exp))
                    print('obs: ' + repr(obs))
                    failures += 1
        if self.result.tainted:
            print('%s is tainted: leakage %.3g' % (self.scenario.name, self.result.max_leakage))
            failures += 1
        return failures


def scenario_files(scenario_dir):
    return sorted(glob.glob(os.path.join(scenario_dir, '*.json')))


def generate_scenarios_expected_output(simulator, scenario_dir):
    expected_values = {}
    for path in scenario_files(scenario_dir):
        check = ScenarioCheck(simulator, load_scenario(path), {})
        expected_values[check.scenario.name] = check.summaries()
    return expected_values


def test_all_scenarios(simulator, scenario_dir, scenarios_config):
    failures = 0
    for path in scenario_files(scenario_dir):
        scenario = load_scenario(path)
        if scenario.name not in scenarios_config:
            print('No expected values for %s; run with --generate_config' % scenario.name)
            failures += 1
            continue
        failures += ScenarioCheck(simulator, scenario, scenarios_config[scenario.name]).test_observables()
    print('%s scenarios checked, %s mismatches' % (len(scenario_files(scenario_dir)), failures))
    return failures
