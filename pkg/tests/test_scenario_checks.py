import io
import json
import os
import tempfile
from unittest import TestCase
from unittest.mock import patch

from integration_tests import scenario_checks
from susy_dfs.simulator import Simulator
from tests import scenario_document


class TestScenarioChecks(TestCase):
    def setUp(self):
        self.simulator = Simulator()
        self.tmp = tempfile.TemporaryDirectory()
        # the file name differs from the scenario name on purpose
        with open(os.path.join(self.tmp.name, 'renamed.json'), 'w') as open_file:
            json.dump(scenario_document('vacuum'), open_file)

    def tearDown(self):
        self.tmp.cleanup()

    def test_expectations_keyed_by_scenario_name(self):
        expected = scenario_checks.generate_scenarios_expected_output(self.simulator, self.tmp.name)
        assert list(expected) == ['vacuum']
        assert abs(expected['vacuum']['energy']['max']) < 1e-12
        with patch('sys.stdout', new_callable=io.StringIO) as stdout:
            assert scenario_checks.test_all_scenarios(self.simulator, self.tmp.name, expected) == 0
        assert stdout.getvalue().strip() == '1 scenarios checked, 0 mismatches'

    def test_mismatch_is_counted(self):
        expected = scenario_checks.generate_scenarios_expected_output(self.simulator, self.tmp.name)
        expected['vacuum']['energy']['max'] = 1.0
        with patch('sys.stdout', new_callable=io.StringIO):
            assert scenario_checks.test_all_scenarios(self.simulator, self.tmp.name, expected) == 1
            assert scenario_checks.test_all_scenarios(self.simulator, self.tmp.name, {'renamed': {}}) == 1
