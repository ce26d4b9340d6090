import csv
import io
import json
import os
import tempfile
from unittest import TestCase
from unittest.mock import mock_open, patch

import jsonschema
import numpy as np
import pytest

from susy_dfs.constants import CSV_HEADER
from susy_dfs.descriptors import ScenarioError
from susy_dfs.entities import Scenario
from susy_dfs.simulator import (ResultRecord, Simulator, config_hash, emit_scenario, load_scenario,
                                run_scenario)
from tests import bundled_scenarios, load_schema, scenario_document, scenario_path


def _values(result, observable):
    return np.array([r.value for r in result.records if r.observable == observable])


class TestConfigHash(TestCase):
    def test_key_order_does_not_matter(self):
        a = config_hash({'name': 'x', 'seed': 1, 'grid': {'stop': 1.0, 'start': 0.0}})
        b = config_hash({'seed': 1, 'grid': {'start': 0.0, 'stop': 1.0}, 'name': 'x'})
        assert a == b
        assert len(a) == 64
        assert a != config_hash({'name': 'x', 'seed': 2, 'grid': {'stop': 1.0, 'start': 0.0}})


class TestLoadScenario(TestCase):
    def test_bundled_scenarios_load(self):
        for path in bundled_scenarios():
            scenario = load_scenario(path)
            assert scenario.name == os.path.basename(path)[:-len('.json')]

    def test_bundled_scenarios_match_schema(self):
        schema = load_schema('scenario')
        for path in bundled_scenarios():
            with open(path) as open_file:
                jsonschema.validate(json.load(open_file), schema)

    def test_invalid_json(self):
        with patch('builtins.open', mock_open(read_data='{"name": "broken",')):
            self.assertRaises(ScenarioError, load_scenario, 'broken.json')

    def test_not_an_object(self):
        with patch('builtins.open', mock_open(read_data='[1, 2]')):
            self.assertRaises(ScenarioError, load_scenario, 'list.json')

    def test_unknown_field(self):
        document = scenario_document('vacuum')
        document['enigne'] = 'dense'
        with patch('builtins.open', mock_open(read_data=json.dumps(document))):
            with pytest.raises(ScenarioError) as error:
                load_scenario('typo.json')
        assert error.value.field == 'enigne'


class TestEmitScenario(TestCase):
    def test_defaults_are_written(self):
        scenario = load_scenario(scenario_path('singlet_dfs'))
        document = emit_scenario(scenario)
        assert document['fermion_representation'] == 'string_corrected'
        assert document['couplings']['dephasing'][0]['scale'] == 1.0
        assert document['network']['modes'][0]['cutoff'] == 1
        jsonschema.validate(document, load_schema('scenario'))

    def test_round_trip_through_file(self):
        scenario = load_scenario(scenario_path('boson_pair'))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'emitted.json')
            document = emit_scenario(scenario, path)
            reloaded = load_scenario(path)
        assert reloaded.to_dict() == document
        assert config_hash(reloaded.to_dict()) == config_hash(document)


class TestResultRecord(TestCase):
    def test_row_round_trips_floats(self):
        record = ResultRecord('s', 'dense', 0.1, 'coherence', 1 / 3, 'ok', 7, '0.1.0')
        row = record.row()
        assert float(row[2]) == 0.1 and float(row[4]) == 1 / 3
        assert row[6] == '7'
        assert list(record.to_dict()) == list(CSV_HEADER)


class TestSimulator(TestCase):
    def setUp(self):
        self.simulator = Simulator()

    def run_bundled(self, name, workers=1):
        return Simulator(workers).run(load_scenario(scenario_path(name)))

    def test_records_sorted_and_complete(self):
        result = self.run_bundled('boson_network_quasi')
        keys = [(r.scenario, r.time, r.observable) for r in result.records]
        assert keys == sorted(keys)
        assert len(result.records) == 10 * 3
        assert all(r.leakage == 'ok' for r in result.records)
        assert not result.tainted
        assert result.required_cutoff == 2

    def test_quasi_matches_dense(self):
        quasi = self.run_bundled('boson_network_quasi')
        dense = self.run_bundled('boson_network_dense')
        assert [r.engine for r in quasi.records][0] == 'quasi'
        assert [r.engine for r in dense.records][0] == 'dense'
        for a, b in zip(quasi.records, dense.records):
            assert (a.time, a.observable) == (b.time, b.observable)
            assert abs(a.value - b.value) < 1e-9

    def test_coupled_fermions_quasi_matches_dense(self):
        document = {
            'name': 'fermion_chain',
            'network': {'modes': [{'kind': 'fermion'}, {'kind': 'fermion'}, {'kind': 'fermion'}]},
            'couplings': {'fermion': [{'sites': [0, 1, 2],
                                       'matrix': [[1.0, 0.3, 0.0], [0.3, 0.5, 0.2], [0.0, 0.2, 0.8]]}]},
            'initial_state': {'kind': 'amplitudes', 'amplitudes': [{'ket': [1, 1, 0], 'amplitude': 1.0}]},
            'grid': {'stop': 4.0, 'steps': 5},
            'observables': [{'id': 'n0', 'kind': 'number', 'sites': [0]}],
        }
        dense = self.simulator.run(Scenario(dict(document, engine='dense')))
        quasi = self.simulator.run(Scenario(dict(document, engine='quasi')))
        assert not quasi.tainted
        assert np.allclose(_values(quasi, 'n0'), _values(dense, 'n0'), atol=1e-9)
        assert _values(dense, 'n0')[0] == pytest.approx(1.0)
        spin_tensor = Scenario(dict(document, engine='quasi', fermion_representation='spin_tensor'))
        with pytest.raises(ScenarioError) as error:
            self.simulator.run(spin_tensor)
        assert error.value.field == 'fermion_representation'

    def test_rerun_is_byte_identical(self):
        scenario = load_scenario(scenario_path('singlet_dfs'))
        first = Simulator().csv_text(Simulator().run(scenario))
        second = Simulator(workers=4).csv_text(Simulator(workers=4).run(scenario))
        assert first == second
        rows = list(csv.reader(io.StringIO(first)))
        assert tuple(rows[0]) == CSV_HEADER
        assert len(rows) == 1 + 21 * 2

    def test_singlet_is_protected(self):
        result = self.run_bundled('singlet_dfs')
        assert np.allclose(_values(result, 'coherence'), 0.5, atol=1e-9)
        assert np.allclose(_values(result, 'degree_of_coherence'), 1.0, atol=1e-9)

    def test_triplets(self):
        assert np.ptp(_values(self.run_bundled('triplet_z'), 'coherence')) < 1e-9
        assert np.max(np.abs(_values(self.run_bundled('triplet_x'), 'coherence') - 0.5)) > 0.05

    def test_boson_pair_is_dark(self):
        result = self.run_bundled('boson_pair')
        assert np.allclose(_values(result, 'coherence'), 0.5, atol=1e-9)
        assert np.allclose(_values(result, 'environment_number'), 0.0, atol=1e-9)

    def test_vacuum(self):
        result = self.run_bundled('vacuum')
        assert np.allclose(_values(result, 'energy'), 0.0, atol=1e-12)
        assert np.allclose(_values(result, 'number'), 0.0, atol=1e-12)

    def test_susy_qubits(self):
        matched = _values(self.run_bundled('susy_qubit_matched'), 'relative_phase')
        assert np.max(np.abs(matched - matched[0])) < 1e-9
        detuned = _values(self.run_bundled('susy_qubit_detuned'), 'relative_phase')
        assert np.max(np.abs(detuned - detuned[0])) > 0.1

    def test_phase_kick(self):
        result = self.run_bundled('phase_kick_gaussian', workers=2)
        assert len(result.records) == 11 * 3
        coherence = _values(result, 'coherence')
        expected = _values(result, 'expected_coherence')
        error = _values(result, 'standard_error')
        assert coherence[0] == 1.0
        assert np.all(np.abs(coherence - expected) <= 3 * error + 1e-12)
        assert result.required_cutoff is None

    def test_run_all_is_ordered(self):
        scenarios = [load_scenario(scenario_path(name)) for name in ('vacuum', 'boson_pair', 'triplet_z')]
        results = Simulator(workers=3).run_all(scenarios)
        assert [r.scenario.name for r in results] == ['boson_pair', 'triplet_z', 'vacuum']

    def test_sidecar_matches_schema(self):
        schema = load_schema('sidecar')
        for path in bundled_scenarios():
            result = self.simulator.run(load_scenario(path))
            sidecar = result.sidecar()
            jsonschema.validate(sidecar, schema)
            assert sidecar['records'] == len(result.records)
            assert sidecar['config_sha256'] == config_hash(result.scenario.to_dict())

    def test_write_results(self):
        result = self.run_bundled('boson_pair')
        with tempfile.TemporaryDirectory() as tmp:
            csv_path, sidecar_path = self.simulator.write_results(result, os.path.join(tmp, 'out'))
            assert os.path.basename(csv_path) == 'boson_pair.csv'
            with open(csv_path) as open_file:
                assert open_file.read() == self.simulator.csv_text(result)
            with open(sidecar_path) as open_file:
                assert json.load(open_file) == json.loads(json.dumps(result.sidecar()))
            json_path, _ = self.simulator.write_results(result, tmp, 'json')
            with open(json_path) as open_file:
                records = json.load(open_file)
            assert len(records) == len(result.records)
            assert records[0]['observable'] == result.records[0].observable
            self.assertRaises(ValueError, self.simulator.write_results, result, tmp, 'parquet')

    def test_diagonalize(self):
        document = self.simulator.diagonalize(load_scenario(scenario_path('vacuum')))
        assert document['scenario'] == 'vacuum'
        assert document['boson']['sites'] == [0, 1]
        assert document['fermion']['sites'] == [2, 3]
        assert document['boson']['residual'] < 1e-12
        json.dumps(document)

    def test_run_scenario_shortcut(self):
        scenario = Scenario(scenario_document('triplet_z'))
        assert run_scenario(scenario).records == Simulator().run(scenario).records
