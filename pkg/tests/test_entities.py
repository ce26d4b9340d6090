import copy
from unittest import TestCase
from unittest.mock import patch

import numpy as np
import pytest

from susy_dfs.constants import DENSE_GUARD_ENV
from susy_dfs.descriptors import ScenarioError
from susy_dfs.entities import (Couplings, CouplingBlock, DephasingLinks, Grid, InitialState, Mode, Network,
                               Observable, Scenario)
from susy_dfs.fock import FermionRepresentation, ModeKind, ModeSpec, NetworkSpec, PauliAxis
from susy_dfs.metrics import CoherenceObservable, ExpectationObservable, RelativePhaseObservable

BOSON_FERMION = {'modes': [{'kind': 'boson', 'cutoff': 2}, {'kind': 'boson', 'cutoff': 2},
                           {'kind': 'fermion'}, {'kind': 'fermion'}]}


def _document(**overrides):
    document = {
        'name': 'test',
        'network': copy.deepcopy(BOSON_FERMION),
        'couplings': {'boson': [{'sites': [0, 1], 'matrix': [[1.0, 0.2], [0.2, 0.5]]}]},
        'initial_state': {'kind': 'susy_qubit', 'sites': [0, 2]},
        'grid': {'stop': 2.0, 'steps': 3},
        'observables': [{'id': 'phase', 'kind': 'relative_phase', 'sites': [0, 2], 'ket_a': [0, 1],
                         'ket_b': [1, 0]}],
    }
    document.update(overrides)
    return document


def _raises_at(field, callable_, *args):
    with pytest.raises(ScenarioError) as error:
        callable_(*args)
    assert error.value.field == field, str(error.value)


class TestEntity(TestCase):
    def test_unknown_field(self):
        _raises_at('bogus', Scenario, _document(bogus=1))
        _raises_at('network.modes[0].colour', lambda: Scenario(_document(network={'modes': [
            {'kind': 'boson', 'colour': 'red'}]})).network.modes)

    def test_defaults_are_filled(self):
        scenario = Scenario(_document())
        assert scenario.engine == 'dense'
        assert scenario.seed == 0
        assert scenario.schema_version == 1
        assert scenario.fermion_representation is FermionRepresentation.STRING_CORRECTED
        document = scenario.validate().to_dict()
        assert document['grid'] == {'start': 0.0, 'stop': 2.0, 'steps': 3}
        assert document['initial_state']['sign'] == 'plus'

    def test_create(self):
        mode = Mode.create(kind='boson', cutoff=3)
        assert mode.mode_spec() == ModeSpec.boson(3)
        assert mode.root == {'kind': 'boson', 'cutoff': 3}
        self.assertRaises(TypeError, Mode.create, colour='red')

    def test_create_nested(self):
        scenario = Scenario.create(name='vacuum', network=Network.create(modes=[Mode.create(kind='boson')]),
                                   grid=Grid.create(stop=1.0, steps=3))
        scenario.validate()
        assert scenario.network.spec() == NetworkSpec.bosons(1, 1)
        assert len(scenario.grid.time_grid()) == 3

    def test_equality_and_to_dict(self):
        a = Scenario(_document())
        b = Scenario(_document())
        assert a == b
        b.seed = 3
        assert a != b
        copied = a.to_dict()
        copied['name'] = 'other'
        assert a.name == 'test'

    def test_repr(self):
        assert repr(Scenario(_document())) == 'Scenario(<root>)'
        assert repr(Scenario(_document()).grid) == 'Grid(grid)'


class TestNetwork(TestCase):
    def test_spec(self):
        spec = Network(copy.deepcopy(BOSON_FERMION)).spec()
        assert spec.dims == (3, 3, 2, 2)

    def test_errors(self):
        _raises_at('network.modes', Network({'modes': []}, 'network').spec)
        _raises_at('modes[0].kind', Network({'modes': [{'kind': 'anyon'}]}).spec)
        _raises_at('modes[0].cutoff', Network({'modes': [{'kind': 'boson', 'cutoff': 0}]}).spec)


class TestCouplings(TestCase):
    def setUp(self):
        self.spec = Network(copy.deepcopy(BOSON_FERMION)).spec()

    def test_block_needs_matrix_or_random(self):
        _raises_at('block', CouplingBlock({'sites': [0, 1]}, 'block').coupling, 0)
        _raises_at('block', CouplingBlock({'sites': [0], 'matrix': [[1]], 'random': True}, 'block').coupling, 0)

    def test_block_matrix_errors(self):
        block = CouplingBlock({'sites': [0, 1], 'matrix': [[1, 2], [3, 4]]}, 'block')
        _raises_at('block.matrix', block.coupling, 0)

    def test_random_block_is_seeded(self):
        block = CouplingBlock({'sites': [2, 3], 'random': True, 'scale': 0.5})
        assert block.coupling(4) == block.coupling(4)
        assert block.coupling(4).sites == (2, 3)

    def test_sites_checked(self):
        couplings = Couplings({'boson': [{'sites': [0, 2], 'random': True}]}, 'couplings')
        _raises_at('couplings.boson[0].sites[1]', couplings.blocks, self.spec, 0)
        couplings = Couplings({'fermion': [{'sites': [2, 7], 'random': True}]}, 'couplings')
        _raises_at('couplings.fermion[0].sites[1]', couplings.blocks, self.spec, 0)

    def test_sector_couplings_merge_blocks(self):
        couplings = Couplings({'boson': [{'sites': [0, 1], 'matrix': [[1.0, 0.5], [0.5, 0.0]]},
                                         {'sites': [1], 'matrix': [[2.0]]}],
                               'fermion': [{'sites': [3], 'matrix': [[0.7]]}]})
        boson, fermion = couplings.sector_couplings(self.spec, 0)
        assert boson.sites == (0, 1)
        assert np.allclose(boson.matrix, [[1.0, 0.5], [0.5, 2.0]])
        assert fermion.sites == (3,)
        assert np.allclose(fermion.matrix, [[0.7]])

    def test_spin_form_is_not_quadratic(self):
        couplings = Couplings({'fermion': [{'sites': [2, 3], 'matrix': [[0, 1], [1, 0]], 'form': 'spin'}]})
        assert not couplings.is_quadratic_ladder()
        self.assertRaises(ScenarioError, couplings.sector_couplings, self.spec, 0)
        assert couplings.hamiltonian(self.spec, 0).sites() == [2, 3]

    def test_boson_spin_form_rejected(self):
        couplings = Couplings({'boson': [{'sites': [0, 1], 'random': True, 'form': 'spin'}]}, 'couplings')
        _raises_at('couplings.boson[0].form', couplings.blocks, self.spec, 0)

    def test_mixed_links(self):
        couplings = Couplings({'mixed': [{'boson': 0, 'fermion': 2, 'weight': [0.5, 0.5]}]}, 'couplings')
        assert couplings.hamiltonian(self.spec, 0).sites() == [0, 2]
        wrong = Couplings({'mixed': [{'boson': 2, 'fermion': 3}]}, 'couplings')
        _raises_at('couplings.mixed[0].boson', wrong.hamiltonian, self.spec, 0)


class TestDephasingLinks(TestCase):
    def test_collective_weights_are_tiled(self):
        links = DephasingLinks({'system': [0, 1], 'environment': [2, 3], 'weights': [1.0, 0.5]})
        couplings, axes = links.links(0)
        assert couplings == {(0, 2): 1.0, (0, 3): 0.5, (1, 2): 1.0, (1, 3): 0.5}
        assert axes == {2: PauliAxis.Z, 3: PauliAxis.Z}

    def test_per_system_weights(self):
        links = DephasingLinks({'system': [0, 1], 'environment': [2], 'weights': [[1.0], [0.3]], 'axis': ['x']})
        couplings, axes = links.links(0)
        assert couplings == {(0, 2): 1.0, (1, 2): 0.3}
        assert axes == {2: PauliAxis.X}

    def test_random(self):
        links = DephasingLinks({'system': [0, 1], 'environment': [2, 3], 'random': True, 'axis': 'random'})
        couplings, axes = links.links(5)
        assert couplings[(0, 2)] == couplings[(1, 2)]
        assert (couplings, axes) == links.links(5)
        fixed = DephasingLinks({'system': [0, 1], 'environment': [2], 'weights': [1.0], 'axis': 'random'})
        assert set(fixed.links(5)[1]) == {2}

    def test_errors(self):
        _raises_at('d.weights', DephasingLinks({'system': [0], 'environment': [1]}, 'd').links, 0)
        _raises_at('d.weights', DephasingLinks({'system': [0], 'environment': [1, 2], 'weights': [1.0]},
                                               'd').links, 0)
        _raises_at('d', DephasingLinks({'system': [0], 'environment': [1], 'weights': [1.0], 'random': True},
                                       'd').links, 0)
        _raises_at('d.axis', DephasingLinks({'system': [0], 'environment': [1, 2], 'weights': [1.0, 1.0],
                                             'axis': ['x']}, 'd').links, 0)
        _raises_at('d.axis', DephasingLinks({'system': [0], 'environment': [1], 'weights': [1.0], 'axis': 'w'},
                                            'd').links, 0)


class TestInitialState(TestCase):
    def setUp(self):
        self.spec = Network(copy.deepcopy(BOSON_FERMION)).spec()

    def test_kinds(self):
        assert InitialState({}).state(self.spec).amplitude((0, 0, 0, 0)) == 1
        singlet = InitialState({'kind': 'singlet', 'sites': [2, 3]}).state(self.spec)
        assert abs(singlet.amplitude((0, 0, 1, 0)) + np.sqrt(0.5)) < 1e-12
        qubit = InitialState({'kind': 'susy_qubit', 'sites': [1, 3], 'sign': 'minus'}).state(self.spec)
        assert abs(qubit.amplitude((0, 1, 0, 0)) + np.sqrt(0.5)) < 1e-12
        pair = InitialState({'kind': 'boson_pair', 'sites': [0, 1], 'occupations': [0, 2]}).state(self.spec)
        assert abs(pair.amplitude((2, 0, 0, 0)) - np.sqrt(0.5)) < 1e-12

    def test_amplitudes(self):
        state = InitialState({'kind': 'amplitudes', 'amplitudes': [
            {'ket': [1, 0, 0, 0], 'amplitude': 0.6}, {'ket': [0, 0, 0, 1], 'amplitude': [0, 0.8]}]}).state(self.spec)
        assert state.amplitude((0, 0, 0, 1)) == 0.8j
        unnormalized = InitialState({'kind': 'amplitudes', 'amplitudes': [
            {'ket': [1, 0, 0, 0], 'amplitude': 2}]}, 'initial_state')
        _raises_at('initial_state', unnormalized.state, self.spec)
        unnormalized.normalize = True
        assert unnormalized.state(self.spec).is_normalized()

    def test_bad_ket(self):
        state = InitialState({'kind': 'amplitudes', 'amplitudes': [{'ket': [3, 0, 0, 0], 'amplitude': 1}]},
                             'initial_state')
        _raises_at('initial_state.amplitudes[0].ket', state.state, self.spec)

    def test_wrong_site_kinds(self):
        _raises_at('s.sites[0]', InitialState({'kind': 'singlet', 'sites': [0, 2]}, 's').state, self.spec)
        _raises_at('s.sites', InitialState({'kind': 'triplet', 'sites': [2]}, 's').state, self.spec)
        _raises_at('s.sites[1]', InitialState({'kind': 'susy_qubit', 'sites': [0, 1]}, 's').state, self.spec)

    def test_background_and_rotation(self):
        state = InitialState({'background': [{'site': 2, 'amplitudes': [0.6, 0.8]}],
                              'rotation': [[0, 1], [1, 0]]}).state(self.spec)
        assert abs(state.amplitude((0, 0, 1, 1)) - 0.6) < 1e-12
        _raises_at('s.background[0].site', InitialState({'background': [{'site': 9, 'amplitudes': [1]}]}, 's')
                   .state, self.spec)


class TestObservable(TestCase):
    def setUp(self):
        self.spec = Network(copy.deepcopy(BOSON_FERMION)).spec()
        self.rep = FermionRepresentation.STRING_CORRECTED

    def _observable(self, **document):
        return Observable(dict(document, id='o'), 'observables[0]').observable(self.spec, None, self.rep)

    def test_kinds(self):
        pair = {'sites': [0, 2], 'ket_a': [0, 1], 'ket_b': [1, 0]}
        assert isinstance(self._observable(kind='coherence', **pair), CoherenceObservable)
        assert self._observable(kind='degree_of_coherence', **pair).normalized
        assert isinstance(self._observable(kind='relative_phase', **pair), RelativePhaseObservable)
        number = self._observable(kind='number', sites=[0, 1])
        assert isinstance(number, ExpectationObservable)
        assert number.name == 'o'

    def test_expectation_terms(self):
        observable = self._observable(kind='expectation', terms=[{'weight': 0.5, 'factors': [[2, 'z']]},
                                                                 {'factors': [[0, 'create'], [0, 'annihilate']]}])
        assert observable.expression.sites() == [0, 2]

    def test_errors(self):
        with pytest.raises(ScenarioError) as error:
            self._observable(kind='coherence', sites=[0, 2], ket_a=[0, 1])
        assert error.value.field == 'observables[0].ket_b'
        with pytest.raises(ScenarioError) as error:
            self._observable(kind='expectation', terms=[{'factors': [[0, 'x']]}])
        assert error.value.field == 'observables[0].terms[0].factors[0]'
        with pytest.raises(ScenarioError) as error:
            self._observable(kind='expectation', terms=[{'factors': [[2, 'spin']]}])
        assert error.value.field == 'observables[0].terms[0].factors[0]'
        with pytest.raises(ScenarioError) as error:
            self._observable(kind='expectation')
        assert error.value.field == 'observables[0].terms'


class TestScenarioValidate(TestCase):
    def test_valid(self):
        scenario = Scenario(_document())
        assert scenario.validate() is scenario

    def test_schema_version(self):
        _raises_at('schema_version', Scenario(_document(schema_version=2)).validate)

    def test_missing_name(self):
        document = _document()
        del document['name']
        _raises_at('name', Scenario(document).validate)

    def test_duplicate_ids(self):
        document = _document()
        document['observables'].append(dict(document['observables'][0]))
        _raises_at('observables[1].id', Scenario(document).validate)

    @patch.dict('os.environ', {DENSE_GUARD_ENV: '8'})
    def test_dense_guard(self):
        _raises_at('engine', Scenario(_document()).validate)

    def test_quasi_needs_quadratic_couplings(self):
        document = _document(engine='quasi')
        Scenario(copy.deepcopy(document)).validate()
        document['couplings']['mixed'] = [{'boson': 0, 'fermion': 2}]
        _raises_at('engine', Scenario(document).validate)

    def test_phase_kick(self):
        _raises_at('phase_kick', Scenario(_document(engine='phase_kick')).validate)
        _raises_at('phase_kick', Scenario(_document(engine='phase_kick', phase_kick={'alpha': 1.0})).validate)
        scenario = Scenario(_document(engine='phase_kick', phase_kick={'alpha': 1.0, 'beta': 0.0}))
        assert scenario.validate().phase_kick.samples == 10000

    def test_unknown_fields_in_unused_blocks(self):
        _raises_at('phase_kick.sampels', Scenario(_document(phase_kick={'sampels': 5})).validate)
        document = _document(initial_state={'kind': 'vacuum', 'amplitudes': [
            {'ket': [0, 0, 0, 0], 'amplitude': 1.0, 'bogus': 1}]})
        _raises_at('initial_state.amplitudes[0].bogus', Scenario(document).validate)
        document = _document()
        document['observables'][0]['terms'] = [{'weight': 1.0, 'factor': []}]
        _raises_at('observables[0].terms[0].factor', Scenario(document).validate)

    def test_quasi_refuses_coupled_spin_tensor_fermions(self):
        document = _document(engine='quasi', fermion_representation='spin_tensor')
        document['couplings']['fermion'] = [{'sites': [2, 3], 'matrix': [[1.0, 0.3], [0.3, 0.5]]}]
        _raises_at('fermion_representation', Scenario(copy.deepcopy(document)).validate)
        # uncoupled fermion modes need no anticommutation signs
        document['couplings']['fermion'] = [{'sites': [2, 3], 'matrix': [[1.0, 0.0], [0.0, 0.5]]}]
        Scenario(copy.deepcopy(document)).validate()
        document['fermion_representation'] = 'string_corrected'
        document['couplings']['fermion'][0]['matrix'] = [[1.0, 0.3], [0.3, 0.5]]
        Scenario(document).validate()

    def test_grid_errors(self):
        _raises_at('grid', Scenario(_document(grid={'times': [2.0, 1.0]})).validate)
        _raises_at('grid.steps', Scenario(_document(grid={'steps': 0})).validate)
        _raises_at('grid.stop', Scenario(_document(grid={'times': [0.0, 1.0], 'stop': 2.0})).validate)

    def test_grid_times(self):
        scenario = Scenario(_document(grid={'times': [0.0, 0.5, 2.0]})).validate()
        assert scenario.to_dict()['grid'] == {'times': [0.0, 0.5, 2.0]}
        assert list(scenario.grid.time_grid().times) == [0.0, 0.5, 2.0]
        assert Grid.create(times=[0.0, 1.0]).root == {'times': [0.0, 1.0]}

    def test_scenario_mode_kinds(self):
        assert [m.kind for m in Scenario(_document()).network.modes] == [ModeKind.BOSON, ModeKind.BOSON,
                                                                         ModeKind.FERMION, ModeKind.FERMION]
