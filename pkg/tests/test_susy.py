from unittest import TestCase

import numpy as np
import pytest

from susy_dfs.evolution import TimeGrid
from susy_dfs.fock import FermionRepresentation, StateVector, operator_matrix
from susy_dfs.hamiltonians import CouplingMatrix
from susy_dfs.susy import (QubitSign, SusyNetworkSpec, SusyQubit, build_dfs_state, build_supercharge,
                           explore_susy_dfs, free_susy_hamiltonian, sector_couplings, susy_algebra_delta,
                           susy_hamiltonian, susy_qubit_evolution, verify_susy_algebra)
from tests import max_abs

SC = FermionRepresentation.STRING_CORRECTED
ST = FermionRepresentation.SPIN_TENSOR
MATCHED = CouplingMatrix([[1.0, 0.35], [0.35, 0.6]])


class TestSusyNetworkSpec(TestCase):
    def test_layout(self):
        spec = SusyNetworkSpec(3, boson_cutoff=2)
        assert spec.boson_sites == (0, 1, 2)
        assert spec.fermion_sites == (3, 4, 5)
        assert spec.fermion_site(4) == 4
        assert spec.network.dims == (3, 3, 3, 2, 2, 2)

    def test_validation(self):
        self.assertRaises(ValueError, SusyNetworkSpec, 0)
        self.assertRaises(ValueError, SusyNetworkSpec, 2, boson_cutoff=0)
        assert SusyNetworkSpec(2, pairing_offset=3).pairing_offset == 1

    def test_protected_columns(self):
        spec = SusyNetworkSpec(1, boson_cutoff=2)
        table = spec.network.occupation_table
        assert all(table[r, 0] <= 1 for r in spec.protected_columns())
        assert len(spec.protected_columns()) == 4


class TestSupercharge(TestCase):
    def setUp(self):
        self.spec = SusyNetworkSpec(1)
        self.network = self.spec.network
        self.q = operator_matrix(self.network, build_supercharge(self.spec))
        self.h = operator_matrix(self.network, susy_hamiltonian(build_supercharge(self.spec)))

    def ket(self, b, f):
        return StateVector.basis_ket(self.network, (b, f)).amplitudes

    def test_exact_actions(self):
        assert max_abs(self.q @ self.ket(0, 1) - self.ket(1, 0)) < 1e-12
        assert max_abs(self.q @ self.ket(1, 0) - self.ket(0, 1)) < 1e-12
        assert max_abs(self.q @ self.ket(0, 0)) < 1e-12

    def test_energies(self):
        assert max_abs(self.h @ self.ket(0, 1) - self.ket(0, 1)) < 1e-12
        assert max_abs(self.h @ self.ket(1, 0) - self.ket(1, 0)) < 1e-12
        assert max_abs(self.h @ self.ket(0, 0)) < 1e-12

    def test_commutes(self):
        assert max_abs(self.q @ self.h - self.h @ self.q) < 1e-12

    def test_qubits_are_q_eigenstates(self):
        for sign in QubitSign:
            state = build_dfs_state(SusyQubit(sign, 0, 1), self.spec).amplitudes
            assert max_abs(self.q @ state - sign.factor * state) < 1e-12

    def test_free_hamiltonian_equals_q_squared(self):
        free = operator_matrix(self.network, free_susy_hamiltonian(self.spec))
        assert abs(free[0, 0]) < 1e-12
        columns = self.spec.protected_columns()
        assert max_abs((free - self.h)[:, columns]) < 1e-12

    def test_weights(self):
        spec = SusyNetworkSpec(2)
        self.assertRaises(ValueError, build_supercharge, spec, 0, [1.0])
        q = build_supercharge(spec, 0, [1.0, 0.0])
        assert q.sites() == [0, 2]


class TestNicolai(TestCase):
    def test_offset_zero_string_corrected(self):
        assert susy_algebra_delta(SusyNetworkSpec(2), 0) < 1e-10

    def test_weighted(self):
        assert susy_algebra_delta(SusyNetworkSpec(2), 0, weights=[0.5, 1.0 + 1.0j]) < 1e-10

    def test_table(self):
        rows = verify_susy_algebra(SusyNetworkSpec(2), offsets=(0, 1), workers=2)
        assert [(r.offset, r.rep) for r in rows] == [(0, SC), (0, ST), (1, SC), (1, ST)]
        asserted = [r for r in rows if r.asserted]
        assert len(asserted) == 1 and asserted[0].passed
        assert all(r.passed for r in rows)


class TestSusyQubit(TestCase):
    def setUp(self):
        self.spec = SusyNetworkSpec(2, matched_spectrum=True)
        self.grid = TimeGrid.linspace(0, 10, 20)

    def test_check(self):
        network = self.spec.network
        self.assertRaises(ValueError, SusyQubit(QubitSign.PLUS, 2, 0).check, network)
        self.assertRaises(ValueError, SusyQubit(QubitSign.PLUS, 0, 5).check, network)
        assert SusyQubit('minus').sign is QubitSign.MINUS

    def test_matched_is_stationary(self):
        for sign in QubitSign:
            evolution = susy_qubit_evolution(SusyQubit(sign, 0, 2), self.spec, MATCHED, grid=self.grid,
                                             dense_check=True)
            assert evolution.phase_drift < 1e-9
            assert evolution.coherence_spread < 1e-9
            assert evolution.oracle_deviation < 1e-9
            assert np.ptp(evolution.coherence) > 1e-3

    def test_detuned_drifts(self):
        evolution = susy_qubit_evolution(SusyQubit(QubitSign.PLUS, 0, 2), self.spec, MATCHED, MATCHED.shifted(0.2),
                                         grid=self.grid)
        assert evolution.phase_drift > 0.1

    def test_needs_environment_pair(self):
        self.assertRaises(ValueError, susy_qubit_evolution, SusyQubit(), SusyNetworkSpec(1, matched_spectrum=True),
                          CouplingMatrix([[1.0]]))

    def test_sector_couplings(self):
        boson, fermion = sector_couplings(self.spec, MATCHED)
        assert boson.sites == (0, 1) and fermion.sites == (2, 3)
        assert np.array_equal(boson.matrix, fermion.matrix)
        self.assertRaises(ValueError, sector_couplings, SusyNetworkSpec(2), MATCHED)
        self.assertRaises(ValueError, sector_couplings, self.spec, CouplingMatrix([[1.0]]))


def test_explore_reports_findings():
    findings = explore_susy_dfs(0, grid=TimeGrid.linspace(0, 5, 6))
    assert [f['sign'] for f in findings] == ['plus', 'minus']
    for finding in findings:
        assert finding['seed'] == 0
        assert finding['coherence_spread'] >= 0
        assert set(finding) == {'seed', 'sign', 'coherence_spread', 'phase_drift'}


@pytest.mark.parametrize('n_pairs', [1, 2, 3])
def test_offset_zero_holds_for_any_size(n_pairs):
    assert susy_algebra_delta(SusyNetworkSpec(n_pairs, boson_cutoff=1), 0) < 1e-10
