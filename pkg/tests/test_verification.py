from unittest import TestCase

import pytest

from susy_dfs.verification import (CheckResult, Report, algebra_suite, dfs_suite, oracle_suite, run_suites,
                                   susy_suite)


class TestCheckResult(TestCase):
    def test_below_threshold(self):
        assert CheckResult('algebra', 'a', 1e-13, 1e-12).passed
        assert not CheckResult('algebra', 'a', 1e-11, 1e-12).passed
        assert CheckResult('algebra', 'a', 1e-11, 1e-12).status == 'FAIL'

    def test_above_threshold(self):
        assert CheckResult('dfs', 'decays', 0.2, 0.05, above=True).passed
        assert not CheckResult('dfs', 'decays', 0.01, 0.05, above=True).passed

    def test_reported_checks_never_fail(self):
        check = CheckResult('susy', 'explore', 3.0, 1e-9, asserted=False, detail='phase drift 0.3')
        assert check.passed
        assert check.status == 'INFO'
        assert 'phase drift 0.3' in str(check)
        assert CheckResult('susy', 'no_bound', 5.0).passed

    def test_str(self):
        line = str(CheckResult('oracle', 'unitarity', 2e-15, 1e-10))
        assert line.startswith('PASS')
        assert 'unitarity' in line and '(< 1.0e-10)' in line


class TestReport(TestCase):
    def test_failures(self):
        report = Report([CheckResult('a', 'ok', 0.0, 1.0), CheckResult('a', 'bad', 2.0, 1.0),
                         CheckResult('a', 'info', 2.0, 1.0, asserted=False)])
        assert not report.passed
        assert [c.name for c in report.failures] == ['bad']
        assert len(list(report)) == 3
        assert report.format_table().splitlines()[-1] == '2 asserted checks, 1 failed, 1 reported'


class TestSuites(TestCase):
    def _assert_passes(self, checks):
        failures = [str(c) for c in checks if not c.passed]
        assert not failures, '\n'.join(failures)

    def test_algebra(self):
        checks = algebra_suite()
        self._assert_passes(checks)
        assert any(not c.asserted for c in checks)

    def test_oracle(self):
        checks = oracle_suite(networks=4)
        self._assert_passes(checks)
        assert {c.name for c in checks} >= {'boson_networks_quasi_vs_dense', 'unitarity',
                                            'susy_qubit_quasi_vs_dense'}

    def test_dfs(self):
        checks = dfs_suite()
        self._assert_passes(checks)
        names = set(c.name for c in checks)
        assert {'singlet_basis_invariance', 'triplet_z_axis_constant', 'triplet_x_axis_decoheres'} <= names
        assert [c for c in checks if c.name == 'triplet_x_axis_decoheres'][0].residual > 0.05
        assert not [c for c in checks if c.name == 'singlet_independent_couplings'][0].asserted

    def test_susy(self):
        checks = susy_suite()
        self._assert_passes(checks)
        names = [c.name for c in checks]
        assert 'nicolai_delta[n=0,string_corrected]' in names
        assert not [c for c in checks if c.name == 'nicolai_delta[n=1,spin_tensor]'][0].asserted

    def test_run_suites(self):
        report = run_suites('algebra', seed=3)
        assert report.passed
        assert {c.suite for c in report} == {'algebra'}
        with pytest.raises(ValueError):
            run_suites('chemistry')
