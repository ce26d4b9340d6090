"""The simulator interface: load scenarios, run them through an engine and write the results."""
import csv
import hashlib
import io
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from susy_dfs import __version__
from susy_dfs.constants import (CSV_HEADER, LEAKAGE_TOLERANCE, PRNG_ALGORITHM, SCHEMA_VERSION, dense_guard)
from susy_dfs.descriptors import ScenarioError
from susy_dfs.entities import Scenario
from susy_dfs.evolution import DenseEngine, QuasiEngine, evolve_observable, phase_kick_ensemble
from susy_dfs.quasiparticle import block_diagonalize, required_cutoff

logger = logging.getLogger(__name__)

__all__ = ['ResultRecord', 'RunResult', 'Simulator', 'config_hash', 'emit_scenario', 'load_scenario',
           'run_scenario']


def config_hash(document):
    """sha256 of the canonical JSON form of a scenario document."""
    normalized = json.dumps(document, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(normalized).hexdigest()


def load_scenario(path):
    """Read and fully validate a scenario file.

    :param path: path to a scenario JSON document.
    :raises ScenarioError: naming the offending field on parse, schema or reference errors.
    """
    with open(path, 'r') as open_file:
        text = open_file.read()
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(None, "invalid JSON in %s at line %s column %s: %s" % (path, e.lineno, e.colno, e.msg))
    if not isinstance(document, dict):
        raise ScenarioError(None, "a scenario must be a JSON object, got %s" % type(document).__name__)
    scenario = Scenario(document).validate()
    logger.info('Loaded scenario %s from %s', scenario.name, path)
    return scenario


def emit_scenario(scenario, path=None):
    """Return the scenario document with every default filled in, optionally writing it to ``path``."""
    document = scenario.validate().to_dict()
    if path:
        with open(path, 'w') as open_file:
            json.dump(document, open_file, indent=2, sort_keys=True)
            open_file.write('\n')
    return document


@dataclass(frozen=True)
class ResultRecord:
    scenario: str
    engine: str
    time: float
    observable: str
    value: float
    leakage: str
    seed: int
    version: str

    def row(self):
        """CSV cells; floats are written with ``repr`` so that they round-trip exactly."""
        return [self.scenario, self.engine, repr(float(self.time)), self.observable, repr(float(self.value)),
                self.leakage, str(self.seed), self.version]

    def to_dict(self):
        return dict(zip(CSV_HEADER, (self.scenario, self.engine, float(self.time), self.observable,
                                     float(self.value), self.leakage, self.seed, self.version)))


@dataclass(frozen=True)
class RunResult:
    scenario: Scenario
    records: tuple
    tainted: bool
    max_leakage: float
    required_cutoff: int = None

    def sidecar(self):
        """Run metadata; contains nothing that changes between identical runs."""
        return {
            'schema_version': SCHEMA_VERSION,
            'scenario': self.scenario.name,
            'engine': self.scenario.engine,
            'version': __version__,
            'config_sha256': config_hash(self.scenario.to_dict()),
            'seed': self.scenario.seed,
            'prng': PRNG_ALGORITHM,
            'fermion_representation': self.scenario.fermion_representation.value,
            'tainted': self.tainted,
            'max_leakage': self.max_leakage,
            'required_cutoff': self.required_cutoff,
            'dense_guard': dense_guard(),
            'records': len(self.records),
            'csv_header': list(CSV_HEADER),
        }


class Simulator(object):
    """
    Interface through which scenarios are run and their results written.

    :param workers: grid points (and phase-kick chunks) evaluated concurrently; results do not depend on it.

    Example: ::

        simulator = Simulator()
        result = simulator.run(load_scenario('singlet_dfs.json'))
        simulator.write_results(result, 'out')

    """

    def __init__(self, workers=1):
        self.workers = workers

    def _record(self, scenario, engine, time, observable, value, leakage=0.0):
        return ResultRecord(scenario.name, engine, float(time), observable, float(value),
                            'tainted' if leakage > LEAKAGE_TOLERANCE else 'ok', scenario.seed, __version__)

    def run(self, scenario):
        """Run a validated scenario and return its records sorted by (scenario, time, observable)."""
        scenario.validate()
        logger.info('Running scenario %s with the %s engine', scenario.name, scenario.engine)
        if scenario.engine == 'phase_kick':
            return self._run_phase_kick(scenario)
        spec = scenario.network.spec()
        rep = scenario.fermion_representation
        hamiltonian = scenario.couplings.hamiltonian(spec, scenario.seed)
        state = scenario.initial_state.state(spec)
        grid = scenario.grid.time_grid()
        observables = [o.observable(spec, hamiltonian, rep) for o in scenario.observables]
        cutoff = None
        if scenario.engine == 'quasi':
            basis = block_diagonalize(*scenario.couplings.sector_couplings(spec, scenario.seed))
            engine = QuasiEngine(basis, hamiltonian, rep, strict=False, general=True)
            cutoff = required_cutoff(state, basis, rep=rep)
        else:
            engine = DenseEngine(spec, hamiltonian, rep)
        logger.info('Network %s, dimension %s', spec, spec.total_dim)
        series = evolve_observable(state, engine, grid, observables, rep, self.workers)
        records = [self._record(scenario, r.engine, r.time, r.observable, r.value, r.leakage) for r in series.records]
        records.sort(key=lambda r: (r.scenario, r.time, r.observable))
        return RunResult(scenario, tuple(records), series.tainted, series.max_leakage, cutoff)

    def _run_phase_kick(self, scenario):
        settings = scenario.phase_kick
        model = settings.model(scenario.seed)
        grid = scenario.grid.time_grid()
        ensemble = phase_kick_ensemble((settings.alpha, settings.beta), model, grid, settings.samples,
                                       self.workers, settings.chunk_size)
        records = []
        for t, measured, error in zip(ensemble.times, ensemble.coherence, ensemble.standard_error):
            records.append(self._record(scenario, 'phase_kick', t, 'coherence', measured))
            records.append(self._record(scenario, 'phase_kick', t, 'expected_coherence', model.expected_coherence(t)))
            records.append(self._record(scenario, 'phase_kick', t, 'standard_error', error))
        records.sort(key=lambda r: (r.scenario, r.time, r.observable))
        return RunResult(scenario, tuple(records), False, 0.0, None)

    def run_all(self, scenarios):
        """Run independent scenarios concurrently; results come back ordered by scenario name."""
        with ThreadPoolExecutor(max_workers=max(1, self.workers)) as executor:
            results = list(executor.map(self.run, scenarios))
        return sorted(results, key=lambda r: r.scenario.name)

    def write_csv(self, result, stream):
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(CSV_HEADER)
        for record in result.records:
            writer.writerow(record.row())

    def csv_text(self, result):
        stream = io.StringIO()
        self.write_csv(result, stream)
        return stream.getvalue()

    def write_results(self, result, out_dir, output_format='csv'):
        """Write ``<name>.csv`` (or ``<name>.json``) plus the ``<name>.meta.json`` sidecar into ``out_dir``.

        :return: list of written paths.
        """
        os.makedirs(out_dir, exist_ok=True)
        name = result.scenario.name
        sidecar_path = os.path.join(out_dir, name + '.meta.json')
        if output_format == 'csv':
            data_path = os.path.join(out_dir, name + '.csv')
            with open(data_path, 'w', newline='') as open_file:
                self.write_csv(result, open_file)
        elif output_format == 'json':
            data_path = os.path.join(out_dir, name + '.json')
            with open(data_path, 'w') as open_file:
                json.dump([r.to_dict() for r in result.records], open_file, indent=2)
                open_file.write('\n')
        else:
            raise ValueError("Unknown output format %r, expected csv or json" % (output_format,))
        with open(sidecar_path, 'w') as open_file:
            json.dump(result.sidecar(), open_file, indent=2, sort_keys=True)
            open_file.write('\n')
        logger.info('Wrote %s and %s', data_path, sidecar_path)
        return [data_path, sidecar_path]

    def diagonalize(self, scenario):
        """Quasi bases (U and Omega) of the scenario's boson and fermion ladder sectors."""
        scenario.validate()
        spec = scenario.network.spec()
        boson, fermion = scenario.couplings.sector_couplings(spec, scenario.seed)
        basis = block_diagonalize(boson, fermion)
        document = basis.to_dict()
        document['scenario'] = scenario.name
        document['boson']['residual'] = basis.boson_basis.residual(boson) if boson.n else 0.0
        document['fermion']['residual'] = basis.fermion_basis.residual(fermion) if fermion.n else 0.0
        return document


def run_scenario(scenario, workers=1):
    """Shortcut for ``Simulator(workers).run(scenario)``."""
    return Simulator(workers).run(scenario)
