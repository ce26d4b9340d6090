import glob
import json
import os

import numpy as np

from susy_dfs.fock import StateVector

PACKAGE_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'susy_dfs')
SCENARIO_DIR = os.path.join(PACKAGE_DIR, 'scenarios')
SCHEMA_DIR = os.path.join(PACKAGE_DIR, 'schemas')


def scenario_path(name):
    return os.path.join(SCENARIO_DIR, name + '.json')


def bundled_scenarios():
    return sorted(glob.glob(os.path.join(SCENARIO_DIR, '*.json')))


def load_schema(name):
    with open(os.path.join(SCHEMA_DIR, name + '.schema.json')) as open_file:
        return json.load(open_file)


def scenario_document(name):
    with open(scenario_path(name)) as open_file:
        return json.load(open_file)


def random_state(spec, seed, max_excitations=None):
    """Seeded normalized state, restricted to kets with at most ``max_excitations`` in total when given."""
    rng = np.random.Generator(np.random.PCG64(seed))
    amplitudes = rng.normal(size=spec.total_dim) + 1j * rng.normal(size=spec.total_dim)
    if max_excitations is not None:
        amplitudes[spec.occupation_table.sum(axis=1) > max_excitations] = 0
    return StateVector(spec, amplitudes).normalized()


def max_abs(matrix):
    return float(np.max(np.abs(matrix)))
