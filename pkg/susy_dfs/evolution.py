"""Time development: exact quasi-basis propagation, the dense matrix-exponential oracle and the phase-kick ensemble.

Both deterministic engines use the propagator exp(-i H t / hbar) with hbar = 2. Coherence magnitudes, the
quantities every acceptance check looks at, do not depend on the sign of the exponent.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from susy_dfs.constants import HBAR, HERMITIAN_TOLERANCE, LEAKAGE_TOLERANCE, dense_guard
from susy_dfs.fock import (DenseGuardError, FermionRepresentation, NetworkSpec, OperatorSum, StateVector,
                           apply_operator, embed_state, operator_matrix)
from susy_dfs.hamiltonians import CouplingMatrix, build_boson_network
from susy_dfs.metrics import DensityMatrix, as_observable
from susy_dfs.quasiparticle import (BlockQuasiBasis, Direction, QuasiBasis, diagonalize_coupling, transform_leakage,
                                    transform_state)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimeGrid:
    """Strictly ascending, nonnegative evaluation times in units of 1/Omega."""
    times: tuple

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if not times:
            raise ValueError('A time grid needs at least one time')
        if times[0] < 0:
            raise ValueError("Times must be nonnegative, got %s" % times[0])
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError('Times must be strictly ascending')
        object.__setattr__(self, 'times', times)

    @classmethod
    def linspace(cls, start, stop, steps):
        return cls(tuple(np.linspace(start, stop, int(steps))))

    def __len__(self):
        return len(self.times)

    def __iter__(self):
        return iter(self.times)


# Engines

def _hermitian_check(matrix, what):
    deviation = float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0
    if deviation > HERMITIAN_TOLERANCE:
        raise ValueError("%s is not Hermitian (max deviation %.3g)" % (what, deviation))


def leakage(state, hamiltonian, rep=FermionRepresentation.STRING_CORRECTED):
    """Norm of the part of H|psi> that the boson truncation throws away.

    The same symbolic Hamiltonian is applied on a network whose boson cutoffs are one higher; whatever lands on the
    added occupations is what the truncated Hamiltonian silently drops.
    """
    spec = state.spec
    if hamiltonian is None or not spec.boson_sites:
        return 0.0
    bigger = spec.with_raised_cutoffs(1)
    image = apply_operator(embed_state(state, bigger), hamiltonian, rep).tensor
    outside = np.zeros(bigger.dims, dtype=bool)
    for site in spec.boson_sites:
        index = [slice(None)] * spec.n_modes
        index[site] = spec.modes[site].dim
        outside[tuple(index)] = True
    return float(np.linalg.norm(image[outside]))


class DenseEngine(object):
    """Brute-force oracle: materialize H and exponentiate it through its eigendecomposition.

    :param spec: network the Hamiltonian acts on; its dimension must stay under the dense guard.
    :param hamiltonian: symbolic Hamiltonian.
    :param rep: fermion representation used to materialize it.
    """

    tag = 'dense'

    def __init__(self, spec, hamiltonian, rep=FermionRepresentation.STRING_CORRECTED):
        guard = dense_guard()
        if spec.total_dim > guard:
            raise DenseGuardError("Dense engine refuses dimension %s (guard %s)" % (spec.total_dim, guard))
        self.spec = spec
        self.hamiltonian = hamiltonian
        self.rep = FermionRepresentation(rep)
        self.matrix = operator_matrix(spec, hamiltonian, self.rep)
        _hermitian_check(self.matrix, 'Hamiltonian')
        self.energies, self.eigenvectors = scipy.linalg.eigh(self.matrix)
        logger.debug('Dense engine ready for %s (dimension %s)', spec, spec.total_dim)

    def propagate(self, state, t):
        coefficients = self.eigenvectors.conj().T @ state.amplitudes
        coefficients = np.exp(-1j * self.energies * t / HBAR) * coefficients
        return StateVector(state.spec, self.eigenvectors @ coefficients)

    def leakage(self, state):
        return leakage(state, self.hamiltonian, self.rep)


class QuasiEngine(object):
    """Exact propagation in the quasi-particle basis.

    :param basis: :py:class:`QuasiBasis` or :py:class:`BlockQuasiBasis`.
    :param hamiltonian: optional symbolic Hamiltonian, only used for the truncation diagnostic.
    :param strict: raise on transform truncation instead of reporting it as leakage.
    """

    tag = 'quasi'

    def __init__(self, basis, hamiltonian=None, rep=FermionRepresentation.STRING_CORRECTED, strict=False,
                 general=False):
        self.basis = basis
        self.hamiltonian = hamiltonian
        self.rep = FermionRepresentation(rep)
        self.strict = strict
        self.general = general

    def propagate(self, state, t):
        return propagate_quasi(state, self.basis, t, self.rep, strict=self.strict, general=self.general)

    def leakage(self, state):
        lost = transform_leakage(state, self.basis, Direction.TO_QUASI, self.rep)
        return max(lost, leakage(state, self.hamiltonian, self.rep))


def quasi_phases(spec, basis, t):
    """exp(-i t sum_k n'_k Omega_k / hbar) for every quasi-occupation ket."""
    energies = spec.occupation_table @ basis.frequencies(spec)
    return np.exp(-1j * energies * t / HBAR)


def propagate_quasi(state, basis, t, rep=FermionRepresentation.STRING_CORRECTED, already_quasi=False, strict=True,
                    general=False):
    """Propagate ``state`` by ``t`` with one phase per quasi-occupation ket.

    :param already_quasi: ``state`` is already expressed over quasi kets; the result then stays in the quasi basis.
    """
    if already_quasi:
        return StateVector(state.spec, state.amplitudes * quasi_phases(state.spec, basis, t))
    quasi = transform_state(state, basis, Direction.TO_QUASI, rep, general=general, strict=strict)
    evolved = StateVector(state.spec, quasi.amplitudes * quasi_phases(state.spec, basis, t))
    return transform_state(evolved, basis, Direction.FROM_QUASI, rep, general=general, strict=strict)


def propagate_dense(state, hamiltonian, t, rep=FermionRepresentation.STRING_CORRECTED):
    """exp(-i H t / hbar)|psi> through a materialized H; guarded by the dense dimension guard."""
    return DenseEngine(state.spec, hamiltonian, rep).propagate(state, t)


def make_engine(spec, propagator, rep=FermionRepresentation.STRING_CORRECTED):
    """Engine for a Hamiltonian (dense), a quasi basis (quasi) or an engine passed through."""
    if isinstance(propagator, (DenseEngine, QuasiEngine)):
        return propagator
    if isinstance(propagator, (QuasiBasis, BlockQuasiBasis)):
        return QuasiEngine(propagator, rep=rep)
    if isinstance(propagator, OperatorSum):
        return DenseEngine(spec, propagator, rep)
    raise TypeError("Cannot build an engine from %r" % (propagator,))


# Single-excitation sector, where the quasi engine needs only N x N algebra

def single_excitation_amplitudes(state):
    """Amplitude of each one-excitation ket |0..1_i..0>, one entry per mode."""
    amplitudes = np.zeros(state.spec.n_modes, dtype=complex)
    for site in range(state.spec.n_modes):
        occupations = [0] * state.spec.n_modes
        occupations[site] = 1
        amplitudes[site] = state.amplitude(occupations)
    return amplitudes


def propagate_single_excitation(amplitudes, basis, t):
    """c(t) = U exp(-i Omega t / hbar) U+ c for a one-excitation wavefunction over the basis' modes."""
    return basis.u @ (np.exp(-1j * basis.omega * t / HBAR) * (basis.u.conj().T @ amplitudes))


# Observables along a grid

@dataclass(frozen=True)
class ObservableRecord:
    time: float
    observable: str
    value: float
    leakage: float
    engine: str


@dataclass(frozen=True)
class TimeSeries:
    records: tuple
    tainted: bool = False
    max_leakage: float = 0.0
    states: tuple = field(default=(), repr=False)

    def values(self, observable):
        return np.array([r.value for r in self.records if r.observable == observable])

    def times(self, observable=None):
        return np.array([r.time for r in self.records if observable is None or r.observable == observable])


def evolve_observable(state, propagator, grid, observables, rep=FermionRepresentation.STRING_CORRECTED, workers=1,
                      keep_states=False):
    """Evaluate every observable at every grid time.

    :param propagator: a Hamiltonian (dense engine), a quasi basis (quasi engine) or an engine instance.
    :param observables: expressions, coherence pairs or observable objects from :py:mod:`susy_dfs.metrics`.
    :param workers: grid points evaluated concurrently; the records come back sorted by (time, observable).
    :return: :py:class:`TimeSeries`; it is marked tainted when any grid point leaks more than the tolerance.
    """
    engine = make_engine(state.spec, propagator, rep)
    observables = [as_observable(o, rep) for o in observables]

    def _at(t):
        evolved = engine.propagate(state, t)
        lost = engine.leakage(evolved)
        logger.debug('%s engine at t=%s: norm=%.12f leakage=%.3g', engine.tag, t, evolved.norm(), lost)
        return t, evolved, lost, [(o.name, o.evaluate(evolved)) for o in observables]

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            points = list(executor.map(_at, grid.times))
    else:
        points = [_at(t) for t in grid.times]

    records = []
    max_lost = 0.0
    for t, _, lost, values in points:
        max_lost = max(max_lost, float(lost))
        for name, value in values:
            records.append(ObservableRecord(t, name, float(value), lost, engine.tag))
    records.sort(key=lambda r: (r.time, r.observable))
    tainted = bool(max_lost > LEAKAGE_TOLERANCE)
    if tainted:
        logger.warning('Truncation leakage %.3g exceeds %.1g; series marked tainted', max_lost, LEAKAGE_TOLERANCE)
    states = tuple(p[1] for p in points) if keep_states else ()
    return TimeSeries(tuple(records), tainted, max_lost, states)


# Phase-kick ensemble

class KickDistribution(Enum):
    GAUSSIAN = 'gaussian'
    UNIFORM = 'uniform'


class KickTarget(Enum):
    """``single``: one spin in a|0> + b|1>. ``pair``: two spins in a|01> + b|10> sharing every kick."""
    SINGLE = 'single'
    PAIR = 'pair'


@dataclass(frozen=True)
class PhaseKickModel:
    """Random phase kicks phi_j imparted to the |0> component (and -phi_j to |1>).

    :param scale: per-kick standard deviation (Gaussian) or full width of a centered interval (uniform).
    """
    distribution: KickDistribution = KickDistribution.GAUSSIAN
    scale: float = 0.1
    kicks_per_unit_time: float = 1.0
    seed: int = 0
    target: KickTarget = KickTarget.SINGLE

    def __post_init__(self):
        object.__setattr__(self, 'distribution', KickDistribution(self.distribution))
        object.__setattr__(self, 'target', KickTarget(self.target))
        if self.scale < 0:
            raise ValueError("Kick scale must be nonnegative, got %s" % self.scale)
        if self.kicks_per_unit_time <= 0:
            raise ValueError("kicks_per_unit_time must be positive, got %s" % self.kicks_per_unit_time)

    def kicks_by(self, t):
        return int(np.floor(self.kicks_per_unit_time * t + 1e-9))

    def draw(self, rng, shape):
        if self.distribution is KickDistribution.GAUSSIAN:
            return rng.normal(0.0, self.scale, size=shape)
        return rng.uniform(-self.scale / 2, self.scale / 2, size=shape)

    def expected_coherence(self, t):
        """Closed-form |E exp(2i phi(t))|: exp(-2 k sigma^2) for Gaussian kicks, |sin(w)/w|^k for uniform ones."""
        if self.target is KickTarget.PAIR:
            return 1.0
        k = self.kicks_by(t)
        if self.distribution is KickDistribution.GAUSSIAN:
            return float(np.exp(-2.0 * k * self.scale ** 2))
        if self.scale == 0:
            return 1.0
        return float(abs(np.sin(self.scale) / self.scale) ** k)


@dataclass(frozen=True)
class EnsembleResult:
    times: tuple
    coherence: tuple
    standard_error: tuple
    samples: int
    mean_phase_factor: tuple = field(default=(), repr=False)

    def density_matrix(self, index, alpha, beta):
        """Sample-averaged 2x2 density matrix of the kicked superposition at grid point ``index``."""
        factor = self.mean_phase_factor[index] if self.mean_phase_factor else 1.0
        off = alpha * np.conj(beta) * factor
        matrix = np.array([[abs(alpha) ** 2, off], [np.conj(off), abs(beta) ** 2]], dtype=complex)
        return DensityMatrix(NetworkSpec.fermions(1), matrix)


def _kick_chunk(model, seed_sequence, size, kick_counts):
    rng = np.random.Generator(np.random.PCG64(seed_sequence))
    max_kicks = max(kick_counts)
    phases = model.draw(rng, (size, max_kicks)) if max_kicks else np.zeros((size, 0))
    cumulative = np.concatenate([np.zeros((size, 1)), np.cumsum(phases, axis=1)], axis=1)
    phi = cumulative[:, kick_counts]
    if model.target is KickTarget.PAIR:
        # both spins receive the same kick sequence; the kicks on |01> and |10> cancel
        relative = 2 * (phi - phi)
    else:
        relative = 2 * phi
    factors = np.exp(1j * relative)
    return factors.sum(axis=0), (np.abs(factors) ** 2).sum(axis=0)


def phase_kick_ensemble(superposition, model, grid, samples, workers=1, chunk_size=1000):
    """Average the relative phase factor exp(2i phi(t)) of a kicked superposition over ``samples`` kick histories.

    Samples are drawn in fixed-size chunks, each with its own child of ``SeedSequence(model.seed)``, and the
    chunk sums are reduced in chunk order, so the result does not depend on ``workers``.

    :param superposition: ``(alpha, beta)`` with |alpha|^2 + |beta|^2 = 1.
    :return: :py:class:`EnsembleResult` with coherence normalized to its t = 0 value.
    """
    alpha, beta = superposition
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > 1e-10:
        raise ValueError("Superposition (%s, %s) is not normalized" % (alpha, beta))
    if samples < 1:
        raise ValueError("At least one sample is needed, got %s" % samples)
    times = tuple(grid.times)
    if abs(alpha * beta) <= 1e-12:
        # an eigenstate only picks up a global phase
        ones = tuple(1.0 for _ in times)
        return EnsembleResult(times, ones, tuple(0.0 for _ in times), samples, tuple(1.0 + 0j for _ in times))
    kick_counts = [model.kicks_by(t) for t in times]
    sizes = [chunk_size] * (samples // chunk_size)
    if samples % chunk_size:
        sizes.append(samples % chunk_size)
    children = np.random.SeedSequence(model.seed).spawn(len(sizes))
    jobs = list(zip(children, sizes))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            partials = list(executor.map(lambda job: _kick_chunk(model, job[0], job[1], kick_counts), jobs))
    else:
        partials = [_kick_chunk(model, child, size, kick_counts) for child, size in jobs]
    total = np.zeros(len(times), dtype=complex)
    total_sq = np.zeros(len(times))
    for partial_sum, partial_sq in partials:
        total = total + partial_sum
        total_sq = total_sq + partial_sq
    mean = total / samples
    spread = np.maximum(total_sq / samples - np.abs(mean) ** 2, 0.0)
    coherence = np.abs(mean)
    standard_error = np.sqrt(spread / samples)
    logger.info('Phase-kick ensemble: %s samples, %s grid points, final coherence %.4f',
                samples, len(times), coherence[-1])
    return EnsembleResult(times, tuple(float(c) for c in coherence), tuple(float(s) for s in standard_error),
                          samples, tuple(complex(m) for m in mean))


# Engine cost contrast

@dataclass(frozen=True)
class BenchmarkRow:
    n_modes: int
    total_dim: int
    quasi_seconds: float
    dense_seconds: float = None
    max_deviation: float = None


def benchmark_engines(sizes, seed=0, t=1.0, cutoff=1, repeats=3):
    """Time one-excitation propagation on boson networks of increasing size.

    The quasi engine works on the N one-excitation amplitudes; the dense engine exponentiates the full
    ``(cutoff+1)^N`` dimensional Hamiltonian and is skipped past the dense guard. Only the trend is reported.
    """
    rows = []
    for n in sizes:
        coupling = CouplingMatrix.random(n, seed)
        spec = NetworkSpec.bosons(n, cutoff)
        start = time.perf_counter()
        for _ in range(repeats):
            basis = diagonalize_coupling(coupling)
            initial = np.zeros(n, dtype=complex)
            initial[0] = 1.0
            quasi = propagate_single_excitation(initial, basis, t)
        quasi_seconds = (time.perf_counter() - start) / repeats
        dense_seconds = deviation = None
        if spec.total_dim <= dense_guard():
            occupations = [0] * n
            occupations[0] = 1
            state = StateVector.basis_ket(spec, occupations)
            start = time.perf_counter()
            for _ in range(repeats):
                dense = propagate_dense(state, build_boson_network(coupling), t)
            dense_seconds = (time.perf_counter() - start) / repeats
            deviation = float(np.max(np.abs(single_excitation_amplitudes(dense) - quasi)))
        logger.info('Benchmark N=%s: quasi %.3gs, dense %s', n, quasi_seconds, dense_seconds)
        rows.append(BenchmarkRow(n, spec.total_dim, quasi_seconds, dense_seconds, deviation))
    return rows
