"""Supersymmetric boson-fermion pairs: supercharges, their squares and the decoherence-free qubit they host.

A :py:class:`SusyNetworkSpec` with N pairs lays out N bosons followed by N fermions. The supercharge
Q_n = sum_i (w_i b_i+ f_(i+n) + w_i* f_(i+n)+ b_i), indices mod N, carries sqrt(hbar/2) = 1, and H_SUSY = Q_n^2.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from susy_dfs.constants import AMPLITUDE_FLOOR
from susy_dfs.evolution import DenseEngine, QuasiEngine, TimeGrid, evolve_observable
from susy_dfs.fock import (Factor, FermionRepresentation, ModeKind, ModeSpec, NetworkSpec, Term, entangled_pair_state,
                           operator_matrix, total_number)
from susy_dfs.hamiltonians import (CouplingMatrix, HamiltonianSum, build_boson_network, build_boson_oscillators,
                                   build_fermion_network_ladder, build_fermion_oscillators, build_mixed_interaction)
from susy_dfs.metrics import (CoherenceObservable, CoherencePair, RelativePhaseObservable, component_amplitudes,
                              wrap_angle)
from susy_dfs.quasiparticle import block_diagonalize

logger = logging.getLogger(__name__)

DEFAULT_GRID = TimeGrid.linspace(0.0, 10.0, 20)


@dataclass(frozen=True)
class SusyNetworkSpec:
    """N boson-fermion pairs; ``pairing_offset`` is the Nicolai shift n pairing boson i with fermion i+n."""
    n_pairs: int
    boson_cutoff: int = 2
    pairing_offset: int = 0
    matched_spectrum: bool = False

    def __post_init__(self):
        if not isinstance(self.n_pairs, (int, np.integer)) or self.n_pairs < 1:
            raise ValueError("A SUSY network needs at least one pair, got %r" % (self.n_pairs,))
        if self.boson_cutoff < 1:
            raise ValueError("Boson cutoff must be >= 1, got %s" % self.boson_cutoff)
        object.__setattr__(self, 'pairing_offset', int(self.pairing_offset) % int(self.n_pairs))

    @property
    def network(self):
        bosons = tuple(ModeSpec.boson(self.boson_cutoff) for _ in range(self.n_pairs))
        return NetworkSpec(bosons + tuple(ModeSpec.fermion() for _ in range(self.n_pairs)))

    def boson_site(self, i):
        return int(i) % self.n_pairs

    def fermion_site(self, i):
        return self.n_pairs + int(i) % self.n_pairs

    @property
    def boson_sites(self):
        return tuple(range(self.n_pairs))

    @property
    def fermion_sites(self):
        return tuple(range(self.n_pairs, 2 * self.n_pairs))

    def protected_columns(self):
        """Ranks of kets with every boson occupation at most cutoff - 1, where truncation cannot act."""
        table = self.network.occupation_table
        return np.flatnonzero(np.all(table[:, list(self.boson_sites)] <= self.boson_cutoff - 1, axis=1))


class QubitSign(Enum):
    PLUS = 'plus'
    MINUS = 'minus'

    @property
    def factor(self):
        return 1 if self is QubitSign.PLUS else -1


@dataclass(frozen=True)
class SusyQubit:
    """(|0_B 1_F> + sign |1_B 0_F>)/sqrt(2) on one boson and one fermion site."""
    sign: QubitSign = QubitSign.PLUS
    boson_site: int = 0
    fermion_site: int = 1

    def __post_init__(self):
        object.__setattr__(self, 'sign', QubitSign(self.sign))

    def check(self, network):
        for site, kind in ((self.boson_site, ModeKind.BOSON), (self.fermion_site, ModeKind.FERMION)):
            network.check_site(site)
            if network.modes[site].kind is not kind:
                raise ValueError("SUSY qubit needs a %s at site %s, got %s" % (kind.value, site, network.modes[site]))

    @property
    def pair(self):
        """Coherence pair (|0_B 1_F>, |1_B 0_F>) over the qubit's two sites."""
        return CoherencePair((0, 1), (1, 0), (self.boson_site, self.fermion_site))


def _network_of(spec):
    return spec.network if isinstance(spec, SusyNetworkSpec) else spec


def build_supercharge(spec, offset=None, weights=None):
    """Nicolai supercharge Q_n; the single-pair n = 0 case is Q = b+ f + b f+.

    :param spec: :py:class:`SusyNetworkSpec`.
    :param offset: pairing shift n, taken mod N; the network's ``pairing_offset`` by default.
    :param weights: per-pair complex weights w_i, all ones by default.
    """
    n_pairs = spec.n_pairs
    offset = spec.pairing_offset if offset is None else int(offset) % n_pairs
    weights = np.ones(n_pairs, dtype=complex) if weights is None else np.asarray(weights, dtype=complex)
    if weights.shape != (n_pairs,):
        raise ValueError("Expected %s supercharge weights, got %s" % (n_pairs, weights.shape))
    terms = []
    for i in range(n_pairs):
        if weights[i] == 0:
            continue
        term = Term(weights[i], (Factor(spec.boson_site(i), 'create'),
                                 Factor(spec.fermion_site(i + offset), 'annihilate')))
        terms.extend([term, term.adjoint()])
    return HamiltonianSum(tuple(terms), 'supercharge_%s' % offset)


def susy_hamiltonian(q):
    """H_SUSY = Q^2 (hbar/2 = 1), as the symbolic product of the supercharge with itself."""
    return HamiltonianSum.from_sum((q * q).simplified(), 'susy')


def free_susy_hamiltonian(spec, frequencies=None, include_ground_offset=True):
    """sum_i (hbar w_i/2)(b_i+ b_i + 1) + (hbar w_i/2)(f_i+ f_i - 1); the vacuum energy cancels with the offsets on."""
    frequencies = np.ones(spec.n_pairs) if frequencies is None else np.asarray(frequencies, dtype=float)
    bosons = build_boson_oscillators(frequencies, spec.boson_sites, include_ground_offset)
    fermions = build_fermion_oscillators(frequencies, spec.fermion_sites, include_ground_offset)
    return bosons + fermions


def build_dfs_state(qubit, spec, background=None):
    """Normalized SUSY qubit state, every other mode in its vacuum unless ``background`` says otherwise."""
    network = _network_of(spec)
    qubit.check(network)
    return entangled_pair_state(network, qubit.boson_site, qubit.fermion_site, (0, 1), (1, 0),
                                qubit.sign.factor, background)


def _on_sites(coupling, sites):
    if not isinstance(coupling, CouplingMatrix):
        coupling = CouplingMatrix(coupling)
    if coupling.n != len(sites):
        raise ValueError("Coupling over %s modes cannot act on %s pairs" % (coupling.n, len(sites)))
    return coupling.on_sites(sites)


def sector_couplings(spec, boson_coupling, fermion_coupling=None):
    """Place per-pair couplings on the boson and fermion sites; a matched spectrum reuses the boson matrix."""
    if fermion_coupling is None:
        if not spec.matched_spectrum:
            raise ValueError('A fermion coupling is required unless the spectrum is matched')
        fermion_coupling = boson_coupling
    return _on_sites(boson_coupling, spec.boson_sites), _on_sites(fermion_coupling, spec.fermion_sites)


@dataclass(frozen=True)
class SusyQubitEvolution:
    series: object
    phases: tuple
    coherence: tuple
    degree_of_coherence: tuple
    dense_series: object = None
    oracle_deviation: float = None

    @property
    def phase_drift(self):
        """Largest wrapped departure of the relative phase from its first value."""
        return max(abs(wrap_angle(p - self.phases[0])) for p in self.phases)

    @property
    def coherence_spread(self):
        return float(np.ptp(self.degree_of_coherence))


def susy_qubit_evolution(qubit, spec, boson_coupling, fermion_coupling=None, grid=None,
                         rep=FermionRepresentation.STRING_CORRECTED, dense_check=False):
    """Block-diagonalize both sectors, propagate the qubit exactly and report its phase and coherence.

    :param spec: :py:class:`SusyNetworkSpec` with at least two pairs (system and environment).
    :param boson_coupling: N x N coupling between the bosons; the fermion coupling defaults to it when the
                           spec has a matched spectrum.
    :param dense_check: also run the dense oracle and record the largest amplitude deviation.
    """
    if spec.n_pairs < 2:
        raise ValueError('SUSY qubit evolution needs a system pair and at least one environment pair')
    grid = grid or DEFAULT_GRID
    network = spec.network
    bc, fc = sector_couplings(spec, boson_coupling, fermion_coupling)
    hamiltonian = build_boson_network(bc, network) + build_fermion_network_ladder(fc, network)
    basis = block_diagonalize(bc, fc)
    state = build_dfs_state(qubit, network)
    pair = qubit.pair
    observables = [RelativePhaseObservable(pair, 'relative_phase'),
                   CoherenceObservable(pair, 'coherence'),
                   CoherenceObservable(pair, 'degree_of_coherence', normalized=True)]
    series = evolve_observable(state, QuasiEngine(basis, hamiltonian, rep), grid, observables, rep,
                               keep_states=dense_check)
    dense_series = deviation = None
    if dense_check:
        dense_series = evolve_observable(state, DenseEngine(network, hamiltonian, rep), grid, observables, rep,
                                         keep_states=True)
        deviation = max(a.max_deviation(b) for a, b in zip(series.states, dense_series.states))
        logger.info('SUSY qubit quasi vs dense deviation %.3g', deviation)
    return SusyQubitEvolution(series, tuple(series.values('relative_phase')), tuple(series.values('coherence')),
                              tuple(series.values('degree_of_coherence')), dense_series, deviation)


@dataclass(frozen=True)
class SusyAlgebraRow:
    offset: int
    rep: FermionRepresentation
    delta: float
    asserted: bool

    @property
    def passed(self):
        return not self.asserted or self.delta < 1e-10


def susy_algebra_delta(spec, offset, weights=None, rep=FermionRepresentation.STRING_CORRECTED):
    """max |Q_n^2 - sum_i |w_i|^2 (b_i+ b_i + f_(i+n)+ f_(i+n))| over the columns below the boson cutoff."""
    network = spec.network
    weights = np.ones(spec.n_pairs) if weights is None else np.asarray(weights, dtype=complex)
    q = build_supercharge(spec, offset, weights)
    square = operator_matrix(network, susy_hamiltonian(q), rep)
    free = sum((abs(weights[i]) ** 2 * total_number(network, (spec.boson_site(i), spec.fermion_site(i + offset)))
                for i in range(spec.n_pairs)), HamiltonianSum())
    reference = operator_matrix(network, free, rep)
    columns = spec.protected_columns()
    return float(np.max(np.abs((square - reference)[:, columns])))


def verify_susy_algebra(spec, offsets=(0,), weights=None,
                        reps=(FermionRepresentation.STRING_CORRECTED, FermionRepresentation.SPIN_TENSOR), workers=1):
    """Table of Delta_n for every (offset, representation); only n = 0 with string-corrected fermions is asserted."""
    cases = [(offset % spec.n_pairs, FermionRepresentation(rep)) for offset in offsets for rep in reps]

    def _row(case):
        offset, rep = case
        delta = susy_algebra_delta(spec, offset, weights, rep)
        asserted = offset == 0 and rep is FermionRepresentation.STRING_CORRECTED
        logger.info('Delta_%s (%s) = %.3g%s', offset, rep.value, delta, '' if asserted else ' (reported)')
        return SusyAlgebraRow(offset, rep, delta, asserted)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(_row, cases))
    return [_row(case) for case in cases]


def explore_susy_dfs(seed, n_pairs=2, grid=None, mixed_scale=0.5, boson_cutoff=2,
                     rep=FermionRepresentation.STRING_CORRECTED):
    """Evolve both SUSY qubits under random boson, fermion and boson-fermion couplings with the dense engine.

    Nothing here is asserted; the drift of the relative phase and of the degree of coherence is returned as findings.
    """
    spec = SusyNetworkSpec(n_pairs, boson_cutoff)
    grid = grid or DEFAULT_GRID
    network = spec.network
    boson_seed, fermion_seed, mixed_seed = np.random.SeedSequence(seed).spawn(3)
    bc = CouplingMatrix.random(n_pairs, boson_seed, spec.boson_sites)
    fc = CouplingMatrix.random(n_pairs, fermion_seed, spec.fermion_sites)
    rng = np.random.Generator(np.random.PCG64(mixed_seed))
    pairs = [(spec.boson_site(i), spec.fermion_site(j), mixed_scale * rng.normal())
             for i in range(n_pairs) for j in range(n_pairs)]
    hamiltonian = (build_boson_network(bc, network) + build_fermion_network_ladder(fc, network)
                   + build_mixed_interaction(pairs, network))
    engine = DenseEngine(network, hamiltonian, rep)
    findings = []
    for sign in QubitSign:
        qubit = SusyQubit(sign, spec.boson_site(0), spec.fermion_site(0))
        observables = [CoherenceObservable(qubit.pair, 'degree_of_coherence', normalized=True)]
        series = evolve_observable(build_dfs_state(qubit, network), engine, grid, observables, rep,
                                   keep_states=True)
        phases = []
        for evolved in series.states:
            a, b = component_amplitudes(evolved, qubit.pair)
            # the pair may stop spanning the state once the mixed terms move its excitation away
            phases.append(wrap_angle(np.angle(b) - np.angle(a)) if min(abs(a), abs(b)) > AMPLITUDE_FLOOR else np.nan)
        drift = [abs(wrap_angle(p - phases[0])) for p in phases if not np.isnan(p)]
        finding = {
            'seed': seed,
            'sign': sign.value,
            'coherence_spread': float(np.ptp(series.values('degree_of_coherence'))),
            'phase_drift': float(max(drift)) if drift and not np.isnan(phases[0]) else float('nan'),
        }
        logger.info('SUSY DFS exploration %s', finding)
        findings.append(finding)
    return findings
