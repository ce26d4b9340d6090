"""Density matrices, partial traces and the coherence observables read off them."""
import logging
from dataclasses import dataclass

import numpy as np

from susy_dfs.constants import AMPLITUDE_FLOOR, DENSITY_TOLERANCE, UNITARY_TOLERANCE
from susy_dfs.fock import FermionRepresentation, OccupationKet, OperatorSum, StateVector, expectation

logger = logging.getLogger(__name__)


def wrap_angle(angle):
    """Map an angle onto (-pi, pi]."""
    return float(np.pi - np.mod(np.pi - angle, 2 * np.pi))


class DensityMatrix(object):
    """Hermitian, unit-trace, positive semidefinite operator over the modes of ``spec``.

    :param spec: network the matrix acts on (a subnetwork after a partial trace).
    :param matrix: ``total_dim x total_dim`` complex array.
    :param sites: labels of the modes in the parent network, by default ``0..n-1``.
    """

    def __init__(self, spec, matrix, sites=None):
        matrix = np.array(matrix, dtype=complex)
        if matrix.shape != (spec.total_dim, spec.total_dim):
            raise ValueError("Density matrix of shape %s does not match dimension %s" % (matrix.shape, spec.total_dim))
        deviation = float(np.max(np.abs(matrix - matrix.conj().T)))
        if deviation > DENSITY_TOLERANCE:
            raise ValueError("Density matrix is not Hermitian (max deviation %.3g)" % deviation)
        trace = np.trace(matrix).real
        if abs(trace - 1.0) > DENSITY_TOLERANCE:
            raise ValueError("Density matrix trace is %.12g, expected 1" % trace)
        lowest = float(np.min(np.linalg.eigvalsh(matrix)))
        if lowest < -DENSITY_TOLERANCE:
            raise ValueError("Density matrix has negative eigenvalue %.3g" % lowest)
        sites = tuple(range(spec.n_modes)) if sites is None else tuple(int(s) for s in sites)
        if len(sites) != spec.n_modes:
            raise ValueError("%s site labels given for %s modes" % (len(sites), spec.n_modes))
        matrix.setflags(write=False)
        self.spec = spec
        self.matrix = matrix
        self.sites = sites

    def __repr__(self):
        return 'DensityMatrix(sites=%s, dim=%s)' % (self.sites, self.dim)

    @property
    def dim(self):
        return self.spec.total_dim

    def trace(self):
        return float(np.trace(self.matrix).real)

    def purity(self):
        return float(np.trace(self.matrix @ self.matrix).real)

    def element(self, ket_a, ket_b):
        """<a|rho|b> for occupation kets over this matrix' modes."""
        return complex(self.matrix[self.spec.rank(ket_a), self.spec.rank(ket_b)])

    def positions(self, sites):
        """Axis positions of parent-network ``sites`` in this matrix."""
        missing = [s for s in sites if s not in self.sites]
        if missing:
            raise ValueError("Sites %s are not part of this density matrix (sites %s)" % (missing, self.sites))
        return [self.sites.index(s) for s in sites]


@dataclass(frozen=True)
class CoherencePair:
    """Two distinct occupation kets of the subsystem on ``sites`` whose relative phase is tracked."""
    ket_a: tuple
    ket_b: tuple
    sites: tuple

    def __post_init__(self):
        ket_a = tuple(OccupationKet(self.ket_a).occupations)
        ket_b = tuple(OccupationKet(self.ket_b).occupations)
        sites = tuple(int(s) for s in self.sites)
        if not sites:
            raise ValueError('A coherence pair needs at least one site')
        if len(set(sites)) != len(sites):
            raise ValueError("Coherence pair sites must be distinct, got %s" % (sites,))
        if len(ket_a) != len(sites) or len(ket_b) != len(sites):
            raise ValueError("Kets %s and %s must have one occupation per site %s" % (ket_a, ket_b, sites))
        if ket_a == ket_b:
            raise ValueError("Coherence pair kets must differ, got %s twice" % (ket_a,))
        object.__setattr__(self, 'ket_a', ket_a)
        object.__setattr__(self, 'ket_b', ket_b)
        object.__setattr__(self, 'sites', sites)

    @property
    def label(self):
        return '%s,%s@%s' % (''.join(map(str, self.ket_a)), ''.join(map(str, self.ket_b)),
                             '-'.join(map(str, self.sites)))


def density_from_state(state):
    """|psi><psi| of a normalized state."""
    if not state.is_normalized(DENSITY_TOLERANCE):
        raise ValueError("Density matrix needs a normalized state, norm is %.12g" % state.norm())
    return DensityMatrix(state.spec, np.outer(state.amplitudes, state.amplitudes.conj()))


def partial_trace(rho, keep):
    """Trace out every mode of ``rho`` not listed in ``keep``; the kept modes stay in the order given."""
    keep = list(keep)
    if not keep:
        raise ValueError('partial_trace needs at least one site to keep')
    if len(set(keep)) != len(keep):
        raise ValueError("Kept sites must be distinct, got %s" % keep)
    positions = rho.positions(keep)
    n = rho.spec.n_modes
    rows = list(range(n))
    cols = [n + k if k in positions else k for k in range(n)]
    out = [rows[p] for p in positions] + [cols[p] for p in positions]
    tensor = rho.matrix.reshape(rho.spec.dims + rho.spec.dims)
    reduced = np.einsum(tensor, rows + cols, out)
    sub = rho.spec.subnetwork(positions)
    return DensityMatrix(sub, reduced.reshape(sub.total_dim, sub.total_dim), [rho.sites[p] for p in positions])


def reduced_density(state, keep):
    """Reduced density matrix of a pure state over ``keep`` without forming the full |psi><psi|."""
    keep = [state.spec.check_site(s) for s in keep]
    if not keep:
        raise ValueError('reduced_density needs at least one site to keep')
    if len(set(keep)) != len(keep):
        raise ValueError("Kept sites must be distinct, got %s" % keep)
    if not state.is_normalized(DENSITY_TOLERANCE):
        raise ValueError("Density matrix needs a normalized state, norm is %.12g" % state.norm())
    rest = [s for s in range(state.spec.n_modes) if s not in keep]
    sub = state.spec.subnetwork(keep)
    psi = np.transpose(state.tensor, keep + rest).reshape(sub.total_dim, -1)
    return DensityMatrix(sub, psi @ psi.conj().T, keep)


def _as_reduced(rho_or_state, pair):
    if isinstance(rho_or_state, StateVector):
        return reduced_density(rho_or_state, pair.sites)
    if rho_or_state.sites != pair.sites:
        return partial_trace(rho_or_state, pair.sites)
    return rho_or_state


def coherence(rho, pair):
    """|rho_ab|, the off-diagonal magnitude between the pair's kets; |alpha beta| for a pure alpha|a> + beta|b>."""
    rho = _as_reduced(rho, pair)
    return abs(rho.element(pair.ket_a, pair.ket_b))


def degree_of_coherence(rho, pair):
    """|rho_ab| / sqrt(rho_aa rho_bb): one for a pure superposition however much weight the pair carries."""
    rho = _as_reduced(rho, pair)
    populations = rho.element(pair.ket_a, pair.ket_a).real * rho.element(pair.ket_b, pair.ket_b).real
    if populations <= AMPLITUDE_FLOOR ** 2:
        return 0.0
    return abs(rho.element(pair.ket_a, pair.ket_b)) / np.sqrt(populations)


def _full_ket(spec, pair, occupations, background):
    full = list(background) if background is not None else [0] * spec.n_modes
    for site, n in zip(pair.sites, occupations):
        full[site] = n
    return full


def component_amplitudes(state, pair, background=None):
    """Amplitudes of the pair's two kets, every other site at its ``background`` occupation (vacuum by default)."""
    for site in pair.sites:
        state.spec.check_site(site)
    a = state.amplitude(_full_ket(state.spec, pair, pair.ket_a, background))
    b = state.amplitude(_full_ket(state.spec, pair, pair.ket_b, background))
    return a, b


def relative_phase(state, pair, background=None):
    """arg(amp_b) - arg(amp_a) wrapped onto (-pi, pi].

    :raises ValueError: when either component amplitude has vanished.
    """
    a, b = component_amplitudes(state, pair, background)
    if abs(a) <= AMPLITUDE_FLOOR or abs(b) <= AMPLITUDE_FLOOR:
        raise ValueError("Relative phase undefined: component amplitudes %.3g and %.3g" % (abs(a), abs(b)))
    return wrap_angle(np.angle(b) - np.angle(a))


def rotate_spins(state, unitary, sites=None):
    """Apply the same 2x2 unitary to every listed fermion site (all fermion sites by default)."""
    unitary = np.asarray(unitary, dtype=complex)
    if unitary.shape != (2, 2) or np.max(np.abs(unitary.conj().T @ unitary - np.eye(2))) > UNITARY_TOLERANCE:
        raise ValueError('rotate_spins needs a 2x2 unitary')
    spec = state.spec
    sites = spec.fermion_sites if sites is None else sites
    psi = state.tensor
    for site in sites:
        spec.check_site(site)
        if not spec.modes[site].is_fermion:
            raise ValueError("Spin rotations act on fermion modes only; site %s is %s" % (site, spec.modes[site]))
        psi = np.moveaxis(np.tensordot(unitary, psi, axes=([1], [site])), 0, site)
    return StateVector(spec, psi.reshape(-1))


# Observables evaluated along a time grid

class ExpectationObservable(object):
    """Real part of <psi|O|psi>."""

    def __init__(self, expression, name=None, rep=FermionRepresentation.STRING_CORRECTED):
        self.expression = expression
        self.rep = FermionRepresentation(rep)
        self.name = name or getattr(expression, 'label', '') or 'expectation'

    def evaluate(self, state):
        return expectation(state, self.expression, self.rep).real


class CoherenceObservable(object):
    """|rho_ab| of the reduced state over the pair's sites, or the degree of coherence when ``normalized``."""

    def __init__(self, pair, name=None, normalized=False):
        self.pair = pair
        self.normalized = normalized
        self.name = name or ('%s[%s]' % ('degree_of_coherence' if normalized else 'coherence', pair.label))

    def evaluate(self, state):
        if self.normalized:
            return degree_of_coherence(state, self.pair)
        return coherence(state, self.pair)


class RelativePhaseObservable(object):

    def __init__(self, pair, name=None, background=None):
        self.pair = pair
        self.background = background
        self.name = name or 'relative_phase[%s]' % pair.label

    def evaluate(self, state):
        return relative_phase(state, self.pair, self.background)


def as_observable(observable, rep=FermionRepresentation.STRING_CORRECTED):
    """Wrap a bare expression or coherence pair into an observable object."""
    if isinstance(observable, OperatorSum):
        return ExpectationObservable(observable, rep=rep)
    if isinstance(observable, CoherencePair):
        return CoherenceObservable(observable)
    if hasattr(observable, 'evaluate') and hasattr(observable, 'name'):
        return observable
    raise TypeError("Cannot observe %r" % (observable,))
