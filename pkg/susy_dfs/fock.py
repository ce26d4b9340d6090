"""Truncated Fock spaces and the second-quantized operator algebra.

Basis kets are ordered lexicographically with mode 0 most significant and occupations ascending, so the
rank-0 ket is always the vacuum. Fermion modes are two-level with ``|1>`` the +1 eigenvector of sigma_z.
"""
import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property, reduce

import numpy as np

from susy_dfs.constants import NORM_TOLERANCE, dense_guard

logger = logging.getLogger(__name__)


class MalformedExpressionError(ValueError):
    """An operator expression references a missing site or applies an operator a mode does not support."""


class DenseGuardError(ValueError):
    """The requested dense object is larger than the dense guard allows."""


class ModeKind(Enum):
    BOSON = 'boson'
    FERMION = 'fermion'


class FermionRepresentation(Enum):
    """How fermion ladder operators on different sites relate to each other.

    ``SPIN_TENSOR`` uses plain tensor factors, so operators on different sites commute.
    ``STRING_CORRECTED`` attaches the parity of every preceding fermion mode to a ladder operator, which makes
    operators on different sites anticommute.
    """
    SPIN_TENSOR = 'spin_tensor'
    STRING_CORRECTED = 'string_corrected'


class Ladder(Enum):
    CREATE = 'create'
    ANNIHILATE = 'annihilate'


class PauliAxis(Enum):
    X = 'x'
    Y = 'y'
    Z = 'z'


LADDER_OPERATORS = ('create', 'annihilate')
PAULI_OPERATORS = ('x', 'y', 'z')
LOCAL_OPERATORS = LADDER_OPERATORS + PAULI_OPERATORS + ('number', 'identity')

_ADJOINT = {'create': 'annihilate', 'annihilate': 'create'}


@dataclass(frozen=True)
class ModeSpec:
    """One oscillator of the network: a boson truncated at ``cutoff`` or a two-level fermion."""
    kind: ModeKind
    cutoff: int = 1

    def __post_init__(self):
        kind = ModeKind(self.kind)
        object.__setattr__(self, 'kind', kind)
        if kind is ModeKind.BOSON and (not isinstance(self.cutoff, (int, np.integer)) or self.cutoff < 1):
            raise ValueError("Boson cutoff must be an integer >= 1, got %r" % (self.cutoff,))
        if kind is ModeKind.FERMION and self.cutoff != 1:
            raise ValueError("Fermion modes have local dimension 2, got cutoff %r" % (self.cutoff,))
        object.__setattr__(self, 'cutoff', int(self.cutoff))

    @classmethod
    def boson(cls, cutoff):
        return cls(ModeKind.BOSON, cutoff)

    @classmethod
    def fermion(cls):
        return cls(ModeKind.FERMION, 1)

    @property
    def dim(self):
        return self.cutoff + 1

    @property
    def is_boson(self):
        return self.kind is ModeKind.BOSON

    @property
    def is_fermion(self):
        return self.kind is ModeKind.FERMION

    def __str__(self):
        if self.is_boson:
            return 'boson(%s)' % self.cutoff
        return 'fermion'


@dataclass(frozen=True)
class OccupationKet:
    occupations: tuple

    def __post_init__(self):
        occupations = tuple(int(n) for n in self.occupations)
        if any(n < 0 for n in occupations):
            raise ValueError("Occupations must be nonnegative, got %s" % (occupations,))
        object.__setattr__(self, 'occupations', occupations)

    def __len__(self):
        return len(self.occupations)

    def __getitem__(self, item):
        return self.occupations[item]

    def __str__(self):
        return '|%s>' % ''.join(str(n) for n in self.occupations)


@dataclass(frozen=True)
class NetworkSpec:
    """Ordered list of modes defining the tensor-product Hilbert space."""
    modes: tuple

    def __post_init__(self):
        modes = tuple(self.modes)
        if not modes:
            raise ValueError('A network needs at least one mode')
        for mode in modes:
            if not isinstance(mode, ModeSpec):
                raise TypeError("Network modes must be ModeSpec instances, got %r" % (mode,))
        object.__setattr__(self, 'modes', modes)

    @classmethod
    def of(cls, *modes):
        return cls(tuple(modes))

    @classmethod
    def bosons(cls, n, cutoff):
        return cls(tuple(ModeSpec.boson(cutoff) for _ in range(n)))

    @classmethod
    def fermions(cls, n):
        return cls(tuple(ModeSpec.fermion() for _ in range(n)))

    def __len__(self):
        return len(self.modes)

    def __add__(self, other):
        return NetworkSpec(self.modes + other.modes)

    @property
    def n_modes(self):
        return len(self.modes)

    @cached_property
    def dims(self):
        return tuple(mode.dim for mode in self.modes)

    @cached_property
    def total_dim(self):
        return int(np.prod(self.dims))

    @cached_property
    def boson_sites(self):
        return tuple(i for i, mode in enumerate(self.modes) if mode.is_boson)

    @cached_property
    def fermion_sites(self):
        return tuple(i for i, mode in enumerate(self.modes) if mode.is_fermion)

    @cached_property
    def occupation_table(self):
        """(total_dim, n_modes) integer array; row r holds the occupations of the ket of rank r."""
        table = np.array(list(itertools.product(*(range(d) for d in self.dims))), dtype=int)
        table.setflags(write=False)
        return table

    def check_site(self, site):
        if not isinstance(site, (int, np.integer)) or not 0 <= site < self.n_modes:
            raise ValueError("Site %r out of range for a %s-mode network" % (site, self.n_modes))
        return int(site)

    def rank(self, ket):
        """Lexicographic rank of an occupation ket."""
        occupations = ket.occupations if isinstance(ket, OccupationKet) else tuple(ket)
        if len(occupations) != self.n_modes:
            raise ValueError("Ket %s does not match a %s-mode network" % (occupations, self.n_modes))
        for n, mode in zip(occupations, self.modes):
            if not 0 <= n <= mode.cutoff:
                raise ValueError("Occupation %s exceeds %s in ket %s" % (n, mode, occupations))
        return int(np.ravel_multi_index(occupations, self.dims))

    def ket(self, rank):
        if not 0 <= rank < self.total_dim:
            raise ValueError("Rank %s out of range for dimension %s" % (rank, self.total_dim))
        return OccupationKet(tuple(int(n) for n in np.unravel_index(rank, self.dims)))

    def subnetwork(self, sites):
        return NetworkSpec(tuple(self.modes[self.check_site(s)] for s in sites))

    def with_raised_cutoffs(self, extra=1):
        """Same network with every boson cutoff raised by ``extra``."""
        return NetworkSpec(tuple(ModeSpec.boson(m.cutoff + extra) if m.is_boson else m for m in self.modes))

    def __str__(self):
        return 'NetworkSpec(%s)' % ', '.join(str(m) for m in self.modes)


def enumerate_basis(spec):
    """Return the ``total_dim`` occupation kets of ``spec`` in lexicographic order, vacuum first."""
    return [OccupationKet(tuple(row)) for row in spec.occupation_table]


class StateVector(object):
    """Immutable complex amplitude array over the lexicographic occupation basis of a network.

    The zero vector is a legal value: it is what annihilating the vacuum returns.
    """

    def __init__(self, spec, amplitudes):
        amplitudes = np.array(amplitudes, dtype=complex).reshape(-1)
        if amplitudes.shape != (spec.total_dim,):
            raise ValueError("Expected %s amplitudes for %s, got %s" % (spec.total_dim, spec, amplitudes.shape[0]))
        amplitudes.setflags(write=False)
        self.spec = spec
        self.amplitudes = amplitudes

    @classmethod
    def vacuum(cls, spec):
        amplitudes = np.zeros(spec.total_dim, dtype=complex)
        amplitudes[0] = 1.0
        return cls(spec, amplitudes)

    @classmethod
    def zero(cls, spec):
        return cls(spec, np.zeros(spec.total_dim, dtype=complex))

    @classmethod
    def basis_ket(cls, spec, occupations):
        amplitudes = np.zeros(spec.total_dim, dtype=complex)
        amplitudes[spec.rank(occupations)] = 1.0
        return cls(spec, amplitudes)

    @classmethod
    def from_kets(cls, spec, components, normalize=False):
        """Build a superposition from ``{occupations: amplitude}`` or a list of ``(occupations, amplitude)``."""
        if isinstance(components, dict):
            components = components.items()
        amplitudes = np.zeros(spec.total_dim, dtype=complex)
        for occupations, amplitude in components:
            amplitudes[spec.rank(occupations)] += amplitude
        state = cls(spec, amplitudes)
        return state.normalized() if normalize else state

    def __repr__(self):
        return "StateVector(%s, norm=%.6g)" % (self.spec, self.norm())

    def __len__(self):
        return self.spec.total_dim

    @property
    def tensor(self):
        """Amplitudes viewed with one axis per mode."""
        return self.amplitudes.reshape(self.spec.dims)

    def amplitude(self, occupations):
        return complex(self.amplitudes[self.spec.rank(occupations)])

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def is_zero(self, tol=NORM_TOLERANCE):
        return self.norm() <= tol

    def is_normalized(self, tol=NORM_TOLERANCE):
        return abs(self.norm() ** 2 - 1.0) <= tol

    def normalized(self):
        norm = self.norm()
        if norm <= NORM_TOLERANCE:
            raise ValueError('Cannot normalize the zero vector')
        return StateVector(self.spec, self.amplitudes / norm)

    def inner(self, other):
        """<self|other>."""
        self._check_compatible(other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def allclose(self, other, atol=1e-10):
        self._check_compatible(other)
        return bool(np.allclose(self.amplitudes, other.amplitudes, atol=atol, rtol=0))

    def max_deviation(self, other):
        self._check_compatible(other)
        return float(np.max(np.abs(self.amplitudes - other.amplitudes)))

    def _check_compatible(self, other):
        if other.spec != self.spec:
            raise ValueError("States live on different networks: %s and %s" % (self.spec, other.spec))

    def __add__(self, other):
        self._check_compatible(other)
        return StateVector(self.spec, self.amplitudes + other.amplitudes)

    def __sub__(self, other):
        self._check_compatible(other)
        return StateVector(self.spec, self.amplitudes - other.amplitudes)

    def __mul__(self, scalar):
        return StateVector(self.spec, self.amplitudes * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return StateVector(self.spec, self.amplitudes / scalar)

    def __neg__(self):
        return StateVector(self.spec, -self.amplitudes)

    def support(self, tol=NORM_TOLERANCE):
        """Kets carrying an amplitude larger than ``tol`` in magnitude, with their amplitudes."""
        ranks = np.flatnonzero(np.abs(self.amplitudes) > tol)
        return [(self.spec.ket(int(r)), complex(self.amplitudes[r])) for r in ranks]


# Expression grammar: a weighted sum of products of site-local factors.

@dataclass(frozen=True)
class Factor:
    site: int
    op: str

    def __post_init__(self):
        op = self.op.value if isinstance(self.op, Enum) else str(self.op).lower()
        if op not in LOCAL_OPERATORS:
            raise MalformedExpressionError("Unknown local operator %r, expected one of %s" % (self.op, LOCAL_OPERATORS))
        if not isinstance(self.site, (int, np.integer)) or self.site < 0:
            raise MalformedExpressionError("Factor site must be a nonnegative integer, got %r" % (self.site,))
        object.__setattr__(self, 'op', op)
        object.__setattr__(self, 'site', int(self.site))

    def adjoint(self):
        return Factor(self.site, _ADJOINT.get(self.op, self.op))

    @property
    def is_ladder(self):
        return self.op in LADDER_OPERATORS

    def __str__(self):
        return '%s%s' % (self.op, self.site)


@dataclass(frozen=True)
class Term:
    """``weight`` times the ordered product of ``factors``; the rightmost factor acts first."""
    weight: complex
    factors: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'weight', complex(self.weight))
        object.__setattr__(self, 'factors', tuple(self.factors))

    def adjoint(self):
        return Term(self.weight.conjugate(), tuple(f.adjoint() for f in reversed(self.factors)))

    def __mul__(self, other):
        if isinstance(other, Term):
            return Term(self.weight * other.weight, self.factors + other.factors)
        return Term(self.weight * other, self.factors)

    def key(self):
        # products of commuting site-local factors are compared irrespective of site order
        if any(f.is_ladder for f in self.factors):
            return self.factors
        sites = [f.site for f in self.factors]
        if len(set(sites)) == len(sites):
            return tuple(sorted(self.factors, key=lambda f: f.site))
        return self.factors

    def __str__(self):
        return '(%s)%s' % (self.weight, ''.join(' ' + str(f) for f in self.factors))


@dataclass(frozen=True)
class OperatorSum:
    """Symbolic sum of weighted factor products; the expression type every builder returns."""
    terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'terms', tuple(self.terms))

    @classmethod
    def hermitian(cls, terms):
        """Close ``terms`` under Hermitian conjugation by appending the adjoint of each term."""
        closed = []
        for term in terms:
            closed.append(term)
            closed.append(term.adjoint())
        return cls(tuple(closed))

    def __add__(self, other):
        return OperatorSum(self.terms + _as_sum(other).terms)

    def __radd__(self, other):
        return _as_sum(other) + self

    def __sub__(self, other):
        return self + (-1) * _as_sum(other)

    def __mul__(self, other):
        if isinstance(other, OperatorSum):
            return OperatorSum(tuple(a * b for a in self.terms for b in other.terms))
        return OperatorSum(tuple(t * other for t in self.terms))

    def __rmul__(self, scalar):
        return OperatorSum(tuple(Term(scalar * t.weight, t.factors) for t in self.terms))

    def __neg__(self):
        return (-1) * self

    def __len__(self):
        return len(self.terms)

    def adjoint(self):
        return OperatorSum(tuple(t.adjoint() for t in self.terms))

    def simplified(self, tol=0.0):
        """Merge terms with identical factor keys and drop vanishing weights."""
        merged = {}
        for term in self.terms:
            key = term.key()
            merged[key] = merged.get(key, 0j) + term.weight
        return OperatorSum(tuple(Term(w, k) for k, w in merged.items() if abs(w) > tol))

    def is_formally_self_adjoint(self, tol=1e-12):
        ours = self.simplified().terms
        theirs = dict((t.key(), t.weight) for t in self.adjoint().simplified().terms)
        mine = dict((t.key(), t.weight) for t in ours)
        keys = set(mine) | set(theirs)
        return all(abs(mine.get(k, 0j) - theirs.get(k, 0j)) <= tol for k in keys)

    def sites(self):
        return sorted(set(f.site for t in self.terms for f in t.factors))

    def __str__(self):
        return ' + '.join(str(t) for t in self.terms) or '0'


def _as_sum(value):
    if isinstance(value, OperatorSum):
        return value
    if isinstance(value, Term):
        return OperatorSum((value,))
    return OperatorSum((Term(value, ()),))


def identity():
    return OperatorSum((Term(1.0, ()),))


def create(site):
    return OperatorSum((Term(1.0, (Factor(site, 'create'),)),))


def annihilate(site):
    return OperatorSum((Term(1.0, (Factor(site, 'annihilate'),)),))


def number(site):
    return OperatorSum((Term(1.0, (Factor(site, 'number'),)),))


def pauli(site, axis):
    return OperatorSum((Term(1.0, (Factor(site, PauliAxis(axis).value),)),))


def total_number(spec, sites=None):
    sites = range(spec.n_modes) if sites is None else sites
    return OperatorSum(tuple(Term(1.0, (Factor(s, 'number'),)) for s in sites))


# Local matrices, in the ascending occupation order of each mode.

_PAULI = {
    'x': np.array([[0, 1], [1, 0]], dtype=complex),
    'y': np.array([[0, 1j], [-1j, 0]], dtype=complex),
    'z': np.array([[-1, 0], [0, 1]], dtype=complex),
}


def local_matrix(mode, op):
    """Matrix of a site-local operator on one mode."""
    dim = mode.dim
    if op == 'identity':
        return np.eye(dim, dtype=complex)
    if op == 'number':
        return np.diag(np.arange(dim)).astype(complex)
    if op == 'create':
        return np.diag(np.sqrt(np.arange(1, dim)), -1).astype(complex)
    if op == 'annihilate':
        return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)
    if op in _PAULI:
        if not mode.is_fermion:
            raise MalformedExpressionError("Pauli operator %r requires a fermion mode, got %s" % (op, mode))
        return _PAULI[op].copy()
    raise MalformedExpressionError("Unknown local operator %r" % (op,))


def _string_signs(spec, site):
    """(-1) to the number of occupied fermion modes preceding ``site``, broadcast over the mode axes."""
    signs = np.ones(spec.dims)
    for k in spec.fermion_sites:
        if k >= site:
            break
        shape = [1] * spec.n_modes
        shape[k] = 2
        signs = signs * np.array([1.0, -1.0]).reshape(shape)
    return signs


def _apply_factor(spec, factor, psi, rep):
    """Apply one factor to ``psi`` shaped ``spec.dims + batch``."""
    if factor.site >= spec.n_modes:
        raise MalformedExpressionError("Factor %s references site %s of a %s-mode network"
                                       % (factor, factor.site, spec.n_modes))
    if factor.op == 'identity':
        return psi
    mode = spec.modes[factor.site]
    matrix = local_matrix(mode, factor.op)
    psi = np.moveaxis(np.tensordot(matrix, psi, axes=([1], [factor.site])), 0, factor.site)
    if factor.is_ladder and mode.is_fermion and rep is FermionRepresentation.STRING_CORRECTED:
        signs = _string_signs(spec, factor.site)
        psi = psi * signs.reshape(signs.shape + (1,) * (psi.ndim - spec.n_modes))
    return psi


def _apply_expression(spec, expression, psi, rep):
    rep = FermionRepresentation(rep)
    expression = _as_sum(expression)
    result = np.zeros_like(psi, dtype=complex)
    for term in expression.terms:
        if term.weight == 0:
            continue
        image = psi
        for factor in reversed(term.factors):
            image = _apply_factor(spec, factor, image, rep)
        result = result + term.weight * image
    return result


def apply_operator(state, expression, rep=FermionRepresentation.STRING_CORRECTED):
    """Apply a symbolic expression to a state without materializing its matrix."""
    psi = state.amplitudes.reshape(state.spec.dims)
    return StateVector(state.spec, _apply_expression(state.spec, expression, psi, rep).reshape(-1))


def apply_ladder(state, site, which, rep=FermionRepresentation.STRING_CORRECTED):
    """Apply b+/b (or f+/f) at ``site``; returns the zero vector when the ket is annihilated or truncated."""
    state.spec.check_site(site)
    return apply_operator(state, OperatorSum((Term(1.0, (Factor(site, Ladder(which).value),)),)), rep)


def apply_pauli(state, site, axis):
    """Apply sigma_x, sigma_y or sigma_z at a fermion ``site``."""
    state.spec.check_site(site)
    if not state.spec.modes[site].is_fermion:
        raise ValueError("Pauli operators act on fermion modes only; site %s is %s" % (site, state.spec.modes[site]))
    return apply_operator(state, pauli(site, axis))


def operator_matrix(spec, expression, rep=FermionRepresentation.STRING_CORRECTED):
    """Materialize an expression as a dense ``total_dim x total_dim`` matrix.

    The matrix is built by applying the expression to every basis ket, so it agrees with :func:`apply_operator`
    by construction.
    """
    guard = dense_guard()
    if spec.total_dim > guard:
        raise DenseGuardError("Dimension %s exceeds the dense guard %s" % (spec.total_dim, guard))
    batch = np.eye(spec.total_dim, dtype=complex).reshape(spec.dims + (spec.total_dim,))
    return _apply_expression(spec, expression, batch, rep).reshape(spec.total_dim, spec.total_dim)


def expectation(state, expression, rep=FermionRepresentation.STRING_CORRECTED):
    """<psi|O|psi> for an expression or an already materialized matrix."""
    if isinstance(expression, np.ndarray):
        if expression.shape != (state.spec.total_dim, state.spec.total_dim):
            raise ValueError("Operator of shape %s does not act on dimension %s"
                             % (expression.shape, state.spec.total_dim))
        return complex(np.vdot(state.amplitudes, expression @ state.amplitudes))
    sites = _as_sum(expression).sites()
    if sites and sites[-1] >= state.spec.n_modes:
        raise ValueError("Expression acts on site %s but the state has %s modes" % (sites[-1], state.spec.n_modes))
    return state.inner(apply_operator(state, expression, rep))


def embed_state(state, spec):
    """Copy a state into a network with the same modes but equal or larger boson cutoffs."""
    if len(spec.modes) != state.spec.n_modes or any(
            big.kind is not small.kind or big.cutoff < small.cutoff
            for big, small in zip(spec.modes, state.spec.modes)):
        raise ValueError("Cannot embed %s into %s" % (state.spec, spec))
    tensor = np.zeros(spec.dims, dtype=complex)
    tensor[tuple(slice(0, d) for d in state.spec.dims)] = state.tensor
    return StateVector(spec, tensor.reshape(-1))


def product_state(spec, local_amplitudes=None):
    """Tensor product of per-site amplitude vectors; sites not listed are in their vacuum."""
    local_amplitudes = local_amplitudes or {}
    vectors = []
    for site, mode in enumerate(spec.modes):
        vector = np.zeros(mode.dim, dtype=complex)
        if site in local_amplitudes:
            given = np.asarray(local_amplitudes[site], dtype=complex)
            if given.shape[0] > mode.dim:
                raise ValueError("Site %s has dimension %s, got %s amplitudes" % (site, mode.dim, given.shape[0]))
            vector[:given.shape[0]] = given
        else:
            vector[0] = 1.0
        vectors.append(vector)
    return StateVector(spec, reduce(np.kron, vectors))


def entangled_pair_state(spec, site_i, site_j, occupations_a, occupations_b, sign=1, background=None):
    """(|a> + sign |b>)/sqrt(2) on sites (i, j), every other site in its ``background`` amplitudes (vacuum by default).

    :param occupations_a: occupations ``(n_i, n_j)`` of the first component.
    :param occupations_b: occupations of the second component; must differ from the first.
    """
    spec.check_site(site_i)
    spec.check_site(site_j)
    if site_i == site_j:
        raise ValueError("A pair state needs two distinct sites, got %s twice" % site_i)
    if tuple(occupations_a) == tuple(occupations_b):
        raise ValueError("Pair components must differ, got %s twice" % (tuple(occupations_a),))
    background = dict(background or {})
    components = []
    for occupations in (occupations_a, occupations_b):
        local = dict(background)
        for site, n in zip((site_i, site_j), occupations):
            if not 0 <= n <= spec.modes[site].cutoff:
                raise ValueError("Occupation %s is outside %s at site %s" % (n, spec.modes[site], site))
            vector = np.zeros(spec.modes[site].dim, dtype=complex)
            vector[n] = 1.0
            local[site] = vector
        components.append(product_state(spec, local))
    return (components[0] + sign * components[1]) / np.sqrt(2.0)


def singlet_state(spec, site_i, site_j, background=None):
    """(|01> - |10>)/sqrt(2) on two fermion sites."""
    return entangled_pair_state(spec, site_i, site_j, (0, 1), (1, 0), -1, background)


def triplet_state(spec, site_i, site_j, background=None):
    """(|01> + |10>)/sqrt(2) on two fermion sites."""
    return entangled_pair_state(spec, site_i, site_j, (0, 1), (1, 0), 1, background)


def boson_pair_state(spec, site_i, site_j, n, m, sign=1, background=None):
    """(|n m> + sign |m n>)/sqrt(2) on two boson sites, the bosonic analogue of the singlet and triplet."""
    for site in (site_i, site_j):
        spec.check_site(site)
        if not spec.modes[site].is_boson:
            raise ValueError("Boson pair state needs boson sites, site %s is %s" % (site, spec.modes[site]))
    return entangled_pair_state(spec, site_i, site_j, (n, m), (m, n), sign, background)
