"""Builders for the oscillator-network Hamiltonians.

Every builder returns a :py:class:`HamiltonianSum`, a symbolic expression closed under Hermitian conjugation
that can be materialized with :py:func:`susy_dfs.fock.operator_matrix` or applied directly to a state.
Units have hbar = 2, so the (hbar/2) prefactors are all one.
"""
import logging
from dataclasses import dataclass

import numpy as np

from susy_dfs.constants import HBAR, HERMITIAN_TOLERANCE
from susy_dfs.fock import Factor, ModeKind, OperatorSum, PauliAxis, Term, identity

logger = logging.getLogger(__name__)

HALF_HBAR = HBAR / 2


class CouplingMatrix(object):
    """Hermitian N x N angular-frequency matrix omega_ij between the modes listed in ``sites``.

    :param matrix: square array-like of complex couplings; must be Hermitian within 1e-12.
    :param sites: network sites the rows refer to, by default ``0..N-1``.
    """

    def __init__(self, matrix, sites=None):
        matrix = np.array(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("Coupling matrix must be square, got shape %s" % (matrix.shape,))
        deviation = np.max(np.abs(matrix - matrix.conj().T)) if matrix.size else 0.0
        if deviation > HERMITIAN_TOLERANCE:
            raise ValueError("Coupling matrix is not Hermitian (max deviation %.3g)" % deviation)
        if sites is None:
            sites = range(matrix.shape[0])
        sites = tuple(int(s) for s in sites)
        if len(sites) != matrix.shape[0]:
            raise ValueError("%s sites given for a %sx%s coupling matrix" % (len(sites), matrix.shape[0], matrix.shape[0]))
        if len(set(sites)) != len(sites):
            raise ValueError("Coupling sites must be distinct, got %s" % (sites,))
        matrix.setflags(write=False)
        self.matrix = matrix
        self.sites = sites

    @classmethod
    def zeros(cls, n, sites=None):
        return cls(np.zeros((n, n)), sites)

    @classmethod
    def random(cls, n, seed, sites=None, scale=1.0, real=False):
        """Seeded random Hermitian coupling drawn through ``Generator(PCG64(seed))``."""
        rng = np.random.Generator(np.random.PCG64(seed))
        a = rng.normal(size=(n, n))
        if not real:
            a = a + 1j * rng.normal(size=(n, n))
        return cls(scale * (a + a.conj().T) / 2, sites)

    @property
    def n(self):
        return self.matrix.shape[0]

    def is_real(self, tol=HERMITIAN_TOLERANCE):
        return bool(np.all(np.abs(self.matrix.imag) <= tol))

    def shifted(self, delta):
        """The same coupling with ``delta`` added to every self-energy."""
        return CouplingMatrix(self.matrix + delta * np.eye(self.n), self.sites)

    def on_sites(self, sites):
        return CouplingMatrix(self.matrix, sites)

    def __eq__(self, other):
        return (isinstance(other, CouplingMatrix) and self.sites == other.sites
                and np.array_equal(self.matrix, other.matrix))

    def __repr__(self):
        return 'CouplingMatrix(n=%s, sites=%s)' % (self.n, self.sites)


@dataclass(frozen=True)
class HamiltonianSum(OperatorSum):
    """An :py:class:`OperatorSum` that is formally self-adjoint, tagged with how it was built."""
    label: str = ''
    include_ground_offset: bool = False

    @classmethod
    def from_sum(cls, expression, label='', include_ground_offset=False):
        return cls(tuple(expression.terms), label, include_ground_offset)

    def __add__(self, other):
        label = '+'.join(x for x in (self.label, getattr(other, 'label', '')) if x)
        offset = self.include_ground_offset or getattr(other, 'include_ground_offset', False)
        return HamiltonianSum.from_sum(OperatorSum.__add__(self, other), label, offset)


def _check_kinds(spec, sites, kind, what):
    if spec is None:
        return
    for site in sites:
        spec.check_site(site)
        if spec.modes[site].kind is not kind:
            raise ValueError("%s requires %s modes, site %s is %s" % (what, kind.value, site, spec.modes[site]))


def _hopping_terms(coupling, weight=HALF_HBAR):
    """Terms of (hbar/2) sum_ij omega_ij a_i+ a_j, written as self-energies plus i>j pairs with their adjoints."""
    terms = []
    sites = coupling.sites
    for i in range(coupling.n):
        w = coupling.matrix[i, i]
        if w != 0:
            terms.append(Term(weight * w, (Factor(sites[i], 'create'), Factor(sites[i], 'annihilate'))))
    for i in range(coupling.n):
        for j in range(i):
            w = coupling.matrix[i, j]
            if w == 0:
                continue
            term = Term(weight * w, (Factor(sites[i], 'create'), Factor(sites[j], 'annihilate')))
            terms.extend([term, term.adjoint()])
    return terms


def build_boson_network(coupling, spec=None):
    """Fully-interacting boson network (hbar/2) sum_ij omega_ij b_i+ b_j.

    :param coupling: :py:class:`CouplingMatrix` over boson sites.
    :param spec: optional network used to check that every coupled site is a boson.
    """
    _check_kinds(spec, coupling.sites, ModeKind.BOSON, 'Boson network')
    return HamiltonianSum(tuple(_hopping_terms(coupling)), 'boson_network')


def build_fermion_network_ladder(coupling, spec=None):
    """Fermion network written with ladder operators, (hbar/2) sum_ij omega_ij f_i+ f_j.

    This is the form the quasi-particle transform diagonalizes. It is not the spin-product network of
    :py:func:`build_fermion_network_spin`.
    """
    _check_kinds(spec, coupling.sites, ModeKind.FERMION, 'Fermion ladder network')
    return HamiltonianSum(tuple(_hopping_terms(coupling)), 'fermion_network_ladder')


def build_fermion_network_spin(coupling, spec=None, basis_per_link=None, axis=PauliAxis.Z):
    """Fermion spin network (hbar/2) sum_ij omega_ij s_i s_j with s = sigma/2 on the chosen axis.

    The sum runs over every ordered pair, diagonal included.

    :param basis_per_link: optional ``{(i, j): axis}`` overriding the default axis for a link (either order).
    :param axis: default Pauli axis, Z unless told otherwise.
    """
    _check_kinds(spec, coupling.sites, ModeKind.FERMION, 'Fermion spin network')
    basis_per_link = basis_per_link or {}
    sites = coupling.sites
    terms = []
    for i in range(coupling.n):
        for j in range(coupling.n):
            w = coupling.matrix[i, j]
            if w == 0:
                continue
            if abs(w.imag) > HERMITIAN_TOLERANCE:
                raise ValueError("Spin network coupling omega[%s,%s] = %s must be real: both factors are the same "
                                 "Hermitian Pauli operator" % (i, j, w))
            link_axis = basis_per_link.get((sites[i], sites[j]), basis_per_link.get((sites[j], sites[i]), axis))
            op = PauliAxis(link_axis).value
            terms.append(Term(HALF_HBAR * w.real / 4, (Factor(sites[i], op), Factor(sites[j], op))))
    return HamiltonianSum(tuple(terms), 'fermion_network_spin')


def build_dephasing_interaction(system_sites, env_sites, couplings, axis=PauliAxis.Z, spec=None):
    """System-environment coupling sum over (s, e) of (hbar/2) w_se s_s s_e, with s = sigma/2.

    There are no intra-system or intra-environment terms.

    :param couplings: ``{(system_site, env_site): weight}`` or an array shaped (len(system), len(env)).
    :param axis: one Pauli axis for every link, or ``{env_site: axis}`` giving each environment spin its own.
    """
    system_sites = tuple(system_sites)
    env_sites = tuple(env_sites)
    overlap = set(system_sites) & set(env_sites)
    if overlap:
        raise ValueError("System and environment sites overlap: %s" % sorted(overlap))
    _check_kinds(spec, system_sites + env_sites, ModeKind.FERMION, 'Dephasing interaction')
    if not isinstance(couplings, dict):
        weights = np.asarray(couplings, dtype=float).reshape(len(system_sites), len(env_sites))
        couplings = dict(((s, e), weights[a, b]) for a, s in enumerate(system_sites)
                         for b, e in enumerate(env_sites))
    terms = []
    for s in system_sites:
        for e in env_sites:
            w = couplings.get((s, e), 0.0)
            if w == 0:
                continue
            if isinstance(w, complex) and abs(w.imag) > HERMITIAN_TOLERANCE:
                raise ValueError("Dephasing weight for link (%s, %s) must be real, got %s" % (s, e, w))
            link_axis = axis.get(e, PauliAxis.Z) if isinstance(axis, dict) else axis
            op = PauliAxis(link_axis).value
            terms.append(Term(HALF_HBAR * float(np.real(w)) / 4, (Factor(s, op), Factor(e, op))))
    return HamiltonianSum(tuple(terms), 'dephasing')


def build_mixed_interaction(pairs, spec=None):
    """Boson-fermion hopping sum of omega_ij b_i+ f_j + h.c. over ``(boson_site, fermion_site, omega)`` pairs."""
    terms = []
    for boson_site, fermion_site, w in pairs:
        _check_kinds(spec, (boson_site,), ModeKind.BOSON, 'Mixed interaction boson end')
        _check_kinds(spec, (fermion_site,), ModeKind.FERMION, 'Mixed interaction fermion end')
        if w == 0:
            continue
        term = Term(w, (Factor(boson_site, 'create'), Factor(fermion_site, 'annihilate')))
        terms.extend([term, term.adjoint()])
    return HamiltonianSum(tuple(terms), 'mixed')


def build_boson_oscillators(frequencies, sites=None, include_ground_offset=False):
    """Independent bosons, sum of (hbar w_i/2)(b_i+ b_i + 1); the +1 only with ``include_ground_offset``."""
    sites = range(len(frequencies)) if sites is None else sites
    terms = []
    for site, w in zip(sites, frequencies):
        terms.append(Term(HALF_HBAR * w, (Factor(site, 'create'), Factor(site, 'annihilate'))))
        if include_ground_offset:
            terms.append(Term(HALF_HBAR * w, ()))
    return HamiltonianSum(tuple(terms), 'boson_oscillators', include_ground_offset)


def build_fermion_oscillators(frequencies, sites=None, include_ground_offset=False):
    """Independent fermions, sum of (hbar w_i/2)(f_i+ f_i - 1); the -1 only with ``include_ground_offset``."""
    sites = range(len(frequencies)) if sites is None else sites
    terms = []
    for site, w in zip(sites, frequencies):
        terms.append(Term(HALF_HBAR * w, (Factor(site, 'create'), Factor(site, 'annihilate'))))
        if include_ground_offset:
            terms.append(Term(-HALF_HBAR * w, ()))
    return HamiltonianSum(tuple(terms), 'fermion_oscillators', include_ground_offset)


def half_pauli(site, axis=PauliAxis.Z):
    return OperatorSum((Term(0.5, (Factor(site, PauliAxis(axis).value),)),))


def spin_from_ladder(site):
    """f+ f - 1/2, which equals sigma_z / 2 on a fermion mode."""
    return OperatorSum((Term(1.0, (Factor(site, 'create'), Factor(site, 'annihilate'))),)) - 0.5 * identity()


def spin_product_ladder_expansion(i, j):
    """Ladder-operator expansion of (sigma_z/2)_i (sigma_z/2)_j:
    f_i+ f_i f_j+ f_j - (f_i+ f_i + f_j+ f_j)/2 + 1/4.
    """
    ni = (Factor(i, 'create'), Factor(i, 'annihilate'))
    nj = (Factor(j, 'create'), Factor(j, 'annihilate'))
    return OperatorSum((Term(1.0, ni + nj), Term(-0.5, ni), Term(-0.5, nj), Term(0.25, ())))


def random_dephasing_links(system_sites, env_sites, seed, collective=True, axes=None, scale=1.0):
    """Seeded random system-environment links for :py:func:`build_dephasing_interaction`.

    Each environment spin gets a random axis (unless ``axes`` fixes them) and a random weight; with
    ``collective`` the weight is the same towards every system site.

    :return: ``(couplings, axis_by_env_site)``
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    choices = list(PauliAxis)
    axis_by_env = {}
    couplings = {}
    for e in env_sites:
        if axes is None:
            axis_by_env[e] = choices[int(rng.integers(len(choices)))]
        else:
            axis_by_env[e] = PauliAxis(axes[e] if isinstance(axes, dict) else axes)
        shared = scale * rng.uniform(0.5, 1.5)
        for s in system_sites:
            couplings[(s, e)] = shared if collective else scale * rng.uniform(0.5, 1.5)
    return couplings, axis_by_env
