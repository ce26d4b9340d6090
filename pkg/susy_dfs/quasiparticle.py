"""Simplified Bogoliubov machinery: number-conserving mode transforms that decouple a quadratic network.

A :py:class:`QuasiBasis` holds the unitary U and the real quasi-frequencies Omega with
H = b+ U diag(Omega) U+ b, so that the quasi-mode creation operators are b'_k+ = sum_i U_ik b_i+.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from math import factorial, sqrt

import numpy as np
import scipy.linalg

from susy_dfs.constants import LEAKAGE_TOLERANCE, UNITARY_TOLERANCE
from susy_dfs.fock import (Factor, FermionRepresentation, ModeSpec, NetworkSpec, OperatorSum, StateVector, Term,
                           apply_operator, embed_state)
from susy_dfs.hamiltonians import CouplingMatrix

logger = logging.getLogger(__name__)

# excitation count up to which transforms run without the ``general`` flag
GUARANTEED_EXCITATIONS = 2


class TruncationError(ValueError):
    """A transformed state does not fit under the declared cutoff.

    :param required_cutoff: the smallest boson cutoff M' for which the transform loses less than the leakage tolerance.
    """

    def __init__(self, message, leakage=None, required_cutoff=None):
        ValueError.__init__(self, message)
        self.leakage = leakage
        self.required_cutoff = required_cutoff


class Direction(Enum):
    TO_QUASI = 'to_quasi'
    FROM_QUASI = 'from_quasi'


@dataclass(frozen=True, eq=False)
class QuasiBasis:
    """Unitary change of basis ``u`` (columns are quasi modes) and ascending quasi-frequencies ``omega``."""
    u: np.ndarray
    omega: np.ndarray
    sites: tuple = field(default=None)

    def __post_init__(self):
        u = np.array(self.u, dtype=complex)
        omega = np.array(self.omega, dtype=float)
        if u.ndim != 2 or u.shape[0] != u.shape[1] or omega.shape != (u.shape[0],):
            raise ValueError("Quasi basis needs a square U and one frequency per mode, got %s and %s"
                             % (u.shape, omega.shape))
        deviation = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) if u.size else 0.0
        if deviation > UNITARY_TOLERANCE:
            raise ValueError("Quasi basis U is not unitary (max deviation %.3g)" % deviation)
        sites = tuple(range(u.shape[0])) if self.sites is None else tuple(int(s) for s in self.sites)
        u.setflags(write=False)
        omega.setflags(write=False)
        object.__setattr__(self, 'u', u)
        object.__setattr__(self, 'omega', omega)
        object.__setattr__(self, 'sites', sites)

    @classmethod
    def identity(cls, sites):
        return cls(np.eye(len(sites)), np.zeros(len(sites)), tuple(sites))

    @property
    def n(self):
        return self.u.shape[0]

    def residual(self, coupling):
        """max |U+ H U - diag(Omega)| for the coupling this basis came from."""
        matrix = coupling.matrix if isinstance(coupling, CouplingMatrix) else np.asarray(coupling)
        return float(np.max(np.abs(self.u.conj().T @ matrix @ self.u - np.diag(self.omega))))

    def _check_spec(self, spec):
        kinds = set()
        for site in self.sites:
            spec.check_site(site)
            kinds.add(spec.modes[site].kind)
        if len(kinds) > 1:
            raise ValueError("A quasi basis cannot mix bosons and fermions (sites %s)" % (self.sites,))

    def mode_unitary(self, spec):
        """Network-wide mode mixing matrix: U on this basis' sites, identity elsewhere."""
        self._check_spec(spec)
        full = np.eye(spec.n_modes, dtype=complex)
        if self.sites:
            full[np.ix_(self.sites, self.sites)] = self.u
        return full

    def frequencies(self, spec):
        """Quasi-frequency of every network mode, zero on modes outside this basis."""
        self._check_spec(spec)
        full = np.zeros(spec.n_modes)
        if self.sites:
            full[list(self.sites)] = self.omega
        return full

    def to_dict(self):
        return {
            'sites': list(self.sites),
            'omega': [float(w) for w in self.omega],
            'u_real': self.u.real.tolist(),
            'u_imag': self.u.imag.tolist(),
        }


@dataclass(frozen=True, eq=False)
class BlockQuasiBasis:
    """Independent quasi bases for the boson and the fermion sector; cross-sector terms are left alone."""
    boson_basis: QuasiBasis
    fermion_basis: QuasiBasis

    def __post_init__(self):
        overlap = set(self.boson_basis.sites) & set(self.fermion_basis.sites)
        if overlap:
            raise ValueError("Boson and fermion blocks share sites %s" % sorted(overlap))

    @property
    def blocks(self):
        return self.boson_basis, self.fermion_basis

    def mode_unitary(self, spec):
        full = self.boson_basis.mode_unitary(spec)
        fermion = self.fermion_basis.mode_unitary(spec)
        sites = self.fermion_basis.sites
        if sites:
            full[np.ix_(sites, sites)] = fermion[np.ix_(sites, sites)]
        return full

    def frequencies(self, spec):
        return self.boson_basis.frequencies(spec) + self.fermion_basis.frequencies(spec)

    def to_dict(self):
        return {'boson': self.boson_basis.to_dict(), 'fermion': self.fermion_basis.to_dict()}


def diagonalize_coupling(coupling):
    """Eigen-decompose a Hermitian coupling into a :py:class:`QuasiBasis`.

    Eigenvalues ascend; each eigenvector is rotated so that its largest-magnitude component is real and positive;
    degenerate eigenvalues are ordered by the lowest original mode index carrying that largest component.

    :param coupling: :py:class:`CouplingMatrix` or a Hermitian array.
    """
    if not isinstance(coupling, CouplingMatrix):
        coupling = CouplingMatrix(coupling)
    if coupling.n == 0:
        return QuasiBasis(np.zeros((0, 0)), np.zeros(0), ())
    omega, u = scipy.linalg.eigh(coupling.matrix)
    magnitudes = np.round(np.abs(u), 12)
    lead = np.argmax(magnitudes, axis=0)
    for k in range(u.shape[1]):
        component = u[lead[k], k]
        u[:, k] = u[:, k] * (abs(component) / component)
    order = sorted(range(len(omega)), key=lambda k: (round(float(omega[k]), 9), int(lead[k])))
    basis = QuasiBasis(u[:, order], omega[order], coupling.sites)
    logger.debug('Diagonalized %s: omega=%s', coupling, basis.omega)
    return basis


def block_diagonalize(boson_coupling, fermion_coupling):
    """Diagonalize the boson and the fermion couplings separately."""
    return BlockQuasiBasis(diagonalize_coupling(boson_coupling), diagonalize_coupling(fermion_coupling))


def _mixed_creation(coefficients, spec):
    return OperatorSum(tuple(Term(c, (Factor(k, 'create'),)) for k, c in enumerate(coefficients)
                             if abs(c) > 0 and k < spec.n_modes))


def _image_of_ket(ket, coefficients, spec, rep):
    """prod_i (sum_k c_ik a_k+)^n_i / sqrt(n_i!) |0>, mode 0 leftmost."""
    image = StateVector.vacuum(spec)
    for site in reversed(range(spec.n_modes)):
        n = ket[site]
        if not n:
            continue
        creation = _mixed_creation(coefficients[site], spec)
        for _ in range(n):
            image = apply_operator(image, creation, rep)
        image = image / sqrt(factorial(n))
    return image


def transform_state(state, basis, direction=Direction.TO_QUASI, rep=FermionRepresentation.STRING_CORRECTED,
                    general=False, strict=True):
    """Re-express ``state`` over quasi-mode occupation kets, or back.

    Every occupied ket is rebuilt from the vacuum with the mixed creation operators, which is exact as long as
    the image stays under the cutoff.

    :param basis: :py:class:`QuasiBasis` or :py:class:`BlockQuasiBasis`.
    :param general: allow kets with more than two excitations (the cost grows exponentially with them).
    :param strict: raise :py:class:`TruncationError` when the image leaks past the cutoff; otherwise return
                   the truncated image.
    """
    direction = Direction(direction)
    spec = state.spec
    mixing = basis.mode_unitary(spec)
    coefficients = mixing.conj() if direction is Direction.TO_QUASI else mixing.T
    support = state.support()
    if not general:
        heavy = [ket for ket, _ in support if sum(ket.occupations) > GUARANTEED_EXCITATIONS]
        if heavy:
            raise ValueError("Ket %s carries more than %s excitations; pass general=True to expand it"
                             % (heavy[0], GUARANTEED_EXCITATIONS))
    result = np.zeros(spec.total_dim, dtype=complex)
    worst = 0.0
    for ket, amplitude in support:
        image = _image_of_ket(ket, coefficients, spec, rep)
        worst = max(worst, abs(1.0 - image.norm() ** 2))
        result += amplitude * image.amplitudes
    if worst > LEAKAGE_TOLERANCE:
        message = "Transform of %s leaks %.3g of the norm past the cutoff" % (spec, worst)
        if strict:
            required = required_cutoff(state, basis, direction, rep) if spec.boson_sites else None
            raise TruncationError(message + "; required cutoff M' = %s" % required, worst, required)
        logger.warning(message)
    return StateVector(spec, result)


def transform_leakage(state, basis, direction=Direction.TO_QUASI, rep=FermionRepresentation.STRING_CORRECTED):
    """Largest per-ket norm loss of :py:func:`transform_state` on ``state``."""
    mixing = basis.mode_unitary(state.spec)
    coefficients = mixing.conj() if Direction(direction) is Direction.TO_QUASI else mixing.T
    worst = 0.0
    for ket, _ in state.support():
        image = _image_of_ket(ket, coefficients, state.spec, rep)
        worst = max(worst, abs(1.0 - image.norm() ** 2))
    return worst


def required_cutoff(state, basis, direction=Direction.TO_QUASI, rep=FermionRepresentation.STRING_CORRECTED):
    """Smallest uniform boson cutoff M' for which transforming ``state`` loses less than the leakage tolerance."""
    spec = state.spec
    if not spec.boson_sites:
        return None
    current = max(spec.modes[s].cutoff for s in spec.boson_sites)
    ceiling = max([current] + [sum(ket[s] for s in spec.boson_sites) for ket, _ in state.support()])
    for cutoff in range(current, ceiling + 1):
        bigger = NetworkSpec(tuple(ModeSpec.boson(max(cutoff, m.cutoff)) if m.is_boson else m for m in spec.modes))
        if transform_leakage(embed_state(state, bigger), basis, direction, rep) < LEAKAGE_TOLERANCE:
            return cutoff
    return int(ceiling)
