"""Scenario entities: the parts of a scenario document and how each turns into simulation objects."""
import copy
import logging
from contextlib import contextmanager

import numpy as np

from susy_dfs.constants import DENSITY_TOLERANCE, HERMITIAN_TOLERANCE, SCHEMA_VERSION, dense_guard
from susy_dfs.descriptors import (BaseDescriptor, BooleanDescriptor, ComplexDescriptor, ComplexListDescriptor,
                                  ComplexMatrixDescriptor, EntityDescriptor, EntityListDescriptor, EnumDescriptor,
                                  FloatDescriptor, FloatListDescriptor, IntegerDescriptor, IntegerListDescriptor,
                                  ScenarioError, StringDescriptor, join_path)
from susy_dfs.evolution import KickDistribution, KickTarget, PhaseKickModel, TimeGrid
from susy_dfs.fock import (Factor, FermionRepresentation, ModeKind, ModeSpec, NetworkSpec, OperatorSum, PauliAxis,
                           StateVector, Term, boson_pair_state, product_state, singlet_state, total_number,
                           triplet_state)
from susy_dfs.hamiltonians import (CouplingMatrix, HamiltonianSum, build_boson_network, build_dephasing_interaction,
                                   build_fermion_network_ladder, build_fermion_network_spin, build_mixed_interaction,
                                   random_dephasing_links)
from susy_dfs.metrics import (CoherenceObservable, CoherencePair, ExpectationObservable, RelativePhaseObservable,
                              rotate_spins)
from susy_dfs.susy import SusyQubit, build_dfs_state

logger = logging.getLogger(__name__)

ENGINES = ('quasi', 'dense', 'phase_kick')


@contextmanager
def field_errors(field):
    """Re-raise domain ``ValueError`` as :py:class:`ScenarioError` for ``field``."""
    try:
        yield
    except ScenarioError:
        raise
    except ValueError as e:
        raise ScenarioError(field, str(e))


class Entity(object):
    """Base class for every part of a scenario document.

    An entity wraps the JSON object it was read from; its attributes are descriptors over that object. Keys no
    descriptor knows about are rejected, and absent keys with a default are filled in so that a loaded document
    always carries its complete configuration.
    """

    def __init__(self, root=None, path=''):
        self.root = {} if root is None else root
        self.path = path
        known = self._descriptors()
        for key in self.root:
            if key not in known:
                raise ScenarioError(join_path(path, key), "unknown field for %s (expected one of %s)"
                                    % (self.__class__.__name__, ', '.join(sorted(known))))
        for key, descriptor in self._defaults().items():
            if key not in self.root:
                self.root[key] = copy.deepcopy(descriptor.default)

    @classmethod
    def _descriptors(cls):
        known = {}
        for klass in reversed(cls.__mro__):
            for value in vars(klass).values():
                if isinstance(value, BaseDescriptor):
                    known[value.key] = value
        return known

    def _defaults(self):
        return dict((key, d) for key, d in self._descriptors().items() if d.default is not None)

    def check_fields(self):
        """Build every nested entity present in the document, so unknown keys are reported wherever they are."""
        for descriptor in self._descriptors().values():
            if isinstance(descriptor, (EntityDescriptor, EntityListDescriptor)):
                value = descriptor.__get__(self, type(self))
                for child in value if isinstance(value, list) else [value]:
                    if child is not None:
                        child.check_fields()

    @classmethod
    def create(cls, **kwargs):
        """Create an instance from attributes and return it"""
        instance = cls.__new__(cls)
        instance.root, instance.path = {}, ''
        descriptors = dict((name, value) for klass in cls.__mro__ for name, value in vars(klass).items()
                           if isinstance(value, BaseDescriptor))
        for attribute in kwargs:
            if attribute in descriptors:
                setattr(instance, attribute, kwargs.get(attribute))
            else:
                raise TypeError("%s create: got an unexpected keyword argument '%s'" % (cls.__name__, attribute))
        return cls(instance.root)

    def to_dict(self):
        return copy.deepcopy(self.root)

    def __eq__(self, other):
        return type(self) is type(other) and self.root == other.root

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return "%s(%s)" % (self.__class__.__name__, self.path or '<root>')


class Mode(Entity):
    kind = EnumDescriptor('kind', ModeKind, required=True)
    cutoff = IntegerDescriptor('cutoff', minimum=1, default=1)

    def mode_spec(self):
        with field_errors(self.path):
            return ModeSpec(self.kind, self.cutoff)


class Network(Entity):
    modes = EntityListDescriptor('modes', Mode, required=True)

    def spec(self):
        modes = self.modes
        if not modes:
            raise ScenarioError(join_path(self.path, 'modes'), 'a network needs at least one mode')
        return NetworkSpec(tuple(m.mode_spec() for m in modes))


class CouplingBlock(Entity):
    """A Hermitian coupling matrix over ``sites``, given explicitly or drawn from the scenario seed."""
    sites = IntegerListDescriptor('sites', required=True)
    matrix = ComplexMatrixDescriptor('matrix')
    random = BooleanDescriptor('random', default=False)
    scale = FloatDescriptor('scale', minimum=0.0, default=1.0)
    real = BooleanDescriptor('real', default=False)
    form = StringDescriptor('form', choices=('ladder', 'spin'), default='ladder')
    axis = EnumDescriptor('axis', PauliAxis, default='z')

    def coupling(self, seed):
        sites = self.sites
        if self.random == (self.matrix is not None):
            raise ScenarioError(self.path, "give exactly one of 'matrix' and 'random'")
        if self.random:
            return CouplingMatrix.random(len(sites), seed, sites, self.scale, self.real)
        with field_errors(join_path(self.path, 'matrix')):
            return CouplingMatrix(np.array(self.matrix, dtype=complex), sites)


class MixedLink(Entity):
    boson = IntegerDescriptor('boson', minimum=0, required=True)
    fermion = IntegerDescriptor('fermion', minimum=0, required=True)
    weight = ComplexDescriptor('weight', default=1.0)


class DephasingLinks(Entity):
    """System-environment dephasing links.

    ``weights`` is one weight per environment spin (collective coupling), or one row of weights per system spin.
    ``axis`` is one of x, y, z, a list with one axis per environment spin, or ``random``.
    """
    system = IntegerListDescriptor('system', required=True)
    environment = IntegerListDescriptor('environment', default=[])
    weights = BaseDescriptor('weights')
    axis = BaseDescriptor('axis', default='z')
    random = BooleanDescriptor('random', default=False)
    collective = BooleanDescriptor('collective', default=True)
    scale = FloatDescriptor('scale', minimum=0.0, default=1.0)

    def links(self, seed):
        """Return ``(couplings, axis)`` ready for :py:func:`build_dephasing_interaction`."""
        system, env = self.system, self.environment
        axis = self.axis
        axis_field = join_path(self.path, 'axis')
        fixed_axes = None
        if axis != 'random':
            if isinstance(axis, list):
                if len(axis) != len(env):
                    raise ScenarioError(axis_field, "expected %s axes, got %s" % (len(env), len(axis)))
                with field_errors(axis_field):
                    fixed_axes = dict((e, PauliAxis(a)) for e, a in zip(env, axis))
            else:
                with field_errors(axis_field):
                    fixed_axes = dict((e, PauliAxis(axis)) for e in env)
        if self.random:
            if self.weights is not None:
                raise ScenarioError(self.path, "give exactly one of 'weights' and 'random'")
            return random_dephasing_links(system, env, seed, self.collective, fixed_axes, self.scale)
        axes = fixed_axes
        if axes is None:
            _, axes = random_dephasing_links(system, env, seed, True, None, self.scale)
        return self._fixed_weights(system, env), axes

    def _fixed_weights(self, system, env):
        field = join_path(self.path, 'weights')
        weights = self.weights
        if weights is None:
            raise ScenarioError(field, 'required unless random is true')
        if not isinstance(weights, list):
            raise ScenarioError(field, "expected a list, got %r" % (weights,))
        with field_errors(field):
            array = np.array(weights, dtype=float)
        if array.shape == (len(env),):
            array = np.tile(array, (len(system), 1))
        if array.shape != (len(system), len(env)):
            raise ScenarioError(field, "expected %s weights or a %sx%s array, got shape %s"
                                % (len(env), len(system), len(env), array.shape))
        return dict(((s, e), float(array[a, b])) for a, s in enumerate(system) for b, e in enumerate(env))


class Couplings(Entity):
    boson = EntityListDescriptor('boson', CouplingBlock)
    fermion = EntityListDescriptor('fermion', CouplingBlock)
    mixed = EntityListDescriptor('mixed', MixedLink)
    dephasing = EntityListDescriptor('dephasing', DephasingLinks)

    def block_seeds(self, seed):
        """Independent child seeds for every random block, in document order."""
        count = len(self.boson) + len(self.fermion) + len(self.dephasing)
        return list(np.random.SeedSequence(seed).spawn(count)) if count else []

    def blocks(self, spec, seed):
        """``(kind, block entity, CouplingMatrix)`` for every boson and fermion block, checked against ``spec``."""
        seeds = self.block_seeds(seed)
        result = []
        for kind, blocks in ((ModeKind.BOSON, self.boson), (ModeKind.FERMION, self.fermion)):
            for block in blocks:
                _check_sites(spec, block.sites, kind, join_path(block.path, 'sites'))
                if kind is ModeKind.BOSON and block.form != 'ladder':
                    raise ScenarioError(join_path(block.path, 'form'), 'boson blocks only have the ladder form')
                result.append((kind, block, block.coupling(seeds.pop(0))))
        return result

    def sector_couplings(self, spec, seed):
        """Sum the ladder blocks of each kind into one coupling per sector for the quasi engine."""
        sectors = {}
        for kind, block, coupling in self.blocks(spec, seed):
            if block.form != 'ladder':
                raise ScenarioError(join_path(block.path, 'form'), 'the quasi engine needs ladder-form blocks')
            sites, matrix = sectors.get(kind, ((), np.zeros((0, 0))))
            union = tuple(sorted(set(sites) | set(coupling.sites)))
            merged = np.zeros((len(union), len(union)), dtype=complex)
            for source_sites, source in ((sites, matrix), (coupling.sites, coupling.matrix)):
                index = [union.index(s) for s in source_sites]
                if index:
                    merged[np.ix_(index, index)] += source
            sectors[kind] = (union, merged)
        result = []
        for kind in (ModeKind.BOSON, ModeKind.FERMION):
            sites, matrix = sectors.get(kind, ((), np.zeros((0, 0))))
            result.append(CouplingMatrix(matrix, sites))
        return tuple(result)

    def hamiltonian(self, spec, seed):
        seeds = self.block_seeds(seed)[len(self.boson) + len(self.fermion):]
        total = HamiltonianSum((), 'scenario')
        for kind, block, coupling in self.blocks(spec, seed):
            if kind is ModeKind.BOSON:
                total = total + build_boson_network(coupling, spec)
            elif block.form == 'ladder':
                total = total + build_fermion_network_ladder(coupling, spec)
            else:
                with field_errors(join_path(block.path, 'matrix')):
                    total = total + build_fermion_network_spin(coupling, spec, axis=block.axis)
        if self.mixed:
            pairs = []
            for link in self.mixed:
                _check_site(spec, link.boson, ModeKind.BOSON, join_path(link.path, 'boson'))
                _check_site(spec, link.fermion, ModeKind.FERMION, join_path(link.path, 'fermion'))
                pairs.append((link.boson, link.fermion, link.weight))
            total = total + build_mixed_interaction(pairs, spec)
        for links, child in zip(self.dephasing, seeds):
            _check_sites(spec, links.system, ModeKind.FERMION, join_path(links.path, 'system'))
            _check_sites(spec, links.environment, ModeKind.FERMION, join_path(links.path, 'environment'))
            couplings, axis = links.links(child)
            with field_errors(links.path):
                total = total + build_dephasing_interaction(links.system, links.environment, couplings, axis, spec)
        return total

    def is_quadratic_ladder(self):
        return not self.mixed and not self.dephasing and all(b.form == 'ladder' for b in self.fermion)


def _check_site(spec, site, kind, field):
    if not 0 <= site < spec.n_modes:
        raise ScenarioError(field, "site %s does not exist in a %s-mode network" % (site, spec.n_modes))
    if kind is not None and spec.modes[site].kind is not kind:
        raise ScenarioError(field, "site %s is %s, expected a %s" % (site, spec.modes[site], kind.value))


def _check_sites(spec, sites, kind, field):
    for i, site in enumerate(sites):
        _check_site(spec, site, kind, join_path(field, i))


class KetAmplitude(Entity):
    ket = IntegerListDescriptor('ket', required=True)
    amplitude = ComplexDescriptor('amplitude', required=True)


class SiteAmplitudes(Entity):
    site = IntegerDescriptor('site', minimum=0, required=True)
    amplitudes = ComplexListDescriptor('amplitudes', required=True)


class InitialState(Entity):
    kind = StringDescriptor('kind', choices=('vacuum', 'singlet', 'triplet', 'susy_qubit', 'boson_pair',
                                             'amplitudes'), default='vacuum')
    sites = IntegerListDescriptor('sites')
    sign = StringDescriptor('sign', choices=('plus', 'minus'), default='plus')
    occupations = IntegerListDescriptor('occupations', length=2)
    amplitudes = EntityListDescriptor('amplitudes', KetAmplitude)
    normalize = BooleanDescriptor('normalize', default=False)
    background = EntityListDescriptor('background', SiteAmplitudes)
    rotation = ComplexMatrixDescriptor('rotation')

    def _pair_sites(self, spec, kinds):
        sites = self.sites
        field = join_path(self.path, 'sites')
        if sites is None or len(sites) != 2:
            raise ScenarioError(field, "%s needs exactly two sites" % self.kind)
        for i, (site, kind) in enumerate(zip(sites, kinds)):
            _check_site(spec, site, kind, join_path(field, i))
        return sites

    def state(self, spec):
        background = {}
        for entry in self.background:
            _check_site(spec, entry.site, None, join_path(entry.path, 'site'))
            background[entry.site] = np.array(entry.amplitudes, dtype=complex)
        kind = self.kind
        with field_errors(self.path):
            if kind == 'vacuum':
                state = product_state(spec, background)
            elif kind in ('singlet', 'triplet'):
                i, j = self._pair_sites(spec, (ModeKind.FERMION, ModeKind.FERMION))
                state = (singlet_state if kind == 'singlet' else triplet_state)(spec, i, j, background)
            elif kind == 'susy_qubit':
                b, f = self._pair_sites(spec, (ModeKind.BOSON, ModeKind.FERMION))
                state = build_dfs_state(SusyQubit(self.sign, b, f), spec, background)
            elif kind == 'boson_pair':
                i, j = self._pair_sites(spec, (ModeKind.BOSON, ModeKind.BOSON))
                n, m = self.occupations or (0, 1)
                state = boson_pair_state(spec, i, j, n, m, 1 if self.sign == 'plus' else -1, background)
            else:
                if not self.amplitudes:
                    raise ScenarioError(join_path(self.path, 'amplitudes'), 'at least one ket is required')
                components = []
                for entry in self.amplitudes:
                    with field_errors(join_path(entry.path, 'ket')):
                        spec.rank(entry.ket)
                    components.append((entry.ket, entry.amplitude))
                state = StateVector.from_kets(spec, components, normalize=self.normalize)
            if self.rotation is not None:
                state = rotate_spins(state, np.array(self.rotation, dtype=complex))
        if not state.is_normalized(DENSITY_TOLERANCE):
            raise ScenarioError(self.path, "initial state is not normalized (norm %.12g)" % state.norm())
        return state


class Grid(Entity):
    times = FloatListDescriptor('times')
    start = FloatDescriptor('start', minimum=0.0, default=0.0)
    stop = FloatDescriptor('stop', minimum=0.0, default=10.0)
    steps = IntegerDescriptor('steps', minimum=1, default=11)

    RANGE_KEYS = ('start', 'stop', 'steps')

    def __init__(self, root=None, path=''):
        if root is not None and root.get('times') is not None:
            given = [key for key in self.RANGE_KEYS if key in root]
            if given:
                raise ScenarioError(join_path(path, given[0]), "give either 'times' or start/stop/steps, not both")
        Entity.__init__(self, root, path)

    def _defaults(self):
        defaults = Entity._defaults(self)
        if self.root.get('times') is not None:
            for key in self.RANGE_KEYS:
                defaults.pop(key)
        return defaults

    def time_grid(self):
        with field_errors(self.path):
            if self.times is not None:
                return TimeGrid(self.times)
            return TimeGrid.linspace(self.start, self.stop, self.steps)


class ExpressionTerm(Entity):
    weight = ComplexDescriptor('weight', default=1.0)
    factors = BaseDescriptor('factors', default=[])

    def term(self, spec):
        factors = []
        field = join_path(self.path, 'factors')
        if not isinstance(self.factors, list):
            raise ScenarioError(field, "expected a list of [site, operator] pairs, got %r" % (self.factors,))
        for i, item in enumerate(self.factors):
            if not (isinstance(item, list) and len(item) == 2 and isinstance(item[0], int)):
                raise ScenarioError(join_path(field, i), "expected [site, operator], got %r" % (item,))
            _check_site(spec, item[0], None, join_path(field, i))
            with field_errors(join_path(field, i)):
                factor = Factor(item[0], item[1])
                if factor.op in ('x', 'y', 'z') and not spec.modes[item[0]].is_fermion:
                    raise ValueError("Pauli operator %r requires a fermion mode" % factor.op)
            factors.append(factor)
        return Term(self.weight, tuple(factors))


class Observable(Entity):
    id = StringDescriptor('id', required=True)
    kind = StringDescriptor('kind', choices=('coherence', 'degree_of_coherence', 'relative_phase', 'expectation',
                                             'energy', 'number'), required=True)
    sites = IntegerListDescriptor('sites')
    ket_a = IntegerListDescriptor('ket_a')
    ket_b = IntegerListDescriptor('ket_b')
    terms = EntityListDescriptor('terms', ExpressionTerm)

    def pair(self, spec):
        for key in ('sites', 'ket_a', 'ket_b'):
            if getattr(self, key) is None:
                raise ScenarioError(join_path(self.path, key), "required for a %s observable" % self.kind)
        _check_sites(spec, self.sites, None, join_path(self.path, 'sites'))
        with field_errors(self.path):
            return CoherencePair(self.ket_a, self.ket_b, self.sites)

    def observable(self, spec, hamiltonian, rep):
        kind = self.kind
        if kind in ('coherence', 'degree_of_coherence'):
            return CoherenceObservable(self.pair(spec), self.id, normalized=kind == 'degree_of_coherence')
        if kind == 'relative_phase':
            return RelativePhaseObservable(self.pair(spec), self.id)
        if kind == 'energy':
            return ExpectationObservable(hamiltonian, self.id, rep)
        if kind == 'number':
            sites = self.sites
            if sites is not None:
                _check_sites(spec, sites, None, join_path(self.path, 'sites'))
            return ExpectationObservable(total_number(spec, sites), self.id, rep)
        if not self.terms:
            raise ScenarioError(join_path(self.path, 'terms'), 'an expectation observable needs terms')
        return ExpectationObservable(OperatorSum(tuple(t.term(spec) for t in self.terms)), self.id, rep)


class PhaseKickSettings(Entity):
    distribution = EnumDescriptor('distribution', KickDistribution, default='gaussian')
    scale = FloatDescriptor('scale', minimum=0.0, default=0.1)
    kicks_per_unit_time = FloatDescriptor('kicks_per_unit_time', default=1.0)
    samples = IntegerDescriptor('samples', minimum=1, default=10000)
    alpha = ComplexDescriptor('alpha', default=0.7071067811865476)
    beta = ComplexDescriptor('beta', default=0.7071067811865476)
    target = EnumDescriptor('target', KickTarget, default='single')
    chunk_size = IntegerDescriptor('chunk_size', minimum=1, default=1000)

    def model(self, seed):
        with field_errors(self.path):
            return PhaseKickModel(self.distribution, self.scale, self.kicks_per_unit_time, seed, self.target)


class Scenario(Entity):
    """A complete, self-describing simulation run.

    Example: ::

        scenario = Scenario.create(name='vacuum', network=Network.create(modes=[Mode.create(kind='boson')]),
                                   grid=Grid.create(stop=1.0, steps=3))
    """
    schema_version = IntegerDescriptor('schema_version', default=SCHEMA_VERSION)
    name = StringDescriptor('name', required=True)
    description = StringDescriptor('description')
    network = EntityDescriptor('network', Network, required=True)
    couplings = EntityDescriptor('couplings', Couplings, default={})
    initial_state = EntityDescriptor('initial_state', InitialState, default={})
    engine = StringDescriptor('engine', choices=ENGINES, default='dense')
    grid = EntityDescriptor('grid', Grid, default={})
    observables = EntityListDescriptor('observables', Observable)
    seed = IntegerDescriptor('seed', minimum=0, default=0)
    fermion_representation = EnumDescriptor('fermion_representation', FermionRepresentation,
                                            default='string_corrected')
    phase_kick = EntityDescriptor('phase_kick', PhaseKickSettings)

    def validate(self):
        """Resolve every reference against the network; raise :py:class:`ScenarioError` on the first problem."""
        if self.schema_version != SCHEMA_VERSION:
            raise ScenarioError('schema_version', "unsupported schema version %s (expected %s)"
                                % (self.schema_version, SCHEMA_VERSION))
        self.check_fields()
        spec = self.network.spec()
        hamiltonian = self.couplings.hamiltonian(spec, self.seed)
        self.initial_state.state(spec)
        self.grid.time_grid()
        ids = set()
        for observable in self.observables:
            if observable.id in ids:
                raise ScenarioError(join_path(observable.path, 'id'), "duplicate observable id %r" % observable.id)
            ids.add(observable.id)
            observable.observable(spec, hamiltonian, self.fermion_representation)
        if self.engine == 'dense' and spec.total_dim > dense_guard():
            raise ScenarioError('engine', "dense engine refuses dimension %s (guard %s)"
                                % (spec.total_dim, dense_guard()))
        if self.engine == 'quasi':
            if not self.couplings.is_quadratic_ladder():
                raise ScenarioError('engine', 'the quasi engine only handles ladder-form boson and fermion blocks')
            _, fermion = self.couplings.sector_couplings(spec, self.seed)
            off_diagonal = fermion.matrix - np.diag(np.diag(fermion.matrix))
            if (self.fermion_representation is FermionRepresentation.SPIN_TENSOR
                    and np.any(np.abs(off_diagonal) > HERMITIAN_TOLERANCE)):
                raise ScenarioError('fermion_representation', 'the quasi engine mixes coupled fermion modes and '
                                    'needs string_corrected fermions')
        if self.engine == 'phase_kick':
            if self.phase_kick is None:
                raise ScenarioError('phase_kick', 'required when engine is phase_kick')
            settings = self.phase_kick
            settings.model(self.seed)
            norm = abs(settings.alpha) ** 2 + abs(settings.beta) ** 2
            if abs(norm - 1.0) > 1e-10:
                raise ScenarioError('phase_kick', "|alpha|^2 + |beta|^2 is %.12g, expected 1" % norm)
        logger.debug('Scenario %s validated (%s modes, engine %s)', self.name, spec.n_modes, self.engine)
        return self
