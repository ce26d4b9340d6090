"""Descriptors mapping scenario entity attributes onto their parsed JSON document.

Every entity keeps the JSON object it was loaded from in ``instance.root``; a descriptor reads and converts one
key of that object on access and writes the JSON-native form back on assignment. Conversion failures raise
:py:class:`ScenarioError` naming the dotted field path of the offending value.
"""
import logging
import numbers

logger = logging.getLogger(__name__)


class ScenarioError(ValueError):
    """A scenario document is malformed; ``field`` is the dotted path of the offending value."""

    def __init__(self, field, message):
        ValueError.__init__(self, "%s: %s" % (field or '<root>', message))
        self.field = field


def join_path(path, key):
    if isinstance(key, int):
        return '%s[%s]' % (path, key)
    return '%s.%s' % (path, key) if path else key


def parse_complex(value, field):
    """A JSON number or a ``[real, imag]`` pair."""
    if isinstance(value, bool):
        raise ScenarioError(field, "expected a number, got %r" % (value,))
    if isinstance(value, numbers.Real):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
            isinstance(v, numbers.Real) and not isinstance(v, bool) for v in value):
        return complex(value[0], value[1])
    raise ScenarioError(field, "expected a number or a [real, imag] pair, got %r" % (value,))


def dump_complex(value):
    value = complex(value)
    if value.imag == 0:
        return value.real
    return [value.real, value.imag]


class JsonElement(object):
    """Abstract class providing access to the JSON object of an instance"""
    def rootnode(self, instance):
        return instance.root


class Nestable(JsonElement):
    """Abstract base allowing the descriptor to reach into nested objects."""
    def __init__(self, nesting):
        if nesting:
            self.rootkeys = nesting
        else:
            self.rootkeys = []

    def rootnode_from_root(self, root):
        _rootnode = root
        for rootkey in self.rootkeys:
            _rootnode = _rootnode.setdefault(rootkey, {})
        return _rootnode

    def rootnode(self, instance):
        return self.rootnode_from_root(instance.root)


class BaseDescriptor(Nestable):
    """Abstract base descriptor for an instance attribute stored under ``key``.

    :param key: JSON key of the value.
    :param default: value reported, and filled in on load, when the key is absent.
    :param required: raise instead of falling back on the default.
    """

    def __init__(self, key, default=None, required=False, nesting=None):
        Nestable.__init__(self, nesting)
        self.key = key
        self.default = default
        self.required = required

    def field(self, instance):
        path = getattr(instance, 'path', '')
        for rootkey in self.rootkeys:
            path = join_path(path, rootkey)
        return join_path(path, self.key)

    def get_node(self, instance):
        node = self.rootnode(instance)
        if self.key in node:
            return node[self.key]
        if self.required:
            raise ScenarioError(self.field(instance), 'required field is missing')
        return self.default

    def __get__(self, instance, cls):
        if instance is None:
            return self
        value = self.get_node(instance)
        if value is None:
            return None
        return self.parse(value, self.field(instance), instance)

    def __set__(self, instance, value):
        self.rootnode(instance)[self.key] = None if value is None else self.dump(value)

    def parse(self, value, field, instance):
        return value

    def dump(self, value):
        return value


class StringDescriptor(BaseDescriptor):
    """An instance attribute containing a string, optionally one of ``choices``."""

    def __init__(self, key, choices=None, **kwargs):
        BaseDescriptor.__init__(self, key, **kwargs)
        self.choices = choices

    def parse(self, value, field, instance):
        if not isinstance(value, str):
            raise ScenarioError(field, "expected a string, got %r" % (value,))
        if self.choices and value not in self.choices:
            raise ScenarioError(field, "expected one of %s, got %r" % (', '.join(self.choices), value))
        return value


class EnumDescriptor(BaseDescriptor):
    """An instance attribute containing an Enum member represented by its string value."""

    def __init__(self, key, klass, **kwargs):
        BaseDescriptor.__init__(self, key, **kwargs)
        self.klass = klass

    def parse(self, value, field, instance):
        try:
            return self.klass(value)
        except ValueError:
            raise ScenarioError(field, "expected one of %s, got %r"
                                % (', '.join(m.value for m in self.klass), value))

    def dump(self, value):
        return self.klass(value).value


class IntegerDescriptor(BaseDescriptor):
    """An instance attribute containing an integer represented by a JSON number."""

    def __init__(self, key, minimum=None, **kwargs):
        BaseDescriptor.__init__(self, key, **kwargs)
        self.minimum = minimum

    def parse(self, value, field, instance):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ScenarioError(field, "expected an integer, got %r" % (value,))
        if self.minimum is not None and value < self.minimum:
            raise ScenarioError(field, "must be >= %s, got %s" % (self.minimum, value))
        return value

    def dump(self, value):
        return int(value)


class FloatDescriptor(BaseDescriptor):
    """An instance attribute containing a real number."""

    def __init__(self, key, minimum=None, **kwargs):
        BaseDescriptor.__init__(self, key, **kwargs)
        self.minimum = minimum

    def parse(self, value, field, instance):
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise ScenarioError(field, "expected a number, got %r" % (value,))
        if self.minimum is not None and value < self.minimum:
            raise ScenarioError(field, "must be >= %s, got %s" % (self.minimum, value))
        return float(value)

    def dump(self, value):
        return float(value)


class BooleanDescriptor(BaseDescriptor):
    """An instance attribute containing a JSON boolean."""

    def parse(self, value, field, instance):
        if not isinstance(value, bool):
            raise ScenarioError(field, "expected true or false, got %r" % (value,))
        return value

    def dump(self, value):
        return bool(value)


class ComplexDescriptor(BaseDescriptor):
    """An instance attribute containing a complex number, written as a number or ``[real, imag]``."""

    def parse(self, value, field, instance):
        return parse_complex(value, field)

    def dump(self, value):
        return dump_complex(value)


class IntegerListDescriptor(BaseDescriptor):
    """An instance attribute containing a list of integers, optionally of fixed ``length``."""

    def __init__(self, key, length=None, minimum=0, **kwargs):
        BaseDescriptor.__init__(self, key, **kwargs)
        self.length = length
        self.minimum = minimum

    def parse(self, value, field, instance):
        if not isinstance(value, list):
            raise ScenarioError(field, "expected a list of integers, got %r" % (value,))
        if self.length is not None and len(value) != self.length:
            raise ScenarioError(field, "expected %s entries, got %s" % (self.length, len(value)))
        for i, item in enumerate(value):
            if isinstance(item, bool) or not isinstance(item, int):
                raise ScenarioError(join_path(field, i), "expected an integer, got %r" % (item,))
            if self.minimum is not None and item < self.minimum:
                raise ScenarioError(join_path(field, i), "must be >= %s, got %s" % (self.minimum, item))
        return tuple(value)

    def dump(self, value):
        return [int(v) for v in value]


class FloatListDescriptor(BaseDescriptor):
    """An instance attribute containing a list of real numbers."""

    def parse(self, value, field, instance):
        if not isinstance(value, list):
            raise ScenarioError(field, "expected a list of numbers, got %r" % (value,))
        for i, item in enumerate(value):
            if isinstance(item, bool) or not isinstance(item, numbers.Real):
                raise ScenarioError(join_path(field, i), "expected a number, got %r" % (item,))
        return tuple(float(v) for v in value)

    def dump(self, value):
        return [float(v) for v in value]


class ComplexListDescriptor(BaseDescriptor):
    """An instance attribute containing a list of complex numbers."""

    def parse(self, value, field, instance):
        if not isinstance(value, list):
            raise ScenarioError(field, "expected a list, got %r" % (value,))
        return tuple(parse_complex(v, join_path(field, i)) for i, v in enumerate(value))

    def dump(self, value):
        return [dump_complex(v) for v in value]


class ComplexMatrixDescriptor(BaseDescriptor):
    """An instance attribute containing a square matrix given as a list of rows of complex entries."""

    def parse(self, value, field, instance):
        if not isinstance(value, list) or not all(isinstance(row, list) for row in value):
            raise ScenarioError(field, "expected a list of rows, got %r" % (value,))
        n = len(value)
        rows = []
        for i, row in enumerate(value):
            if len(row) != n:
                raise ScenarioError(join_path(field, i), "expected %s entries for a square matrix, got %s"
                                    % (n, len(row)))
            rows.append([parse_complex(v, join_path(join_path(field, i), j)) for j, v in enumerate(row)])
        return rows

    def dump(self, value):
        return [[dump_complex(v) for v in row] for row in value]


class EntityDescriptor(BaseDescriptor):
    """An instance attribute referencing a nested entity sharing the parent's JSON object."""

    def __init__(self, key, klass, **kwargs):
        BaseDescriptor.__init__(self, key, **kwargs)
        self.klass = klass

    def __get__(self, instance, cls):
        if instance is None:
            return self
        node = self.rootnode(instance)
        if self.key not in node:
            if self.required:
                raise ScenarioError(self.field(instance), 'required field is missing')
            return None
        if not isinstance(node[self.key], dict):
            raise ScenarioError(self.field(instance), "expected an object, got %r" % (node[self.key],))
        return self.klass(node[self.key], path=self.field(instance))

    def __set__(self, instance, value):
        self.rootnode(instance)[self.key] = value.root


class EntityListDescriptor(BaseDescriptor):
    """An instance attribute yielding a list of entities, one per JSON object of the list."""

    def __init__(self, key, klass, **kwargs):
        kwargs.setdefault('default', [])
        BaseDescriptor.__init__(self, key, **kwargs)
        self.klass = klass

    def __get__(self, instance, cls):
        if instance is None:
            return self
        items = self.get_node(instance)
        field = self.field(instance)
        if not isinstance(items, list):
            raise ScenarioError(field, "expected a list, got %r" % (items,))
        entities = []
        for i, item in enumerate(items):
            if not isinstance(item, dict):
                raise ScenarioError(join_path(field, i), "expected an object, got %r" % (item,))
            entities.append(self.klass(item, path=join_path(field, i)))
        return entities

    def __set__(self, instance, value):
        self.rootnode(instance)[self.key] = [v.root for v in value]
