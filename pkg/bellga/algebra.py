"""
Dense geometric algebra of Cl(3,0)

Multivectors are 8 real coefficients over the basis
{1, e1, e2, e3, e23, e31, e12, e123}. The geometric product is a precomputed
8x8 sign-and-index table applied with numpy. Also houses the unit analyser
directions, the hidden orientation mu = lambda*I and the bivector
"measurement results" mu.a together with their products.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .common import (
    CONVENTIONS, EXACT_TOL,
    ContractViolationError, InvalidArgumentError, InvalidInputError,
)

logger = logging.getLogger(__name__)

BASIS = ('1', 'e1', 'e2', 'e3', 'e23', 'e31', 'e12', 'e123')
GRADES = np.array([0, 1, 1, 1, 2, 2, 2, 3])
BIVECTOR_SLOTS = (4, 5, 6)

# Blade bitmask of each basis slot, and the sign relating the slot to the
# canonically ordered blade (e31 = -e1e3).
_MASKS = (0b000, 0b001, 0b010, 0b100, 0b110, 0b101, 0b011, 0b111)
_ORIENT = (1, 1, 1, 1, 1, -1, 1, 1)


def _reordering_sign(mask_a, mask_b):
    """Sign picked up by sorting the product of two canonical blades"""
    mask_a >>= 1
    swaps = 0
    while mask_a:
        swaps += bin(mask_a & mask_b).count('1')
        mask_a >>= 1
    return -1 if swaps & 1 else 1


def _build_tables():
    slot_of_mask = {mask: slot for slot, mask in enumerate(_MASKS)}
    index = np.zeros((8, 8), dtype=np.intp)
    sign = np.zeros((8, 8), dtype=np.float64)
    for i, mask_i in enumerate(_MASKS):
        for j, mask_j in enumerate(_MASKS):
            k = slot_of_mask[mask_i ^ mask_j]
            index[i, j] = k
            # Euclidean metric: e_i e_i = +1, so only reordering contributes
            sign[i, j] = _ORIENT[i] * _ORIENT[j] * _ORIENT[k] * _reordering_sign(mask_i, mask_j)
    product = np.zeros((8, 8, 8), dtype=np.float64)
    for i in range(8):
        for j in range(8):
            product[i, j, index[i, j]] = sign[i, j]
    return index, sign, product


PRODUCT_INDEX, PRODUCT_SIGN, _PRODUCT = _build_tables()


class Multivector:
    """Immutable element of Cl(3,0) with finite coefficients"""

    __slots__ = ('_c',)

    def __init__(self, coefficients):
        c = np.array(coefficients, dtype=np.float64)
        if c.shape != (8,):
            raise InvalidInputError(f"A multivector needs 8 coefficients, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InvalidInputError(f"Non-finite multivector coefficients: {c.tolist()}")
        c.flags.writeable = False
        self._c = c

    @classmethod
    def _trusted(cls, c):
        obj = cls.__new__(cls)
        c.flags.writeable = False
        obj._c = c
        return obj

    @property
    def coefficients(self):
        return self._c

    def __getitem__(self, blade):
        if isinstance(blade, str):
            blade = BASIS.index(blade)
        return float(self._c[blade])

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = scalar(other)
        if not isinstance(other, Multivector):
            return NotImplemented
        return Multivector(self._c + other._c)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = scalar(other)
        if not isinstance(other, Multivector):
            return NotImplemented
        return Multivector(self._c - other._c)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Multivector._trusted(-self._c)

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return geometric_product(self, other)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Multivector(self._c * float(other))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Multivector(self._c * float(other))
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return bool(np.array_equal(self._c, other._c))

    def __hash__(self):
        return hash(self._c.tobytes())

    def __repr__(self):
        terms = [f"{c:+.12g}*{name}" for c, name in zip(self._c, BASIS) if c != 0.0]
        return f"Multivector({' '.join(terms) or '0'})"

    def grade(self, k):
        return grade_projection(self, k)

    @property
    def scalar_part(self):
        return float(self._c[0])

    def norm(self):
        """Euclidean norm of the coefficients (sqrt of <x reverse(x)>_0 in Cl(3,0))"""
        return float(math.sqrt(math.fsum(c * c for c in self._c)))

    def reverse(self):
        # grades 2 and 3 flip sign under reversion
        return Multivector._trusted(self._c * np.where(GRADES >= 2, -1.0, 1.0))

    def allclose(self, other, tol=EXACT_TOL):
        return float(np.max(np.abs(self._c - other._c))) <= tol

    def to_dict(self):
        return {name: float(c) for name, c in zip(BASIS, self._c)}


def scalar(value):
    c = np.zeros(8)
    c[0] = value
    return Multivector(c)


def basis_blade(name):
    c = np.zeros(8)
    c[BASIS.index(name)] = 1.0
    return Multivector._trusted(c)


def vector(x, y, z):
    return Multivector([0.0, x, y, z, 0.0, 0.0, 0.0, 0.0])


def bivector(c23, c31, c12):
    return Multivector([0.0, 0.0, 0.0, 0.0, c23, c31, c12, 0.0])


ONE = basis_blade('1')
E1 = basis_blade('e1')
E2 = basis_blade('e2')
E3 = basis_blade('e3')
E23 = basis_blade('e23')
E31 = basis_blade('e31')
E12 = basis_blade('e12')
I = basis_blade('e123')


def geometric_product(x, y):
    """
    Geometric product of two multivectors.

    Bilinear and associative; basis vectors anticommute and square to +1.

    Raises:
        InvalidInputError: either operand is not a valid Multivector
    """
    if not isinstance(x, Multivector) or not isinstance(y, Multivector):
        raise InvalidInputError("geometric_product expects two Multivectors")
    return Multivector._trusted(np.einsum('i,j,ijk->k', x.coefficients, y.coefficients, _PRODUCT))


def grade_projection(x, k):
    """Return the grade-k part of x (zero coefficients elsewhere)"""
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or not 0 <= k <= 3:
        raise InvalidArgumentError(f"Grade must be one of 0, 1, 2, 3, got {k!r}")
    return Multivector._trusted(np.where(GRADES == k, x.coefficients, 0.0))


def commutator(x, y):
    return geometric_product(x, y) - geometric_product(y, x)


# ============================================================================
# DIRECTIONS AND ORIENTATIONS
# ============================================================================

@dataclass(frozen=True)
class Direction:
    """Unit vector in R^3 (analyser setting)"""

    x: float
    y: float
    z: float

    def __post_init__(self):
        values = (self.x, self.y, self.z)
        if not all(math.isfinite(v) for v in values):
            raise InvalidInputError(f"Non-finite direction components: {values}")
        norm_sq = math.fsum(v * v for v in values)
        if abs(norm_sq - 1.0) > EXACT_TOL:
            raise InvalidInputError(
                f"Direction must be a unit vector (|d|^2 = {norm_sq!r}); normalize it before use"
            )

    @classmethod
    def from_angle(cls, degrees, u=None, v=None):
        """In-plane direction cos(t)*u + sin(t)*v; plane defaults to (e1, e2)"""
        u = u or X_AXIS
        v = v or Y_AXIS
        t = math.radians(degrees)
        c, s = math.cos(t), math.sin(t)
        # exact axis values at multiples of 90 degrees
        if float(degrees) % 90.0 == 0.0:
            c, s = round(c), round(s)
        return cls(c * u.x + s * v.x, c * u.y + s * v.y, c * u.z + s * v.z)

    @classmethod
    def from_vector(cls, values):
        x, y, z = (float(v) for v in values)
        return cls(x, y, z)

    def __neg__(self):
        return Direction(-self.x, -self.y, -self.z)

    def as_array(self):
        return np.array([self.x, self.y, self.z])

    def as_multivector(self):
        return vector(self.x, self.y, self.z)

    def to_list(self):
        return [self.x, self.y, self.z]


X_AXIS = Direction(1.0, 0.0, 0.0)
Y_AXIS = Direction(0.0, 1.0, 0.0)
Z_AXIS = Direction(0.0, 0.0, 1.0)


def random_direction(rng):
    """Uniformly distributed unit vector drawn from a numpy Generator"""
    while True:
        v = rng.normal(size=3)
        n = float(np.linalg.norm(v))
        if n > 1e-6:
            return Direction.from_vector(v / n)


def dot(a, b):
    return a.x * b.x + a.y * b.y + a.z * b.z


def cross(a, b):
    return (
        a.y * b.z - a.z * b.y,
        a.z * b.x - a.x * b.z,
        a.x * b.y - a.y * b.x,
    )


def wedge(a, b):
    """a^b as a grade-2 multivector; equals I*(a x b)"""
    return bivector(*cross(a, b))


@dataclass(frozen=True)
class Orientation:
    """Handedness lambda of the hidden trivector mu = lambda*I"""

    lam: int

    def __post_init__(self):
        if isinstance(self.lam, bool) or self.lam not in (1, -1):
            raise InvalidInputError(f"Orientation must be +1 or -1, got {self.lam!r}")

    @property
    def mu(self):
        return I * float(self.lam)

    def flipped(self):
        return Orientation(-self.lam)


ORIENTATIONS = (Orientation(1), Orientation(-1))


@dataclass(frozen=True)
class BivectorOutcome:
    """Algebraic "measurement result" mu.a: a unit bivector"""

    value: Multivector

    def __post_init__(self):
        c = self.value.coefficients
        stray = max(abs(c[0]), *np.abs(c[1:4]), abs(c[7]))
        if stray > EXACT_TOL:
            raise InvalidInputError(f"Bivector outcome has non-bivector parts: {self.value!r}")
        norm = math.sqrt(math.fsum(float(c[k]) ** 2 for k in BIVECTOR_SLOTS))
        if abs(norm - 1.0) > EXACT_TOL:
            raise InvalidInputError(f"Bivector outcome must have unit norm, got {norm!r}")

    def __neg__(self):
        return BivectorOutcome(-self.value)

    def coefficient(self, slot):
        return self.value[BIVECTOR_SLOTS[slot]]


def bivector_outcome(mu, a):
    """A_a(mu) = (lambda*I)*a"""
    return BivectorOutcome(geometric_product(mu.mu, a.as_multivector()))


def outcome_product(A, B, a, b, mu, convention='standard'):
    """
    Product of the two algebraic outcomes of one pair.

    standard: plain geometric product A*B = -a.b - I(a x b), independent of lambda.
    oriented: handedness-dependent product -a.b - lambda*I(a x b), which equals
              A*B for lambda = +1 and B*A for lambda = -1.

    Raises:
        ContractViolationError: A or B is not the outcome of (mu, a) / (mu, b)
        InvalidArgumentError: unknown convention
    """
    if convention not in CONVENTIONS:
        raise InvalidArgumentError(f"Unknown product convention '{convention}' (expected one of: {', '.join(CONVENTIONS)})")
    for outcome, setting, side in ((A, a, 1), (B, b, 2)):
        expected = bivector_outcome(mu, setting)
        if not outcome.value.allclose(expected.value):
            raise ContractViolationError(
                f"Side {side} outcome {outcome.value!r} is not mu.setting for lambda={mu.lam}"
            )

    if convention == 'standard':
        return geometric_product(A.value, B.value)

    dual = geometric_product(I, vector(*cross(a, b)))
    return scalar(-dot(a, b)) - dual * float(mu.lam)
