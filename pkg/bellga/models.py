"""
Hidden-variable models

The sign model (outcomes (eps, -eps)), the vector toy model (outcomes eps*a and
-eps*b), the bivector model (outcomes mu.a and mu.b) and the deterministic
local strategies that bound every local +/-1 model.

Hidden draws come from a counter-based generator: the draw for sample index i
is a pure function of (seed, stream, i), so batches can be split across
workers without changing any value.
"""

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from .algebra import Direction, Orientation, bivector_outcome, dot
from .common import InvalidArgumentError, InvalidInputError, ResourceLimitError

logger = logging.getLogger(__name__)

ENUMERATION_CAP = 2 ** 20

# Philox yields four 64-bit words per counter value
_WORDS_PER_BLOCK = 4


def _check_sign(value, what):
    if isinstance(value, bool) or value not in (1, -1):
        raise InvalidInputError(f"{what} must be +1 or -1, got {value!r}")


@dataclass(frozen=True)
class SignHidden:
    """Shared sign eps; particle 1 carries eps, particle 2 carries -eps"""

    epsilon: int

    def __post_init__(self):
        _check_sign(self.epsilon, "epsilon")


@dataclass(frozen=True)
class VectorOutcomePair:
    side1: Direction
    side2: Direction

    def correlation(self):
        """The toy model's "correlation function": the scalar product of both outcomes"""
        return dot(self.side1, self.side2)


@dataclass(frozen=True)
class ResponseTable:
    """Deterministic local strategy: a fixed sign per setting index on each side"""

    side1_responses: tuple
    side2_responses: tuple

    def __post_init__(self):
        for value in (*self.side1_responses, *self.side2_responses):
            _check_sign(value, "Response")

    def response(self, side, index):
        return (self.side1_responses if side == 1 else self.side2_responses)[index]

    def to_dict(self):
        return {'A': list(self.side1_responses), 'B': list(self.side2_responses)}


@dataclass(frozen=True)
class HiddenSample:
    """One hidden draw: either a sign eps or an orientation lambda"""

    sign: SignHidden = None
    orientation: Orientation = None

    def __post_init__(self):
        if (self.sign is None) == (self.orientation is None):
            raise InvalidInputError("HiddenSample needs exactly one of sign or orientation")

    @property
    def value(self):
        return self.sign.epsilon if self.sign is not None else self.orientation.lam


# ============================================================================
# HIDDEN DRAWS
# ============================================================================

def _bit_generator(seed, stream, block):
    key = (int(seed) & 0xFFFFFFFFFFFFFFFF) | (int(stream) << 64)
    return np.random.Philox(key=key, counter=block)


def draw_signs(seed, start, count, stream=0):
    """
    Fair signs for sample indices start .. start+count-1.

    Element m equals draw_sign(seed, start + m, stream).epsilon whatever the
    batch boundaries are. Reference sequence for seed 0, stream 0, indices
    0..9: +1 +1 +1 -1 -1 +1 -1 -1 +1 +1.

    Returns:
        np.ndarray of int8 values in {+1, -1}
    """
    if start < 0 or count < 0:
        raise InvalidArgumentError(f"Sample range must be non-negative, got start={start}, count={count}")
    if count == 0:
        return np.zeros(0, dtype=np.int8)

    block, offset = divmod(int(start), _WORDS_PER_BLOCK)
    words = _bit_generator(seed, stream, block).random_raw(offset + count)[offset:]
    return np.where((words >> np.uint64(63)) == 0, 1, -1).astype(np.int8)


def draw_sign(seed, index, stream=0):
    return SignHidden(int(draw_signs(seed, index, 1, stream)[0]))


def draw_orientation(seed, index, stream=0):
    return Orientation(int(draw_signs(seed, index, 1, stream)[0]))


# ============================================================================
# MODELS
# ============================================================================

def sign_model_outcomes(h, a, b):
    """(eps, -eps): the particle goes along the axis when eps = +1, opposite otherwise"""
    return h.epsilon, -h.epsilon


def sign_model_batch(epsilon, a, b):
    """Vectorised sign model over an array of eps draws"""
    epsilon = np.asarray(epsilon, dtype=np.int8)
    return epsilon, -epsilon


def vector_model_outcomes(h, a, b):
    eps = h.epsilon
    return VectorOutcomePair(a if eps == 1 else -a, -b if eps == 1 else b)


def vector_model_correlations(epsilon, a, b):
    """Per-sample scalar products (eps1*a).(eps2*b) with eps1 = -eps2 = eps"""
    epsilon = np.asarray(epsilon, dtype=np.float64)[:, None]
    side1 = epsilon * a.as_array()
    side2 = -epsilon * b.as_array()
    return np.einsum('ij,ij->i', side1, side2)


def bivector_model_outcomes(h, a, b):
    """(mu.a, mu.b) for the shared orientation"""
    return bivector_outcome(h, a), bivector_outcome(h, b)


def enumerate_strategies(n_a, n_b, cap=ENUMERATION_CAP):
    """
    All deterministic response tables for n_a settings on side 1 and n_b on side 2.

    Yields 2**(n_a + n_b) tables exactly once, in lexicographic order with +1
    before -1.

    Raises:
        InvalidArgumentError: n_a or n_b below 1
        ResourceLimitError: 2**(n_a + n_b) exceeds cap
    """
    if n_a < 1 or n_b < 1:
        raise InvalidArgumentError(f"Setting counts must be at least 1, got {n_a} and {n_b}")
    total = 2 ** (n_a + n_b)
    if total > cap:
        raise ResourceLimitError(f"{total} strategies exceed the enumeration cap of {cap}")

    logger.debug("Enumerating %d deterministic strategies (%d x %d settings)", total, n_a, n_b)
    return _strategies(n_a, n_b)


def _strategies(n_a, n_b):
    for signs in itertools.product((1, -1), repeat=n_a + n_b):
        yield ResponseTable(tuple(signs[:n_a]), tuple(signs[n_a:]))
