"""
CHSH combination and bounds

S = E(a,b) - E(a,b') + E(a',b) + E(a',b'), compared against the classical
bound 2 and the Tsirelson bound 2*sqrt(2); brute force over deterministic
strategies; correlation curves over a plane.
"""

import logging
import math
from dataclasses import dataclass

from .algebra import X_AXIS, Y_AXIS, Direction, dot
from .common import (
    CLASSICAL_BOUND, EXACT_S_SLACK, EXACT_TOL, MC_SIGMA_MARGIN, TSIRELSON_BOUND,
    InvalidArgumentError,
)
from .correlators import SamplingMode
from .models import enumerate_strategies

logger = logging.getLogger(__name__)

PAIR_LABELS = ('E_ab', "E_ab'", "E_a'b", "E_a'b'")
OPTIMAL_ANGLES = (0.0, 90.0, 45.0, 135.0)


@dataclass(frozen=True)
class ChshSettings:
    a: Direction
    a_prime: Direction
    b: Direction
    b_prime: Direction

    def __post_init__(self):
        for name in ('a', 'a_prime', 'b', 'b_prime'):
            if not isinstance(getattr(self, name), Direction):
                raise InvalidArgumentError(f"Setting '{name}' must be a Direction")

    @classmethod
    def from_angles(cls, angles, plane=None):
        """Settings from four in-plane angles in degrees (a, a', b, b')"""
        if len(angles) != 4:
            raise InvalidArgumentError(f"Expected 4 angles (a, a', b, b'), got {len(angles)}")
        u, v = plane or (X_AXIS, Y_AXIS)
        return cls(*(Direction.from_angle(t, u, v) for t in angles))

    def pairs(self):
        """The four (side 1, side 2) pairs in CHSH order"""
        return (
            (self.a, self.b),
            (self.a, self.b_prime),
            (self.a_prime, self.b),
            (self.a_prime, self.b_prime),
        )

    def to_dict(self):
        return {
            'a': self.a.to_list(),
            'a_prime': self.a_prime.to_list(),
            'b': self.b.to_list(),
            'b_prime': self.b_prime.to_list(),
        }


@dataclass(frozen=True)
class ChshResult:
    correlations: tuple
    s: float
    s_stderr: float
    violates_bell: bool
    exact: bool
    classical_bound: float = CLASSICAL_BOUND
    tsirelson: float = TSIRELSON_BOUND

    @property
    def e_ab(self):
        return self.correlations[0]

    @property
    def e_ab_prime(self):
        return self.correlations[1]

    @property
    def e_a_prime_b(self):
        return self.correlations[2]

    @property
    def e_a_prime_b_prime(self):
        return self.correlations[3]

    def to_dict(self):
        return {
            'correlations': {label: e.to_dict() for label, e in zip(PAIR_LABELS, self.correlations)},
            'S': self.s,
            'S_stderr': self.s_stderr,
            'classical_bound': self.classical_bound,
            'tsirelson': self.tsirelson,
            'violates_bell': self.violates_bell,
        }


def combine(e_ab, e_ab_prime, e_a_prime_b, e_a_prime_b_prime):
    return e_ab - e_ab_prime + e_a_prime_b + e_a_prime_b_prime


def chsh_value(correlator, settings, mode=None):
    """
    Evaluate S for a correlator at the given settings.

    Args:
        correlator: Callable (a, b, mode) -> CorrelationEstimate
        settings: ChshSettings
        mode: SamplingMode (exact by default); in Monte Carlo mode each pair
              draws from its own stream

    Returns:
        ChshResult; in Monte Carlo mode the stderr of S combines the four
        pair errors in quadrature and violates_bell uses a 4-sigma margin
    """
    mode = mode or SamplingMode.exact_mode()
    estimates = tuple(
        correlator(x, y, mode if mode.exact else mode.with_stream(k))
        for k, (x, y) in enumerate(settings.pairs())
    )
    s = combine(*(e.mean for e in estimates))
    s_stderr = 0.0 if mode.exact else math.sqrt(math.fsum(e.stderr ** 2 for e in estimates))
    margin = EXACT_S_SLACK if mode.exact else MC_SIGMA_MARGIN * s_stderr

    logger.debug("S = %.12g (stderr %.3g)", s, s_stderr)
    return ChshResult(
        correlations=estimates,
        s=s,
        s_stderr=s_stderr,
        violates_bell=abs(s) > CLASSICAL_BOUND + margin,
        exact=mode.exact,
    )


def optimal_planar_settings(plane=None):
    """Settings at 0, 90, 45 and 135 degrees, where E = -a.b reaches |S| = 2*sqrt(2)"""
    return ChshSettings.from_angles(OPTIMAL_ANGLES, plane)


def random_planar_settings(rng, count, plane=None):
    """`count` settings quadruples with uniform in-plane angles"""
    return [ChshSettings.from_angles(rng.uniform(0.0, 360.0, size=4).tolist(), plane) for _ in range(count)]


# ============================================================================
# DETERMINISTIC STRATEGIES
# ============================================================================

def strategy_s(table):
    """S of a deterministic 2x2 strategy: each E is the product of the two fixed signs"""
    A, B = table.side1_responses, table.side2_responses
    return combine(A[0] * B[0], A[0] * B[1], A[1] * B[0], A[1] * B[1])


def strategy_values(settings):
    """Every deterministic 2x2 strategy with its S at the given settings"""
    if not isinstance(settings, ChshSettings):
        raise InvalidArgumentError("strategy_values expects ChshSettings")
    return [(table, strategy_s(table)) for table in enumerate_strategies(2, 2)]


def max_deterministic_S(settings):
    """Largest S over all 16 deterministic strategies and the first table attaining it"""
    table, s = max(strategy_values(settings), key=lambda row: row[1])
    return s, table


def min_deterministic_S(settings):
    table, s = min(strategy_values(settings), key=lambda row: row[1])
    return s, table


# ============================================================================
# SCANS
# ============================================================================

@dataclass(frozen=True)
class ScanPoint:
    theta_deg: float
    estimate: object
    exact_value: float

    def to_row(self):
        return {
            'theta_deg': self.theta_deg,
            'E_mean': self.estimate.mean,
            'E_exact': self.exact_value,
            'stderr': self.estimate.stderr,
            'n': self.estimate.n,
        }


def correlation_scan(correlator, plane, resolution, mode=None, reference=None):
    """
    E at `resolution` uniformly spaced relative angles in [0, 180] degrees.

    Args:
        correlator: Callable (a, b, mode) -> CorrelationEstimate
        plane: Pair of orthonormal Directions (u, v); a = u, b rotates from u towards v
        resolution: Number of points (at least 2)
        mode: SamplingMode (exact by default)
        reference: Optional closed form (a, b) -> E for the E_exact column

    Raises:
        InvalidArgumentError: resolution below 2 or non-orthonormal plane
    """
    if resolution < 2:
        raise InvalidArgumentError(f"Scan resolution must be at least 2, got {resolution}")
    u, v = plane
    if abs(dot(u, v)) > EXACT_TOL:
        raise InvalidArgumentError(f"Scan plane is not orthonormal (u.v = {dot(u, v)!r})")

    mode = mode or SamplingMode.exact_mode()
    points = []
    for k in range(resolution):
        theta = 180.0 * k / (resolution - 1)
        b = Direction.from_angle(theta, u, v)
        estimate = correlator(u, b, mode if mode.exact else mode.with_stream(k))
        exact_value = reference(u, b) if reference else float('nan')
        points.append(ScanPoint(theta, estimate, exact_value))
    return points
