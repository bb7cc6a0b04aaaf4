"""
Sign extraction from the bivector model

A +/-1 readout of the algebraic outcome mu.a may depend only on the shared
orientation and the local setting. Each orientation atom then fixes a
deterministic local strategy, so every readout is a mixture of deterministic
strategies and |S| <= 2. The audit below checks this for every representable
map family; the table maps cover all 16 strategies on a 2x2 grid.
"""

import logging
from dataclasses import dataclass
from functools import partial

import numpy as np

from .algebra import (
    BIVECTOR_SLOTS, ORIENTATIONS, Direction, bivector_outcome, dot, random_direction,
)
from .chsh import chsh_value
from .common import (
    CLASSICAL_BOUND, EXACT_S_SLACK, EXACT_TOL, MC_SIGMA_MARGIN, TSIRELSON_BOUND,
    InvalidArgumentError,
)
from .correlators import (
    SamplingMode, algebraic_correlation, estimate_mean, exact_correlation_formula,
    scalar_product_correlation,
)

logger = logging.getLogger(__name__)

MAP_KINDS = ('orientation_sign', 'axis_reference', 'component_parity', 'table')


def _sign(value):
    # zero maps to +1
    return 1 if value >= 0 else -1


@dataclass(frozen=True)
class ExtractionMap:
    """
    Local +/-1 readout of the bivector model.

    kinds:
        orientation_sign: A = lambda
        axis_reference:   A = lambda * sign(a.r) for a fixed reference r
        component_parity: A = sign of one bivector coefficient of mu.a
                          (coefficient 0, 1, 2 selects e23, e31, e12)
        table:            explicit signs table[side-1][orientation][setting index]
                          over grid[side-1] (orientation index 0 is lambda = +1)

    The first three kinds read side 2 with the singlet sign flip (-A); table
    maps list side 2 explicitly.
    """

    kind: str
    reference: Direction = None
    coefficient: int = None
    table: tuple = None
    grid: tuple = None

    def __post_init__(self):
        if self.kind not in MAP_KINDS:
            raise InvalidArgumentError(f"Unknown extraction map kind '{self.kind}'")
        if self.kind == 'axis_reference' and not isinstance(self.reference, Direction):
            raise InvalidArgumentError("axis_reference maps need a reference Direction")
        if self.kind == 'component_parity' and self.coefficient not in (0, 1, 2):
            raise InvalidArgumentError(f"component_parity coefficient must be 0, 1 or 2, got {self.coefficient!r}")
        if self.kind == 'table':
            self._check_table()

    def _check_table(self):
        if self.grid is None or self.table is None or len(self.grid) != 2 or len(self.table) != 2:
            raise InvalidArgumentError("table maps need a grid and a table for both sides")
        for side in range(2):
            if len(self.table[side]) != 2:
                raise InvalidArgumentError("table maps need one row per orientation")
            for row in self.table[side]:
                if len(row) != len(self.grid[side]):
                    raise InvalidArgumentError("table row length must match the side's setting grid")
                if any(value not in (1, -1) for value in row):
                    raise InvalidArgumentError("table entries must be +1 or -1")

    @classmethod
    def orientation_sign(cls):
        return cls('orientation_sign')

    @classmethod
    def axis_reference(cls, reference):
        return cls('axis_reference', reference=reference)

    @classmethod
    def component_parity(cls, coefficient=0):
        return cls('component_parity', coefficient=coefficient)

    @classmethod
    def from_table(cls, grid, table):
        grid = tuple(tuple(side) for side in grid)
        table = tuple(tuple(tuple(int(v) for v in row) for row in side) for side in table)
        return cls('table', table=table, grid=grid)

    @property
    def label(self):
        if self.kind == 'axis_reference':
            r = self.reference
            return f"axis_reference(r=[{r.x:.6g}, {r.y:.6g}, {r.z:.6g}])"
        if self.kind == 'component_parity':
            return f"component_parity({('e23', 'e31', 'e12')[self.coefficient]})"
        if self.kind == 'table':
            return f"table({self.table})"
        return self.kind

    def setting_index(self, setting, side):
        for index, candidate in enumerate(self.grid[side - 1]):
            if max(abs(candidate.x - setting.x), abs(candidate.y - setting.y), abs(candidate.z - setting.z)) <= EXACT_TOL:
                return index
        return None

    def covers(self, settings):
        if self.kind != 'table':
            return True
        return all(
            self.setting_index(x, 1) is not None and self.setting_index(y, 2) is not None
            for x, y in settings.pairs()
        )


def extract_sign(extraction_map, hidden, setting, side):
    """
    +/-1 readout for one particle.

    Args:
        extraction_map: ExtractionMap
        hidden: Orientation shared by both particles
        setting: Direction of this particle's analyser
        side: 1 or 2

    Raises:
        InvalidArgumentError: bad side, or a table map asked about a setting
                              outside its grid
    """
    if side not in (1, 2):
        raise InvalidArgumentError(f"side must be 1 or 2, got {side!r}")

    kind = extraction_map.kind
    if kind == 'table':
        index = extraction_map.setting_index(setting, side)
        if index is None:
            raise InvalidArgumentError(f"Setting {setting.to_list()} is not on side {side}'s table grid")
        return extraction_map.table[side - 1][0 if hidden.lam == 1 else 1][index]

    if kind == 'orientation_sign':
        value = hidden.lam
    elif kind == 'axis_reference':
        value = hidden.lam * _sign(dot(setting, extraction_map.reference))
    else:
        outcome = bivector_outcome(hidden, setting)
        value = _sign(outcome.coefficient(extraction_map.coefficient))

    return value if side == 1 else -value


def map_correlation(extraction_map, a, b, mode):
    """E(a, b) = average over orientations of extract(lambda, a, 1) * extract(lambda, b, 2)"""
    products = {
        mu.lam: extract_sign(extraction_map, mu, a, 1) * extract_sign(extraction_map, mu, b, 2)
        for mu in ORIENTATIONS
    }
    plus, minus = float(products[1]), float(products[-1])
    return estimate_mean(lambda lam: np.where(np.asarray(lam) > 0, plus, minus), mode)


# ============================================================================
# AUDIT
# ============================================================================

@dataclass(frozen=True)
class AuditReport:
    per_map: tuple
    global_max: float
    grid_size: int
    mode: dict
    max_margin: float = 0.0
    grid_description: str = 'explicit settings list'

    @property
    def within_bound(self):
        return self.global_max <= CLASSICAL_BOUND + max(EXACT_S_SLACK, self.max_margin)

    def to_dict(self):
        return {
            'maps': [
                {'map': label, 'max_abs_S': value, 'grid_points': points}
                for label, value, points in self.per_map
            ],
            'global_max_abs_S': self.global_max,
            'classical_bound': CLASSICAL_BOUND,
            'tsirelson': TSIRELSON_BOUND,
            'within_bound': self.within_bound,
            'grid_size': self.grid_size,
            'grid': self.grid_description,
            **self.mode,
        }


def audit_bell_bound(maps, settings_grid, mode=None, grid_description='explicit settings list'):
    """
    Largest |S| reached by each extraction map over a grid of settings.

    Table maps are evaluated on the grid points their own setting grid covers.

    Raises:
        InvalidArgumentError: empty map list or grid, or a table map that
                              covers no grid point
    """
    maps = list(maps)
    settings_grid = list(settings_grid)
    if not maps:
        raise InvalidArgumentError("Audit needs at least one extraction map")
    if not settings_grid:
        raise InvalidArgumentError("Audit needs at least one settings quadruple")

    mode = mode or SamplingMode.exact_mode()
    per_map = []
    max_margin = 0.0
    for extraction_map in maps:
        covered = [settings for settings in settings_grid if extraction_map.covers(settings)]
        if not covered:
            raise InvalidArgumentError(f"Map {extraction_map.label} covers no settings in the grid")

        best = 0.0
        for settings in covered:
            result = chsh_value(partial(map_correlation, extraction_map), settings, mode)
            best = max(best, abs(result.s))
            if not mode.exact:
                max_margin = max(max_margin, MC_SIGMA_MARGIN * result.s_stderr)
        per_map.append((extraction_map.label, best, len(covered)))
        logger.debug("Map %s: max |S| = %.12g over %d settings", extraction_map.label, best, len(covered))

    global_max = max(value for _, value, _ in per_map)
    logger.info("Audited %d maps over %d settings: global max |S| = %.12g", len(maps), len(settings_grid), global_max)
    return AuditReport(
        per_map=tuple(per_map),
        global_max=global_max,
        grid_size=len(settings_grid),
        mode=mode.to_dict(),
        max_margin=max_margin,
        grid_description=grid_description,
    )


def random_axis_maps(count, rng):
    return [ExtractionMap.axis_reference(random_direction(rng)) for _ in range(count)]


def random_table_maps(settings, count, rng):
    """Random explicit tables over the 2x2 grid of one ChshSettings"""
    grid = ((settings.a, settings.a_prime), (settings.b, settings.b_prime))
    return [
        ExtractionMap.from_table(grid, rng.choice([1, -1], size=(2, 2, 2)).tolist())
        for _ in range(count)
    ]


def default_map_family(settings_grid, seed, axis_count=20, table_count=1000):
    """
    orientation_sign, `axis_count` random axis references, the three
    component_parity maps and `table_count` random table maps spread over the grid.
    """
    rng = np.random.default_rng(seed)
    maps = [ExtractionMap.orientation_sign()]
    maps.extend(random_axis_maps(axis_count, rng))
    maps.extend(ExtractionMap.component_parity(k) for k in range(len(BIVECTOR_SLOTS)))
    for k in range(table_count):
        maps.extend(random_table_maps(settings_grid[k % len(settings_grid)], 1, rng))
    return maps


# ============================================================================
# CORRELATOR COMPARISON
# ============================================================================

@dataclass(frozen=True)
class CorrelatorComparison:
    a: Direction
    b: Direction
    vector: float
    bivector_scalar: float
    formula: float
    extracted: float

    @property
    def differences(self):
        return {
            'vector_vs_bivector': abs(self.vector - self.bivector_scalar),
            'vector_vs_formula': abs(self.vector - self.formula),
            'bivector_vs_formula': abs(self.bivector_scalar - self.formula),
        }

    @property
    def max_difference(self):
        return max(self.differences.values())

    def to_dict(self):
        return {
            'a': self.a.to_list(),
            'b': self.b.to_list(),
            'scalar_product_correlation': self.vector,
            'bivector_scalar_part': self.bivector_scalar,
            'minus_a_dot_b': self.formula,
            'sign_extracted_correlation': self.extracted,
            'differences': self.differences,
        }


def compare_correlators(a, b):
    """
    Vector toy-model correlator, bivector scalar part and -a.b side by side
    (exact mode), plus the correlation of the sign-extracted outcomes.
    """
    exact = SamplingMode.exact_mode()
    return CorrelatorComparison(
        a=a,
        b=b,
        vector=scalar_product_correlation(a, b, exact).mean,
        bivector_scalar=algebraic_correlation(a, b, 'oriented', exact).scalar_part,
        formula=exact_correlation_formula('vector', a, b),
        extracted=map_correlation(ExtractionMap.orientation_sign(), a, b, exact).mean,
    )
