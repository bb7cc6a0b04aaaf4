"""
Experiment commands for the Bell-test laboratory

run, scan, audit, brute and compare: build an ExperimentConfig from flags,
environment and config file, drive the library, print a human summary and
emit a structured JSON or CSV record.
"""

import logging
from dataclasses import dataclass, fields

import numpy as np

from .algebra import X_AXIS, Y_AXIS, Direction
from .chsh import (
    PAIR_LABELS, ChshSettings, chsh_value, correlation_scan, max_deterministic_S,
    min_deterministic_S, optimal_planar_settings, random_planar_settings, strategy_values,
)
from .common import (
    CLASSICAL_BOUND, CONVENTIONS, FORMATS, MODELS, TSIRELSON_BOUND,
    ConfigError, ContractViolationError,
    coerce_option, load_config, summary_stream, to_csv, to_json, write_output,
)
from .correlators import (
    MODEL_FORMULA, SamplingMode, algebraic_correlation, exact_correlation_formula,
    model_correlator,
)
from .extraction import audit_bell_bound, compare_correlators, default_map_family

logger = logging.getLogger(__name__)

SCAN_COLUMNS = ('theta_deg', 'E_mean', 'E_exact', 'stderr', 'n')
RUN_COLUMNS = ('quantity', 'value', 'stderr', 'n')
BRUTE_COLUMNS = ('A_a', 'A_a_prime', 'B_b', 'B_b_prime', 'S', 'classical_bound', 'tsirelson')
AUDIT_COLUMNS = ('map', 'max_abs_S', 'grid_points', 'classical_bound', 'tsirelson')
COMPARE_COLUMNS = (
    'scalar_product_correlation', 'bivector_scalar_part', 'minus_a_dot_b',
    'sign_extracted_correlation', 'max_difference',
)

# Largest |S| any correlator with |E| <= 1 can produce
S_CEILING = 4.0

# Reference constants carried on every emitted S row
BOUND_COLUMNS = {'classical_bound': CLASSICAL_BOUND, 'tsirelson': TSIRELSON_BOUND}


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = 'vector'
    convention: str = 'oriented'
    settings: ChshSettings = None
    exact: bool = False
    samples: int = 100000
    seed: int = 0
    workers: int = 1
    output_format: str = 'json'
    out: str = None
    resolution: int = 19
    grid: int = 50
    plane: tuple = (X_AXIS, Y_AXIS)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"Unknown model '{self.model}' (expected one of: {', '.join(MODELS)})")
        if self.convention not in CONVENTIONS:
            raise ConfigError(f"Unknown convention '{self.convention}' (expected one of: {', '.join(CONVENTIONS)})")
        if self.output_format not in FORMATS:
            raise ConfigError(f"Unknown format '{self.output_format}' (expected one of: {', '.join(FORMATS)})")
        if not self.exact and self.samples < 1:
            raise ConfigError(f"Monte Carlo mode needs samples >= 1, got {self.samples}")
        if self.resolution < 2:
            raise ConfigError(f"--resolution must be at least 2, got {self.resolution}")
        if self.grid < 1:
            raise ConfigError(f"--grid must be at least 1, got {self.grid}")
        if self.settings is None:
            object.__setattr__(self, 'settings', optimal_planar_settings(self.plane))

    @classmethod
    def from_mapping(cls, values):
        """Build a config from a dict, rejecting unknown fields"""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"Unknown experiment field(s): {', '.join(unknown)}")
        return cls(**values)

    @classmethod
    def from_args(cls, args, defaults=None):
        """
        Merge command-line flags over environment/config-file defaults.

        Args:
            args: argparse Namespace from one of the experiment subcommands
            defaults: dict from load_config() (loaded when not given)
        """
        defaults = load_config() if defaults is None else defaults

        def pick(flag, option):
            value = getattr(args, flag, None)
            return defaults[option] if value is None else coerce_option(option, value)

        exact = bool(getattr(args, 'exact', False)) or not getattr(args, 'mc', True)
        samples = getattr(args, 'samples', None)
        values = {
            'model': pick('model', 'model'),
            'convention': pick('convention', 'convention'),
            # samples are validated only in Monte Carlo mode
            'samples': int(samples) if exact and samples is not None else pick('samples', 'samples'),
            'seed': pick('seed', 'seed'),
            'workers': pick('workers', 'workers'),
            'output_format': pick('format', 'format'),
            'out': getattr(args, 'out', None),
            'exact': exact,
        }
        if getattr(args, 'resolution', None) is not None:
            values['resolution'] = args.resolution
        if getattr(args, 'grid', None) is not None:
            values['grid'] = args.grid
        if getattr(args, 'plane', None) is not None:
            values['plane'] = plane_from_floats(args.plane)
        values['settings'] = settings_from_args(args, values.get('plane'))
        return cls.from_mapping(values)

    @property
    def mode(self):
        if self.exact:
            return SamplingMode.exact_mode()
        return SamplingMode.monte_carlo(self.samples, seed=self.seed, workers=self.workers)

    def mode_record(self):
        return {'mode': 'exact' if self.exact else 'mc', 'samples': 0 if self.exact else self.samples, 'seed': self.seed}


def parse_angles(text, count=4):
    """Parse comma-separated angles in degrees"""
    try:
        angles = [float(part) for part in text.split(',')]
    except ValueError as e:
        raise ConfigError(f"Invalid angle list '{text}'") from e
    if len(angles) != count:
        raise ConfigError(f"Expected {count} comma-separated angles, got {len(angles)} in '{text}'")
    return angles


def settings_from_args(args, plane=None):
    """ChshSettings from --angles (degrees, in `plane`) or --dirs (twelve floats); None when neither is given"""
    angles = getattr(args, 'angles', None)
    dirs = getattr(args, 'dirs', None)
    if angles and dirs:
        raise ConfigError("Use either --angles or --dirs, not both")
    if dirs:
        if len(dirs) != 12:
            raise ConfigError(f"--dirs needs 12 floats (a, a', b, b'), got {len(dirs)}")
        return ChshSettings(*(Direction.from_vector(dirs[k:k + 3]) for k in range(0, 12, 3)))
    if angles:
        return ChshSettings.from_angles(parse_angles(angles), plane)
    return None


def plane_from_floats(values):
    if len(values) != 6:
        raise ConfigError(f"--plane needs 6 floats (u, v), got {len(values)}")
    return Direction.from_vector(values[:3]), Direction.from_vector(values[3:])


def _print_banner(title, stream):
    print("\n" + "=" * 70, file=stream)
    print(title, file=stream)
    print("=" * 70, file=stream)


# ============================================================================
# STRUCTURED DATA FUNCTIONS
# ============================================================================

def run_experiment(config):
    """
    Evaluate S for the configured model and settings.

    Returns:
        (ChshResult, list of residual bivector norms; empty unless model is bivector)

    Raises:
        ContractViolationError: S outside [-4, 4]
    """
    residuals = []
    if config.model == 'bivector':
        def correlator(a, b, mode):
            algebraic = algebraic_correlation(a, b, config.convention, mode)
            residuals.append(algebraic.residual_bivector_norm)
            return algebraic.estimate
    else:
        correlator = model_correlator(config.model, config.convention)

    result = chsh_value(correlator, config.settings, config.mode)
    if not abs(result.s) <= S_CEILING:
        raise ContractViolationError(f"|S| = {abs(result.s)!r} exceeds {S_CEILING}; a correlation left [-1, 1]")
    return result, residuals


def run_record(config, result, residuals):
    """Run record with the fixed field order"""
    correlations = {}
    for k, (label, estimate) in enumerate(zip(PAIR_LABELS, result.correlations)):
        entry = estimate.to_dict()
        if residuals:
            entry['residual_bivector_norm'] = residuals[k]
        correlations[label] = entry

    return {
        'model': config.model,
        'convention': config.convention,
        'settings': config.settings.to_dict(),
        'correlations': correlations,
        'S': result.s,
        'S_stderr': result.s_stderr,
        'classical_bound': result.classical_bound,
        'tsirelson': result.tsirelson,
        'violates_bell': result.violates_bell,
        'seed': config.seed,
        **{k: v for k, v in config.mode_record().items() if k != 'seed'},
    }


def scan_rows(config):
    correlator = model_correlator(config.model, config.convention)
    kind = MODEL_FORMULA[config.model]
    points = correlation_scan(
        correlator,
        config.plane,
        config.resolution,
        mode=config.mode,
        reference=lambda a, b: exact_correlation_formula(kind, a, b),
    )
    return [point.to_row() for point in points]


def audit_report(config, axis_count=20, table_count=1000):
    rng = np.random.default_rng(config.seed)
    grid = random_planar_settings(rng, config.grid, config.plane)
    maps = default_map_family(grid, config.seed, axis_count=axis_count, table_count=table_count)
    logger.info("Auditing %d extraction maps over %d settings", len(maps), len(grid))
    return audit_bell_bound(
        maps, grid, config.mode,
        grid_description=f"{config.grid} random planar settings (seed {config.seed})",
    )


def brute_rows(settings):
    return [
        {
            'A_a': table.side1_responses[0],
            'A_a_prime': table.side1_responses[1],
            'B_b': table.side2_responses[0],
            'B_b_prime': table.side2_responses[1],
            'S': s,
        }
        for table, s in strategy_values(settings)
    ]


# ============================================================================
# CLI COMMAND FUNCTIONS
# ============================================================================

def cmd_run(args):
    """Handle 'bellga run' command"""
    config = ExperimentConfig.from_args(args)
    result, residuals = run_experiment(config)
    record = run_record(config, result, residuals)

    stream = summary_stream(config.out)
    mode = 'exact' if config.exact else f"mc (n={config.samples}, seed={config.seed})"
    _print_banner(f"CHSH RUN: model={config.model} convention={config.convention} mode={mode}", stream)
    for k, (label, estimate) in enumerate(zip(PAIR_LABELS, result.correlations)):
        line = f"  {label:<8} = {estimate.mean:+.12f}  (stderr {estimate.stderr:.3g})"
        if residuals:
            line += f"  residual {residuals[k]:.3g}"
        print(line, file=stream)
    print(f"\n  S        = {result.s:+.12f}  (stderr {result.s_stderr:.3g})", file=stream)
    print(f"  Classical bound {CLASSICAL_BOUND:g}, Tsirelson bound {TSIRELSON_BOUND!r}", file=stream)
    print(f"  Violates Bell inequality: {'yes' if result.violates_bell else 'no'}", file=stream)
    print("=" * 70 + "\n", file=stream)

    if config.output_format == 'csv':
        rows = [
            {'quantity': label, 'value': e.mean, 'stderr': e.stderr, 'n': e.n}
            for label, e in zip(PAIR_LABELS, result.correlations)
        ]
        rows.append({'quantity': 'S', 'value': result.s, 'stderr': result.s_stderr, 'n': ''})
        rows.append({'quantity': 'classical_bound', 'value': CLASSICAL_BOUND, 'stderr': 0.0, 'n': ''})
        rows.append({'quantity': 'tsirelson', 'value': TSIRELSON_BOUND, 'stderr': 0.0, 'n': ''})
        write_output(to_csv(rows, RUN_COLUMNS), config.out)
    else:
        write_output(to_json(record), config.out)
    return record


def cmd_scan(args):
    """Handle 'bellga scan' command"""
    config = ExperimentConfig.from_args(args)
    rows = scan_rows(config)

    stream = summary_stream(config.out)
    _print_banner(f"CORRELATION SCAN: model={config.model} points={len(rows)}", stream)
    print(f"  {'theta':>8} {'E':>16} {'exact':>16}", file=stream)
    for row in rows:
        print(f"  {row['theta_deg']:>8.3f} {row['E_mean']:>+16.12f} {row['E_exact']:>+16.12f}", file=stream)
    print("=" * 70 + "\n", file=stream)

    if config.output_format == 'csv':
        write_output(to_csv(rows, SCAN_COLUMNS), config.out)
    else:
        record = {
            'model': config.model,
            'convention': config.convention,
            'plane': [d.to_list() for d in config.plane],
            **config.mode_record(),
            'rows': rows,
        }
        write_output(to_json(record), config.out)
    return rows


def cmd_audit(args):
    """Handle 'bellga audit' command"""
    config = ExperimentConfig.from_args(args)
    report = audit_report(config, axis_count=args.axes, table_count=args.tables)
    if not report.within_bound:
        raise ContractViolationError(
            f"Extraction audit reached |S| = {report.global_max!r} above the classical bound"
        )

    stream = summary_stream(config.out)
    _print_banner(f"EXTRACTION AUDIT: {len(report.per_map)} maps, {report.grid_size} settings", stream)
    by_kind = {}
    for label, value, _ in report.per_map:
        kind = label.split('(')[0]
        by_kind[kind] = max(by_kind.get(kind, 0.0), value)
    for kind, value in by_kind.items():
        print(f"  {kind:<20} max |S| = {value:.12g}", file=stream)
    print(f"\n  Global max |S| = {report.global_max:.12g} (classical bound {CLASSICAL_BOUND:g})", file=stream)
    print("=" * 70 + "\n", file=stream)

    if config.output_format == 'csv':
        rows = [
            {'map': label, 'max_abs_S': value, 'grid_points': points, **BOUND_COLUMNS}
            for label, value, points in report.per_map
        ]
        write_output(to_csv(rows, AUDIT_COLUMNS), config.out)
    else:
        write_output(to_json(report.to_dict()), config.out)
    return report


def cmd_brute(args):
    """Handle 'bellga brute' command"""
    config = ExperimentConfig.from_args(args)
    rows = brute_rows(config.settings)
    max_s, argmax = max_deterministic_S(config.settings)
    min_s, argmin = min_deterministic_S(config.settings)

    stream = summary_stream(config.out)
    _print_banner(f"DETERMINISTIC STRATEGIES: {len(rows)}", stream)
    print("   A(a) A(a')  B(b) B(b')    S", file=stream)
    for row in rows:
        print(f"  {row['A_a']:>+5d} {row['A_a_prime']:>+6d} {row['B_b']:>+5d} {row['B_b_prime']:>+6d} {row['S']:>+4d}", file=stream)
    print(f"\n  max S = {max_s:+d}, min S = {min_s:+d}", file=stream)
    print("=" * 70 + "\n", file=stream)

    if config.output_format == 'csv':
        write_output(to_csv([{**row, **BOUND_COLUMNS} for row in rows], BRUTE_COLUMNS), config.out)
    else:
        record = {
            'settings': config.settings.to_dict(),
            'strategies': rows,
            'max_S': max_s,
            'argmax': argmax.to_dict(),
            'min_S': min_s,
            'argmin': argmin.to_dict(),
            'classical_bound': CLASSICAL_BOUND,
            'tsirelson': TSIRELSON_BOUND,
        }
        write_output(to_json(record), config.out)
    return rows


def cmd_compare(args):
    """Handle 'bellga compare' command"""
    config = ExperimentConfig.from_args(args)
    theta_a, theta_b = parse_angles(args.pair, count=2)
    u, v = config.plane
    comparison = compare_correlators(Direction.from_angle(theta_a, u, v), Direction.from_angle(theta_b, u, v))

    stream = summary_stream(config.out)
    _print_banner(f"CORRELATOR COMPARISON: a at {theta_a:g} deg, b at {theta_b:g} deg", stream)
    print(f"  Scalar product (vectors)     : {comparison.vector:+.15f}", file=stream)
    print(f"  Scalar part (bivectors)      : {comparison.bivector_scalar:+.15f}", file=stream)
    print(f"  -a.b                         : {comparison.formula:+.15f}", file=stream)
    print(f"  Sign-extracted (+/-1 results): {comparison.extracted:+.15f}", file=stream)
    print(f"\n  Largest difference: {comparison.max_difference:.3g}", file=stream)
    print("=" * 70 + "\n", file=stream)

    record = comparison.to_dict()
    if config.output_format == 'csv':
        row = {key: record[key] for key in COMPARE_COLUMNS if key in record}
        row['max_difference'] = comparison.max_difference
        write_output(to_csv([row], COMPARE_COLUMNS), config.out)
    else:
        write_output(to_json(record), config.out)
    return comparison


# Setup and routing

def _add_common_arguments(parser, mode_flag='exact'):
    parser.add_argument('--model', choices=MODELS, help='Hidden-variable model (default: from config, else vector)')
    parser.add_argument('--convention', choices=CONVENTIONS,
                        help='Bivector outcome product convention (default: from config, else oriented)')
    parser.add_argument('--angles', metavar="A,A',B,B'", help='Four in-plane analyser angles in degrees')
    parser.add_argument('--dirs', nargs=12, type=float, metavar='F',
                        help="Explicit unit directions a, a', b, b' as twelve floats")
    parser.add_argument('--samples', type=int, help='Monte Carlo sample count')
    parser.add_argument('--seed', type=int, help='64-bit unsigned seed')
    parser.add_argument('--workers', type=int, help='Sampling threads (results do not depend on it)')
    parser.add_argument('--plane', nargs=6, type=float, metavar='F',
                        help='Orthonormal plane u, v as six floats (default: e1, e2)')
    parser.add_argument('--format', choices=FORMATS, help='Structured output format')
    parser.add_argument('--out', metavar='PATH', help='Write structured output to PATH (default: stdout)')
    if mode_flag == 'exact':
        parser.add_argument('--exact', action='store_true', help='Average exactly over both hidden atoms')
    else:
        parser.add_argument('--mc', action='store_true', help='Sample the hidden variable instead of exact averaging')


def setup_parser(subparsers):
    """Setup argparse subcommands for experiments"""

    # bellga run
    run_parser = subparsers.add_parser(
        'run',
        help='Evaluate the CHSH value S for a model',
        description='Evaluate the four pair correlations and S for one model and settings.',
        epilog="""
Examples:
  bellga run --model sign --angles 0,90,45,135 --exact
  bellga run --model vector --angles 0,90,45,135 --exact
  bellga run --model bivector --convention oriented --angles 0,90,45,135 --exact
  bellga run --model bivector --samples 100000 --seed 7 --format csv
"""
    )
    _add_common_arguments(run_parser)
    run_parser.set_defaults(func=cmd_run)

    # bellga scan
    scan_parser = subparsers.add_parser(
        'scan',
        help='Correlation curve E(theta) over relative angles 0..180',
        description='Sample E at uniformly spaced relative angles in one plane.',
        epilog="""
Examples:
  bellga scan --model vector --resolution 19 --exact --format csv
  bellga scan --model sign --resolution 7 --exact
"""
    )
    _add_common_arguments(scan_parser)
    scan_parser.add_argument('--resolution', type=int, help='Number of scan points (default: 19)')
    scan_parser.set_defaults(func=cmd_scan)

    # bellga audit
    audit_parser = subparsers.add_parser(
        'audit',
        help='Check every sign-extraction map against the Bell bound',
        description='Evaluate max |S| for orientation_sign, axis_reference, component_parity '
                    'and random table maps over a grid of random planar settings.',
        epilog="""
Examples:
  bellga audit --grid 50 --seed 3
  bellga audit --grid 10 --tables 100 --mc --samples 2000
"""
    )
    _add_common_arguments(audit_parser, mode_flag='mc')
    audit_parser.add_argument('--grid', type=int, help='Number of random settings quadruples (default: 50)')
    audit_parser.add_argument('--axes', type=int, default=20, help='Random axis_reference maps (default: 20)')
    audit_parser.add_argument('--tables', type=int, default=1000, help='Random table maps (default: 1000)')
    audit_parser.set_defaults(func=cmd_audit)

    # bellga brute
    brute_parser = subparsers.add_parser(
        'brute',
        help='Enumerate all 16 deterministic strategies',
        description='List S for every deterministic local strategy at the given settings.',
        epilog="""
Examples:
  bellga brute --angles 0,90,45,135
  bellga brute --angles 0,90,45,135 --format csv
"""
    )
    _add_common_arguments(brute_parser)
    brute_parser.set_defaults(func=cmd_brute)

    # bellga compare
    compare_parser = subparsers.add_parser(
        'compare',
        help='Compare vector, bivector and -a.b correlators',
        description='Show the scalar-product correlator, the bivector scalar part, -a.b and '
                    'the sign-extracted correlator for two in-plane angles.',
        epilog="""
Examples:
  bellga compare --pair 0,60
"""
    )
    _add_common_arguments(compare_parser)
    compare_parser.add_argument('--pair', metavar='A,B', default='0,60', help='Angles of a and b in degrees')
    compare_parser.set_defaults(func=cmd_compare)
