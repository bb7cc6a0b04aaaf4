"""
Invariant self-test

Runs the algebra, model, CHSH and extraction invariants on seeded random
inputs and reports PASS/FAIL per check.
"""

import logging
import math
import sys
from dataclasses import dataclass

import numpy as np

from .algebra import (
    I, Multivector, Orientation, bivector_outcome, cross, dot,
    geometric_product, random_direction, scalar, vector, wedge,
)
from .chsh import (
    chsh_value, max_deterministic_S, min_deterministic_S, optimal_planar_settings,
    random_planar_settings,
)
from .common import (
    CHAINED_TOL, CLASSICAL_BOUND, EXACT_TOL, EXIT_CONTRACT, TSIRELSON_BOUND,
    InvalidArgumentError, to_json, write_output,
)
from .correlators import SamplingMode, algebraic_correlation, model_correlator
from .extraction import audit_bell_bound, compare_correlators, default_map_family

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def to_dict(self):
        return {'check': self.name, 'passed': self.passed, 'detail': self.detail}


def _random_multivector(rng):
    return Multivector(rng.uniform(-1.0, 1.0, size=8))


def _worst(values):
    return max(values) if values else 0.0


def check_pseudoscalar_square(rng, cases):
    error = (geometric_product(I, I) - scalar(-1.0)).norm()
    return error <= EXACT_TOL, f"|I*I + 1| = {error:.3g}"


def check_associativity(rng, cases):
    errors = []
    for _ in range(cases):
        x, y, z = (_random_multivector(rng) for _ in range(3))
        left = geometric_product(geometric_product(x, y), z)
        right = geometric_product(x, geometric_product(y, z))
        errors.append(float(np.max(np.abs(left.coefficients - right.coefficients))))
    worst = _worst(errors)
    return worst <= CHAINED_TOL, f"max |(xy)z - x(yz)| = {worst:.3g} over {cases} cases"


def check_decomposition(rng, cases):
    errors = []
    for _ in range(cases):
        a, b = random_direction(rng), random_direction(rng)
        product = geometric_product(a.as_multivector(), b.as_multivector())
        expected = scalar(dot(a, b)) + wedge(a, b)
        errors.append(float(np.max(np.abs(product.coefficients - expected.coefficients))))
    worst = _worst(errors)
    return worst <= EXACT_TOL, f"max |ab - (a.b + a^b)| = {worst:.3g}"


def check_duality(rng, cases):
    errors = []
    for _ in range(cases):
        a, b = random_direction(rng), random_direction(rng)
        dual = geometric_product(I, vector(*cross(a, b)))
        errors.append(float(np.max(np.abs(wedge(a, b).coefficients - dual.coefficients))))
    worst = _worst(errors)
    return worst <= EXACT_TOL, f"max |a^b - I(a x b)| = {worst:.3g}"


def check_centrality(rng, cases):
    errors = []
    for _ in range(cases):
        x = _random_multivector(rng)
        diff = geometric_product(I, x) - geometric_product(x, I)
        errors.append(float(np.max(np.abs(diff.coefficients))))
    worst = _worst(errors)
    return worst <= EXACT_TOL, f"max |Ix - xI| = {worst:.3g}"


def check_dual_vectors(rng, cases):
    errors = []
    for _ in range(cases):
        a, b = random_direction(rng).as_multivector(), random_direction(rng).as_multivector()
        left = geometric_product(geometric_product(I, a), geometric_product(I, b))
        right = -geometric_product(a, b)
        errors.append(float(np.max(np.abs(left.coefficients - right.coefficients))))
    worst = _worst(errors)
    return worst <= EXACT_TOL, f"max |(Ia)(Ib) + ab| = {worst:.3g}"


def check_outcome_norm(rng, cases):
    errors = []
    for _ in range(cases):
        mu = Orientation(int(rng.choice([1, -1])))
        outcome = bivector_outcome(mu, random_direction(rng))
        errors.append(abs(outcome.value.norm() - 1.0))
    worst = _worst(errors)
    return worst <= EXACT_TOL, f"max ||mu.a| - 1| = {worst:.3g}"


def check_sign_model(rng, cases):
    correlator = model_correlator('sign')
    values = [chsh_value(correlator, settings).s for settings in random_planar_settings(rng, min(cases, 100))]
    ok = all(s == -2.0 for s in values)
    return ok, f"S in {sorted(set(values))}"


def check_optimal_violation(rng, cases):
    settings = optimal_planar_settings()
    errors = []
    for model, convention in (('vector', 'oriented'), ('bivector', 'oriented')):
        s = chsh_value(model_correlator(model, convention), settings).s
        errors.append(abs(s + TSIRELSON_BOUND))
    worst = _worst(errors)
    return worst <= EXACT_TOL, f"max |S + 2*sqrt(2)| = {worst:.3g}"


def check_residuals(rng, cases):
    exact = SamplingMode.exact_mode()
    errors = []
    for _ in range(min(cases, 200)):
        a, b = random_direction(rng), random_direction(rng)
        oriented = algebraic_correlation(a, b, 'oriented', exact)
        standard = algebraic_correlation(a, b, 'standard', exact)
        cross_norm = math.sqrt(sum(c * c for c in cross(a, b)))
        errors.extend([
            oriented.residual_bivector_norm,
            abs(standard.residual_bivector_norm - cross_norm),
            abs(oriented.scalar_part + dot(a, b)),
            abs(standard.scalar_part + dot(a, b)),
        ])
    worst = _worst(errors)
    return worst <= EXACT_TOL, f"max residual/scalar-part error = {worst:.3g}"


def check_deterministic_bound(rng, cases):
    extremes = set()
    for settings in random_planar_settings(rng, min(cases, 50)):
        extremes.add((max_deterministic_S(settings)[0], min_deterministic_S(settings)[0]))
    ok = extremes == {(2, -2)}
    return ok, f"(max S, min S) in {sorted(extremes)}"


def check_extraction_audit(rng, cases):
    grid = random_planar_settings(rng, 10)
    maps = default_map_family(grid, int(rng.integers(2**32)), axis_count=20, table_count=cases)
    report = audit_bell_bound(maps, grid)
    return report.global_max <= CLASSICAL_BOUND, f"global max |S| = {report.global_max:.12g} over {len(maps)} maps"


def check_equivalence(rng, cases):
    errors = [
        compare_correlators(random_direction(rng), random_direction(rng)).max_difference
        for _ in range(min(cases, 1000))
    ]
    worst = _worst(errors)
    return worst <= EXACT_TOL, f"max correlator difference = {worst:.3g}"


def check_worker_independence(rng, cases):
    correlator = model_correlator('bivector', 'oriented')
    settings = optimal_planar_settings()
    seed = int(rng.integers(2**32))
    serial = chsh_value(correlator, settings, SamplingMode.monte_carlo(150000, seed=seed, workers=1))
    threaded = chsh_value(correlator, settings, SamplingMode.monte_carlo(150000, seed=seed, workers=4))
    return serial == threaded, f"seed {seed}: S = {serial.s!r} with 1 worker, {threaded.s!r} with 4"


CHECKS = (
    ('pseudoscalar_squares_to_minus_one', check_pseudoscalar_square),
    ('associativity', check_associativity),
    ('vector_product_decomposition', check_decomposition),
    ('wedge_cross_duality', check_duality),
    ('pseudoscalar_centrality', check_centrality),
    ('dual_vector_product', check_dual_vectors),
    ('bivector_outcome_unit_norm', check_outcome_norm),
    ('sign_model_chsh', check_sign_model),
    ('optimal_settings_violation', check_optimal_violation),
    ('bivector_residuals', check_residuals),
    ('deterministic_strategy_bound', check_deterministic_bound),
    ('extraction_audit_bound', check_extraction_audit),
    ('correlator_equivalence', check_equivalence),
    ('worker_count_independence', check_worker_independence),
)


def run_selftest(seed=0, cases=1000):
    """Run every check with its own seeded generator"""
    if cases < 1:
        raise InvalidArgumentError(f"--cases must be at least 1, got {cases}")
    results = []
    for index, (name, check) in enumerate(CHECKS):
        rng = np.random.default_rng([seed, index])
        try:
            passed, detail = check(rng, cases)
        except Exception as e:
            logger.error("Check %s raised: %s", name, e)
            passed, detail = False, f"raised {type(e).__name__}: {e}"
        logger.info("%s: %s (%s)", name, "PASS" if passed else "FAIL", detail)
        results.append(CheckResult(name, bool(passed), detail))
    return results


# ============================================================================
# CLI COMMAND FUNCTIONS
# ============================================================================

def cmd_selftest(args):
    """Handle 'bellga selftest' command"""
    results = run_selftest(seed=args.seed, cases=args.cases)
    stream = sys.stdout

    print("\n" + "=" * 70, file=stream)
    print("INVARIANT SELF-TEST", file=stream)
    print("=" * 70, file=stream)
    for result in results:
        mark = '✓' if result.passed else '✗'
        print(f"  {mark} {result.name:<36} {result.detail}", file=stream)
    failed = [r for r in results if not r.passed]
    print(f"\n{len(results) - len(failed)}/{len(results)} checks passed", file=stream)
    print("=" * 70 + "\n", file=stream)

    if args.out:
        record = {
            'seed': args.seed,
            'cases': args.cases,
            'checks': [r.to_dict() for r in results],
            'passed': not failed,
        }
        write_output(to_json(record), args.out)

    if failed:
        sys.exit(EXIT_CONTRACT)
    return results


def setup_parser(subparsers):
    """Setup argparse subcommand for the self-test"""
    selftest_parser = subparsers.add_parser(
        'selftest',
        help='Run the invariant suites',
        description='Check the algebra identities, model correlations, CHSH bounds and the '
                    'extraction audit on seeded random inputs. Exits 3 if any check fails.'
    )
    selftest_parser.add_argument('--seed', type=int, default=0, help='Seed for the random inputs (default: 0)')
    selftest_parser.add_argument('--cases', type=int, default=1000, help='Random cases per check (default: 1000)')
    selftest_parser.add_argument('--out', metavar='PATH', help='Also write a JSON summary to PATH')
    selftest_parser.set_defaults(func=cmd_selftest)
