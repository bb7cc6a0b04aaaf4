"""
Correlation functionals

Sign correlator, scalar-product correlator and algebraic (multivector)
correlator, each evaluated exactly over the two hidden atoms or by Monte Carlo.

Monte Carlo runs are split into fixed-size chunks in index order and reduced
with math.fsum, so a given (seed, samples) gives bit-identical results for any
worker count.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from .algebra import (
    BIVECTOR_SLOTS, Multivector, Orientation, dot, grade_projection,
    outcome_product,
)
from .common import CONVENTIONS, ContractViolationError, InvalidArgumentError
from .models import (
    bivector_model_outcomes, draw_signs, sign_model_batch, vector_model_correlations,
)

logger = logging.getLogger(__name__)

CHUNK_SIZE = 1 << 16

# Both hidden atoms, each with weight 1/2
EXACT_ATOMS = np.array([1, -1], dtype=np.int8)

FORMULA_KINDS = ('sign', 'vector', 'bivector_scalar_part')
MODEL_FORMULA = {'sign': 'sign', 'vector': 'vector', 'bivector': 'bivector_scalar_part'}


@dataclass(frozen=True)
class SamplingMode:
    """Exact two-atom average, or Monte Carlo over `samples` counter-based draws"""

    exact: bool = True
    samples: int = 0
    seed: int = 0
    workers: int = 1
    stream: int = 0

    def __post_init__(self):
        if not self.exact and self.samples < 1:
            raise InvalidArgumentError(f"Monte Carlo mode needs at least 1 sample, got {self.samples}")
        if self.workers < 1:
            raise InvalidArgumentError(f"workers must be at least 1, got {self.workers}")

    @classmethod
    def exact_mode(cls):
        return cls(exact=True)

    @classmethod
    def monte_carlo(cls, samples, seed=0, workers=1):
        return cls(exact=False, samples=samples, seed=seed, workers=workers)

    def with_stream(self, stream):
        return replace(self, stream=stream)

    def to_dict(self):
        if self.exact:
            return {'mode': 'exact'}
        return {'mode': 'mc', 'samples': self.samples, 'seed': self.seed}


@dataclass(frozen=True)
class CorrelationEstimate:
    mean: float
    stderr: float = 0.0
    n: int = 0
    exact: bool = True

    def to_dict(self):
        return {'mean': self.mean, 'stderr': self.stderr, 'n': self.n, 'exact': self.exact}


@dataclass(frozen=True)
class AlgebraicCorrelation:
    """Full multivector average; scalar part is the headline value, residual a diagnostic"""

    average: Multivector
    scalar_part: float
    residual_bivector_norm: float
    estimate: CorrelationEstimate = field(default=None)
    convention: str = 'standard'

    def to_dict(self):
        return {
            'convention': self.convention,
            'scalar_part': self.scalar_part,
            'residual_bivector_norm': self.residual_bivector_norm,
            'average': self.average.to_dict(),
            'estimate': self.estimate.to_dict() if self.estimate else None,
        }


# ============================================================================
# ESTIMATION PIPELINE
# ============================================================================

def sample_values(observable, mode):
    """
    Evaluate an observable on the hidden draws selected by mode.

    Args:
        observable: Callable mapping an int8 array of hidden signs to an array
                    of per-sample values (shape (n,) or (n, k))
        mode: SamplingMode

    Returns:
        np.ndarray of per-sample values, in sample-index order
    """
    if mode.exact:
        return np.asarray(observable(EXACT_ATOMS), dtype=np.float64)

    chunks = [(start, min(CHUNK_SIZE, mode.samples - start)) for start in range(0, mode.samples, CHUNK_SIZE)]

    def run(chunk):
        start, count = chunk
        return np.asarray(observable(draw_signs(mode.seed, start, count, mode.stream)), dtype=np.float64)

    logger.debug("Sampling %d draws in %d chunks with %d worker(s)", mode.samples, len(chunks), mode.workers)
    if mode.workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=mode.workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(chunk) for chunk in chunks]
    return np.concatenate(parts)


def _reduce(values, exact):
    """Mean and standard error of a 1-D sample, order-independent"""
    n = len(values)
    mean = math.fsum(values.tolist()) / n
    if exact or n < 2:
        return mean, 0.0
    variance = math.fsum(((values - mean) ** 2).tolist()) / (n - 1)
    return mean, math.sqrt(variance) / math.sqrt(n)


def estimate_mean(observable, mode):
    """Reproducible estimate of the hidden-variable average of a scalar observable"""
    values = sample_values(observable, mode)
    mean, stderr = _reduce(values, mode.exact)
    return CorrelationEstimate(
        mean=mean,
        stderr=stderr,
        n=0 if mode.exact else mode.samples,
        exact=mode.exact,
    )


# ============================================================================
# CORRELATORS
# ============================================================================

def sign_correlation(source, a, b, mode):
    """
    E(a, b) = average of A*B for a +/-1 outcome source.

    Args:
        source: Callable (eps array, a, b) -> (A array, B array) of +/-1 outcomes
        a, b: Directions
        mode: SamplingMode

    Raises:
        ContractViolationError: the source produced a value other than +/-1
    """
    def observable(epsilon):
        A, B = source(epsilon, a, b)
        A = np.asarray(A, dtype=np.float64)
        B = np.asarray(B, dtype=np.float64)
        if not (np.all(np.abs(A) == 1.0) and np.all(np.abs(B) == 1.0)):
            raise ContractViolationError("Sign correlator source returned values other than +/-1")
        return A * B

    return estimate_mean(observable, mode)


def scalar_product_correlation(a, b, mode):
    """Vector toy model: average of (eps1*a).(eps2*b), which is -a.b for every draw"""
    return estimate_mean(partial(vector_model_correlations, a=a, b=b), mode)


def _atom_products(a, b, convention):
    products = {}
    for lam in (1, -1):
        mu = Orientation(lam)
        A, B = bivector_model_outcomes(mu, a, b)
        products[lam] = outcome_product(A, B, a, b, mu, convention).coefficients
    return products


def algebraic_correlation(a, b, convention, mode):
    """
    Average of the outcome product mu.a * mu.b over the orientation.

    Both conventions give scalar part -a.b. The grade-2 residual is |a x b|
    under the standard product and vanishes under the oriented product.
    """
    if convention not in CONVENTIONS:
        raise InvalidArgumentError(f"Unknown product convention '{convention}'")

    products = _atom_products(a, b, convention)
    plus, minus = products[1], products[-1]

    def observable(lam):
        return np.where(np.asarray(lam)[:, None] > 0, plus, minus)

    values = sample_values(observable, mode)
    columns = [_reduce(np.ascontiguousarray(values[:, k]), mode.exact) for k in range(8)]
    average = Multivector([mean for mean, _ in columns])
    residual = grade_projection(average, 2).norm()

    estimate = CorrelationEstimate(
        mean=average.scalar_part,
        stderr=columns[0][1],
        n=0 if mode.exact else mode.samples,
        exact=mode.exact,
    )
    logger.debug("Algebraic correlation (%s): scalar %.12g, residual %.3g", convention, average.scalar_part, residual)
    return AlgebraicCorrelation(
        average=average,
        scalar_part=average.scalar_part,
        residual_bivector_norm=residual,
        estimate=estimate,
        convention=convention,
    )


def bivector_residual_estimate(a, b, convention, mode, slot=2):
    """Estimate of one grade-2 coefficient of the outcome product (e12 by default)"""
    products = _atom_products(a, b, convention)
    k = BIVECTOR_SLOTS[slot]
    plus, minus = products[1][k], products[-1][k]
    return estimate_mean(lambda lam: np.where(np.asarray(lam) > 0, plus, minus), mode)


def exact_correlation_formula(model_kind, a, b):
    """Closed-form E(a, b): -1 for the sign model, -a.b for the vector and bivector models"""
    if model_kind == 'sign':
        return -1.0
    if model_kind in ('vector', 'bivector_scalar_part'):
        return -dot(a, b)
    raise InvalidArgumentError(f"Unknown model kind '{model_kind}' (expected one of: {', '.join(FORMULA_KINDS)})")


def model_correlator(model, convention='oriented'):
    """
    Correlator callable (a, b, mode) -> CorrelationEstimate for a named model.

    The bivector model reports the scalar part of its algebraic correlation.
    """
    if model == 'sign':
        return partial(sign_correlation, sign_model_batch)
    if model == 'vector':
        return scalar_product_correlation
    if model == 'bivector':
        if convention not in CONVENTIONS:
            raise InvalidArgumentError(f"Unknown product convention '{convention}'")

        def correlator(a, b, mode):
            return algebraic_correlation(a, b, convention, mode).estimate

        return correlator
    raise InvalidArgumentError(f"Unknown model '{model}'")
