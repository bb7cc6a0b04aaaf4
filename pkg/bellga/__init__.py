"""
Bell-test laboratory

CHSH experiments comparing sign, vector and geometric-algebra (bivector)
hidden-variable models, with exact and reproducible Monte Carlo estimators.
"""

__version__ = "1.0.0"
