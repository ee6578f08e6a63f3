"""Weighted means, their inequalities and operator versions.

Subpackages
-----------
scalar_means
    Cancellation-safe scalar means and the r-logarithm.
catalog
    Registry of inequalities as signed gap functions.
operator_means
    Operator means and entropies on symmetric positive-definite matrices.
explorer
    Counterexample search, optimal mixing weight, conjecture probe and the
    high-precision adjudicator.
cli
    The ``meanlab`` command line.
"""

__version__ = "0.1.0"
