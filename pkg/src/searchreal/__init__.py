"""searchreal: exact real search and regression with certified precision.

Signed-digit stream arithmetic, continuous searchers over searchable types,
a deterministic complete argmin, and convergence-guaranteed regressors,
plus a CLI that evaluates expressions, solves systems, minimizes
objectives, and fits models with explicit error bounds.
"""

__version__ = "0.1.0"
