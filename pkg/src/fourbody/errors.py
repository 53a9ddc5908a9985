"""Exception types shared across the package.

Domain errors (bad input, states outside a chart) derive from ``DomainError``;
numerical failures (non-convergence, blown invariants) from ``NumericalError``.
The command line maps the first family to exit code 2 and the second to 3.
"""

from __future__ import annotations


class DomainError(ValueError):
    """Input lies outside the domain where an operation is defined."""


class NumericalError(RuntimeError):
    """A numerical procedure failed or violated a monitored invariant."""


class DegenerateNode(DomainError):
    """A node vector of the Deprit chart vanishes (parallel angular momenta)."""


class NonElliptic(DomainError):
    """A Kepler energy is non-negative, so no ellipse is defined."""


class OutOfRange(DomainError):
    """A parameter lies outside the range where a structure exists."""


class ResonantDenominator(DomainError):
    """A small divisor of the averaging step vanishes."""


class CollisionDetected(NumericalError):
    """Two bodies came closer than the configured threshold."""


class EmptyWindow(NumericalError):
    """A requested sign pattern was not found at the searched resolution."""
