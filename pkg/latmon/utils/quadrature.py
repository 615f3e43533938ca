"""
Graded Gauss quadrature on [0, inf) for integrands x^beta * smooth(x) * decay.

The range is split into a Gauss-Jacobi panel [0, a] carrying the algebraic
endpoint weight, geometrically doubling Gauss-Legendre panels up to the decay
scale, and uniform panels out to x_max. Each refinement level doubles the
node count per panel.
"""

import math
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import special

from latmon.core.config import settings
from latmon.core.exceptions import AccuracyError
from latmon.core.logging import logger

BASE_NODES = 12


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(n)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


@lru_cache(maxsize=64)
def gauss_jacobi(n: int, beta: float) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on [-1, 1] for the weight (1 + x)^beta."""
    nodes, weights = special.roots_jacobi(n, 0.0, beta)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def panel_breaks(a: float, decay_width: float, x_max: float) -> np.ndarray:
    """[a, 2a, 4a, ...] while panels are narrower than decay_width, then uniform steps to x_max."""
    breaks = [a]
    x = a
    while x < x_max and x < decay_width:
        x = min(2.0 * x, x_max)
        breaks.append(x)
    while x < x_max:
        x = min(x + decay_width, x_max)
        breaks.append(x)
    return np.asarray(breaks)


def jacobi_panel(f: Callable[[np.ndarray], np.ndarray], beta: float, a: float, n: int) -> float:
    """int_0^a x^beta f(x) dx."""
    xi, w = gauss_jacobi(n, beta)
    x = 0.5 * a * (1.0 + xi)
    return float((0.5 * a) ** (beta + 1.0) * np.dot(w, f(x)))


def legendre_panels(f: Callable[[np.ndarray], np.ndarray], breaks: np.ndarray, n: int) -> float:
    """Composite Gauss-Legendre over consecutive break points, one vectorised call of f."""
    xi, w = gauss_legendre(n)
    lo = breaks[:-1, None]
    half = 0.5 * (breaks[1:, None] - lo)
    x = lo + half * (1.0 + xi[None, :])
    values = f(x.ravel()).reshape(x.shape)
    return float(np.sum(half * (values * w[None, :])))


def solve_decay_cutoff(power: float, rate: float, coefficient: float, eps: float) -> float:
    """Smallest x (approximately) with coefficient * x^power * e^{-rate x} < eps, by fixed point."""
    x = 1.0 / rate
    for _ in range(50):
        x_new = (math.log(coefficient / eps) + power * math.log(max(x, 1e-300))) / rate
        x_new = max(x_new, 1.0 / rate)
        if abs(x_new - x) <= 1e-12 * x_new:
            x = x_new
            break
        x = x_new
    return x


def graded_integral(
    singular: Optional[Tuple[Callable[[np.ndarray], np.ndarray], float]],
    regular: Callable[[np.ndarray], np.ndarray],
    a: float,
    decay_width: float,
    x_max: float,
    target: Callable[[float], float],
    max_levels: Optional[int] = None,
    label: str = "integral",
) -> Tuple[float, float, int]:
    """
    Nested refinement of the panel rule.

    Args:
        singular: (f, beta) for int_0^a x^beta f(x) dx, or None to skip [0, a]
        regular: integrand on [a, x_max]
        a: end of the Jacobi panel
        decay_width: width of the uniform tail panels
        x_max: end of the range
        target: maps the current estimate to the admissible error
        max_levels: refinement levels before giving up (settings.QUAD_MAX_LEVELS)
        label: name used in logs and errors

    Returns:
        (value, error estimate, nodes used at the final level)

    Raises:
        AccuracyError: two successive levels never agreed to target/4
    """
    max_levels = max_levels or settings.QUAD_MAX_LEVELS
    breaks = panel_breaks(a, decay_width, x_max)

    def evaluate(n: int) -> float:
        total = legendre_panels(regular, breaks, n)
        if singular is not None:
            f, beta = singular
            total += jacobi_panel(f, beta, a, n)
        return total

    n = BASE_NODES
    previous = evaluate(n)
    for level in range(1, max_levels + 1):
        n *= 2
        current = evaluate(n)
        diff = abs(current - previous)
        if diff <= 0.25 * target(current):
            nodes = n * (len(breaks) - 1 + (singular is not None))
            logger.debug("%s converged at level %d with %d nodes (diff %.3g)", label, level, nodes, diff)
            return current, 2.0 * diff, nodes
        previous = current

    raise AccuracyError(
        f"{label}: quadrature refinement did not converge",
        {"levels": max_levels, "last_difference": diff, "nodes_per_panel": n},
    )
