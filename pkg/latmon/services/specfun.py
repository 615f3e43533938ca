"""
Scalar special functions behind every lattice-sum evaluator.

All functions accept a float or a numpy array and return the same shape
(a Python float for scalar input). phi and its relatives only ever sum the
theta series at arguments >= 1; smaller arguments go through the functional
relation phi(x) = phi(1/x) / sqrt(x).
"""

import math
from typing import Literal, Tuple, Union

import numpy as np
from scipy import special

from latmon.core.exceptions import AccuracyError, CutoffError, DomainError
from latmon.core.logging import logger

ArrayLike = Union[float, np.ndarray]

# e^{-pi n^2 x} for n <= 6 at x >= 1 reaches 1e-49
_SERIES_N = np.arange(1, 7, dtype=float)
_SERIES_N2 = _SERIES_N**2

BESSEL_NU_MAX = 20.0
_BESSEL_REL_TOL = 1e-13
_BESSEL_MAX_HALVINGS = 8
# log-drop of the cosh-integrand that ends the integration range
_BESSEL_LOG_DROP = 40.0


def _as_positive(x: ArrayLike, name: str) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    if not np.all(arr > 0):
        raise DomainError(f"{name} requires a positive argument", {"argument": _describe(arr)})
    return arr, arr.ndim == 0


def _describe(arr: np.ndarray):
    return float(arr) if arr.ndim == 0 else f"array(min={np.nanmin(arr) if arr.size else 'n/a'})"


def _out(values: np.ndarray, scalar: bool) -> ArrayLike:
    return float(values) if scalar else values


def gamma(x: float) -> float:
    """Gamma function on the positive real axis."""
    if not x > 0:
        raise DomainError("gamma is only provided for x > 0", {"x": x})
    return float(special.gamma(x))


# ---- theta_3 and phi(x) = theta_3(e^{-pi x}) ---------------------------------


def _phi_minus_one_large(x: np.ndarray) -> np.ndarray:
    """2 * sum_{n>=1} e^{-pi n^2 x}, valid for x >= 1."""
    return 2.0 * np.exp(-math.pi * np.multiply.outer(x, _SERIES_N2)).sum(axis=-1)


def _phi_prime_large(x: np.ndarray) -> np.ndarray:
    return -2.0 * math.pi * (_SERIES_N2 * np.exp(-math.pi * np.multiply.outer(x, _SERIES_N2))).sum(axis=-1)


def phi_minus_one(x: ArrayLike) -> ArrayLike:
    """phi(x) - 1 without cancellation for large x."""
    arr, scalar = _as_positive(x, "phi_minus_one")
    large = arr >= 1.0
    out = np.empty_like(arr)
    out[large] = _phi_minus_one_large(arr[large])
    small = arr[~large]
    if small.size:
        inv = 1.0 / small
        out[~large] = (1.0 + _phi_minus_one_large(inv)) / np.sqrt(small) - 1.0
    return _out(out, scalar)


def phi(x: ArrayLike) -> ArrayLike:
    """phi(x) = theta_3(e^{-pi x})."""
    arr, scalar = _as_positive(x, "phi")
    large = arr >= 1.0
    out = np.empty_like(arr)
    out[large] = 1.0 + _phi_minus_one_large(arr[large])
    small = arr[~large]
    if small.size:
        out[~large] = (1.0 + _phi_minus_one_large(1.0 / small)) / np.sqrt(small)
    return _out(out, scalar)


def phi_prime(x: ArrayLike) -> ArrayLike:
    """
    Derivative of phi.

    For x < 1 the functional relation is differentiated:
    phi'(x) = -x^{-3/2} phi(1/x) / 2 - x^{-5/2} phi'(1/x).
    """
    arr, scalar = _as_positive(x, "phi_prime")
    large = arr >= 1.0
    out = np.empty_like(arr)
    out[large] = _phi_prime_large(arr[large])
    small = arr[~large]
    if small.size:
        inv = 1.0 / small
        phi_inv = 1.0 + _phi_minus_one_large(inv)
        out[~large] = -0.5 * small**-1.5 * phi_inv - small**-2.5 * _phi_prime_large(inv)
    return _out(out, scalar)


def theta3(q: ArrayLike) -> ArrayLike:
    """
    Jacobi theta_3(q) = sum_n q^{n^2} for 0 <= q < 1.

    Evaluated as phi(-ln q / pi), so the series is summed directly for
    q <= e^{-pi} and after the Poisson transform otherwise.
    """
    arr = np.asarray(q, dtype=float)
    if not np.all((arr >= 0.0) & (arr < 1.0)):
        raise DomainError("theta3 requires 0 <= q < 1", {"q": _describe(arr)})
    out = np.ones_like(arr)
    nz = arr > 0.0
    if np.any(nz):
        out[nz] = np.asarray(phi(-np.log(arr[nz]) / math.pi))
    return _out(out, arr.ndim == 0)


def phi_sq_prime_lattice(y: float, shells, tol: float = 1e-15) -> float:
    """
    (phi^2)'(y) = -pi * sum_k k r_2(k) e^{-pi k y}, summed over a shell table.

    The discarded tail is bounded with r_2(k) <= 2(2 sqrt(k) + 1) and a
    geometric majorant; CutoffError if it exceeds tol relative to the value.
    """
    if not y > 0:
        raise DomainError("phi_sq_prime_lattice requires y > 0", {"y": y})
    if shells.dimension != 2:
        raise DomainError("phi_sq_prime_lattice needs a 2D shell table", {"dimension": shells.dimension})

    k_max = shells.max_norm_sq
    k = np.arange(1, k_max + 1, dtype=float)
    counts = shells.counts[1:].astype(float)
    value = -math.pi * float(np.sum(counts * k * np.exp(-math.pi * k * y)))

    k_next = k_max + 1.0
    ratio = ((k_next + 1.0) / k_next) ** 1.5 * math.exp(-math.pi * y)
    if ratio >= 1.0:
        raise CutoffError("shell table too small for phi_sq_prime_lattice", {"y": y, "max_norm_sq": k_max})
    first = 2.0 * (2.0 * math.sqrt(k_next) + 1.0) * k_next * math.exp(-math.pi * k_next * y)
    tail = math.pi * first / (1.0 - ratio)
    if tail > max(tol * abs(value), np.finfo(float).tiny):
        raise CutoffError(
            "shell table too small for phi_sq_prime_lattice",
            {"y": y, "max_norm_sq": k_max, "tail_bound": tail},
        )
    return value


# ---- hyperbolic comparison functions ---------------------------------------
# With t = pi y / 2 and u = e^{-2t}:
#   coth t = (1 + u) / (1 - u),           1 / sinh^2 t = 4u / (1 - u)^2,
#   cosh t / sinh^3 t = 4u(1 + u)/(1-u)^3, cosh^2 t / sinh^4 t = 4u(1 + u)^2/(1-u)^4


def _half_angle(y: ArrayLike, name: str):
    arr, scalar = _as_positive(y, name)
    t = 0.5 * math.pi * arr
    u = np.exp(-2.0 * t)
    one_minus_u = -np.expm1(-2.0 * t)
    return arr, scalar, u, one_minus_u


def psi(y: ArrayLike) -> ArrayLike:
    """psi(y) = coth(pi y / 2)."""
    _, scalar, u, omu = _half_angle(y, "psi")
    return _out((1.0 + u) / omu, scalar)


def psi_prime(y: ArrayLike) -> ArrayLike:
    _, scalar, u, omu = _half_angle(y, "psi_prime")
    return _out(-2.0 * math.pi * u / omu**2, scalar)


def g_fun(y: ArrayLike) -> ArrayLike:
    """g(y) = pi y^2 cosh(pi y/2) / sinh^3(pi y/2)."""
    arr, scalar, u, omu = _half_angle(y, "g_fun")
    return _out(math.pi * arr**2 * 4.0 * u * (1.0 + u) / omu**3, scalar)


def h_fun(y: ArrayLike, convention: Literal["printed", "derived"] = "printed") -> ArrayLike:
    """
    h(y) = c y^{5/2} cosh^2(pi y/2) / sinh^4(pi y/2).

    ``printed`` uses c = pi, which gives h(1.6144) = 0.270...; ``derived`` uses
    c = pi/2, the value for which -h = y^{5/2} psi^2 psi' holds exactly.
    """
    if convention not in ("printed", "derived"):
        raise DomainError(f"unknown h convention {convention!r}", {"convention": convention})
    arr, scalar, u, omu = _half_angle(y, "h_fun")
    prefactor = math.pi if convention == "printed" else 0.5 * math.pi
    return _out(prefactor * arr**2.5 * 4.0 * u * (1.0 + u) ** 2 / omu**4, scalar)


# ---- K_nu by the cosh integral ---------------------------------------------


def _bessel_s_max(nu: float, t_min: float) -> float:
    """End of the integration range: the log-integrand has dropped by _BESSEL_LOG_DROP below its peak."""
    s_peak = math.asinh(nu / t_min) if nu > 0 else 0.0

    def log_integrand(s: float) -> float:
        return nu * s - 2.0 * t_min * math.sinh(0.5 * s) ** 2

    peak = log_integrand(s_peak)
    step = 1.0
    s = s_peak + step
    while log_integrand(s) > peak - _BESSEL_LOG_DROP:
        step *= 2.0
        s = s_peak + step
    return s


def _bessel_scaled_trapezoid(nu: float, t: np.ndarray, h: float, s_max: float) -> np.ndarray:
    """e^t K_nu(t) by the trapezoidal rule on [0, s_max] with step h."""
    s = np.arange(0.0, s_max + h, h)
    shift = 2.0 * np.sinh(0.5 * s) ** 2
    weights = np.full(s.shape, h)
    weights[0] = 0.5 * h
    exponent = -np.multiply.outer(t, shift)
    integrand = 0.5 * (np.exp(exponent + nu * s) + np.exp(exponent - nu * s))
    return integrand @ weights


def bessel_k(nu: float, t: ArrayLike) -> ArrayLike:
    """
    Modified Bessel function K_nu(t) from K_nu(t) = int_0^inf e^{-t cosh s} cosh(nu s) ds.

    The integrand is even and entire in s, so the trapezoidal rule converges
    geometrically; the step is halved until two levels agree to 1e-13.

    Raises:
        DomainError: t <= 0 or nu outside [0, 20]
        AccuracyError: no convergence after the allowed halvings
    """
    if not 0.0 <= nu <= BESSEL_NU_MAX:
        raise DomainError(f"bessel_k supports 0 <= nu <= {BESSEL_NU_MAX}", {"nu": nu})
    arr, scalar = _as_positive(t, "bessel_k")
    flat = np.atleast_1d(arr).ravel()
    if flat.size == 0:
        return arr.copy()

    h = min(0.25, 1.0 / math.sqrt(float(flat.max())))
    s_max = _bessel_s_max(nu, float(flat.min()))
    previous = _bessel_scaled_trapezoid(nu, flat, h, s_max)
    for _ in range(_BESSEL_MAX_HALVINGS):
        h *= 0.5
        current = _bessel_scaled_trapezoid(nu, flat, h, s_max)
        if np.all(np.abs(current - previous) <= _BESSEL_REL_TOL * np.abs(current)):
            break
        previous = current
    else:
        raise AccuracyError("bessel_k trapezoidal rule did not converge", {"nu": nu, "step": h})
    logger.debug("bessel_k nu=%s: %d points converged at step %.3g, s_max %.3g", nu, flat.size, h, s_max)

    values = (current * np.exp(-flat)).reshape(arr.shape)
    return _out(values, scalar)


def cap_f(p: float, t: ArrayLike) -> ArrayLike:
    """F_p(t) = t^p K_p(t); tends to 2^{p-1} Gamma(p) as t -> 0+."""
    arr, scalar = _as_positive(t, "cap_f")
    values = arr**p * np.asarray(bessel_k(p, arr))
    return _out(values, scalar)

