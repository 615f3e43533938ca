"""
I_p(m) on Z^2 and Z^3 by three independent methods.

    d = 2:  I_p(m) = (p-1) m^{2(p-1)} / pi * sum_{n != 0} (m^2 + |n|^2)^{-p}
    d = 3:  I_p(m) = m^{2p-3}                * sum_{n != 0} (m^2 + |n|^2)^{-p}

As m -> inf the value tends to 1 (d = 2) and Gamma(p-3/2) pi^{3/2} / Gamma(p) (d = 3).
"""

import math
from typing import Optional

import numpy as np
from scipy import special

from latmon.core.config import settings
from latmon.core.exceptions import CutoffError, DomainError
from latmon.core.logging import logger
from latmon.schemas.latsum import LatticeSumQuery, MethodResult
from latmon.services import monotone
from latmon.services.lattice import ShellTable, ball_volume, cached_shell_table, get_shell_table
from latmon.services.specfun import BESSEL_NU_MAX, bessel_k, gamma, phi, phi_minus_one
from latmon.utils.quadrature import graded_integral, solve_decay_cutoff

BESSEL_SMALL_M = 0.05
_BESSEL_CHUNK = 2048
_ANNULUS_LOG_DROP = 80.0


def prefactor(dimension: int, p: float, m: float) -> float:
    if dimension == 2:
        return (p - 1.0) * m ** (2.0 * (p - 1.0)) / math.pi
    return m ** (2.0 * p - 3.0)


def continuum_limit(dimension: int, p: float) -> float:
    """lim_{m -> inf} I_p(m): the integral over R^d replacing the lattice sum."""
    if dimension == 2:
        return 1.0
    if dimension == 3:
        if not p > 1.5:
            raise DomainError("the 3D limit needs p > 3/2", {"p": p})
        return gamma(p - 1.5) * math.pi**1.5 / gamma(p)
    raise DomainError("dimension must be 2 or 3", {"dimension": dimension})


def default_shells(dimension: int, cache_dir=None) -> ShellTable:
    max_norm_sq = settings.DIRECT_NORM_SQ_2D if dimension == 2 else settings.DIRECT_NORM_SQ_3D
    return cached_shell_table(dimension, max_norm_sq, cache_dir)


# ---- direct summation -------------------------------------------------------


def _continuum_tail(dimension: int, p: float, m2: float, x: float) -> float:
    """sum over |n|^2 > x replaced by the integral of (m^2 + |y|^2)^{-p} outside the ball."""
    if dimension == 2:
        return math.pi * (m2 + x) ** (1.0 - p) / (p - 1.0)
    a = p - 1.5
    tau = m2 / (m2 + x)
    return 2.0 * math.pi * m2 ** (1.5 - p) * special.beta(a, 1.5) * special.betainc(a, 1.5, tau)


def _discrepancy_oscillation(shells: ShellTable, x: float) -> float:
    """max over integer u in [x/4, x] of |int_u^x P(s) ds|, P the lattice discrepancy."""
    k_max = shells.max_norm_sq
    lo = max(1, math.ceil(x / 4.0))
    if lo >= k_max:
        return 0.0
    shifted = shells.cumulative[lo:k_max] + 1
    # suffix sums of N(k) + 1 over k = L..K-1 are integers, exact in int64
    suffix = np.cumsum(shifted[::-1], dtype=np.int64)[::-1].astype(float)
    edge = (shells.cumulative[k_max] + 1.0) * (x - k_max)
    u = np.arange(lo, k_max, dtype=float)
    if shells.dimension == 2:
        volume = 0.5 * math.pi * (x - u) * (x + u)
    else:
        volume = (8.0 * math.pi / 15.0) * (x**2.5 - u**2.5)
    return float(np.max(np.abs(suffix + edge - volume)))


def _rigorous_tail(dimension: int, p: float, m2: float, max_norm_sq: int) -> float:
    """Unit-cell comparison bound on sum over |n|^2 > K, cells of half-diagonal sqrt(d)/2."""
    half_diag = math.sqrt(dimension) / 2.0
    a = math.sqrt(max_norm_sq + 1.0) - 2.0 * half_diag
    if a <= 0:
        raise CutoffError("shell table too small for a rigorous tail bound", {"max_norm_sq": max_norm_sq})
    if dimension == 2:
        return math.pi * (m2 + a * a) ** (1.0 - p) / (p - 1.0) * (1.0 + half_diag / a)
    return 4.0 * math.pi * (1.0 + half_diag / a) ** 2 * a ** (3.0 - 2.0 * p) / (2.0 * p - 3.0)


def direct_sum(
    q: LatticeSumQuery,
    shells: Optional[ShellTable] = None,
    tail_correction: bool = True,
    cache_dir=None,
) -> MethodResult:
    """
    Partial sum over the shell table.

    With ``tail_correction`` the shells beyond K are replaced by the continuum
    integral plus the Abel boundary term -F(X) P(X) at X = K + 1/2, and the error
    is the a posteriori estimate 2 |F'(X)| max |int P| (not rigorous). Without
    it the plain partial sum is returned with the rigorous unit-cell tail bound.

    Raises:
        DomainError: shell table of the wrong dimension
        CutoffError: rigorous mode and the tail bound exceeds the tolerance
    """
    if shells is None:
        shells = default_shells(q.dimension, cache_dir)
    if shells.dimension != q.dimension:
        raise DomainError(
            "shell table dimension does not match the query",
            {"table": shells.dimension, "query": q.dimension},
        )
    if q.m == 0:
        return MethodResult(value=0.0, error_bound=0.0, terms_used=0, method="direct", rigorous=True)

    p, m2 = q.p, q.m * q.m
    k_max = shells.max_norm_sq
    pref = prefactor(q.dimension, p, q.m)

    k = np.flatnonzero(shells.counts)
    partial = float(np.sum(shells.counts[k] * (m2 + k.astype(float)) ** -p))

    if not tail_correction:
        tail = pref * _rigorous_tail(q.dimension, p, m2, k_max)
        value = pref * partial
        if not q.tol.satisfied(tail, value):
            raise CutoffError(
                "rigorous tail bound exceeds the tolerance",
                {"tail_bound": tail, "max_norm_sq": k_max, "p": p, "m": q.m},
            )
        return MethodResult(value=value, error_bound=tail, terms_used=k.size, method="direct", rigorous=True)

    x = k_max + 0.5
    f_x = (m2 + x) ** -p
    discrepancy = float(shells.cumulative[k_max]) + 1.0 - float(ball_volume(q.dimension, x))
    value = pref * (partial + _continuum_tail(q.dimension, p, m2, x) - f_x * discrepancy)
    error = pref * 2.0 * p * (m2 + x) ** (-p - 1.0) * _discrepancy_oscillation(shells, x)
    if not q.tol.satisfied(error, value):
        logger.warning(
            "direct_sum error estimate %.3g above tolerance at p=%s m=%s (K=%d)", error, p, q.m, k_max
        )
    logger.debug("direct_sum d=%d p=%s m=%s K=%d value=%.17g", q.dimension, p, q.m, k_max, value)
    return MethodResult(value=value, error_bound=error, terms_used=k.size, method="direct", rigorous=False)


# ---- theta-function integral ------------------------------------------------


def _theta_tail_bound(dimension: int, p: float, m2: float, x: float) -> float:
    """Bound on int_x^inf t^{p-1} e^{-m^2 t} (phi(t/pi)^d - 1) dt."""
    if x >= math.pi:
        # phi(t/pi)^d - 1 <= 2.4 d e^{-t} for t >= pi
        rate = 1.0 + m2
        return 2.4 * dimension * gamma(p) * special.gammaincc(p, rate * x) / rate**p
    excess = float(np.expm1(dimension * np.log1p(phi_minus_one(x / math.pi))))
    return excess * gamma(p) * special.gammaincc(p, m2 * x) / m2**p


def theta_integral(q: LatticeSumQuery) -> MethodResult:
    """
    I_p(m) from the Mellin representation

        sum (m^2 + |n|^2)^{-p} = 1/Gamma(p) int_0^inf x^{p-1} e^{-m^2 x} (theta_3(e^{-x})^d - 1) dx.

    On [0, a] theta_3(e^{-x}) = sqrt(pi/x) phi(pi/x) exposes the x^{p-1-d/2}
    singularity, which goes to a Gauss-Jacobi panel; the -1 part is integrated
    in closed form. The rest uses graded Gauss-Legendre panels.
    """
    if q.m == 0:
        raise DomainError("theta_integral needs m > 0; I_p(0) = 0", {"m": q.m})

    d, p, m = q.dimension, q.p, q.m
    m2 = m * m
    rate = 1.0 + m2
    a = min(1.0, 1.0 / rate) / 4.0
    beta = p - 1.0 - 0.5 * d
    norm = prefactor(d, p, m) / gamma(p)

    def singular(x: np.ndarray) -> np.ndarray:
        return math.pi ** (0.5 * d) * np.exp(-m2 * x) * np.asarray(phi(math.pi / x)) ** d

    def regular(x: np.ndarray) -> np.ndarray:
        excess = np.expm1(d * np.log1p(np.asarray(phi_minus_one(x / math.pi))))
        return x ** (p - 1.0) * np.exp(-m2 * x) * excess

    closed = gamma(p) * special.gammainc(p, m2 * a) / m2**p

    # Lower bound of the integral from the 2d nearest lattice points
    floor_value = gamma(p) * 2.0 * d * (m2 + 1.0) ** -p
    tail_target = 1e-3 * q.tol.target(norm * floor_value) / norm
    x_max = solve_decay_cutoff(p - 1.0, rate, 2.4 * d, tail_target)
    tail = _theta_tail_bound(d, p, m2, x_max)
    while tail > tail_target:
        x_max *= 2.0
        tail = _theta_tail_bound(d, p, m2, x_max)

    def target(raw: float) -> float:
        return q.tol.target(norm * (raw - closed)) / norm

    raw, quad_error, nodes = graded_integral(
        (singular, beta), regular, a, 2.0 / rate, x_max, target, label="theta_integral"
    )
    value = norm * (raw - closed)
    error = norm * (quad_error + tail)
    logger.debug("theta_integral d=%d p=%s m=%s value=%.17g nodes=%d", d, p, m, value, nodes)
    return MethodResult(value=value, error_bound=error, terms_used=nodes, method="theta_integral", rigorous=False)


# ---- Bessel series (d = 2) --------------------------------------------------


def _bessel_terms(nu: float, t: np.ndarray) -> np.ndarray:
    """F_nu(t) = t^nu K_nu(t), evaluated in chunks to bound the quadrature buffers."""
    out = np.empty_like(t)
    for start in range(0, t.size, _BESSEL_CHUNK):
        chunk = t[start:start + _BESSEL_CHUNK]
        out[start:start + _BESSEL_CHUNK] = chunk**nu * np.asarray(bessel_k(nu, chunk))
    return out


def _bessel_coefficient(p: float) -> float:
    return 4.0 * (p - 1.0) / (2.0**p * gamma(p))


def _annulus_tail(nu: float, m: float, rho: float) -> float:
    """
    Bound on sum over |n| > rho of F_nu(2 pi m |n|).

    At most pi (1 + sqrt 2)(2r + 1) points have |n| in (r, r + 1], and F_nu decreases.
    """
    count = int(math.ceil(_ANNULUS_LOG_DROP / (2.0 * math.pi * m))) + 2
    r = rho + np.arange(count, dtype=float)
    terms = math.pi * (1.0 + math.sqrt(2.0)) * (2.0 * r + 1.0) * _bessel_terms(nu, 2.0 * math.pi * m * r)
    return float(np.sum(terms))


def _check_bessel_query(q: LatticeSumQuery) -> None:
    if q.dimension != 2:
        raise DomainError("bessel_series is available for d = 2 only", {"dimension": q.dimension})
    if not q.m > 0:
        raise DomainError("bessel_series needs m > 0", {"m": q.m})
    if q.p - 1.0 > BESSEL_NU_MAX:
        raise DomainError("bessel_series supports p <= 21", {"p": q.p})


def bessel_cutoff(q: LatticeSumQuery) -> int:
    """Smallest shell table K whose Bessel-series tail bound meets half the tolerance."""
    _check_bessel_query(q)
    nu, m = q.p - 1.0, q.m
    coefficient = _bessel_coefficient(q.p)
    target = 0.5 * q.tol.target(1.0)
    rho = max(1.0, math.log(1.0 / target) / (2.0 * math.pi * m) * 0.5)
    while coefficient * _annulus_tail(nu, m, rho) > target:
        rho *= 1.25
    return max(1, math.ceil(rho * rho))


def bessel_series(q: LatticeSumQuery, shells: Optional[ShellTable] = None) -> MethodResult:
    """
    I_p(m) = 1 - (p-1)/(pi m^2) + 4(p-1)/(2^p Gamma(p)) sum_{n != 0} F_{p-1}(2 pi |n| m).

    The series converges like e^{-2 pi m |n|}: a handful of shells for m >= 1,
    many more below m = 0.05 (logged as a warning).

    Raises:
        DomainError: d = 3, m = 0 or p - 1 outside the Bessel range
        CutoffError: a supplied shell table is smaller than bessel_cutoff(q)
    """
    _check_bessel_query(q)
    if q.m < BESSEL_SMALL_M:
        logger.warning("bessel_series at m=%s < %s needs many shells and loses accuracy", q.m, BESSEL_SMALL_M)

    nu, m = q.p - 1.0, q.m
    k_max = bessel_cutoff(q)
    if shells is None:
        shells = get_shell_table(2, k_max)
    elif shells.dimension != 2 or shells.max_norm_sq < k_max:
        raise CutoffError(
            "shell table too small for the Bessel series",
            {"needed": k_max, "max_norm_sq": shells.max_norm_sq},
        )

    counts = shells.counts[: k_max + 1]
    k = np.flatnonzero(counts)
    terms = counts[k] * _bessel_terms(nu, 2.0 * math.pi * m * np.sqrt(k.astype(float)))
    coefficient = _bessel_coefficient(q.p)
    leading = nu / (math.pi * m * m)
    value = 1.0 - leading + coefficient * float(np.sum(terms))

    tail = coefficient * _annulus_tail(nu, m, math.sqrt(k_max))
    rounding = 1e-13 * (1.0 + leading)
    logger.debug("bessel_series p=%s m=%s K=%d value=%.17g", q.p, m, k_max, value)
    return MethodResult(
        value=value, error_bound=tail + rounding, terms_used=int(k.size), method="bessel_series", rigorous=True
    )


# ---- derivative in m --------------------------------------------------------


def derivative_dm(q: LatticeSumQuery) -> float:
    """
    dI_p/dm by quadrature over x with y = pi m^2 / x:

        d = 2:  2(p-1)/(pi Gamma(p) m^3) int x^{p-1} e^{-x} (2 y^2 phi phi' + 1) dx
        d = 3:  1/(Gamma(p) m^4)        int x^{p-1} e^{-x} (6 y^{5/2} phi^2 phi' + 3) dx

    The brackets are condmon_expr(y) and 3 * exact3_expr(y); both are positive,
    so the derivative is.
    """
    if not q.m > 0:
        raise DomainError("derivative_dm needs m > 0", {"m": q.m})

    d, p, m = q.dimension, q.p, q.m
    scale = math.pi * m * m
    if d == 2:
        coefficient = 2.0 * (p - 1.0) / (math.pi * gamma(p) * m**3)

        def bracket(y: np.ndarray) -> np.ndarray:
            return np.asarray(monotone.condmon_expr(y))
    else:
        coefficient = 1.0 / (gamma(p) * m**4)

        def bracket(y: np.ndarray) -> np.ndarray:
            return 3.0 * np.asarray(monotone.exact3_expr(y))

    def singular(x: np.ndarray) -> np.ndarray:
        return np.exp(-x) * bracket(scale / x)

    def regular(x: np.ndarray) -> np.ndarray:
        return x ** (p - 1.0) * singular(x)

    a = min(1.0, scale) / 4.0
    x_max = solve_decay_cutoff(p - 1.0, 1.0, 3.0 / gamma(p), 1e-18)

    def target(raw: float) -> float:
        return q.tol.target(coefficient * raw) / coefficient

    raw, _, _ = graded_integral((singular, p - 1.0), regular, a, 2.0, x_max, target, label="derivative_dm")
    return coefficient * raw
