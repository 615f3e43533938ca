"""
Pointwise positivity of the brackets that make I_p(m) increasing in m.

    condmon(y) = 2 y^2 phi(y) phi'(y) + 1          (d = 2)
    suff3(y)   = 3 y^{5/2} phi(y)^2 phi'(y) + 2    (d = 3, sufficient)
    exact3(y)  = 2 y^{5/2} phi(y)^2 phi'(y) + 1    (d = 3, the derivative's own bracket)

For y < 1 the Poisson-transformed identity

    2 y^2 phi(y) phi'(y) = -1 + sum_k r_2(k) (pi k / y - 1) e^{-pi k / y}

is used; with t = 1/y, condmon = e^{-pi t} S(t) where S(t) > 0 is summed with the
leading exponential factored out, so the sign survives even where the value
itself underflows.
"""

import math
from functools import lru_cache
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy import optimize

from latmon.core.exceptions import DomainError
from latmon.core.logging import logger
from latmon.schemas.latsum import Tolerance
from latmon.schemas.monotone import CertificateReport, Condition, GridDescription, NamedConstants
from latmon.services.lattice import get_shell_table
from latmon.services.specfun import g_fun, h_fun, phi, phi_minus_one, phi_prime, psi

# Shells kept in the transformed series; e^{-pi (k-1) t} at k = 64, t >= 1 is far below 1e-80
_TRANSFORM_SHELLS = 64
LOG10_E = math.log10(math.e)


@lru_cache(maxsize=1)
def _transform_shells() -> Tuple[np.ndarray, np.ndarray]:
    table = get_shell_table(2, _TRANSFORM_SHELLS)
    k = np.flatnonzero(table.counts)
    return k.astype(float), table.counts[k].astype(float)


def _scaled_series(t: np.ndarray) -> np.ndarray:
    """S(t) = sum_k r_2(k) (pi k t - 1) e^{-pi (k - 1) t}, for t >= 1."""
    k, r = _transform_shells()
    kt = np.multiply.outer(t, k)
    return np.sum(r * (math.pi * kt - 1.0) * np.exp(-math.pi * (kt - t[..., None])), axis=-1)


def _scaled_delta(t: np.ndarray) -> np.ndarray:
    """(phi(t) - 1) e^{pi t} = 2 sum_{n>=1} e^{-pi (n^2 - 1) t}."""
    n2 = np.arange(1, 7, dtype=float) ** 2
    return 2.0 * np.exp(-math.pi * np.multiply.outer(t, n2 - 1.0)).sum(axis=-1)


def _split(y) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(y, dtype=float)
    if not np.all(arr > 0):
        raise DomainError("monotonicity expressions need y > 0", {"y": float(np.min(arr)) if arr.size else None})
    return arr, arr.ndim == 0


def _condmon_direct(y: np.ndarray) -> np.ndarray:
    return 1.0 + 2.0 * y**2 * np.asarray(phi(y)) * np.asarray(phi_prime(y))


def _log10_condmon(y: np.ndarray) -> np.ndarray:
    out = np.empty_like(y)
    large = y >= 1.0
    out[large] = _safe_log10(_condmon_direct(y[large]))
    t = 1.0 / y[~large]
    if t.size:
        out[~large] = -math.pi * t * LOG10_E + _safe_log10(_scaled_series(t))
    return out


def _exact3_scaled(t: np.ndarray) -> np.ndarray:
    """e^{pi t} exact3(1/t) = S(t) (1 + delta) - delta e^{pi t}, delta = phi(t) - 1."""
    delta = np.asarray(phi_minus_one(t))
    return _scaled_series(t) * (1.0 + delta) - _scaled_delta(t)


def _exact3_direct(y: np.ndarray) -> np.ndarray:
    return 1.0 + 2.0 * y**2.5 * np.asarray(phi(y)) ** 2 * np.asarray(phi_prime(y))


def _log10_exact3(y: np.ndarray) -> np.ndarray:
    out = np.empty_like(y)
    large = y >= 1.0
    out[large] = _safe_log10(_exact3_direct(y[large]))
    t = 1.0 / y[~large]
    if t.size:
        out[~large] = -math.pi * t * LOG10_E + _safe_log10(_exact3_scaled(t))
    return out


def _log10_suff3(y: np.ndarray) -> np.ndarray:
    return _safe_log10(np.asarray(suff3_expr(y)))


def _safe_log10(values: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log10(values)
    out[~(values > 0)] = -np.inf
    return out


def condmon_expr(y):
    """2 y^2 phi(y) phi'(y) + 1; tends to 0+ as y -> 0+ and to 1 as y -> inf."""
    arr, scalar = _split(y)
    out = np.empty_like(arr)
    large = arr >= 1.0
    out[large] = _condmon_direct(arr[large])
    t = 1.0 / arr[~large]
    if t.size:
        out[~large] = np.exp(-math.pi * t) * _scaled_series(t)
    return float(out) if scalar else out


def suff3_expr(y):
    """
    3 y^{5/2} phi^2 phi' + 2.

    For y <= pi via 3 y^{5/2} phi^2 phi' = 3 phi(1/y) [y^2 phi phi'], with the
    bracket taken from condmon_expr; directly above pi.
    """
    arr, scalar = _split(y)
    out = np.empty_like(arr)
    low = arr <= math.pi
    yl = arr[low]
    if yl.size:
        out[low] = 2.0 + 1.5 * np.asarray(phi(1.0 / yl)) * (np.asarray(condmon_expr(yl)) - 1.0)
    yh = arr[~low]
    out[~low] = 2.0 + 3.0 * yh**2.5 * np.asarray(phi(yh)) ** 2 * np.asarray(phi_prime(yh))
    return float(out) if scalar else out


def exact3_expr(y):
    """2 y^{5/2} phi^2 phi' + 1, the bracket of the 3D derivative."""
    arr, scalar = _split(y)
    out = np.empty_like(arr)
    large = arr >= 1.0
    out[large] = _exact3_direct(arr[large])
    t = 1.0 / arr[~large]
    if t.size:
        out[~large] = np.exp(-math.pi * t) * _exact3_scaled(t)
    return float(out) if scalar else out


_LOG10_EVALUATORS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "condmon_2d": _log10_condmon,
    "suff3_3d": _log10_suff3,
    "exact3_3d": _log10_exact3,
}


def find_y_star(tol: Optional[Tolerance] = None) -> float:
    """Root of psi(1/y) = 4/3 on [1, 2]; equals pi / (2 arcoth(4/3)) = pi / ln 7."""
    xtol = 0.1 * tol.abs_tol if tol is not None and tol.abs_tol > 0 else 1e-15

    def residual(y: float) -> float:
        return psi(1.0 / y) - 4.0 / 3.0

    return float(optimize.bisect(residual, 1.0, 2.0, xtol=xtol, maxiter=200))


def y_star_closed_form() -> float:
    return math.pi / math.log(7.0)


def named_constants() -> NamedConstants:
    y_star = find_y_star()
    return NamedConstants(
        y_star=y_star,
        y_star_closed_form=y_star_closed_form(),
        g_at_pi=g_fun(math.pi),
        h_at_y_star=h_fun(y_star, "printed"),
        h_at_y_star_derived=h_fun(y_star, "derived"),
    )


def certify(
    condition: Condition,
    y_min: float,
    y_max: float,
    samples: int,
    refine: bool = False,
) -> CertificateReport:
    """
    Scan a bracket on a log-spaced grid and report its minimum and any non-positive samples.

    Violations are data: the caller decides the exit status.

    Raises:
        DomainError: unknown condition, bad range or fewer than 100 samples
    """
    if condition not in _LOG10_EVALUATORS:
        raise DomainError(f"unknown condition {condition!r}", {"condition": condition})
    if not (0 < y_min < y_max) or not math.isfinite(y_max):
        raise DomainError("need 0 < y_min < y_max", {"y_min": y_min, "y_max": y_max})
    if samples < 100:
        raise DomainError("at least 100 samples are required", {"samples": samples})

    log10_eval = _LOG10_EVALUATORS[condition]
    grid = np.geomspace(y_min, y_max, samples)
    logs = log10_eval(grid)
    violations = grid[~(logs > -np.inf)].tolist()

    i_min = int(np.argmin(logs))
    min_log10, min_y = float(logs[i_min]), float(grid[i_min])

    if refine and np.isfinite(min_log10):
        lo = grid[max(i_min - 1, 0)]
        hi = grid[min(i_min + 1, samples - 1)]
        result = optimize.minimize_scalar(
            lambda y: float(log10_eval(np.array([y]))[0]),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-6},
        )
        if result.success and result.fun < min_log10:
            min_log10, min_y = float(result.fun), float(result.x)
            if not np.isfinite(min_log10):
                violations.append(min_y)

    logger.info(
        "certify %s on [%g, %g] with %d samples: min log10 %.6g at y=%.6g, %d violation(s)",
        condition, y_min, y_max, samples, min_log10, min_y, len(violations),
    )
    return CertificateReport(
        condition=condition,
        grid=GridDescription(y_min=y_min, y_max=y_max, samples=samples, refined=refine),
        min_value=10.0**min_log10 if np.isfinite(min_log10) else 0.0,
        min_log10_value=min_log10,
        min_location=min_y,
        violations=violations,
        named_constants=named_constants(),
    )
