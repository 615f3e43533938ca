"""
Closed-form attractor-dimension estimates for the damped and regularized
Navier-Stokes systems, together with the functional-inequality constants
that feed them.
"""

import math
from typing import List, Literal, Optional, Tuple

from latmon.core.exceptions import DomainError, MissingParameterError, PreconditionError
from latmon.core.logging import logger
from latmon.schemas.bounds import (
    ConstantsRegistry,
    DimensionBounds,
    LifschitzEstimate,
    PhysicalParams,
    QCurve,
    StokesBounds,
)
from latmon.services.specfun import gamma

REGISTRY = ConstantsRegistry()

Ns2dVariant = Literal["li_yau", "no_li_yau", "pre_lt"]
BoundaryCondition = Literal["no_boundary", "proper_domain"]


def grashof(params: PhysicalParams) -> float:
    """G = ||f|| |Omega| / nu^2."""
    params.require("nu", "area", "f_l2")
    return params.f_l2 * params.area / params.nu**2


# ---- q(n) curves ------------------------------------------------------------


def _quadratic_coefficient(params: PhysicalParams) -> float:
    params.require("nu", "area", "f_l2")
    return params.nu * math.pi / params.area


def _forcing_payload(params: PhysicalParams, constant: float) -> float:
    return constant * params.f_l2**2 * params.area / (8.0 * math.pi * params.nu**3)


def lt_curve(params: PhysicalParams, clt: float) -> QCurve:
    return QCurve(kind="lieb_thirring", a=_quadratic_coefficient(params), b=_forcing_payload(params, clt))


def lad_curve(params: PhysicalParams, clad: float) -> QCurve:
    return QCurve(kind="ladyzhenskaya", a=_quadratic_coefficient(params), b=_forcing_payload(params, clad))


def q_lt(n: float, params: PhysicalParams, clt: float) -> float:
    """Upper bound on the sum of the first n global Lyapunov exponents via the Lieb-Thirring trace estimate."""
    if n < 0:
        raise DomainError("q_lt needs n >= 0", {"n": n})
    return lt_curve(params, clt)(n)


def q_lad(n: float, params: PhysicalParams, clad: float) -> float:
    """Same bound when only the one-function Ladyzhenskaya inequality is used."""
    if n < 0:
        raise DomainError("q_lad needs n >= 0", {"n": n})
    return lad_curve(params, clad)(n)


def _lifschitz_at(curve: QCurve, n: int) -> Optional[float]:
    q_n, q_next = curve(n), curve(n + 1)
    if q_n >= 0 > q_next:
        return n + q_n / (q_n - q_next)
    return None


def n_lifschitz(curve: QCurve, n: Optional[int] = None) -> LifschitzEstimate:
    """
    Fractal-dimension estimate n + q(n) / (q(n) - q(n+1)).

    Args:
        curve: concave bound on the exponent sums
        n: integer with q(n) >= 0 > q(n+1); found by scanning around the
           positive root when omitted

    Returns:
        LifschitzEstimate carrying the root n* for comparison

    Raises:
        PreconditionError: the sign pattern fails at n, or no admissible n >= 1 exists
    """
    n_star = curve.positive_root()
    if n is not None:
        if n < 1:
            raise PreconditionError("n_lifschitz needs an integer n >= 1", {"n": n})
        value = _lifschitz_at(curve, n)
        if value is None:
            raise PreconditionError(
                "q(n) >= 0 > q(n+1) does not hold",
                {"n": n, "q_n": curve(n), "q_next": curve(n + 1)},
            )
    else:
        base = int(math.floor(n_star))
        for candidate in (base, base - 1, base + 1):
            if candidate >= 1:
                value = _lifschitz_at(curve, candidate)
                if value is not None:
                    n = candidate
                    break
        else:
            raise PreconditionError(
                "no integer n >= 1 with q(n) >= 0 > q(n+1)", {"n_star": n_star}
            )

    within = value <= n_star * (1.0 + 1e-12) + 1e-12
    if not within:
        logger.warning("n_lifschitz %.17g exceeds the root %.17g", value, n_star)
    return LifschitzEstimate(n=n, n_lifschitz=value, n_star=n_star, within_root=within)


def q_table(curve: QCurve, half_width: int = 3) -> List[Tuple[int, float]]:
    """(n, q(n)) for the integers around the positive root."""
    centre = int(math.floor(curve.positive_root()))
    return [(n, curve(n)) for n in range(max(0, centre - half_width), centre + half_width + 2)]


# ---- Navier-Stokes dimension bounds -----------------------------------------


def dim_bound_ns2d(params: PhysicalParams, constant: float, variant: Ns2dVariant) -> float:
    """
    Dimension of the 2D damped Navier-Stokes attractor.

    ``constant`` is c_LT for li_yau and no_li_yau and c_Lad for pre_lt.
    """
    if not constant > 0:
        raise DomainError("the inequality constant must be positive", {"constant": constant})
    g = grashof(params)
    if variant == "li_yau":
        return math.sqrt(constant) / (2.0 * math.sqrt(2.0) * math.pi) * g
    if variant == "no_li_yau":
        return constant / (2.0 * math.sqrt(math.pi)) * g
    if variant == "pre_lt":
        return constant / (8.0 * math.pi**2) * g * g
    raise DomainError(f"unknown ns2d variant {variant!r}", {"variant": variant})


def crossover_grashof(clt: float, clad: float) -> float:
    """Grashof number above which the Lieb-Thirring bound beats the Ladyzhenskaya one."""
    return math.sqrt(clt) / (2.0 * math.sqrt(2.0) * math.pi) * (8.0 * math.pi**2 / clad)


def ns2d_bounds(
    params: PhysicalParams,
    clt_selector: Optional[str] = None,
    clad_selector: Optional[str] = None,
    registry: ConstantsRegistry = REGISTRY,
) -> DimensionBounds:
    clt = registry.clt(clt_selector)
    clad = registry.clad(clad_selector)
    bounds = DimensionBounds(
        grashof=grashof(params),
        clt=clt,
        clad=clad,
        li_yau=dim_bound_ns2d(params, clt, "li_yau"),
        no_li_yau=dim_bound_ns2d(params, clt, "no_li_yau"),
        pre_lt=dim_bound_ns2d(params, clad, "pre_lt"),
        crossover_grashof=crossover_grashof(clt, clad),
    )
    logger.info(
        "ns2d bounds at G=%.6g: li_yau=%.6g no_li_yau=%.6g pre_lt=%.6g",
        bounds.grashof, bounds.li_yau, bounds.no_li_yau, bounds.pre_lt,
    )
    return bounds


# ---- regularized (alpha) models ---------------------------------------------


def dim_bound_alpha(dimension: int, bc: BoundaryCondition, params: PhysicalParams) -> float:
    """
    Dimension of the damped Navier-Stokes-alpha attractor.

    The 2D no-boundary branch takes the smaller of ||curl g||^2 and
    ||g||^2 / (2 alpha); a missing norm drops its branch (with a warning when
    curl g is the one absent). The bound does not involve |Omega|.

    Raises:
        MissingParameterError: gamma, alpha or the needed forcing norm is absent
        DomainError: dimension outside {2, 3} or unknown boundary condition
    """
    params.require("gamma", "alpha")
    alpha, gamma4 = params.alpha, params.gamma**4

    if dimension == 3:
        params.require("g_l2")
        return params.g_l2**2 / (12.0 * math.pi * alpha**2.5 * gamma4)
    if dimension != 2:
        raise DomainError("alpha-model bounds exist for dimension 2 and 3", {"dimension": dimension})

    if bc == "proper_domain":
        params.require("g_l2")
        return params.g_l2**2 / (8.0 * math.pi * 2.0 * alpha**2 * gamma4)
    if bc != "no_boundary":
        raise DomainError(f"unknown boundary condition {bc!r}", {"bc": bc})

    branches = []
    if params.curl_g_l2 is not None:
        branches.append(params.curl_g_l2**2)
    if params.g_l2 is not None:
        branches.append(params.g_l2**2 / (2.0 * alpha))
    if not branches:
        raise MissingParameterError(
            "the no-boundary bound needs curl_g_l2 or g_l2", {"missing": ["curl_g_l2", "g_l2"]}
        )
    if params.curl_g_l2 is None:
        logger.warning("curl_g_l2 not given; the no-boundary bound uses the ||g||^2/(2 alpha) branch only")
    return min(branches) / (8.0 * math.pi * alpha * gamma4)


def alpha_rho_l2_bound(n: int, alpha: float, dimension: int = 2) -> float:
    """
    Upper bound on ||sum |phi_j|^2||_{L^2} for n functions orthonormal in (u, v) + alpha (grad u, grad v).
    """
    if n < 1 or not alpha > 0:
        raise DomainError("alpha_rho_l2_bound needs n >= 1 and alpha > 0", {"n": n, "alpha": alpha})
    if dimension == 2:
        return math.sqrt(n) / (2.0 * math.sqrt(math.pi) * math.sqrt(alpha))
    if dimension == 3:
        return math.sqrt(n) / (2.0 * math.sqrt(math.pi) * alpha**0.75)
    raise DomainError("alpha_rho_l2_bound exists for dimension 2 and 3", {"dimension": dimension})


# ---- spectral and interpolation constants -----------------------------------


def stokes_lower_bounds(m: int, area: float, dimension: int = 2) -> StokesBounds:
    """
    Berezin-Li-Yau type lower bounds for the Stokes operator on a domain of measure |Omega|.

        sum_{k<=m} ||grad u_k||^2 >= d/(2+d) ((2 pi)^d / (omega_d (d-1) |Omega|))^{2/d} m^{1+2/d}

    with omega_d the volume of the unit ball; lambda_1 is the m = 1 value.
    """
    if m < 1:
        raise DomainError("stokes_lower_bounds needs m >= 1", {"m": m})
    if not area > 0:
        raise DomainError("stokes_lower_bounds needs |Omega| > 0", {"area": area})
    if dimension < 2:
        raise DomainError("stokes_lower_bounds needs dimension >= 2", {"dimension": dimension})

    d = float(dimension)
    omega = math.pi ** (0.5 * d) / gamma(0.5 * d + 1.0)
    scale = (d / (2.0 + d)) * ((2.0 * math.pi) ** d / (omega * (d - 1.0) * area)) ** (2.0 / d)
    return StokesBounds(sum_bound=scale * m ** (1.0 + 2.0 / d), lambda1_bound=scale)


def gagnir_constant(q: float, space: Literal["torus", "plane"] = "torus") -> float:
    """Constant of ||phi||_q <= C ||phi||^{2/q} ||grad phi||^{1-2/q} on the torus or the plane."""
    if not q >= 2 or not math.isfinite(q):
        raise DomainError("gagnir_constant needs finite q >= 2", {"q": q})
    torus = ConstantsRegistry.gagnir_const(q)
    if space == "torus":
        return torus
    if space == "plane":
        return torus * ConstantsRegistry.babenko_factor(q)
    raise DomainError(f"unknown space {space!r}", {"space": space})


def hausdorff_young_constant(q: float) -> float:
    """((q-2)/(8 pi))^{(q-2)/(2q)}; squared at q = 2p it is b_p."""
    if not q >= 2:
        raise DomainError("hausdorff_young_constant needs q >= 2", {"q": q})
    return ((q - 2.0) / (8.0 * math.pi)) ** ((q - 2.0) / (2.0 * q))


def multiplicative_constant(p: float) -> float:
    """(1/(4 pi))^{(p-1)/p} p, the square of the torus constant at q = 2p."""
    if not p >= 1:
        raise DomainError("multiplicative_constant needs p >= 1", {"p": p})
    return (1.0 / (4.0 * math.pi)) ** ((p - 1.0) / p) * p
