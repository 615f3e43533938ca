import math
from typing import Dict, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from latmon.core.exceptions import DomainError, MissingParameterError

TWO_PI = 2.0 * math.pi


def _default_clt_candidates() -> Dict[str, float]:
    # Stored as R / (2 pi), R named after the estimate it comes from
    return {
        "lt_original": 3.0 * math.pi / TWO_PI,
        "hlw": 2.0 / TWO_PI,
        "dll": (math.pi / math.sqrt(3.0)) / TWO_PI,
        "fhjn": 1.456 / TWO_PI,
    }


class ConstantsRegistry(BaseModel):
    """Immutable table of the constants entering the dimension estimates"""
    clt_candidates: Dict[str, float] = Field(default_factory=_default_clt_candidates)
    clt_default: str = "fhjn"
    clt_lower: float = Field(default=1.0 / TWO_PI, description="Classical value, a lower bound for every c_LT")
    vec_clt: Optional[float] = Field(default=None, description="Vector Lieb-Thirring constant; defaults to the selected c_LT")
    clad_upper: float = 16.0 / (27.0 * math.pi)
    clad_sharp: float = 1.0 / (math.pi * 1.8622)
    lad_torus: float = Field(default=1.0 / math.pi, description="Fourth power of the q = 4 torus constant")
    stokes_c2d: float = TWO_PI

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check_ordering(self) -> "ConstantsRegistry":
        for name, value in self.clt_candidates.items():
            if value < self.clt_lower:
                raise ValueError(f"c_LT candidate {name}={value} is below the classical value")
        if self.clt_default not in self.clt_candidates:
            raise ValueError(f"unknown default c_LT {self.clt_default!r}")
        if not self.clad_sharp < self.clad_upper:
            raise ValueError("clad_sharp must be below clad_upper")
        if self.vec_clt is not None and self.vec_clt > self.clt(None):
            raise ValueError("vec_clt must not exceed the scalar c_LT")
        return self

    def clt(self, selector: Optional[str]) -> float:
        """Resolve a c_LT selector: candidate name, a real literal, or None for the default."""
        if selector is None:
            return self.clt_candidates[self.clt_default]
        if selector in self.clt_candidates:
            return self.clt_candidates[selector]
        return _positive_literal(selector, "c_LT")

    def clad(self, selector: Optional[str]) -> float:
        if selector is None or selector == "upper":
            return self.clad_upper
        if selector == "sharp":
            return self.clad_sharp
        return _positive_literal(selector, "c_Lad")

    def vector_clt(self, selector: Optional[str] = None) -> float:
        return self.vec_clt if self.vec_clt is not None else self.clt(selector)

    @staticmethod
    def b_p(p: float) -> float:
        """((p-1)/(4 pi))^((p-1)/p); equals 1 at p = 1."""
        return ((p - 1.0) / (4.0 * math.pi)) ** ((p - 1.0) / p)

    @staticmethod
    def babenko_factor(q: float) -> float:
        return q ** ((q - 2.0) / q) / (q - 1.0) ** ((q - 1.0) / q)

    @staticmethod
    def gagnir_const(q: float) -> float:
        return (1.0 / (4.0 * math.pi)) ** ((q - 2.0) / (2.0 * q)) * math.sqrt(q / 2.0)


def _positive_literal(selector: str, label: str) -> float:
    try:
        value = float(selector)
    except (TypeError, ValueError):
        raise DomainError(f"unknown {label} selector {selector!r}", {"selector": selector})
    if not value > 0 or not math.isfinite(value):
        raise DomainError(f"{label} must be positive and finite", {"selector": selector})
    return value


class PhysicalParams(BaseModel):
    """Physical parameters of the Navier-Stokes and alpha-model estimates"""
    nu: Optional[float] = Field(default=None, gt=0, description="Viscosity")
    area: Optional[float] = Field(default=None, gt=0, description="|Omega|")
    f_l2: Optional[float] = Field(default=None, ge=0, description="||f||")
    gamma: Optional[float] = Field(default=None, gt=0, description="Ekman damping")
    alpha: Optional[float] = Field(default=None, gt=0, description="Filter parameter")
    g_l2: Optional[float] = Field(default=None, ge=0, description="||g||")
    curl_g_l2: Optional[float] = Field(default=None, ge=0, description="||curl g||")

    model_config = {
        "frozen": True,
        "json_schema_extra": {"example": {"nu": 0.01, "area": 1.0, "f_l2": 1.0}},
    }

    def require(self, *names: str) -> None:
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise MissingParameterError(
                f"missing parameter(s): {', '.join(missing)}", {"missing": missing}
            )


class QCurve(BaseModel):
    """Concave quadratic upper bound n -> q(n) on the sums of global Lyapunov exponents"""
    kind: Literal["lieb_thirring", "ladyzhenskaya"]
    a: float = Field(..., gt=0, description="Quadratic coefficient nu*pi/|Omega|")
    b: float = Field(..., description="Constant (lieb_thirring) or linear (ladyzhenskaya) coefficient")

    model_config = {"frozen": True}

    def __call__(self, n: float) -> float:
        if self.kind == "lieb_thirring":
            return -self.a * n * n + self.b
        return -self.a * n * n + self.b * n

    def positive_root(self) -> float:
        if self.kind == "lieb_thirring":
            return math.sqrt(max(self.b, 0.0) / self.a)
        return max(self.b, 0.0) / self.a


class LifschitzEstimate(BaseModel):
    n: int = Field(..., ge=1)
    n_lifschitz: float
    n_star: float = Field(..., description="Positive root of the curve")
    within_root: bool = Field(..., description="n_lifschitz <= n_star up to rounding")


class StokesBounds(BaseModel):
    sum_bound: float = Field(..., description="Lower bound for the sum of the first m Dirichlet integrals")
    lambda1_bound: float


class DimensionBounds(BaseModel):
    """Every Navier-Stokes bound for one parameter set"""
    grashof: float
    clt: float
    clad: float
    li_yau: float
    no_li_yau: float
    pre_lt: float
    crossover_grashof: float
