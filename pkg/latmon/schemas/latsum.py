import math
from typing import Literal

from pydantic import BaseModel, Field, model_validator

from latmon.core.config import settings


class Tolerance(BaseModel):
    """Absolute/relative tolerance pair; satisfied when either holds"""
    abs_tol: float = Field(default_factory=lambda: settings.DEFAULT_TOL, ge=0, description="Absolute tolerance")
    rel_tol: float = Field(default_factory=lambda: settings.DEFAULT_TOL, ge=0, description="Relative tolerance")

    model_config = {
        "frozen": True,
        "json_schema_extra": {"example": {"abs_tol": 1e-10, "rel_tol": 1e-10}},
    }

    @model_validator(mode="after")
    def _one_positive(self) -> "Tolerance":
        if self.abs_tol <= 0 and self.rel_tol <= 0:
            raise ValueError("at least one of abs_tol, rel_tol must be positive")
        return self

    @classmethod
    def uniform(cls, tol: float) -> "Tolerance":
        return cls(abs_tol=tol, rel_tol=tol)

    def target(self, scale: float) -> float:
        """Largest admissible error for a quantity of magnitude ``scale``."""
        return max(self.abs_tol, self.rel_tol * abs(scale))

    def satisfied(self, error: float, scale: float) -> bool:
        return error <= self.target(scale)


# Convergence abscissae of sum (m^2+|n|^2)^-p over Z^d \ 0
P_THRESHOLD = {2: 1.0, 3: 1.5}


class LatticeSumQuery(BaseModel):
    """Input to every I_p(m) evaluator"""
    dimension: Literal[2, 3] = Field(..., description="Lattice dimension")
    p: float = Field(..., description="Exponent, above the convergence threshold")
    m: float = Field(..., ge=0, description="Spectral shift")
    tol: Tolerance = Field(default_factory=Tolerance)

    model_config = {
        "frozen": True,
        "json_schema_extra": {
            "example": {"dimension": 2, "p": 2.0, "m": 1.0, "tol": {"abs_tol": 1e-10, "rel_tol": 1e-10}}
        },
    }

    @model_validator(mode="after")
    def _check_domain(self) -> "LatticeSumQuery":
        if not math.isfinite(self.p) or not math.isfinite(self.m):
            raise ValueError("p and m must be finite")
        threshold = P_THRESHOLD[self.dimension]
        if not self.p > threshold:
            raise ValueError(f"p must exceed {threshold} for dimension {self.dimension}, got {self.p}")
        return self


class MethodResult(BaseModel):
    """Comparable output of one I_p(m) evaluator"""
    value: float
    error_bound: float = Field(..., ge=0)
    terms_used: int = Field(..., ge=0, description="Shells, quadrature nodes or series terms consumed")
    method: Literal["direct", "theta_integral", "bessel_series"]
    rigorous: bool = Field(..., description="False when error_bound is an a posteriori estimate")

    model_config = {
        "json_schema_extra": {
            "example": {
                "value": 0.8,
                "error_bound": 1e-12,
                "terms_used": 4000000,
                "method": "direct",
                "rigorous": False,
            }
        }
    }

    @model_validator(mode="after")
    def _finite(self) -> "MethodResult":
        if not math.isfinite(self.value):
            raise ValueError("value must be finite")
        return self
