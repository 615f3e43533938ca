from typing import Literal, Optional

from pydantic import BaseModel, Field


class LiebThirringCheck(BaseModel):
    """||rho||_p against B_p m^(-2/p) n^(1/p) for one family"""
    p: float
    n: int
    m: float
    lhs: float
    rhs: float
    holds: bool

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs


class GagnirCheck(BaseModel):
    """Interpolation inequality on one field, multiplicative and additive forms"""
    q: float
    ratio: float = Field(..., description="||phi||_q / (||phi||^(2/q) ||grad phi||^(1-2/q))")
    bound: float
    holds: bool
    additive_holds: bool = Field(..., description="Additive form at every sampled m")
    additive_gap: Optional[float] = Field(
        default=None,
        description="min over sampled m of the additive bound divided by the multiplicative bound, minus 1",
    )


class AlphaCheck(BaseModel):
    """alpha-orthonormal family against the shifted-H1 family with m^2 = 1/alpha"""
    n: int
    alpha: float
    lhs: float = Field(..., description="||rho_alpha||_2")
    rhs: float = Field(..., description="n^(1/2) / (2 sqrt(pi alpha))")
    holds: bool
    lhs_rescaled: float = Field(..., description="||rho_m||_2 / alpha")
    rhs_rescaled: float = Field(..., description="B_2 m^-1 n^(1/2) / alpha")
    consistent: bool = Field(..., description="Values agree to 1e-12 and pass/fail flags match")


class FuzzSummary(BaseModel):
    check: Literal["liebd2", "gagnir", "alpha"]
    trials: int
    passed: int
    max_ratio: float = Field(..., description="Largest observed ratio; a pass needs it at or below bound")
    bound: float = Field(default=1.0, description="1 for normalized checks, the inequality constant for gagnir")
    first_failing_seed: Optional[int] = None

    @property
    def all_passed(self) -> bool:
        return self.passed == self.trials
