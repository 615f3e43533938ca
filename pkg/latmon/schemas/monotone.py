from typing import List, Literal

from pydantic import BaseModel, Field

Condition = Literal["condmon_2d", "suff3_3d", "exact3_3d"]


class GridDescription(BaseModel):
    y_min: float
    y_max: float
    samples: int
    spacing: Literal["log"] = "log"
    refined: bool = False


class NamedConstants(BaseModel):
    """Constants of the monotonicity argument"""
    y_star: float = Field(..., description="Root of coth(pi/(2y)) = 4/3")
    y_star_closed_form: float = Field(..., description="pi / ln 7")
    g_at_pi: float
    h_at_y_star: float = Field(..., description="h(y*) with the printed prefactor pi")
    h_at_y_star_derived: float = Field(..., description="h(y*) with the differentiated prefactor pi/2")


class CertificateReport(BaseModel):
    """Outcome of a pointwise positivity scan"""
    condition: Condition
    grid: GridDescription
    min_value: float = Field(..., description="May underflow to 0.0 while still positive")
    min_log10_value: float = Field(..., description="log10 of the minimum; -inf iff a violation was seen")
    min_location: float
    violations: List[float] = Field(default_factory=list)
    named_constants: NamedConstants

    model_config = {
        "json_schema_extra": {
            "example": {
                "condition": "condmon_2d",
                "grid": {"y_min": 0.001, "y_max": 100.0, "samples": 100000, "spacing": "log", "refined": True},
                "min_value": 0.0,
                "min_log10_value": -1361.3,
                "min_location": 0.001,
                "violations": [],
                "named_constants": {
                    "y_star": 1.6144,
                    "y_star_closed_form": 1.6144,
                    "g_at_pi": 0.0064,
                    "h_at_y_star": 0.2709,
                    "h_at_y_star_derived": 0.1354,
                },
            }
        }
    }

    @property
    def certified(self) -> bool:
        return not self.violations
