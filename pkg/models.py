"""
Pydantic models for the Hardy inequality laboratory
"""

from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class HomogeneousSetting(BaseModel):
    """Homogeneous dimension Q and quasi-sphere measure |sigma|."""
    model_config = ConfigDict(frozen=True)

    Q: float = Field(gt=1)
    sigma: float = Field(default=1.0, gt=0)

    @property
    def radial_measure_exponent(self) -> float:
        return self.Q - 1.0


class Superweight(BaseModel):
    """Coefficients of the factor (a + b r^alpha)^(beta/p)."""
    model_config = ConfigDict(frozen=True)

    a: float = Field(gt=0)
    b: float = Field(gt=0)
    alpha: float
    beta: float

    @property
    def crossover_radius(self) -> float:
        """Radius where a and b r^alpha balance."""
        return (self.a / self.b) ** (1.0 / self.alpha)


class LogKind(str, Enum):
    ABS_LOG = "abs_log"      # |log r|
    LOG_RATIO = "log_ratio"  # |log(R/r)|


class WeightSpec(BaseModel):
    """w(r) = r^power * |log|^log_power * (a + b r^alpha)^(beta/p)."""
    model_config = ConfigDict(frozen=True)

    power: float = 0.0
    log_power: float = 0.0
    log_kind: LogKind = LogKind.ABS_LOG
    log_radius: Optional[float] = Field(default=None, gt=0)
    superweight: Optional[Superweight] = None

    @model_validator(mode="after")
    def _check_log_radius(self):
        if self.log_kind == LogKind.LOG_RATIO and self.log_power != 0 and self.log_radius is None:
            raise ValueError("log_ratio weights need log_radius")
        return self

    def singular_radii(self) -> List[float]:
        """Interior radii where the weight blows up."""
        if self.log_power >= 0:
            return []
        if self.log_kind == LogKind.ABS_LOG:
            return [1.0]
        return [float(self.log_radius)]


class SingularityAnnotation(BaseModel):
    """Integrand ~ |r - location|^lambda |log|r - location||^mu near an endpoint."""
    model_config = ConfigDict(frozen=True)

    location: float = Field(ge=0)
    algebraic_exponent: float
    log_exponent: float = 0.0


class IntegralResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float
    abs_error_estimate: float = Field(ge=0)
    subdivisions: int = 0
    converged: bool = True
    fragile: bool = False
    panels: int = 0


class Family(str, Enum):
    EXTENDED_CKN = "ExtendedCKN"
    EXTENDED_CKN_CRITICAL = "ExtendedCKNCritical"
    EULER_HARDY = "EulerHardy"
    EULER_HARDY_CRITICAL = "EulerHardyCritical"
    ANISOTROPIC_CKN = "AnisotropicCKN"
    REMAINDER_HARDY = "RemainderHardy"
    STABILITY_HARDY = "StabilityHardy"
    CRITICAL_LOG_HARDY = "CriticalLogHardy"
    UNCERTAINTY_A = "UncertaintyA"
    UNCERTAINTY_B = "UncertaintyB"
    SUPERWEIGHT = "Superweight"
    SUPERWEIGHT_HIGHER_ORDER = "SuperweightHigherOrder"


class ClassicalStatus(str, Enum):
    SATISFIES = "satisfies_classical_ckn"
    VIOLATES = "violates_classical_ckn"
    NOT_APPLICABLE = "not_applicable"


class InequalityParams(BaseModel):
    """Family-specific parameter record; unused fields stay None.

    For UncertaintyB the field q carries the conjugate exponent p'.
    For the superweight families a and b are the weight coefficients.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    p: Optional[float] = None
    q: Optional[float] = None
    r: Optional[float] = None
    delta: Optional[float] = None
    a: Optional[float] = None
    b: Optional[float] = None
    c: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    m: Optional[float] = None
    gamma: Optional[float] = None
    R: Optional[float] = None
    k: Optional[int] = None
    Q: Optional[float] = None
    R_grid: Optional[Tuple[float, ...]] = None

    def given(self) -> Dict[str, float]:
        return {key: value for key, value in self.model_dump().items() if value is not None}


class InequalityInstance(BaseModel):
    """Validated family + parameters + setting. Build through catalog.make_instance."""
    model_config = ConfigDict(frozen=True)

    family: Family
    params: InequalityParams
    setting: HomogeneousSetting

    @property
    def effective_setting(self) -> HomogeneousSetting:
        if self.params.Q is None:
            return self.setting
        return HomogeneousSetting(Q=self.params.Q, sigma=self.setting.sigma)


class AdmissibilityVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    family: Family
    admissible: bool
    failed_conditions: List[str] = Field(default_factory=list)
    classical_ckn_status: ClassicalStatus = ClassicalStatus.NOT_APPLICABLE

    @model_validator(mode="after")
    def _admissible_iff_no_failures(self):
        if self.admissible != (not self.failed_conditions):
            raise ValueError("admissible must hold exactly when no condition failed")
        return self


class SharpnessClaim(str, Enum):
    SHARP = "sharp"
    NOT_CLAIMED = "not-claimed-sharp"


class SharpConstant(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float
    claim: SharpnessClaim


class Verdict(str, Enum):
    HOLDS = "holds"
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"


class VerificationReport(BaseModel):
    """Both sides of one inequality for one profile.

    The check is reduced to small <= big; ratio = small / big and
    margin = big - small.
    """
    model_config = ConfigDict(frozen=True)

    family: str
    lhs: float
    rhs: float
    constant: float
    ratio: float
    margin: float
    error_budget: float
    quadrature_errors: List[float] = Field(default_factory=list)
    verdict: Verdict
    fragile: bool = False
    details: Dict[str, float] = Field(default_factory=dict)


class EqualityReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    lhs: float
    rhs: float
    relative_gap: float
    tol: float
    quadrature_errors: List[float] = Field(default_factory=list)
    verdict: Verdict


class ProbeResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    family_kind: str
    ratios: List[Tuple[float, float]]
    slow_variable: List[float]
    extrapolated_limit: float
    target: float
    relative_gap: float
    constant_limit: float
    sharp_constant: float
    fit_residual: float
    normalized_ratios: List[float]
    sound: bool


class CritSubcritContext(BaseModel):
    """Critical dimension Q, subcritical dimension m, ball radius R."""
    model_config = ConfigDict(frozen=True)

    Q: float
    m: float = Field(ge=2)
    R: float = Field(gt=0)
    sigma_Q: float = Field(default=1.0, gt=0)
    sigma_m: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def _check_dimensions(self):
        if self.Q < self.m + 1:
            raise ValueError(f"need Q >= m + 1, got Q={self.Q}, m={self.m}")
        return self

    @property
    def kappa(self) -> float:
        return (self.Q - self.m) / (self.m - 1)
