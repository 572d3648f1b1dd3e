"""
ReliaSpan - Pydantic Schemas for the JSON Documents
"""
from pathlib import Path
from typing import Annotated, Callable, List, Literal, Optional, Type, TypeVar, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, model_validator

from reliaspan.core.exceptions import SerializationError

DocT = TypeVar("DocT", bound=BaseModel)


class Document(BaseModel):
    """Base of every versioned document"""
    format: Literal[1] = 1

    model_config = ConfigDict(extra="forbid")


# ==================== Attack ====================

class AttackDocument(Document):
    """Attack set B over [1..n]"""
    kind: str
    n: int = Field(..., ge=1)
    seed: Optional[int] = None
    vertices: List[int] = Field(default_factory=list)


# ==================== Spanners ====================

class Spanner1DDocument(Document):
    """1-D spanner; edges are implicit in the level map and parameters"""
    variant: Literal["1d"] = "1d"
    n: int = Field(..., ge=1)
    seed: int
    rho: float
    delta: Optional[float] = None
    c_const: float
    eps_step: float
    M: int
    level_of: List[int]


class FamilyDocument(BaseModel):
    """Ordering family descriptor"""
    varsigma: float
    d: int
    w: int
    identity: bool = False


class NormalizationDocument(BaseModel):
    translation: List[float]
    scale: float


class SpannerHDDocument(Document):
    """d-dimensional spanner; copies are rebuilt from the seed"""
    variant: Literal["hd"] = "hd"
    points: List[List[float]]
    eps: float
    rho: float
    delta: Optional[float] = None
    c_const: float
    seed: int
    family: FamilyDocument
    normalization: NormalizationDocument
    N: int
    M: int


SpannerDocument = Annotated[Union[Spanner1DDocument, SpannerHDDocument], Field(discriminator="variant")]
_spanner_adapter: TypeAdapter = TypeAdapter(SpannerDocument)


# ==================== Loss & Paths ====================

class LossReportSchema(Document):
    """Loss of one instance"""
    attack_size: int
    bad_pairs: int
    extension_lower: int
    extension_upper: int
    exact: bool
    loss_lower: float
    loss_upper: float
    variant: str
    stairway_bad: Optional[int] = None
    stairway_loss: Optional[float] = None
    oblivious: bool = True


class PathResponse(Document):
    """Path between two survivors"""
    u: int
    v: int
    path: Optional[List[int]] = None
    length: Optional[float] = None
    distance: float
    stretch: Optional[float] = None
    defects: List[str] = Field(default_factory=list)


# ==================== Experiments ====================

class ExperimentSpec(Document):
    """Monte Carlo experiment: fixed oblivious attack, fresh construction per trial"""
    variant: Literal["1d", "hd"] = "1d"
    n: int = Field(..., ge=2)
    rho: float = Field(..., gt=0, lt=1)
    delta: Optional[float] = Field(None, gt=0, lt=1)
    c_const: Optional[float] = Field(None, ge=1)
    boosted: bool = False
    eps: Optional[float] = Field(None, gt=0, lt=1)
    dim: int = Field(2, ge=1)
    attack_kind: str = "uniform"
    attack_size: Optional[int] = Field(None, ge=0)
    attack_fraction: Optional[float] = Field(None, ge=0, le=1)
    attack_seed: int = 0
    trials: int = Field(..., ge=1)
    base_seed: int = 0
    output: Optional[str] = None
    workers: Optional[int] = Field(None, ge=1)
    badness: bool = False

    @model_validator(mode="after")
    def check_variant(self) -> "ExperimentSpec":
        if self.variant == "1d" and self.rho >= 0.5:
            raise ValueError("1-D experiments need rho < 1/2")
        if self.variant == "hd" and self.eps is None:
            raise ValueError("hd experiments need eps")
        if self.boosted and self.delta is None:
            raise ValueError("boosted experiments need delta")
        if self.attack_kind == "remark-middle":
            raise ValueError("experiments use a fixed oblivious attack; remark-middle is construction-aware")
        if self.attack_size is None and self.attack_fraction is None:
            raise ValueError("give attack_size or attack_fraction")
        return self


class SummarySchema(Document):
    """Aggregate of an experiment"""
    trials: int
    regime: Literal["theoretical", "empirical"]
    variant: str
    attack_size: int
    mean_loss: Optional[float] = None
    mean_loss_ci_upper: Optional[float] = None
    tail_freq: Optional[float] = None
    tail_ci_upper: Optional[float] = None
    mean_edges: float
    defect_count: int
    mean_bad_ratio: Optional[float] = None


def dump_document(doc: BaseModel, path: Optional[str] = None) -> str:
    """Serialize with stable formatting; write to path when given"""
    text = doc.model_dump_json(indent=2)
    if path is not None:
        try:
            Path(path).write_text(text + "\n")
        except OSError as e:
            raise SerializationError(path, str(e)) from e
    return text


def _validate_file(validate: Callable[[str], DocT], path: str) -> DocT:
    try:
        raw = Path(path).read_text()
    except OSError as e:
        raise SerializationError(path, str(e)) from e
    try:
        return validate(raw)
    except ValidationError as e:
        raise SerializationError(path, f"{e.error_count()} validation error(s): {e.errors()[0]['msg']}") from e


def load_document(model: Type[DocT], path: str) -> DocT:
    """Read and validate a document"""
    return _validate_file(model.model_validate_json, path)


def load_spanner_document(path: str) -> Union[Spanner1DDocument, SpannerHDDocument]:
    """Read a spanner document of either variant, dispatching on its variant field"""
    return _validate_file(_spanner_adapter.validate_json, path)
