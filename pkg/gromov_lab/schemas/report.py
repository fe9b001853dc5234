from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


# Shared config: report rows are immutable once computed
class ReportModel(BaseModel):
    model_config = ConfigDict(frozen=True)


# -----------------------------
# Truncation series
# -----------------------------
class SeriesPoint(ReportModel):
    k: int
    value: float
    lower_proof: str  # ExhaustedSearch | DiameterBound | CallerBudgetExceeded
    lower_target: float  # (diam X - diam Y) / 2
    upper_bound: float  # identity on A_k times the optimal factor witness
    nodes_explored: int = 0


# -----------------------------
# Lattice counts
# -----------------------------
class LatticeRow(ReportModel):
    t: float
    N: int = Field(ge=0)
    Nprime: int = Field(ge=0)
    ratio: Optional[float] = None  # N / N' when N' > 0


class LatticeReport(ReportModel):
    n: int
    lam: float = Field(gt=1)
    c: float = Field(ge=0)
    rows: List[LatticeRow] = Field(default_factory=list)
    witness_t: Optional[float] = None

    @model_validator(mode="after")
    def _witness_is_strict(self):
        if self.witness_t is not None:
            row = next((r for r in self.rows if r.t == self.witness_t), None)
            if row is not None and not row.N > row.Nprime:
                raise ValueError(f"witness_t={self.witness_t} does not satisfy N > N'")
        return self


# -----------------------------
# Geodesic deviation
# -----------------------------
class DeviationRow(ReportModel):
    s: float
    t: float
    lower: float
    upper: float
    exact: Optional[float] = None  # blank in Sandwich mode
    target: float
    deviation: float = Field(ge=0)

    @model_validator(mode="after")
    def _ordered_sandwich(self):
        if self.lower > self.upper:
            raise ValueError(f"sandwich lower {self.lower} exceeds upper {self.upper}")
        return self


class DeviationReport(ReportModel):
    mode: str  # Exact | Sandwich
    speed: float
    rows: List[DeviationRow] = Field(default_factory=list)
    fell_back: bool = False  # Exact requested but family too large
    budget_exhausted: bool = False

    @property
    def max_deviation(self) -> float:
        return max((row.deviation for row in self.rows), default=0.0)

    def row(self, s: float, t: float) -> Optional[DeviationRow]:
        """Row for the pair {s, t}; (s, t) and (t, s) give the same row."""
        key = (min(s, t), max(s, t))
        for row in self.rows:
            if (min(row.s, row.t), max(row.s, row.t)) == key:
                return row
        return None


# -----------------------------
# Runs
# -----------------------------
class RunManifest(ReportModel):
    name: str
    kind: str
    seed: int
    config: Dict[str, str]
    versions: Dict[str, str]
    wall_time_s: float
    exit_status: int
    outputs: Tuple[str, ...] = ()
