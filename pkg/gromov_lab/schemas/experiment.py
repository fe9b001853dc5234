import enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict

from gromov_lab.core.errors import ConfigInvalid


# Stored as string values in config files and manifests
class ExperimentKind(str, enum.Enum):
    SCALING_GEODESIC = "ScalingGeodesic"
    PRODUCT_UPPER = "ProductUpper"
    TRUNCATION_LOWER = "TruncationLower"
    LATTICE_RATIO = "LatticeRatio"
    LATTICE_WITNESS = "LatticeWitness"
    ISOMETRY_EXAMPLE = "IsometryExample"


# Keys every config of a kind must carry (alternatives joined by "|")
REQUIRED_KEYS: Dict[ExperimentKind, List[str]] = {
    ExperimentKind.SCALING_GEODESIC: ["ts", "space|x_points|points"],
    ExperimentKind.PRODUCT_UPPER: ["trials"],
    ExperimentKind.TRUNCATION_LOWER: ["gap", "ks", "x|x_points"],
    ExperimentKind.LATTICE_RATIO: ["n", "lambda", "c", "ts"],
    ExperimentKind.LATTICE_WITNESS: ["n", "lambda", "c", "grid|tmax"],
    ExperimentKind.ISOMETRY_EXAMPLE: ["reals", "interval", "c"],
}


class ExperimentConfig(BaseModel):
    """
    Declarative experiment description, parsed from a flat `key = value` file.
    Everything except name, kind and seed lands in `parameters` as text.
    """

    model_config = ConfigDict(frozen=True)

    name: str
    kind: ExperimentKind
    parameters: Dict[str, str] = {}
    seed: int = 0

    def require(self) -> None:
        for alternatives in REQUIRED_KEYS[self.kind]:
            options = alternatives.split("|")
            if not any(option in self.parameters for option in options):
                raise ConfigInvalid(options[0])

    def has(self, key: str) -> bool:
        return key in self.parameters

    def get_str(self, key: str, default: Optional[str] = None) -> str:
        if key in self.parameters:
            return self.parameters[key]
        if default is None:
            raise ConfigInvalid(key)
        return default

    def get_float(self, key: str, default: Optional[float] = None) -> float:
        if key not in self.parameters:
            if default is None:
                raise ConfigInvalid(key)
            return default
        try:
            return float(self.parameters[key])
        except ValueError:
            raise ConfigInvalid(key, f"not a number: {self.parameters[key]!r}")

    def get_int(self, key: str, default: Optional[int] = None) -> int:
        if key not in self.parameters:
            if default is None:
                raise ConfigInvalid(key)
            return default
        try:
            return int(self.parameters[key])
        except ValueError:
            raise ConfigInvalid(key, f"not an integer: {self.parameters[key]!r}")

    def get_floats(self, key: str) -> List[float]:
        """Comma list; `a..b` expands to the integers a..b."""
        raw = self.get_str(key)
        try:
            if ".." in raw and "," not in raw:
                low, high = raw.split("..")
                return [float(v) for v in range(int(low), int(high) + 1)]
            return [float(v) for v in raw.split(",") if v.strip()]
        except ValueError:
            raise ConfigInvalid(key, f"not a number list: {raw!r}")

    def get_ints(self, key: str) -> List[int]:
        values = self.get_floats(key)
        if any(v != int(v) for v in values):
            raise ConfigInvalid(key, "expected integers")
        return [int(v) for v in values]
