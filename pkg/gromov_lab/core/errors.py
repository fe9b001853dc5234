from typing import Optional, Tuple


# -----------------------------
# Exit codes
# -----------------------------
EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CAP = 3
EXIT_USAGE = 64


class LabError(Exception):
    """
    Root of every error raised by the package.
    Carries the process exit status it maps to and a readable detail.
    """

    exit_code: int = EXIT_INVALID

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    @property
    def tag(self) -> str:
        return type(self).__name__


# -----------------------------
# Metric validation
# -----------------------------
class MetricError(LabError):
    pass


class NonZeroDiagonal(MetricError):
    def __init__(self, i: int, value: float):
        self.i = i
        self.value = value
        super().__init__(f"NonZeroDiagonal i={i} value={value!r}")


class Asymmetric(MetricError):
    def __init__(self, i: int, j: int):
        self.i, self.j = i, j
        super().__init__(f"Asymmetric i={i} j={j}")


class NegativeEntry(MetricError):
    def __init__(self, i: int, j: int):
        self.i, self.j = i, j
        super().__init__(f"NegativeEntry i={i} j={j}")


class TriangleViolation(MetricError):
    def __init__(self, i: int, j: int, k: int):
        self.i, self.j, self.k = i, j, k
        super().__init__(f"TriangleViolation i={i} j={j} k={k}")

    @property
    def indices(self) -> Tuple[int, int, int]:
        return self.i, self.j, self.k


class InvalidPointSet(MetricError):
    pass


class NegativeScale(MetricError):
    def __init__(self, t: float):
        self.t = t
        super().__init__(f"NegativeScale t={t!r}")


class NonPositiveConstant(MetricError):
    def __init__(self, c: float):
        self.c = c
        super().__init__(f"NonPositiveConstant c={c!r}")


class SizeMismatch(MetricError):
    def __init__(self, n_x: int, n_y: int):
        self.n_x, self.n_y = n_x, n_y
        super().__init__(f"SizeMismatch n_x={n_x} n_y={n_y}")


class NonBijectivePairing(MetricError):
    pass


# -----------------------------
# Relations
# -----------------------------
class RelationError(LabError):
    pass


class IndexOutOfRange(RelationError):
    def __init__(self, pair: Tuple[int, int], n_x: int, n_y: int):
        self.pair = pair
        super().__init__(f"IndexOutOfRange pair={pair} sizes=({n_x},{n_y})")


class EmptyRelation(RelationError):
    def __init__(self):
        super().__init__("EmptyRelation")


class NotACorrespondence(RelationError):
    def __init__(self, side: str, index: int):
        self.side, self.index = side, index
        super().__init__(f"NotACorrespondence uncovered {side}-point {index}")


class EmptySubset(RelationError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"EmptySubset {name}")


# -----------------------------
# Parameters, configs and files
# -----------------------------
class ParameterError(LabError):
    pass


class ConfigInvalid(LabError):
    def __init__(self, key: str, reason: str = "missing"):
        self.key = key
        super().__init__(f"ConfigInvalid key={key}: {reason}")


class FileFormatError(LabError):
    pass


class LabFileNotFound(LabError):
    def __init__(self, path: str):
        self.path = path
        super().__init__(f"FileNotFound path={path}")


# -----------------------------
# Caps
# -----------------------------
class CapExceeded(LabError):
    exit_code = EXIT_CAP

    def __init__(self, what: str, size: int, cap: int):
        self.what, self.size, self.cap = what, size, cap
        super().__init__(f"{type(self).__name__} {what}: {size} > {cap}")


class SizeOverflow(CapExceeded):
    pass


class DimensionCapExceeded(CapExceeded):
    pass
