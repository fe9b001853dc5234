import os
import tempfile
from pathlib import Path
from typing import List, Union

from gromov_lab.core.errors import ConfigInvalid, FileFormatError, LabFileNotFound
from gromov_lab.schemas.experiment import ExperimentConfig, ExperimentKind
from gromov_lab.services.correspondences import Correspondence
from gromov_lab.services.gh_solver import GHCertificate, LowerProof
from gromov_lab.services.metric_core import EPS, FiniteMetricSpace, validate_metric

PathLike = Union[str, Path]

# Matrix writers emit this many significant digits
SIGNIFICANT_DIGITS = 12

# Relative slack a matrix reader allows for that rounding, across the
# three entries of one triangle
ROUNDING_SLACK = 3 * 10.0 ** -(SIGNIFICANT_DIGITS - 1)


# -----------------------------
# Shared Helpers
# -----------------------------
def atomic_write_text(path: PathLike, text: str) -> Path:
    """
    Write via a temporary file in the target directory and rename it into place,
    so readers never see a half-written file.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, temp_path = tempfile.mkstemp(dir=target.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(temp_path, target)
    finally:
        if os.path.exists(temp_path):
            try:
                os.unlink(temp_path)
            except OSError:
                pass
    return target


def _read_lines(path: PathLike) -> List[str]:
    if not Path(path).is_file():
        raise LabFileNotFound(str(path))
    with open(path, encoding="utf-8") as handle:
        return [line.strip() for line in handle if line.strip()]


def format_distance(value: float) -> str:
    return format(value, f".{SIGNIFICANT_DIGITS}g")


# -----------------------------
# Matrix files
# -----------------------------
def dumps_matrix(space: FiniteMetricSpace) -> str:
    for label in space.labels:
        if not label or len(label.split()) != 1 or label != label.strip():
            raise FileFormatError(f"label {label!r} is empty or contains whitespace")
    lines = [str(space.size), " ".join(space.labels)]
    for row in space.dist:
        lines.append(" ".join(format_distance(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def loads_matrix(text: str) -> FiniteMetricSpace:
    """
    Parse the matrix format: n, then n labels, then n rows of n reals.
    The result is checked against every metric axiom.
    """
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines:
        raise FileFormatError("empty matrix file")
    try:
        n = int(lines[0])
    except ValueError:
        raise FileFormatError(f"first line must be the point count, got {lines[0]!r}")
    if len(lines) != n + 2:
        raise FileFormatError(f"expected {n + 2} non-empty lines, got {len(lines)}")

    labels = lines[1].split()
    if len(labels) != n:
        raise FileFormatError(f"expected {n} labels, got {len(labels)}")

    rows = []
    for number, line in enumerate(lines[2:], start=3):
        try:
            row = [float(v) for v in line.split()]
        except ValueError:
            raise FileFormatError(f"line {number}: non-numeric entry")
        if len(row) != n:
            raise FileFormatError(f"line {number}: expected {n} entries, got {len(row)}")
        rows.append(row)
    largest = max((abs(v) for row in rows for v in row), default=0.0)
    return validate_metric(rows, labels, tolerance=EPS + ROUNDING_SLACK * largest)


def read_matrix(path: PathLike) -> FiniteMetricSpace:
    return loads_matrix("\n".join(_read_lines(path)))


def write_matrix(space: FiniteMetricSpace, path: PathLike) -> Path:
    return atomic_write_text(path, dumps_matrix(space))


# -----------------------------
# Correspondence files
# -----------------------------
def dumps_correspondence(corr: Correspondence) -> str:
    lines = [f"{corr.n_x} {corr.n_y}"]
    lines.extend(f"{i} {j}" for i, j in corr.pairs)
    return "\n".join(lines) + "\n"


def _parse_correspondence(lines: List[str]) -> Correspondence:
    try:
        n_x, n_y = (int(v) for v in lines[0].split())
        pairs = [tuple(int(v) for v in line.split()) for line in lines[1:]]
    except (ValueError, IndexError):
        raise FileFormatError("correspondence must be 'n_x n_y' followed by 'i j' lines")
    if any(len(pair) != 2 for pair in pairs):
        raise FileFormatError("every pair line must hold exactly two indices")
    return Correspondence(tuple(pairs), n_x, n_y)


def loads_correspondence(text: str) -> Correspondence:
    return _parse_correspondence([line.strip() for line in text.splitlines() if line.strip()])


def read_correspondence(path: PathLike) -> Correspondence:
    return _parse_correspondence(_read_lines(path))


def write_correspondence(corr: Correspondence, path: PathLike) -> Path:
    return atomic_write_text(path, dumps_correspondence(corr))


# -----------------------------
# Certificates
# -----------------------------
def dumps_certificate(cert: GHCertificate) -> str:
    header = [
        f"value {cert.value!r}",
        f"lower_proof {cert.lower_proof.value}",
        f"nodes_explored {cert.nodes_explored}",
        f"lower_bound {cert.lower_bound!r}",
    ]
    return "\n".join(header) + "\n" + dumps_correspondence(cert.witness)


def loads_certificate(text: str) -> GHCertificate:
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    fields = {}
    for line in lines[:4]:
        key, _, value = line.partition(" ")
        fields[key] = value
    try:
        return GHCertificate(
            value=float(fields["value"]),
            lower_proof=LowerProof(fields["lower_proof"]),
            nodes_explored=int(fields["nodes_explored"]),
            lower_bound=float(fields["lower_bound"]),
            witness=_parse_correspondence(lines[4:]),
        )
    except (KeyError, ValueError):
        raise FileFormatError("malformed certificate header")


def write_certificate(cert: GHCertificate, path: PathLike) -> Path:
    return atomic_write_text(path, dumps_certificate(cert))


# -----------------------------
# Experiment configs
# -----------------------------
def loads_experiment_config(text: str) -> ExperimentConfig:
    """
    Flat `key = value` lines; blank lines and `#` comments are skipped.
    name, kind and seed are lifted out, every other key is a parameter.
    """
    values = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigInvalid(f"line {number}", "expected 'key = value'")
        values[key.strip()] = value.strip()

    for key in ("name", "kind"):
        if not values.get(key):
            raise ConfigInvalid(key)
    name = values.pop("name")
    kind = values.pop("kind")
    seed = values.pop("seed", "0")

    try:
        kind = ExperimentKind(kind)
    except ValueError:
        raise ConfigInvalid("kind", f"unknown experiment kind {kind!r}")
    try:
        seed = int(seed)
    except ValueError:
        raise ConfigInvalid("seed", f"not an integer: {seed!r}")

    config = ExperimentConfig(name=name, kind=kind, parameters=values, seed=seed)
    config.require()
    return config


def read_experiment_config(path: PathLike) -> ExperimentConfig:
    if not Path(path).is_file():
        raise LabFileNotFound(str(path))
    return loads_experiment_config(Path(path).read_text(encoding="utf-8"))
