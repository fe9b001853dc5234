import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


def _int_env(name: str, default: int) -> int:
    value = os.getenv(name)
    return int(value) if value not in (None, "") else default


class Settings:
    # Project metadata
    PROJECT_NAME: str = os.getenv("GROMOV_LAB_PROJECT_NAME", "gromov-lab")
    PROJECT_VERSION: str = os.getenv("GROMOV_LAB_PROJECT_VERSION", "0.1.0")

    # Numerical tolerance for metric axioms and isometry checks
    EPS: float = 1e-9

    # Solver
    MAX_NODES: int = _int_env("GROMOV_LAB_MAX_NODES", 2_000_000)
    SOLVER_CAP: int = _int_env("GROMOV_LAB_SOLVER_CAP", 64)
    ENUMERATION_CAP: int = _int_env("GROMOV_LAB_ENUMERATION_CAP", 64)

    # Space construction
    MAX_SPACE_SIZE: int = _int_env("GROMOV_LAB_MAX_SPACE_SIZE", 4096)

    # Lattice
    LATTICE_MAX_DIM: int = _int_env("GROMOV_LAB_LATTICE_MAX_DIM", 4)

    # Internal parallelism (joblib jobs)
    WORKERS: int = _int_env("GROMOV_LAB_WORKERS", 1)

    # Runs
    OUTPUT_DIR: str = os.getenv("GROMOV_LAB_OUTPUT_DIR", "reports")
    LOG_LEVEL: str = os.getenv("GROMOV_LAB_LOG_LEVEL", "WARNING")


# Singleton settings object used across the package
settings = Settings()
