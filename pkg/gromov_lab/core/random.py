import numpy as np


# 64-bit linear congruential generator (Knuth's MMIX constants)
#   x <- (A * x + C) mod 2**64
# Uniform floats use the top 53 bits of the state.
LCG_MULTIPLIER = 6364136223846793005
LCG_INCREMENT = 1442695040888963407
_MASK64 = (1 << 64) - 1


class Lcg64:
    """
    Seeded generator shared by every experiment.
    Plain integer arithmetic, so reruns in any language can match it.
    """

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (LCG_MULTIPLIER * self.state + LCG_INCREMENT) & _MASK64
        return self.state

    def uniform(self, low: float = 0.0, high: float = 1.0) -> float:
        """Float in [low, high)."""
        unit = (self.next_u64() >> 11) * (1.0 / (1 << 53))
        return low + (high - low) * unit

    def randint(self, low: int, high: int) -> int:
        """Integer in [low, high] inclusive."""
        return low + self.next_u64() % (high - low + 1)

    def points(self, n: int, dim: int, scale: float = 1.0) -> np.ndarray:
        """n points in [0, scale)^dim, filled row by row."""
        values = [self.uniform(0.0, scale) for _ in range(n * dim)]
        return np.array(values, dtype=float).reshape(n, dim)
