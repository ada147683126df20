"""Deterministic 64-bit seed derivation."""

MASK64 = (1 << 64) - 1


def splitmix64(value: int) -> int:
    """One SplitMix64 output for state ``value``."""
    z = (value + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """Seed of child ``index`` of ``master_seed``: ``splitmix64(master ^ index)``."""
    return splitmix64((master_seed ^ index) & MASK64)
