"""SplitMix64-derived seeds so every trial and evaluation draw has its own stream."""

MASK64 = (1 << 64) - 1
EVAL_STREAM = 0xE7A1


def splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix(base_seed: int, *keys: int) -> int:
    """Fold ``keys`` into ``base_seed``; ``splitmix(s, t)`` seeds trial ``t``."""
    state = splitmix64(int(base_seed) & MASK64)
    for k in keys:
        state = splitmix64(state ^ splitmix64(int(k) & MASK64))
    return state
