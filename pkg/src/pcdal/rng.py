"""Deterministic random primitives.

Selection randomness must be reproducible across implementations, so this module
carries a self-contained PCG-XSH-RR 64/32 generator (the classic pcg32: 64-bit
LCG state, 32-bit xorshift-rotate output) plus a splitmix64 hash for deriving
per-round seeds from a base seed. No global state anywhere.
"""

_MASK64 = (1 << 64) - 1
_PCG_MULT = 6364136223846793005


def splitmix64(x):
    """One splitmix64 scramble step; maps u64 -> u64 with good avalanche."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix(*values):
    """Fold integers into one u64 seed, order-sensitive."""
    acc = 0x853C49E6748FEA9B
    for v in values:
        acc = splitmix64(acc ^ (int(v) & _MASK64))
    return acc


class PCG32:
    """PCG-XSH-RR 64/32 with the reference seeding procedure."""

    def __init__(self, seed, seq=0):
        self.state = 0
        self.inc = ((int(seq) << 1) | 1) & _MASK64
        self._step()
        self.state = (self.state + (int(seed) & _MASK64)) & _MASK64
        self._step()

    def _step(self):
        self.state = (self.state * _PCG_MULT + self.inc) & _MASK64

    def next_u32(self):
        old = self.state
        self._step()
        xorshifted = ((old >> 18) ^ old) >> 27 & 0xFFFFFFFF
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & 0xFFFFFFFF

    def bounded(self, bound):
        """Uniform integer in [0, bound) without modulo bias (rejection method)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        threshold = (1 << 32) % bound
        while True:
            r = self.next_u32()
            if r >= threshold:
                return r % bound

    def shuffle(self, items):
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.bounded(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, items, k):
        """First k elements of a partial Fisher-Yates pass; order is draw order."""
        pool = list(items)
        n = len(pool)
        k = min(k, n)
        for i in range(k):
            j = i + self.bounded(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
