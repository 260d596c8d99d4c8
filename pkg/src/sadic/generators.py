"""Digit sources: pseudorandom surrogates and deterministic block constructions.

Pseudorandom streams use numpy's PCG64 bit generator seeded with the given
64-bit integer, so a (source, seed) pair always replays the same digits.

Block streams concatenate, for n = 1, 2, ..., runs of floor(tau_{i,n} * w(n))
copies of digit i in increasing digit order.  Empty blocks are skipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .digits import (
    CHUNK,
    DIGIT_DTYPE,
    TERNARY,
    Alphabet,
    DigitStream,
    DomainError,
    FrequencyVector,
    as_alphabet,
    as_frequencies,
)

__all__ = [
    "FrequencyVector",
    "Linear",
    "Power",
    "WeightKind",
    "uniform_stream",
    "iid_stream",
    "canonical_be_point",
    "be_block_lengths",
    "beta_switch",
    "beta_stream",
    "OSC_TRIPLES",
    "osc_block_lengths",
    "oscillating_stream",
    "factorial_block_counts",
    "checkpoints",
]

INT64_MAX = 2**63 - 1

# triples used by the oscillating construction, indexed by the beta switch
OSC_TRIPLES = (
    (Fraction(2, 5), Fraction(1, 5), Fraction(2, 5)),
    (Fraction(3, 10), Fraction(2, 5), Fraction(3, 10)),
)


def _rng(seed: int) -> np.random.Generator:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise DomainError(f"seed must be an integer, got {seed!r}")
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFF_FFFF_FFFF_FFFF))


def uniform_stream(alphabet: Alphabet | int | None = None, seed: int = 0) -> DigitStream:
    """I.i.d. uniform digits, the pseudorandom stand-in for a normal number."""
    a = as_alphabet(alphabet)

    def source():
        rng = _rng(seed)
        while True:
            yield rng.integers(0, a.s, size=CHUNK, dtype=DIGIT_DTYPE)

    tau = FrequencyVector(tuple(Fraction(1, a.s) for _ in range(a.s)))
    return DigitStream(a, source, f"uniform({a.s}, {seed})", declared_tau=tau)


def iid_stream(tau, seed: int = 0) -> DigitStream:
    """I.i.d. digits with P(digit = i) = tau_i."""
    fv = as_frequencies(tau)
    a = Alphabet(fv.s)
    probs = np.array(fv.floats())
    probs /= probs.sum()
    support = np.flatnonzero(probs)

    def source():
        if len(support) == 1:
            block = np.full(CHUNK, support[0], dtype=DIGIT_DTYPE)
            while True:
                yield block
        rng = _rng(seed)
        while True:
            yield rng.choice(a.s, size=CHUNK, p=probs).astype(DIGIT_DTYPE)

    label = ", ".join(str(float(t)) for t in fv.tau)
    return DigitStream(a, source, f"iid(({label}), {seed})", declared_tau=fv)


@dataclass(frozen=True)
class Linear:
    """w(n) = n."""

    def __call__(self, n: int) -> int:
        return n

    def __str__(self):
        return "linear"


@dataclass(frozen=True)
class Power:
    """w(n) = n**(1+p), rounded up to an integer when ``ceil`` is set."""

    p: Fraction | float = 1
    ceil: bool = True

    def __post_init__(self):
        if not self.p > 0:
            raise DomainError(f"power exponent must be positive, got {self.p!r}")

    def __call__(self, n: int):
        e = 1 + self.p
        if float(e).is_integer():
            return n ** int(e)
        w = float(n) ** float(e)
        return math.ceil(w) if self.ceil else w

    def __str__(self):
        return f"power({self.p})"


WeightKind = Linear | Power


def _floor_mul(t: Fraction, w) -> int:
    if isinstance(w, int):
        return (t.numerator * w) // t.denominator
    return math.floor(float(t) * w)


def be_block_lengths(tau, n: int, weight: WeightKind | None = None) -> tuple[int, ...]:
    """Run lengths of block ``n`` of the canonical point."""
    fv = as_frequencies(tau)
    w = (weight or Linear())(n)
    return tuple(_floor_mul(t, w) for t in fv.tau)


def _block_source(lengths_of, s: int) -> Iterator[np.ndarray]:
    """Concatenate blocks of runs, batching small blocks into ~CHUNK-sized arrays."""
    digits = np.arange(s, dtype=DIGIT_DTYPE)
    pending: list[np.ndarray] = []
    size = 0
    n = 1
    while True:
        lengths = lengths_of(n)
        n += 1
        total = sum(lengths)
        if total == 0:
            continue
        pending.append(np.repeat(digits, lengths))
        size += total
        if size >= CHUNK:
            yield pending[0] if len(pending) == 1 else np.concatenate(pending)
            pending, size = [], 0


def canonical_be_point(tau, weight: WeightKind | None = None) -> DigitStream:
    """Deterministic block point whose digit frequencies are exactly ``tau``."""
    fv = as_frequencies(tau)
    w = weight or Linear()
    label = ", ".join(str(float(t)) for t in fv.tau)
    return DigitStream(
        Alphabet(fv.s),
        lambda: _block_source(lambda n: be_block_lengths(fv, n, w), fv.s),
        f"canonicalpt(({label}), {w})",
        declared_tau=fv,
    )


def _factorial_prefix_sums() -> Iterator[int]:
    total, fact, k = 0, 1, 1
    while True:
        fact *= k
        total += fact
        yield total
        k += 1


def beta_switch(n: int) -> int:
    """n-th term of 0^{1!} 1^{2!} 0^{3!} 1^{4!} ...: 0 in odd factorial blocks."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"block index must be a positive integer, got {n!r}")
    for k, total in enumerate(_factorial_prefix_sums(), start=1):
        if n <= total:
            return 0 if k % 2 else 1
    raise AssertionError("unreachable")


def beta_stream() -> DigitStream:
    """The 0/1 factorial switch sequence itself, as a ternary stream."""

    def source():
        fact, k = 1, 1
        while True:
            fact *= k
            d = 0 if k % 2 else 1
            left = fact
            while left:
                m = min(left, CHUNK)
                yield np.full(m, d, dtype=DIGIT_DTYPE)
                left -= m
            k += 1

    return DigitStream(TERNARY, source, "beta", frequency_free=True)


def osc_block_lengths(n: int, p=1) -> tuple[int, int, int]:
    triple = OSC_TRIPLES[beta_switch(n)]
    w = Power(p, ceil=False)(n)
    return tuple(_floor_mul(t, w) for t in triple)


def _osc_source(p) -> Iterator[np.ndarray]:
    digits = np.arange(3, dtype=DIGIT_DTYPE)
    block = 1
    pending: list[np.ndarray] = []
    size = 0
    for k, total in enumerate(_factorial_prefix_sums(), start=1):
        triple = OSC_TRIPLES[0 if k % 2 else 1]
        w = Power(p, ceil=False)
        while block <= total:
            lengths = [_floor_mul(t, w(block)) for t in triple]
            block += 1
            m = sum(lengths)
            if m == 0:
                continue
            pending.append(np.repeat(digits, lengths))
            size += m
            if size >= CHUNK:
                yield pending[0] if len(pending) == 1 else np.concatenate(pending)
                pending, size = [], 0


def oscillating_stream(p=1) -> DigitStream:
    """Block stream switching between (0.4, 0.2, 0.4) and (0.3, 0.4, 0.3) runs.

    Every block has equally many 0s and 2s, so the digit mean is 1 at each
    block boundary, while digit frequencies oscillate and have no limit.
    """
    Power(p)  # validates p
    return DigitStream(
        TERNARY,
        lambda: _osc_source(p),
        f"osc({p})",
        declared_mean=Fraction(1),
        frequency_free=True,
    )


def factorial_block_counts(n_max: int) -> tuple[list[int], list[int]]:
    """k_n = 1!+...+(2n-1)! and k*_n = 1!+...+(2n)! for n = 1..n_max."""
    sums = []
    it = _factorial_prefix_sums()
    for _ in range(2 * n_max):
        sums.append(next(it))
    return sums[0::2], sums[1::2]


def _osc_run_total(first: int, last: int, triple, p) -> int:
    """Sum of block lengths for blocks first..last sharing one triple."""
    e = 1 + p
    if float(e).is_integer():
        e = int(e)
        j = np.arange(first, last + 1, dtype=object if last**e * 10 > INT64_MAX else np.int64)
        powers = j**e
        total = 0
        for t in triple:
            total += int(((powers * t.numerator) // t.denominator).sum())
        return total
    return sum(_floor_mul(t, Power(p, ceil=False)(j)) for j in range(first, last + 1) for t in triple)


def checkpoints(p=1, n_max: int = 3) -> tuple[list[int], list[int]]:
    """Digit positions l_n and l*_n closing blocks k_n and k*_n of ``oscillating_stream(p)``.

    Raises OverflowError when a position would not fit a signed 64-bit integer.
    """
    Power(p)
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    ks, kstars = factorial_block_counts(n_max)
    bound = max(kstars)
    # sum_{j<=k} j^(1+p) exceeds k^(2+p)/(2+p) - guard before summing millions of blocks
    if bound ** (2 + float(p)) / (2 + float(p)) * 0.9 > INT64_MAX:
        raise OverflowError(f"checkpoint positions for n_max={n_max}, p={p} exceed 64 bits")
    positions = {}
    total = 0
    prev = 0
    for k, end in enumerate(_factorial_prefix_sums(), start=1):
        if prev >= bound:
            break
        total += _osc_run_total(prev + 1, end, OSC_TRIPLES[0 if k % 2 else 1], p)
        positions[end] = total
        prev = end
    if max(positions.values()) > INT64_MAX:
        raise OverflowError(f"checkpoint positions for n_max={n_max}, p={p} exceed 64 bits")
    return [positions[k] for k in ks], [positions[k] for k in kstars]
