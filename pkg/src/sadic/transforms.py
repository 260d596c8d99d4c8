"""Digit-stream transformations and their composition algebra.

Every transform is a frozen value: equality compares the kind, parameters and
radix, never the underlying callables.  Applying a transform builds a new lazy
stream definition and propagates declared statistics where they are known.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Callable, Iterator

import numpy as np

from .digits import (
    DIGIT_DTYPE,
    DigitStream,
    DomainError,
    FrequencyVector,
    prefix_array,
)
from .generators import Linear, WeightKind, canonical_be_point

ChunkMap = Callable[[Iterator[np.ndarray], int], Iterator[np.ndarray]]


class NotInvertible(ValueError):
    pass


class AlphabetMismatch(DomainError):
    pass


class FrequenciesUnknown(ValueError):
    """A transform needs declared digit frequencies the stream does not carry."""


@dataclass(frozen=True)
class Transform:
    kind: str
    params: tuple = ()
    radix: int | None = None
    window: int | None = field(default=None, compare=False)
    needs_frequencies: bool = field(default=False, compare=False)
    _apply: Callable[[DigitStream], DigitStream] = field(default=None, compare=False, repr=False)
    _inverse: Callable[[], "Transform"] | None = field(default=None, compare=False, repr=False)

    @property
    def invertible(self) -> bool:
        return self._inverse is not None

    @property
    def inverse(self) -> "Transform":
        if self._inverse is None:
            raise NotInvertible(f"{self} has no inverse")
        return self._inverse()

    def __call__(self, x: DigitStream) -> DigitStream:
        if self.radix is not None and x.s != self.radix:
            raise AlphabetMismatch(f"{self} acts on base {self.radix}, stream is base {x.s}")
        return self._apply(x)

    def __str__(self):
        if self.kind == "compose":
            g, f = self.params
            return f"({g} . {f})"
        if not self.params:
            return self.kind
        return f"{self.kind}({', '.join(map(str, self.params))})"


def _chunked(x: DigitStream, fn: ChunkMap, label: str, **meta) -> DigitStream:
    return x.with_meta(source=lambda: fn(x.chunks(), x.s), name=f"{label}({x.name})", **meta)


def identity() -> Transform:
    def inv():
        return identity()

    return Transform("id", _apply=lambda x: x, _inverse=inv, window=1)


def _window_map(perm: tuple[int, ...]) -> ChunkMap:
    w = len(perm)
    order = np.array(perm)

    def run(chunks, s):
        carry = np.empty(0, dtype=DIGIT_DTYPE)
        for chunk in chunks:
            buf = np.concatenate((carry, chunk)) if len(carry) else chunk
            cut = len(buf) - len(buf) % w
            if cut:
                yield buf[:cut].reshape(-1, w)[:, order].ravel()
            carry = buf[cut:]
        if len(carry):
            yield carry

    return run


def windowed_permutation(perm, kind: str | None = None) -> Transform:
    """Permute digits inside each consecutive window of ``len(perm)`` positions.

    Output position j of a window takes the input digit at ``perm[j]``.
    """
    perm = tuple(int(i) for i in perm)
    if sorted(perm) != list(range(len(perm))) or not perm:
        raise DomainError(f"{perm!r} is not a permutation of 0..{len(perm) - 1}")
    inv = tuple(int(i) for i in np.argsort(perm))
    name = kind or "perm"
    fn = _window_map(perm)

    def inverse():
        if inv == perm:
            return windowed_permutation(perm, kind)
        return windowed_permutation(inv)

    params = () if kind else (perm,)
    return Transform(
        name, params, window=len(perm), _apply=lambda x: _chunked(x, fn, name), _inverse=inverse
    )


def pair_swap() -> Transform:
    return windowed_permutation((1, 0), "swap2")


def triple_reverse() -> Transform:
    return windowed_permutation((2, 1, 0), "rev3")


def _shift_map(chunks, s):
    first = True
    for chunk in chunks:
        if first:
            first = False
            chunk = chunk[1:]
        yield chunk


def shift() -> Transform:
    """Drop the first digit."""
    return Transform("shift", _apply=lambda x: _chunked(x, _shift_map, "shift"))


def prepend(i: int) -> Transform:
    """Insert digit ``i`` in front of the stream."""
    if isinstance(i, bool) or int(i) != i or i < 0:
        raise DomainError(f"{i!r} is not a digit")
    i = int(i)

    def apply(x):
        x.alphabet.check(i)

        def run(chunks, s):
            yield np.array([i], dtype=DIGIT_DTYPE)
            yield from chunks

        return _chunked(x, run, f"prepend{i}")

    return Transform("prepend", (i,), _apply=apply)


def transpose_at(j: int) -> Transform:
    """Swap the digits at 1-based positions j and j+1."""
    if isinstance(j, bool) or int(j) != j or j < 1:
        raise DomainError(f"transposition position must be >= 1, got {j!r}")
    j = int(j)

    def run(chunks, s):
        held: list[np.ndarray] = []
        size = 0
        for chunk in chunks:
            if size >= j + 1:
                yield chunk
                continue
            held.append(chunk)
            size += len(chunk)
            if size >= j + 1:
                buf = np.concatenate(held)
                buf[j - 1], buf[j] = buf[j], buf[j - 1]
                yield buf
        if size < j + 1 and held:
            yield np.concatenate(held)

    def inv():
        return transpose_at(j)

    return Transform("transpose", (j,), _apply=lambda x: _chunked(x, run, f"transpose{j}"), _inverse=inv)


def _reverse_tau(tau: FrequencyVector | None):
    return None if tau is None else FrequencyVector(tuple(reversed(tau.tau)))


def inverter(s: int | None = None) -> Transform:
    """Map every digit a to s-1-a."""

    def apply(x):
        top = x.s - 1
        mean = None if x.declared_mean is None else top - x.declared_mean
        return _chunked(
            x,
            lambda chunks, _: (top - c for c in chunks),
            "invert",
            declared_tau=_reverse_tau(x.declared_tau),
            declared_mean=mean,
        )

    return Transform("invert", radix=s, window=1, _apply=apply, _inverse=lambda: inverter(s))


def mod_increment(m: int, s: int | None = None) -> Transform:
    """Map every digit a to (a + m) mod s."""
    m = int(m)
    if s is not None:
        m %= s

    def apply(x):
        k = m % x.s
        tau = x.declared_tau
        if tau is not None:
            tau = FrequencyVector(tuple(tau.tau[(i - k) % x.s] for i in range(x.s)))

        def run(chunks, base):
            table = ((np.arange(base) + k) % base).astype(DIGIT_DTYPE)
            for c in chunks:
                yield table[c]

        return _chunked(x, run, f"inc{k}", declared_tau=tau, declared_mean=None)

    return Transform("inc", (m,), radix=s, window=1, _apply=apply, _inverse=lambda: mod_increment(-m, s))


def _seven_map(chunks, s):
    seen = 0  # digit-1 occurrences consumed so far, reduced mod 7
    started = False
    for chunk in chunks:
        ones = np.flatnonzero(chunk == 1)
        if len(ones) == 0:
            yield chunk
            continue
        k = (seen + 1 + np.arange(len(ones))) % 7
        out = chunk.copy()
        out[ones[k == 0]] = 0
        # occurrence k = 1 itself is never rewritten; every later k = 7m+1 is
        rewrite = ones[k == 1]
        if not started:
            rewrite = rewrite[1:]
            started = True
        out[rewrite] = 2
        seen = (seen + len(ones)) % 7
        yield out


def seven_replacement() -> Transform:
    """Rewrite the 7m-th occurrence of digit 1 to 0 and the (7m+1)-th to 2.

    Only the ranks among 1-occurrences matter; every other digit passes
    through in place.  Each 0/2 rewrite pair leaves the running digit sum
    within one of the input's, so the declared mean carries over.
    """

    def apply(x):
        tau = x.declared_tau
        if tau is not None:
            t0, t1, t2 = tau.tau
            tau = FrequencyVector((t0 + t1 / 7, t1 * 5 / 7, t2 + t1 / 7))
        return _chunked(x, _seven_map, "seven", declared_tau=tau, declared_mean=x.declared_mean, frequency_free=False)

    return Transform("seven", radix=3, _apply=apply)


def be_canonicalizer(weight: WeightKind | None = None) -> Transform:
    """Replace a stream by the canonical block point of its declared frequencies.

    Streams tagged frequency-free pass through unchanged; streams with no
    frequency information raise :class:`FrequenciesUnknown`.
    """
    w = weight or Linear()

    def apply(x):
        if x.declared_tau is not None:
            return canonical_be_point(x.declared_tau, w)
        if x.frequency_free:
            return x
        raise FrequenciesUnknown(f"stream {x.name!r} declares no digit frequencies")

    params = () if isinstance(w, Linear) else (w.p,)
    return Transform("canonical", params, needs_frequencies=True, _apply=apply)


def estimate_frequencies(n: int) -> Transform:
    """Declare the empirical frequencies of the first ``n`` digits; digits pass through."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"sample size must be a positive integer, got {n!r}")
    n = int(n)

    def apply(x):
        sample = prefix_array(x, n)
        counts = np.bincount(sample, minlength=x.s)
        tau = FrequencyVector(tuple(Fraction(int(c), len(sample)) for c in counts))
        return x.with_meta(name=f"estimate{n}({x.name})", declared_tau=tau, declared_mean=tau.mean(), frequency_free=False)

    return Transform("estimate", (n,), window=1, _apply=apply, _inverse=lambda: identity())


def compose(g: Transform, f: Transform) -> Transform:
    """g after f: apply ``f`` first."""
    if g.radix is not None and f.radix is not None and g.radix != f.radix:
        raise AlphabetMismatch(f"cannot compose base-{g.radix} {g} with base-{f.radix} {f}")
    radix = g.radix if g.radix is not None else f.radix
    inverse = None
    if g.invertible and f.invertible:
        def inverse():
            return compose(f.inverse, g.inverse)
    window = lcm(g.window, f.window) if g.window and f.window else None
    return Transform(
        "compose",
        (g, f),
        radix=radix,
        window=window,
        needs_frequencies=g.needs_frequencies or f.needs_frequencies,
        _apply=lambda x: g(f(x)),
        _inverse=inverse,
    )


def invert_transform(f: Transform) -> Transform:
    return f.inverse


def compose_all(*ts: Transform) -> Transform:
    """Compose left-to-right: ``compose_all(a, b, c)`` applies a, then b, then c."""
    out = identity()
    for t in ts:
        out = compose(t, out) if out.kind != "id" else t
    return out
