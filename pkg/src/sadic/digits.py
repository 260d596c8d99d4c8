"""Alphabets, digit words, lazy digit streams and exact rational expansion.

A stream is a *definition*: calling :meth:`DigitStream.chunks` starts a fresh
cursor, so replaying a stream never requires buffering what was already read.
Digits travel in ``uint8`` numpy chunks; counts are Python ints.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import islice
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

CHUNK = 1 << 16
DIGIT_DTYPE = np.uint8

# long division switches from cycle detection to plain lazy division above this
_CYCLE_SEARCH_LIMIT = 1 << 20


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


@dataclass(frozen=True)
class Alphabet:
    s: int = 3

    def __post_init__(self):
        if isinstance(self.s, bool) or not isinstance(self.s, int) or self.s < 2:
            raise DomainError(f"radix must be an integer >= 2, got {self.s!r}")
        if self.s > 256:
            raise DomainError("radix above 256 does not fit the uint8 digit store")

    @property
    def digits(self) -> range:
        return range(self.s)

    def check(self, digit: int) -> int:
        if isinstance(digit, bool) or int(digit) != digit or not 0 <= digit < self.s:
            raise DomainError(f"{digit!r} is not a base-{self.s} digit")
        return int(digit)


TERNARY = Alphabet(3)


def as_alphabet(a: Alphabet | int | None) -> Alphabet:
    if a is None:
        return TERNARY
    if isinstance(a, Alphabet):
        return a
    return Alphabet(a)


@dataclass(frozen=True)
class DigitWord:
    """A finite digit sequence over a fixed alphabet."""

    digits: tuple[int, ...]
    alphabet: Alphabet = TERNARY

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(self.alphabet.check(d) for d in self.digits))

    def __len__(self):
        return len(self.digits)

    def __iter__(self):
        return iter(self.digits)

    def __getitem__(self, i):
        return self.digits[i]

    def __eq__(self, other):
        if isinstance(other, DigitWord):
            return self.digits == other.digits and self.alphabet == other.alphabet
        if isinstance(other, (list, tuple)):
            return list(self.digits) == list(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.digits, self.alphabet))

    def value(self) -> Fraction:
        """Exact partial sum of digit_k * s**-k."""
        s = self.alphabet.s
        acc = 0
        for d in self.digits:
            acc = acc * s + d
        return Fraction(acc, s ** len(self.digits))

    def counts(self) -> list[int]:
        out = [0] * self.alphabet.s
        for d in self.digits:
            out[d] += 1
        return out

    def __str__(self):
        return "".join(str(d) if d < 10 else f"[{d}]" for d in self.digits)


@dataclass(frozen=True)
class FrequencyVector:
    """Digit frequencies (tau_0, ..., tau_{s-1}); stored exactly as fractions.

    Floats are read through their shortest decimal repr, so 0.3 becomes 3/10
    and block lengths floor(tau_i * w) come out exact.
    """

    tau: tuple[Fraction, ...]

    def __post_init__(self):
        try:
            vals = tuple(_exact(t) for t in self.tau)
        except (TypeError, ValueError) as exc:
            raise DomainError(f"frequency entries must be numbers: {exc}") from None
        if len(vals) < 2:
            raise DomainError("a frequency vector needs at least two entries")
        if any(v < 0 for v in vals):
            raise DomainError(f"negative frequency in {self.tau!r}")
        if abs(float(sum(vals)) - 1.0) > 1e-12:
            raise DomainError(f"frequencies sum to {float(sum(vals))!r}, not 1")
        object.__setattr__(self, "tau", vals)

    @property
    def s(self) -> int:
        return len(self.tau)

    def __len__(self):
        return len(self.tau)

    def __iter__(self):
        return iter(self.tau)

    def __getitem__(self, i):
        return self.tau[i]

    def floats(self) -> tuple[float, ...]:
        return tuple(float(t) for t in self.tau)

    def mean(self) -> Fraction:
        return sum((i * t for i, t in enumerate(self.tau)), Fraction(0))


def _exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(x))
    return Fraction(x)


def as_frequencies(tau) -> FrequencyVector:
    return tau if isinstance(tau, FrequencyVector) else FrequencyVector(tuple(tau))


@dataclass(frozen=True, eq=False)
class DigitStream:
    """Lazy unbounded digit source with optional declared statistics.

    ``declared_tau`` carries known limit frequencies; ``frequency_free`` marks
    a stream whose frequencies are known *not* to exist.
    """

    alphabet: Alphabet
    source: Callable[[], Iterable[np.ndarray]] = field(repr=False)
    name: str = "stream"
    declared_tau: FrequencyVector | None = None
    declared_mean: Fraction | float | None = None
    frequency_free: bool = False

    def __post_init__(self):
        if self.declared_tau is not None:
            if self.declared_tau.s != self.alphabet.s:
                raise DomainError("declared frequencies do not match the alphabet")
            if self.declared_mean is None:
                object.__setattr__(self, "declared_mean", self.declared_tau.mean())

    @property
    def s(self) -> int:
        return self.alphabet.s

    def chunks(self) -> Iterator[np.ndarray]:
        for chunk in self.source():
            if len(chunk):
                yield np.asarray(chunk, dtype=DIGIT_DTYPE)

    def __iter__(self) -> Iterator[int]:
        for chunk in self.chunks():
            yield from chunk.tolist()

    def prefix(self, n: int) -> DigitWord:
        return DigitWord(tuple(prefix_array(self, n).tolist()), self.alphabet)

    def with_meta(self, **changes) -> "DigitStream":
        return dataclasses.replace(self, **changes)


def prefix_array(x: DigitStream, n: int) -> np.ndarray:
    """First ``n`` digits as a uint8 array (fewer only if the source ends)."""
    if n < 0:
        raise DomainError("prefix length must be nonnegative")
    out = np.empty(n, dtype=DIGIT_DTYPE)
    filled = 0
    if n == 0:
        return out
    for chunk in x.chunks():
        take = min(len(chunk), n - filled)
        out[filled : filled + take] = chunk[:take]
        filled += take
        if filled == n:
            break
    return out[:filled]


def prefix(x: DigitStream, n: int) -> DigitWord:
    return x.prefix(n)


def _tile(period: np.ndarray, offset: int = 0) -> Iterator[np.ndarray]:
    reps = max(1, CHUNK // len(period))
    block = np.tile(period, reps)
    if offset:
        block = np.roll(block, -offset)
    block.flags.writeable = False
    while True:
        yield block


def eventually_periodic(
    pre: Sequence[int], period: Sequence[int], alphabet: Alphabet | int | None = None, name=None
) -> DigitStream:
    """Stream ``pre`` followed by ``period`` repeated forever."""
    a = as_alphabet(alphabet)
    pre_arr = np.array([a.check(d) for d in pre], dtype=DIGIT_DTYPE)
    per_arr = np.array([a.check(d) for d in period], dtype=DIGIT_DTYPE)
    if len(per_arr) == 0:
        raise DomainError("period must be nonempty")

    def source():
        yield pre_arr
        yield from _tile(per_arr)

    tau = None
    counts = np.bincount(per_arr, minlength=a.s)
    tau = FrequencyVector(tuple(Fraction(int(c), len(per_arr)) for c in counts))
    label = name or f"{''.join(map(str, pre_arr.tolist()))}({''.join(map(str, per_arr.tolist()))})"
    return DigitStream(a, source, label, declared_tau=tau)


def constant_stream(d: int, alphabet: Alphabet | int | None = None) -> DigitStream:
    a = as_alphabet(alphabet)
    return eventually_periodic((), (a.check(d),), a, name=f"const({d})")


def as_rational(x) -> Fraction:
    try:
        q = x if isinstance(x, Fraction) else _exact(x)
    except (TypeError, ValueError) as exc:
        raise DomainError(str(exc)) from None
    if not 0 <= q < 1:
        raise DomainError(f"{x!r} lies outside [0, 1)")
    return q


def rational_parts(x, alphabet: Alphabet | int | None = None) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Preperiod and period of the canonical expansion of ``x`` by long division.

    s-adic rationals come out terminating, i.e. with period (0).
    """
    a = as_alphabet(alphabet)
    q = as_rational(x)
    num, den = q.numerator, q.denominator
    if den > _CYCLE_SEARCH_LIMIT:
        raise DomainError("denominator too large for exact period extraction")
    seen: dict[int, int] = {}
    digits: list[int] = []
    r = num
    while r not in seen:
        seen[r] = len(digits)
        r *= a.s
        digits.append(r // den)
        r %= den
    start = seen[r]
    return tuple(digits[:start]), tuple(digits[start:])


def _lazy_division(num: int, den: int, s: int) -> Iterator[np.ndarray]:
    r = num
    buf = np.empty(4096, dtype=DIGIT_DTYPE)
    while True:
        for i in range(len(buf)):
            r *= s
            buf[i] = r // den
            r %= den
        yield buf.copy()


def expand_rational(x, alphabet: Alphabet | int | None = None) -> DigitStream:
    """Canonical s-adic expansion of a rational in [0, 1)."""
    a = as_alphabet(alphabet)
    q = as_rational(x)
    if q.denominator <= _CYCLE_SEARCH_LIMIT:
        pre, per = rational_parts(q, a)
        return eventually_periodic(pre, per, a, name=f"rational({q.numerator}, {q.denominator})")
    # digit frequencies of a rational always exist but are left undeclared here
    return DigitStream(
        a,
        lambda: _lazy_division(q.numerator, q.denominator, a.s),
        name=f"rational({q.numerator}, {q.denominator})",
    )


def canonicalize(
    word: DigitWord | Sequence[int], period: Sequence[int], alphabet: Alphabet | int | None = None
) -> tuple[DigitWord, tuple[int, ...]]:
    """Rewrite a representation ending in period (s-1) into the one with period (0).

    Any other representation is returned unchanged.
    """
    if isinstance(word, DigitWord):
        a = word.alphabet if alphabet is None else as_alphabet(alphabet)
        pre = list(word.digits)
    else:
        a = as_alphabet(alphabet)
        pre = list(word)
    pre = [a.check(d) for d in pre]
    per = tuple(a.check(d) for d in period)
    if not per:
        raise DomainError("period must be nonempty")
    top = a.s - 1
    if any(d != top for d in per):
        return DigitWord(tuple(pre), a), per
    while pre and pre[-1] == top:
        pre.pop()
    if not pre:
        raise DomainError("representation equals 1, which has no expansion in [0, 1)")
    pre[-1] += 1
    return DigitWord(tuple(pre), a), (0,)


def parse_representation(text: str, alphabet: Alphabet | int | None = None):
    """Parse ``"12(0)"`` style notation into (DigitWord, period)."""
    a = as_alphabet(alphabet)
    text = text.strip()
    if not text.endswith(")") or "(" not in text:
        raise DomainError(f"expected 'digits(period)', got {text!r}")
    head, _, tail = text[:-1].partition("(")
    try:
        pre = tuple(int(c, 36) for c in head)
        per = tuple(int(c, 36) for c in tail)
    except ValueError:
        raise DomainError(f"bad digit in {text!r}") from None
    return DigitWord(pre, a), per


def format_representation(word: DigitWord, period: Sequence[int]) -> str:
    return f"{word}({''.join(str(d) for d in period)})"


def take(x: DigitStream, n: int) -> list[int]:
    return list(islice(iter(x), n))
