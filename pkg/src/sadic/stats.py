"""Running digit statistics, convergence proxies and closed-form quantities."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .digits import DigitStream, DomainError, as_frequencies

INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class RunningCounts:
    n: int
    counts: tuple[int, ...]

    @property
    def digit_sum(self) -> int:
        return sum(i * c for i, c in enumerate(self.counts))

    def freqs(self) -> tuple[float, ...]:
        return tuple(c / self.n for c in self.counts)

    def mean(self) -> float:
        return self.digit_sum / self.n


@dataclass(frozen=True)
class StatsTrace:
    s: int
    rows: tuple[RunningCounts, ...]
    label: str = ""

    def __len__(self):
        return len(self.rows)

    @property
    def positions(self) -> list[int]:
        return [row.n for row in self.rows]

    def v(self, i: int) -> list[float]:
        return [row.counts[i] / row.n for row in self.rows]

    def r(self) -> list[float]:
        return [row.mean() for row in self.rows]

    def last(self) -> RunningCounts:
        return self.rows[-1]

    def header(self, with_counts=False) -> list[str]:
        cols = ["n"] + [f"v{i}" for i in range(self.s)] + ["r"]
        if with_counts:
            cols += [f"N{i}" for i in range(self.s)]
        return cols

    def to_csv(self, with_counts=False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header(with_counts))
        for row in self.rows:
            line = [row.n] + [repr(f) for f in row.freqs()] + [repr(row.mean())]
            if with_counts:
                line += list(row.counts)
            w.writerow(line)
        return buf.getvalue()

    def to_json(self, with_counts=False) -> str:
        out = []
        for row in self.rows:
            rec = {"n": row.n, "v": list(row.freqs()), "r": row.mean()}
            if with_counts:
                rec["counts"] = list(row.counts)
            out.append(rec)
        return json.dumps({"s": self.s, "label": self.label, "rows": out}, indent=2)


@dataclass(frozen=True)
class LimitVerdict:
    converged: bool
    estimate: float
    oscillation: tuple[float, float]
    tol: float

    @property
    def spread(self) -> float:
        return self.oscillation[1] - self.oscillation[0]


def _validate_checkpoints(checkpoints: Iterable[int]) -> list[int]:
    pts = [int(c) for c in checkpoints]
    if not pts:
        raise DomainError("at least one checkpoint is required")
    if pts[0] < 1 or any(b <= a for a, b in zip(pts, pts[1:])):
        raise DomainError("checkpoints must be positive and strictly increasing")
    if pts[-1] > INT64_MAX:
        raise OverflowError(f"checkpoint {pts[-1]} exceeds 64-bit range")
    return pts


def run_stats(x: DigitStream, checkpoints: Sequence[int]) -> StatsTrace:
    """Single pass over ``x`` recording exact digit counts at each checkpoint."""
    pts = _validate_checkpoints(checkpoints)
    s = x.s
    counts = np.zeros(s, dtype=np.int64)
    n = 0
    rows = []
    it = iter(pts)
    target = next(it)
    for chunk in x.chunks():
        start = 0
        while target is not None and n + (len(chunk) - start) >= target:
            stop = start + (target - n)
            counts += np.bincount(chunk[start:stop], minlength=s)[:s]
            n = target
            rows.append(RunningCounts(n, tuple(int(c) for c in counts)))
            start = stop
            target = next(it, None)
        if target is None:
            break
        counts += np.bincount(chunk[start:], minlength=s)[:s]
        n += len(chunk) - start
    if target is not None:
        raise DomainError(f"stream ended after {n} digits, before checkpoint {target}")
    return StatsTrace(s, tuple(rows), x.name)


def geometric_checkpoints(max_n: int, per_decade: int = 8) -> list[int]:
    """ceil(10**(k/per_decade)) for k = 0, 1, ... up to max_n, ending at max_n."""
    if max_n < 1:
        raise DomainError("max_n must be positive")
    pts = []
    k = 0
    while True:
        n = math.ceil(10 ** (k / per_decade))
        if n > max_n:
            break
        if not pts or n > pts[-1]:
            pts.append(n)
        k += 1
    if pts[-1] != max_n:
        pts.append(max_n)
    return pts


def _tail_verdict(values: Sequence[float], tol: float) -> LimitVerdict:
    if len(values) < 4:
        raise DomainError("a convergence verdict needs at least 4 checkpoints")
    if not tol >= 0:
        raise DomainError("tolerance must be nonnegative")
    tail = values[len(values) // 2 :]
    lo, hi = min(tail), max(tail)
    return LimitVerdict(hi - lo <= tol, values[-1], (lo, hi), tol)


def asymptotic_mean_verdict(trace: StatsTrace, tol: float) -> LimitVerdict:
    """Converged iff r_n varies by at most ``tol`` over the last half of the checkpoints."""
    return _tail_verdict(trace.r(), tol)


def frequency_verdicts(trace: StatsTrace, tol: float) -> list[LimitVerdict]:
    return [_tail_verdict(trace.v(i), tol) for i in range(trace.s)]


def mean_from_frequencies(tau) -> float:
    fv = as_frequencies(tau)
    return float(fv.mean())


def be_dimension(tau, s: int | None = None) -> float:
    """Hausdorff dimension -sum(tau_i ln tau_i) / ln s of the frequency class.

    Zero entries contribute nothing (0 ln 0 = 0).
    """
    fv = as_frequencies(tau)
    s = fv.s if s is None else s
    if s != fv.s:
        raise DomainError(f"tau has {fv.s} entries but radix is {s}")
    ps = [float(t) for t in fv.tau if t > 0]
    h = -math.fsum(p * math.log(p) for p in ps)
    return h / math.log(s) + 0.0


def cardinality_7k(n: int) -> int:
    """#({1..n} ∩ {7k : k >= 1})."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return n // 7


def cardinality_7k1(n: int) -> int:
    """#({1..n} ∩ {7k+1 : k >= 1})."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return (n - 1) // 7


def power_sum_ratios(alpha: float, n: int) -> tuple[float, float]:
    """((n+1)^(1+a) / S_n, n^(2+a) / S_n) with S_n = sum_{i<=n} i^(1+a).

    Terms are scaled by n^(1+a) before an exactly-rounded sum, so the ratios
    never overflow for any n.
    """
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    if n < 1:
        raise DomainError("n must be >= 1")
    e = 1.0 + alpha
    i = np.arange(1, n + 1, dtype=np.float64)
    scaled = math.fsum(np.power(i / n, e).tolist())  # S_n / n^e
    ratio1 = ((n + 1) / n) ** e / scaled
    ratio2 = n / scaled
    return ratio1, ratio2


def count_inequalities_hold(trace: StatsTrace) -> bool:
    """Ternary inequalities r_n >= v_1, r_n >= v_2 and v_2 >= r_n - 1, checked on integer counts."""
    if trace.s != 3:
        raise DomainError("the inequalities are stated for ternary digits")
    for row in trace.rows:
        _, n1, n2 = row.counts
        total = row.digit_sum
        if total < n1 or total < n2 or n2 < total - row.n:
            return False
    return True
