"""Reproduction battery: one check per acceptance criterion.

Each criterion returns a :class:`CriterionResult`; ``scale="full"`` runs the
10**6-digit experiments, ``scale="small"`` shrinks sample sizes tenfold while
keeping every tolerance unchanged.
"""

from __future__ import annotations

import json
import math
import random
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from . import dsl
from . import generators as gen
from . import stats as st
from . import transforms as tf
from .digits import prefix_array

SEED = 42
SIZES = {
    "full": {"n": 10**6, "l3": 10**4, "fuzz": 10**5, "corpus": 10**3, "group": 10**4},
    "small": {"n": 10**5, "l3": 10**3, "fuzz": 10**4, "corpus": 10**3, "group": 10**4},
}


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.id:2d} {self.name} ({self.seconds:.2f}s)"


def _sizes(scale: str) -> dict:
    if scale not in SIZES:
        raise ValueError(f"scale must be one of {sorted(SIZES)}")
    return SIZES[scale]


# -- shared experiments -------------------------------------------------------


@lru_cache(maxsize=None)
def uniform_trace(n: int) -> tuple[st.StatsTrace, float]:
    t0 = time.perf_counter()
    trace = st.run_stats(gen.uniform_stream(3, SEED), st.geometric_checkpoints(n))
    return trace, time.perf_counter() - t0


@lru_cache(maxsize=None)
def seven_trace(n: int) -> st.StatsTrace:
    x = tf.seven_replacement()(gen.uniform_stream(3, SEED))
    return st.run_stats(x, st.geometric_checkpoints(n))


CANONICAL_TAU = (Fraction(1, 5), Fraction(3, 10), Fraction(1, 2))


def block_boundaries(tau, limit: int) -> list[tuple[int, int]]:
    """(block index, digit position) for every block of the linear canonical point ending by ``limit``."""
    out = []
    pos = 0
    n = 1
    while True:
        pos += sum(gen.be_block_lengths(tau, n))
        if pos > limit:
            return out
        out.append((n, pos))
        n += 1


@lru_cache(maxsize=None)
def canonical_trace(n: int) -> tuple[st.StatsTrace, tuple]:
    bounds = block_boundaries(CANONICAL_TAU, n)
    pts = sorted({p for _, p in bounds if p > 0} | {n})
    trace = st.run_stats(gen.canonical_be_point(CANONICAL_TAU), pts)
    return trace, tuple(bounds)


@lru_cache(maxsize=None)
def oscillation_trace(p=1, n_max=3) -> tuple[st.StatsTrace, list[int], list[int], float]:
    t0 = time.perf_counter()
    ls, lstars = gen.checkpoints(p, n_max)
    pts = sorted(q for q in ls + lstars if q > 0)
    trace = st.run_stats(gen.oscillating_stream(p), pts)
    return trace, ls, lstars, time.perf_counter() - t0


@lru_cache(maxsize=None)
def inverter_traces(n: int) -> tuple[st.StatsTrace, st.StatsTrace]:
    pts = st.geometric_checkpoints(n)
    return st.run_stats(dsl.resolve("const(0)"), pts), st.run_stats(dsl.resolve("const(0) | invert"), pts)


# -- criteria -----------------------------------------------------------------


def c01_borel(scale):
    n = _sizes(scale)["n"]
    trace, secs = uniform_trace(n)
    v = trace.last().freqs()
    r = trace.last().mean()
    dev = max(abs(x - 1 / 3) for x in v)
    ok = dev < 0.005 and abs(r - 1) < 0.01 and secs < 1.0
    return ok, {"n": n, "v": v, "r": r, "max_dev": dev, "runtime_s": secs}


def c02_seven(scale):
    n = _sizes(scale)["n"]
    trace = seven_trace(n)
    v = trace.last().freqs()
    r = trace.last().mean()
    target = (8 / 21, 5 / 21, 8 / 21)
    devs = [abs(a - b) for a, b in zip(v, target)]
    ok = max(devs) < 0.01 and abs(r - 1) < 0.01
    return ok, {"n": n, "v": v, "target": target, "r": r}


def c03_cardinalities(scale):
    top = _sizes(scale)["l3"]
    sevens = [m for m in range(1, top + 1) if m % 7 == 0]
    after = [m for m in range(2, top + 1) if m % 7 == 1]
    bad = []
    for n in range(1, top + 1):
        window = range(1, n + 1)
        a = sum(1 for m in sevens if m in window)
        b = sum(1 for m in after if m in window)
        if a != st.cardinality_7k(n) or b != st.cardinality_7k1(n):
            bad.append(n)
    return not bad, {"checked_up_to": top, "mismatches": bad[:10]}


def c04_canonical_point(scale):
    n = _sizes(scale)["n"]
    trace, bounds = canonical_trace(n)
    last = trace.last()
    v = last.freqs()
    r = last.mean()
    by_pos = {row.n: row.counts for row in trace.rows}
    bracket_fail = []
    for k, pos in bounds:
        counts = by_pos.get(pos, (0, 0, 0)) if pos else (0, 0, 0)
        tri = Fraction(k * (k + 1), 2)
        for i, t in enumerate(CANONICAL_TAU):
            if not (t * tri - k <= counts[i] <= t * tri):
                bracket_fail.append((k, i))
    devs = [abs(a - float(t)) for a, t in zip(v, CANONICAL_TAU)]
    ok = max(devs) < 0.02 and abs(r - 1.3) < 0.02 and not bracket_fail
    return ok, {"n": n, "v": v, "r": r, "blocks_checked": len(bounds), "bracket_failures": bracket_fail[:10]}


def c05_dimension(scale):
    d_uniform = st.be_dimension((Fraction(1, 3),) * 3, 3)
    d_point = st.be_dimension((1, 0, 0), 3)
    d_mixed = st.be_dimension((0.2, 0.3, 0.5), 3)
    oracle = -(0.2 * math.log(0.2) + 0.3 * math.log(0.3) + 0.5 * math.log(0.5)) / math.log(3)
    ok = abs(d_uniform - 1) <= 1e-12 and d_point == 0 and abs(d_mixed - oracle) <= 1e-10
    return ok, {"uniform": d_uniform, "degenerate": d_point, "mixed": d_mixed, "oracle": oracle}


def c06_power_sums(scale):
    n = 10**5
    rows = {}
    ok = True
    for alpha in (0.5, 1.0, 2.0):
        r1, r2 = st.power_sum_ratios(alpha, n)
        good = r1 < 1e-4 * (2 + alpha) and abs(r2 - (2 + alpha)) < 0.01 * (2 + alpha)
        rows[str(alpha)] = {"ratio1": r1, "ratio2": r2, "ok": good}
        ok &= good
    return ok, {"n": n, "alpha": rows}


def c07_oscillation(scale):
    trace, ls, lstars, secs = oscillation_trace(1, 3)
    v0 = dict(zip(trace.positions, trace.v(0)))
    r = dict(zip(trace.positions, trace.r()))
    v0_l = [v0[q] for q in ls if q > 0]
    v0_ls = [v0[q] for q in lstars]
    separation = min(v0_l) - max(v0_ls)
    verdict = st.frequency_verdicts(trace, 0.05)[0]
    r_dev = max(abs(x - 1) for x in r.values())
    ok = separation >= 0.05 and not verdict.converged and r_dev < 0.03 and secs < 30
    return ok, {
        "l": ls,
        "l_star": lstars,
        "v0_at_l": v0_l,
        "v0_at_l_star": v0_ls,
        "separation": separation,
        "v0_tail_spread": verdict.spread,
        "max_abs_r_minus_1": r_dev,
        "runtime_s": secs,
        "skipped_zero_checkpoints": [q for q in ls + lstars if q == 0],
    }


def _same(a, b) -> bool:
    return np.array_equal(a, b)


def c08_group(scale):
    m = _sizes(scale)["group"]
    src = gen.uniform_stream(3, SEED)
    base = prefix_array(src, m)
    swap, rev = tf.pair_swap(), tf.triple_reverse()
    checks = {}
    checks["swap2_involution"] = _same(prefix_array(swap(swap(src)), m), base)
    checks["rev3_involution"] = _same(prefix_array(rev(rev(src)), m), base)
    witness = dsl.resolve("rational(5, 26)")  # 0.(012) in base 3
    checks["witness_digits"] = prefix_array(witness, 4).tolist() == [0, 1, 2, 0]
    a = prefix_array(tf.compose(rev, swap)(witness), 12)
    b = prefix_array(tf.compose(swap, rev)(witness), 12)
    checks["noncommutative"] = not _same(a, b)
    invariant = True
    for t in (swap, rev, tf.compose(rev, swap), tf.compose(swap, rev)):
        out = prefix_array(t(src), m)
        w = t.window
        for k in range(w, m + 1, w):
            if not _same(np.bincount(out[:k], minlength=3), np.bincount(base[:k], minlength=3)):
                invariant = False
                break
    checks["window_counts_invariant"] = invariant
    return all(checks.values()), {"prefix": m, **checks, "witness_images": [a.tolist(), b.tolist()]}


def c09_count_inequalities(scale):
    n = _sizes(scale)["n"]
    traces = {
        "uniform": uniform_trace(n)[0],
        "seven": seven_trace(n),
        "canonical_point": canonical_trace(n)[0],
        "oscillation": oscillation_trace(1, 3)[0],
        "const0": inverter_traces(n)[0],
        "const0_invert": inverter_traces(n)[1],
    }
    result = {k: st.count_inequalities_hold(t) for k, t in traces.items()}
    rows = sum(len(t) for t in traces.values())
    return all(result.values()), {"checkpoints": rows, **result}


def c10_inverter(scale):
    n = _sizes(scale)["n"]
    before, after = inverter_traces(n)
    ok = all(row.digit_sum == 2 * row.n for row in after.rows) and all(row.digit_sum == 0 for row in before.rows)
    return ok, {"checkpoints": len(after), "r_in": sorted(set(before.r())), "r_out": sorted(set(after.r()))}


def random_pipeline(rng: random.Random) -> str:
    """Syntactically valid pipeline text with random spacing; names need not resolve."""

    def sp():
        return rng.choice(["", " ", "  ", "\t", "\n"])

    def num():
        v = rng.randint(-50, 10**6)
        if rng.random() < 0.4:
            return f"{v}.{rng.randint(0, 999)}"
        return str(v)

    def arg():
        if rng.random() < 0.3:
            return "(" + ",".join(sp() + num() + sp() for _ in range(rng.randint(1, 4))) + ")"
        return num()

    def term():
        name = rng.choice(list(dsl.CATALOG) + ["foo", "x_1", "Q"])
        if rng.random() < 0.5:
            return name
        return name + sp() + "(" + ",".join(sp() + arg() + sp() for _ in range(rng.randint(1, 3))) + ")"

    return sp() + ("|").join(sp() + term() + sp() for _ in range(rng.randint(1, 5))) + sp()


def fuzz_inputs(rng: random.Random, count: int):
    alphabet = b"()|,.-0123456789 abcuniformsevenx\t\n"
    for i in range(count):
        kind = i % 3
        if kind == 0:
            yield bytes(rng.getrandbits(8) for _ in range(rng.randint(0, 40)))
        elif kind == 1:
            yield bytes(rng.choice(alphabet) for _ in range(rng.randint(0, 40)))
        else:
            text = bytearray(random_pipeline(rng).encode())
            for _ in range(rng.randint(1, 3)):
                if text:
                    text[rng.randrange(len(text))] = rng.choice(alphabet)
            yield bytes(text)


def c11_dsl(scale):
    sizes = _sizes(scale)
    rng = random.Random(SEED)
    malformed = []
    parsed = errors = 0
    for data in fuzz_inputs(rng, sizes["fuzz"]):
        try:
            dsl.parse(data)
            parsed += 1
        except dsl.ParseError as e:
            errors += 1
            if not (0 <= e.offset <= len(data) and e.expected and isinstance(e.found, str)):
                malformed.append(data)
        except Exception as e:  # noqa: BLE001 - anything else is a defect
            malformed.append((data, repr(e)))
    roundtrip_fail = []
    for _ in range(sizes["corpus"]):
        text = random_pipeline(rng)
        e = dsl.parse(text)
        printed = dsl.roundtrip(e)
        if dsl.parse(printed) != e or dsl.roundtrip(dsl.parse(printed)) != printed:
            roundtrip_fail.append(text)
    ok = not malformed and not roundtrip_fail
    return ok, {
        "fuzz_inputs": sizes["fuzz"],
        "parsed": parsed,
        "parse_errors": errors,
        "malformed": [repr(m) for m in malformed[:5]],
        "corpus": sizes["corpus"],
        "roundtrip_failures": roundtrip_fail[:5],
    }


CRITERIA: dict[int, tuple[str, Callable]] = {
    1: ("borel-normality-surrogate", c01_borel),
    2: ("seven-replacement-frequencies", c02_seven),
    3: ("residue-class-cardinalities", c03_cardinalities),
    4: ("canonical-block-point", c04_canonical_point),
    5: ("dimension-formula", c05_dimension),
    6: ("power-sum-limits", c06_power_sums),
    7: ("oscillating-frequencies", c07_oscillation),
    8: ("group-properties", c08_group),
    9: ("running-count-inequalities", c09_count_inequalities),
    10: ("inverter-counterexample", c10_inverter),
    11: ("dsl-robustness", c11_dsl),
}


def criterion_id(key) -> int:
    if isinstance(key, int) or str(key).isdigit():
        cid = int(key)
        if cid in CRITERIA:
            return cid
    for cid, (name, _) in CRITERIA.items():
        if key == name:
            return cid
    raise KeyError(f"unknown criterion {key!r}")


def run_criterion(key, scale: str = "full") -> CriterionResult:
    cid = criterion_id(key)
    name, fn = CRITERIA[cid]
    t0 = time.perf_counter()
    passed, details = fn(scale)
    return CriterionResult(cid, name, bool(passed), details, time.perf_counter() - t0)


def run_all(scale: str = "full", only=None) -> list[CriterionResult]:
    ids = sorted(CRITERIA) if not only else sorted({criterion_id(k) for k in only})
    return [run_criterion(cid, scale) for cid in ids]


def report_json(results: list[CriterionResult], scale: str) -> str:
    return json.dumps(
        {
            "scale": scale,
            "passed": all(r.passed for r in results),
            "criteria": [asdict(r) for r in results],
        },
        indent=2,
        default=str,
    )
