import random
from decimal import Decimal

import numpy as np
import pytest

from sadic import dsl
from sadic import generators as gen
from sadic import transforms as tf
from sadic.digits import prefix_array
from sadic.verify import fuzz_inputs, random_pipeline


def test_parse_examples():
    e = dsl.parse("uniform(3,42) | seven")
    assert e.source == dsl.Term("uniform", (3, 42))
    assert e.stages == (dsl.Term("seven"),)
    e = dsl.parse("iid((0.2,0.3,0.5),7) | swap2 | shift")
    assert e.source.args == ((Decimal("0.2"), Decimal("0.3"), Decimal("0.5")), 7)
    assert [t.name for t in e.stages] == ["swap2", "shift"]


def test_parse_error_at_end_of_input():
    text = "uniform(3,1) | swap2("
    with pytest.raises(dsl.ParseError) as info:
        dsl.parse(text)
    assert info.value.offset == len(text)
    assert info.value.found == "end of input"
    assert "argument" in info.value.expected


@pytest.mark.parametrize(
    "text,offset",
    [("", 0), ("|", 0), ("a |", 3), ("a(1,)", 4), ("a(1 2)", 4), ("a((1,2)", 7), ("a b", 2), ("a(1.)", 3), ("é", 0), ("ab é", 3)],
)
def test_parse_error_offsets(text, offset):
    with pytest.raises(dsl.ParseError) as info:
        dsl.parse(text)
    assert info.value.offset == offset


def test_offsets_are_bytes():
    with pytest.raises(dsl.ParseError) as info:
        dsl.parse("é | x(")
    assert info.value.offset == 0
    with pytest.raises(dsl.ParseError) as info:
        dsl.parse("x(1) | é")
    assert info.value.offset == len("x(1) | ".encode())
    with pytest.raises(dsl.ParseError) as info:
        dsl.parse(b"x(1) \xff")
    assert info.value.offset == 5


def test_roundtrip_examples():
    assert dsl.roundtrip(dsl.parse("uniform( 3 ,42 )|seven")) == "uniform(3, 42) | seven"
    text = "iid((0.2, 0.3, 0.5), 7)"
    assert dsl.roundtrip(dsl.parse(text)) == text
    once = dsl.roundtrip(dsl.parse(" canonicalpt( (0.25,0.25 , 0.5) ,1.5)|inc(-1) "))
    assert dsl.roundtrip(dsl.parse(once)) == once


def test_roundtrip_fixpoint_corpus():
    rng = random.Random(7)
    for _ in range(500):
        e = dsl.parse(random_pipeline(rng))
        assert dsl.parse(dsl.roundtrip(e)) == e


def test_fuzz_only_parse_errors():
    rng = random.Random(11)
    for data in fuzz_inputs(rng, 5000):
        try:
            dsl.parse(data)
        except dsl.ParseError as e:
            assert 0 <= e.offset <= len(data)


def test_resolve_inverter_example():
    x = dsl.resolve("const(0) | invert")
    assert prefix_array(x, 20).tolist() == [2] * 20


def test_resolve_involution_pipeline():
    a = prefix_array(dsl.resolve("uniform(3,1) | swap2 | swap2"), 10**4)
    assert np.array_equal(a, prefix_array(dsl.resolve("uniform(3,1)"), 10**4))


def test_resolve_osc():
    a = prefix_array(dsl.resolve("osc(1)"), 5000)
    assert np.array_equal(a, prefix_array(gen.oscillating_stream(1), 5000))


def test_resolve_errors():
    with pytest.raises(dsl.ResolveError, match="unknown"):
        dsl.resolve("nosuch(1)")
    with pytest.raises(dsl.ResolveError, match="argument"):
        dsl.resolve("uniform(3, 1, 2)")
    with pytest.raises(dsl.ResolveError, match="stage"):
        dsl.resolve("seven")
    with pytest.raises(dsl.ResolveError, match="source"):
        dsl.resolve("uniform | const(1)")
    with pytest.raises(dsl.ResolveError, match="frequencies"):
        dsl.resolve("osc(1) | seven | canonical")
    with pytest.raises(dsl.ResolveError):
        dsl.resolve("uniform(4, 1) | seven")
    with pytest.raises(dsl.ResolveError):
        dsl.resolve("iid((0.5, 0.6), 1)")


def test_resolve_estimate_then_canonicalize():
    x = dsl.resolve("osc(1) | seven | estimate(1000) | canonical")
    assert x.declared_tau is not None


def test_seed_override():
    a = prefix_array(dsl.resolve("uniform(3, 1)", seed=5), 100)
    assert np.array_equal(a, prefix_array(gen.uniform_stream(3, 5), 100))


STAGES = ["id", "swap2", "rev3", "shift", "prepend(1)", "transpose(4)", "invert", "inc(2)", "seven"]


@pytest.mark.parametrize("a", STAGES)
@pytest.mark.parametrize("b", STAGES)
def test_composition_semantics(a, b):
    src = gen.uniform_stream(3, 31)
    text = f"uniform(3, 31) | {a} | {b}"
    ta = dsl.build_transform(dsl.parse(a).source, src)
    tb = dsl.build_transform(dsl.parse(b).source, src)
    expected = prefix_array(tb(ta(src)), 3000)
    assert np.array_equal(prefix_array(dsl.resolve(text), 3000), expected)
    assert np.array_equal(prefix_array(tf.compose(tb, ta)(src), 3000), expected)
