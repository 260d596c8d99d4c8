"""Pipeline expressions: ``source | stage | stage ...``.

Grammar (whitespace between tokens is ignored)::

    pipeline := term ("|" term)*
    term     := IDENT ("(" args ")")?
    args     := arg ("," arg)*
    arg      := NUMBER | tuple
    tuple    := "(" NUMBER ("," NUMBER)* ")"

``a | b | c`` evaluates to c(b(a)).  Syntax problems raise :class:`ParseError`;
unknown names, wrong arities and unmet stream requirements raise
:class:`ResolveError` from :func:`resolve`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Callable, Union

from . import generators as gen
from . import transforms as tf
from .digits import DigitStream, DomainError, constant_stream, expand_rational

Number = Union[int, Decimal]
Arg = Union[Number, tuple]

_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<num>-?[0-9]+(?:\.[0-9]+)?)|(?P<punct>[(),|])"
)


class ParseError(ValueError):
    def __init__(self, offset: int, expected: str, found: str):
        self.offset = offset
        self.expected = expected
        self.found = found
        super().__init__(f"at byte {offset}: expected {expected}, found {found}")


class ResolveError(ValueError):
    pass


@dataclass(frozen=True)
class Term:
    name: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.name
        return f"{self.name}({', '.join(_fmt_arg(a) for a in self.args)})"


@dataclass(frozen=True)
class PipelineExpr:
    source: Term
    stages: tuple[Term, ...] = ()

    def __str__(self):
        return " | ".join(str(t) for t in (self.source, *self.stages))


def _fmt_arg(a) -> str:
    if isinstance(a, tuple):
        return "(" + ", ".join(_fmt_arg(x) for x in a) + ")"
    return str(a)


@dataclass(frozen=True)
class _Tok:
    kind: str  # ident | num | punct | eof
    text: str
    offset: int  # byte offset


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    byte = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(byte, "identifier, number or one of ( ) , |", repr(text[pos]))
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), byte))
        byte += len(m.group().encode("utf-8"))
        pos = m.end()
    toks.append(_Tok("eof", "", byte))
    return toks


class _Parser:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, expected: str):
        found = "end of input" if self.tok.kind == "eof" else repr(self.tok.text)
        raise ParseError(self.tok.offset, expected, found)

    def eat(self, text: str) -> bool:
        if self.tok.kind == "punct" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str, expected: str | None = None):
        if not self.eat(text):
            self.fail(expected or repr(text))

    def number(self) -> Number:
        if self.tok.kind != "num":
            self.fail("number")
        text = self.tok.text
        self.i += 1
        return Decimal(text) if "." in text else int(text)

    def pipeline(self) -> PipelineExpr:
        terms = [self.term()]
        while self.eat("|"):
            terms.append(self.term())
        if self.tok.kind != "eof":
            self.fail("'|' or end of input")
        return PipelineExpr(terms[0], tuple(terms[1:]))

    def term(self) -> Term:
        if self.tok.kind != "ident":
            self.fail("name")
        name = self.tok.text
        self.i += 1
        if not self.eat("("):
            return Term(name)
        args = [self.arg()]
        while self.eat(","):
            args.append(self.arg())
        self.expect(")", "',' or ')'")
        return Term(name, tuple(args))

    def arg(self) -> Arg:
        if self.eat("("):
            items = [self.number()]
            while self.eat(","):
                items.append(self.number())
            self.expect(")", "',' or ')'")
            return tuple(items)
        if self.tok.kind != "num":
            self.fail("argument")
        return self.number()


def parse(text: str | bytes) -> PipelineExpr:
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(exc.start, "UTF-8 text", f"byte 0x{text[exc.start]:02x}") from None
    return _Parser(_tokenize(text)).pipeline()


def roundtrip(expr: PipelineExpr) -> str:
    return str(expr)


# -- resolution -------------------------------------------------------------


def _int(v, what="integer") -> int:
    if isinstance(v, int):
        return v
    if isinstance(v, Decimal) and v == v.to_integral_value():
        return int(v)
    raise ResolveError(f"expected {what}, got {_fmt_arg(v)}")


def _num(v) -> Fraction:
    if isinstance(v, tuple):
        raise ResolveError(f"expected a number, got {_fmt_arg(v)}")
    return Fraction(v)


def _tau(v):
    if not isinstance(v, tuple):
        raise ResolveError(f"expected a frequency tuple, got {_fmt_arg(v)}")
    return tuple(Fraction(x) for x in v)


def _seed(args, i, override):
    return override if override is not None else (_int(args[i]) if len(args) > i else 0)


@dataclass(frozen=True)
class _Entry:
    kind: str  # source | stage
    arities: tuple[int, ...]
    build: Callable
    usage: str


def _src_const(args, seed):
    return constant_stream(_int(args[0]), _int(args[1]) if len(args) > 1 else 3)


def _src_rational(args, seed):
    s = _int(args[2]) if len(args) > 2 else 3
    return expand_rational(Fraction(_int(args[0]), _int(args[1])), s)


def _src_uniform(args, seed):
    s = _int(args[0]) if args else 3
    return gen.uniform_stream(s, _seed(args, 1, seed))


def _src_iid(args, seed):
    return gen.iid_stream(_tau(args[0]), _seed(args, 1, seed))


def _src_canonicalpt(args, seed):
    weight = gen.Power(_num(args[1])) if len(args) > 1 else gen.Linear()
    return gen.canonical_be_point(_tau(args[0]), weight)


def _src_osc(args, seed):
    return gen.oscillating_stream(_num(args[0]) if args else 1)


def _src_beta(args, seed):
    return gen.beta_stream()


def _stage_canonical(args, x):
    weight = gen.Power(_num(args[0])) if args else gen.Linear()
    return tf.be_canonicalizer(weight)


CATALOG: dict[str, _Entry] = {
    "const": _Entry("source", (1, 2), _src_const, "const(d[, s])"),
    "rational": _Entry("source", (2, 3), _src_rational, "rational(p, q[, s])"),
    "uniform": _Entry("source", (0, 1, 2), _src_uniform, "uniform([s[, seed]])"),
    "iid": _Entry("source", (1, 2), _src_iid, "iid((tau...)[, seed])"),
    "canonicalpt": _Entry("source", (1, 2), _src_canonicalpt, "canonicalpt((tau...)[, p])"),
    "osc": _Entry("source", (0, 1), _src_osc, "osc([p])"),
    "beta": _Entry("source", (0,), _src_beta, "beta"),
    "id": _Entry("stage", (0,), lambda a, x: tf.identity(), "id"),
    "swap2": _Entry("stage", (0,), lambda a, x: tf.pair_swap(), "swap2"),
    "rev3": _Entry("stage", (0,), lambda a, x: tf.triple_reverse(), "rev3"),
    "shift": _Entry("stage", (0,), lambda a, x: tf.shift(), "shift"),
    "prepend": _Entry("stage", (1,), lambda a, x: tf.prepend(_int(a[0])), "prepend(i)"),
    "transpose": _Entry("stage", (1,), lambda a, x: tf.transpose_at(_int(a[0])), "transpose(j)"),
    "invert": _Entry("stage", (0,), lambda a, x: tf.inverter(x.s), "invert"),
    "inc": _Entry("stage", (1,), lambda a, x: tf.mod_increment(_int(a[0]), x.s), "inc(m)"),
    "seven": _Entry("stage", (0,), lambda a, x: tf.seven_replacement(), "seven"),
    "canonical": _Entry("stage", (0, 1), _stage_canonical, "canonical([p])"),
    "estimate": _Entry("stage", (1,), lambda a, x: tf.estimate_frequencies(_int(a[0])), "estimate(n)"),
}

SOURCES = tuple(k for k, e in CATALOG.items() if e.kind == "source")
STAGES = tuple(k for k, e in CATALOG.items() if e.kind == "stage")


def _lookup(term: Term, kind: str) -> _Entry:
    entry = CATALOG.get(term.name)
    if entry is None:
        raise ResolveError(f"unknown name {term.name!r}")
    if entry.kind != kind:
        raise ResolveError(f"{term.name!r} is a {entry.kind}, expected a {kind} here")
    if len(term.args) not in entry.arities:
        raise ResolveError(f"{term.name} takes {entry.usage}, got {len(term.args)} argument(s)")
    return entry


def build_transform(term: Term, x: DigitStream) -> tf.Transform:
    """Transform named by a stage term, bound to the alphabet of ``x``."""
    entry = _lookup(term, "stage")
    try:
        return entry.build(term.args, x)
    except (DomainError, ValueError) as exc:
        if isinstance(exc, ResolveError):
            raise
        raise ResolveError(f"{term}: {exc}") from None


def resolve(expr: PipelineExpr | str, seed: int | None = None) -> DigitStream:
    """Build the stream described by ``expr``; ``seed`` overrides a seeded source."""
    if isinstance(expr, str):
        expr = parse(expr)
    entry = _lookup(expr.source, "source")
    try:
        x = entry.build(expr.source.args, seed)
    except ResolveError:
        raise
    except (DomainError, ValueError) as exc:
        raise ResolveError(f"{expr.source}: {exc}") from None
    for term in expr.stages:
        t = build_transform(term, x)
        try:
            x = t(x)
        except (tf.FrequenciesUnknown, DomainError) as exc:
            raise ResolveError(f"{term}: {exc}") from None
    return x
