"""s-adic digit streams: generators, transformations and digit statistics."""

from .digits import (
    Alphabet,
    DigitStream,
    DigitWord,
    DomainError,
    FrequencyVector,
    canonicalize,
    constant_stream,
    eventually_periodic,
    expand_rational,
    prefix,
)
from .dsl import ParseError, ResolveError, parse, resolve, roundtrip
from .generators import (
    Linear,
    Power,
    beta_switch,
    canonical_be_point,
    checkpoints,
    iid_stream,
    oscillating_stream,
    uniform_stream,
)
from .stats import (
    LimitVerdict,
    StatsTrace,
    asymptotic_mean_verdict,
    be_dimension,
    cardinality_7k,
    cardinality_7k1,
    frequency_verdicts,
    mean_from_frequencies,
    power_sum_ratios,
    run_stats,
)
from .transforms import (
    Transform,
    be_canonicalizer,
    compose,
    identity,
    invert_transform,
    inverter,
    mod_increment,
    pair_swap,
    prepend,
    seven_replacement,
    shift,
    transpose_at,
    triple_reverse,
)

__version__ = "0.1.0"
