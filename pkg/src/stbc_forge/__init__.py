"""Exact construction, verification and simulation of complex orthogonal space-time designs."""

from .constructions import (
    PairingPlan,
    build_tilde,
    cis_code,
    cis_substitute,
    generate,
    h_prime,
    hat_4m,
    pair_rows,
    square_cod,
    square_cod_maps,
    transpose_to_maximal,
)
from .design import (
    Classification,
    CodAtom,
    DesignMatrix,
    LinearEntry,
    check_cod_characterization,
    classify,
    gram,
    is_conjugation_separated,
    is_orthogonal,
)
from .exact import Sqrt2Complex, Sqrt2Rational
from .metrics import QAM16, QPSK, Constellation, DesignMetrics, papr, zero_fraction_counted, zero_fraction_formula

__version__ = "0.1.0"
