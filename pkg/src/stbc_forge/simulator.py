"""Monte Carlo symbol error rate over a quasi-static Rayleigh channel.

Everything upstream of this module is exact; floats appear only for the
channel, the noise and the ML metric.

Received block: ``Y = scale * S(x) H + N`` with ``S`` the ``p x n`` codeword,
``H`` an ``n x n_rx`` matrix of unit-variance complex Gaussians held for one
codeword and ``N`` white noise of variance ``1 / snr`` per receive antenna.
The reference power behind ``snr`` is the constrained quantity: unit average
power per channel use under AVERAGE, unit peak power per antenna under PEAK.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, stats

from .design import I, DesignMatrix
from .exact import Sqrt2Rational
from .metrics import Constellation, antenna_power_profile

THREADS_ENV = "STBC_FORGE_THREADS"


class Constraint(str, enum.Enum):
    PEAK = "peak"
    AVERAGE = "avg"

    @classmethod
    def parse(cls, value) -> "Constraint":
        if isinstance(value, Constraint):
            return value
        v = str(value).lower()
        if v in ("avg", "average"):
            return cls.AVERAGE
        if v == "peak":
            return cls.PEAK
        raise ValueError(f"unknown power constraint {value!r}")


# --------------------------------------------------------------------------
# normalization and encoding


def normalization_power(design: DesignMatrix, c: Constellation, constraint: Constraint) -> Sqrt2Rational:
    """Exact ``scale**2`` meeting the power constraint."""
    constraint = Constraint.parse(constraint)
    profile = antenna_power_profile(design, c)
    if any(mean.is_zero() for _, mean in profile):
        raise ValueError("design has an antenna that never transmits")
    if constraint is Constraint.AVERAGE:
        total = sum((mean for _, mean in profile), Sqrt2Rational(0)) * design.p
        return Sqrt2Rational(design.p) / total
    peak = max(pk for pk, _ in profile)
    return Sqrt2Rational(1) / peak


def normalize(design: DesignMatrix, c: Constellation, constraint: Constraint) -> float:
    """Amplitude factor applied to every codeword."""
    return math.sqrt(float(normalization_power(design, c, constraint)))


def dispersion_tensor(design: DesignMatrix) -> np.ndarray:
    """``A[2 v + part]``: the ``p x n`` complex matrix multiplying real coordinate ``(v, part)``."""
    A = np.zeros((2 * design.k, design.p, design.n), dtype=complex)
    for r, row in enumerate(design.entries):
        for col, e in enumerate(row):
            for (v, part), coef in e.terms:
                A[2 * v + (0 if part == I else 1), r, col] = complex(float(coef.re), float(coef.im))
    return A


def _coords(symbols: np.ndarray) -> np.ndarray:
    """Interleave real and imaginary parts along the last axis."""
    out = np.empty(symbols.shape[:-1] + (2 * symbols.shape[-1],))
    out[..., 0::2] = symbols.real
    out[..., 1::2] = symbols.imag
    return out


def encode(symbols, design: DesignMatrix, scale: float = 1.0) -> np.ndarray:
    """Evaluate the design at complex ``symbols``; returns the ``p x n`` codeword."""
    symbols = np.asarray(symbols, dtype=complex)
    if symbols.shape[-1] != design.k:
        raise ValueError(f"expected {design.k} symbols, got {symbols.shape[-1]}")
    return scale * np.einsum("...c,cpn->...pn", _coords(symbols), dispersion_tensor(design))


# --------------------------------------------------------------------------
# detection


def symbol_groups(design: DesignMatrix) -> list[tuple[int, ...]]:
    """Connected components of variables that share an entry."""
    parent = list(range(design.k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for row in design.entries:
        for e in row:
            vs = sorted(e.variables())
            for v in vs[1:]:
                parent[find(v)] = find(vs[0])
    groups: dict[int, list[int]] = {}
    for v in range(design.k):
        groups.setdefault(find(v), []).append(v)
    return sorted(tuple(g) for g in groups.values())


class Detector:
    """ML detector for one design and constellation.

    Variables are searched jointly inside each co-occurrence group and
    independently across groups; cross-group terms of the metric vanish for
    orthogonal designs.  ``brute_force=True`` searches all ``|c|**k`` tuples.
    """

    def __init__(self, design: DesignMatrix, c: Constellation, scale: float = 1.0, brute_force: bool = False):
        self.design = design
        self.constellation = c
        self.scale = scale
        self.A = dispersion_tensor(design)
        self.points = c.points
        groups = [tuple(range(design.k))] if brute_force else symbol_groups(design)
        self.groups = []
        for g in groups:
            if c.size ** len(g) > 1 << 16:
                raise ValueError(f"joint search over {len(g)} symbols is too large")
            hyp = np.array(list(product(range(c.size), repeat=len(g))), dtype=np.int64)
            coords = _coords(self.points[hyp])
            idx = np.array([2 * v + s for v in g for s in (0, 1)])
            self.groups.append((np.array(g), idx, hyp, coords))

    def prepare(self, H: np.ndarray):
        """Channel-dependent part of the metric: ``Phi`` and per-group quadratic terms."""
        Phi = self.scale * np.einsum("cpn,bnr->bcpr", self.A, H)
        Q = np.einsum("bcpr,bdpr->bcd", Phi.conj(), Phi).real
        quads = [np.einsum("hc,bcd,hd->bh", coords, Q[:, idx][:, :, idx], coords) for _, idx, _, coords in self.groups]
        return Phi, quads

    def matched_filter(self, Phi: np.ndarray, Y: np.ndarray) -> np.ndarray:
        return np.einsum("bcpr,bpr->bc", Phi.conj(), Y).real

    def decide_from(self, s: np.ndarray, quads) -> np.ndarray:
        out = np.empty((s.shape[0], self.design.k), dtype=np.int64)
        for (vars_, idx, hyp, coords), quad in zip(self.groups, quads):
            metric = quad - 2.0 * s[:, idx] @ coords.T
            out[:, vars_] = hyp[np.argmin(metric, axis=1)]
        return out

    def decide(self, Y: np.ndarray, H: np.ndarray) -> np.ndarray:
        """Symbol indices, shape ``(batch, k)``; a single trial may omit the batch axis."""
        Y = np.asarray(Y)
        H = np.asarray(H)
        if Y.ndim == 2 and H.ndim == 2:
            return self.decide(Y[None], H[None])[0]
        if Y.ndim != 3 or H.ndim != 3 or H.shape[1] != self.design.n or Y.shape[1] != self.design.p or Y.shape[2] != H.shape[2]:
            raise ValueError("channel/received dimensions do not match the design")
        Phi, quads = self.prepare(H)
        return self.decide_from(self.matched_filter(Phi, Y), quads)


def decode(received, channel, design: DesignMatrix, c: Constellation, scale: float = 1.0) -> np.ndarray:
    return Detector(design, c, scale).decide(received, channel)


def brute_force_decode(received, channel, design: DesignMatrix, c: Constellation, scale: float = 1.0) -> np.ndarray:
    """Exhaustive ML over every symbol tuple by direct distance evaluation."""
    Y = np.asarray(received)
    H = np.asarray(channel)
    best, best_d = None, np.inf
    A = dispersion_tensor(design)
    for tup in product(range(c.size), repeat=design.k):
        S = scale * np.einsum("c,cpn->pn", _coords(c.points[list(tup)]), A)
        d = np.linalg.norm(Y - S @ H) ** 2
        if d < best_d:
            best, best_d = np.array(tup), d
    return best


# --------------------------------------------------------------------------
# confidence intervals


def wilson_interval(successes: float, n: float, confidence: float = 0.95) -> tuple[float, float]:
    if n <= 0:
        raise ValueError("need a positive sample size")
    z = stats.norm.ppf(0.5 + confidence / 2)
    phat = successes / n
    denom = 1 + z * z / n
    centre = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    # the bound is exactly 0 (or 1) at the edges; avoid cancellation residue
    lo = 0.0 if successes <= 0 else max(0.0, centre - half)
    hi = 1.0 if successes >= n else min(1.0, centre + half)
    return float(lo), float(hi)


def clustered_wilson(errors: int, sq_errors: int, codewords: int, k: int, confidence: float = 0.95):
    """Wilson interval with the sample size deflated by the per-codeword design effect.

    Symbol errors inside one codeword share a channel draw, so they are not
    independent; ``sq_errors`` is the sum over codewords of squared error counts.
    """
    n = codewords * k
    phat = errors / n
    deff = 1.0
    if 0 < phat < 1 and codewords > 1:
        mean = errors / codewords
        var = (sq_errors - codewords * mean * mean) / (codewords - 1)
        deff = max(1.0, var / (k * phat * (1 - phat)))
    return wilson_interval(phat * (n / deff), n / deff, confidence)


# --------------------------------------------------------------------------
# analytic baseline


def alamouti_qpsk_ser(snr_db: float) -> float:
    """QPSK SER with two-branch maximal-ratio diversity over Rayleigh fading.

    Per-branch mean SNR is ``snr / 2`` (unit total power split over two antennas).
    Uses the finite-range Q-function integral averaged through the channel MGF.
    """
    gbar = 10 ** (snr_db / 10) / 2
    g = 0.5  # 3 / (2 (M - 1)) for M = 4
    q = 0.5  # 1 - 1/sqrt(M)

    def mgf(theta):
        return (1 + g * gbar / math.sin(theta) ** 2) ** -2

    first = integrate.quad(mgf, 0, math.pi / 2)[0]
    second = integrate.quad(mgf, 0, math.pi / 4)[0]
    return 4 * q / math.pi * first - 4 * q * q / math.pi * second


# --------------------------------------------------------------------------
# engine


@dataclass(frozen=True)
class SimConfig:
    design: DesignMatrix
    constellation: Constellation
    snr_grid_db: Sequence[float]
    constraint: Constraint = Constraint.AVERAGE
    trials: int = 10_000
    seed: int = 0
    n_rx: int = 1
    workers: Optional[int] = None
    block_size: Optional[int] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if len(self.snr_grid_db) == 0:
            raise ValueError("the SNR grid is empty")
        if self.n_rx < 1:
            raise ValueError("n_rx must be >= 1")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "constraint", Constraint.parse(self.constraint))
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))


@dataclass(frozen=True)
class SnrPoint:
    snr_db: float
    errors: int
    symbols: int
    ser: float
    ci_low: float
    ci_high: float


@dataclass
class SimResult:
    points: list[SnrPoint] = field(default_factory=list)
    scale: float = 1.0

    def to_csv(self) -> str:
        lines = ["snr_db,errors,symbols,ser,ci_low,ci_high"]
        for pt in self.points:
            lines.append(f"{pt.snr_db:g},{pt.errors},{pt.symbols},{pt.ser:.6e},{pt.ci_low:.6e},{pt.ci_high:.6e}")
        return "\n".join(lines) + "\n"

    @property
    def errors(self) -> list[int]:
        return [pt.errors for pt in self.points]


def default_block_size(design: DesignMatrix, n_rx: int) -> int:
    """Trials per RNG block; depends only on the design size so it never varies with workers."""
    per_trial = 2 * design.k * design.p * n_rx
    return int(max(64, min(4096, 2_000_000 // per_trial)))


def resolve_workers(requested: Optional[int] = None) -> int:
    cap = os.environ.get(THREADS_ENV)
    n = requested if requested is not None else (os.cpu_count() or 1)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def _block_draws(seed: int, block: int, size: int, design: DesignMatrix, c: Constellation, n_rx: int):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))
    sym = rng.integers(0, c.size, size=(size, design.k))
    H = (rng.standard_normal((size, design.n, n_rx)) + 1j * rng.standard_normal((size, design.n, n_rx))) / math.sqrt(2)
    N = (rng.standard_normal((size, design.p, n_rx)) + 1j * rng.standard_normal((size, design.p, n_rx))) / math.sqrt(2)
    return sym, H, N


def _run_block(cfg: SimConfig, det: Detector, block: int, start: int, size: int):
    sym, H, N = _block_draws(cfg.seed, block, size, cfg.design, cfg.constellation, cfg.n_rx)
    X = det.scale * np.einsum("bc,cpn->bpn", _coords(cfg.constellation.points[sym]), det.A)
    Phi, quads = det.prepare(H)
    # the matched filter is linear, so signal and noise parts are filtered once
    s_clean = det.matched_filter(Phi, X @ H)
    s_noise = det.matched_filter(Phi, N)
    errs = np.zeros(len(cfg.snr_grid_db), dtype=np.int64)
    sq = np.zeros(len(cfg.snr_grid_db), dtype=np.int64)
    for i, snr_db in enumerate(cfg.snr_grid_db):
        sigma = math.sqrt(10 ** (-snr_db / 10))
        wrong = (det.decide_from(s_clean + sigma * s_noise, quads) != sym).sum(axis=1)
        errs[i] = wrong.sum()
        sq[i] = (wrong * wrong).sum()
    return errs, sq


def run(cfg: SimConfig) -> SimResult:
    """Simulate every SNR point; counts are identical for any worker count."""
    scale = normalize(cfg.design, cfg.constellation, cfg.constraint)
    det = Detector(cfg.design, cfg.constellation, scale)
    bs = cfg.block_size or default_block_size(cfg.design, cfg.n_rx)
    blocks = [(b, b * bs, min(bs, cfg.trials - b * bs)) for b in range(-(-cfg.trials // bs))]
    workers = resolve_workers(cfg.workers)
    if workers == 1:
        parts = [_run_block(cfg, det, *blk) for blk in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda blk: _run_block(cfg, det, *blk), blocks))
    errs = sum(p[0] for p in parts)
    sq = sum(p[1] for p in parts)
    result = SimResult(scale=scale)
    sent = cfg.trials * cfg.design.k
    for i, snr_db in enumerate(cfg.snr_grid_db):
        lo, hi = clustered_wilson(int(errs[i]), int(sq[i]), cfg.trials, cfg.design.k)
        result.points.append(SnrPoint(snr_db, int(errs[i]), sent, errs[i] / sent, lo, hi))
    return result


def parse_snr_range(text: str) -> list[float]:
    """``"A:B:C"`` means start ``A`` to stop ``B`` inclusive in steps of ``C``; a single value is one point."""
    parts = text.split(":")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise ValueError(f"bad SNR range {text!r}") from None
    if len(vals) == 1:
        return vals
    if len(vals) != 3 or vals[2] <= 0 or vals[1] < vals[0]:
        raise ValueError(f"SNR range must be start:stop:step with step > 0 and stop >= start, got {text!r}")
    start, stop, step = vals
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def codeword_energy_audit(design: DesignMatrix, c: Constellation, constraint: Constraint) -> Sqrt2Rational:
    """Exact expected codeword energy after normalization (``p`` under AVERAGE)."""
    power = normalization_power(design, c, constraint)
    total = sum((mean for _, mean in antenna_power_profile(design, c)), Sqrt2Rational(0)) * design.p
    return power * total
