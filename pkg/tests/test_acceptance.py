"""Acceptance criteria, one test each, at the stated tolerances.

Every test prints a single ``PASS``/``FAIL criterion N`` line before asserting.
Criterion 9(b) is known not to hold for this normalization; it is run in full,
reported as FAIL, and marked as a strict expected failure so that an
unexpected pass is flagged too.
"""

import random
import time
from fractions import Fraction
from functools import lru_cache

import pytest

from helpers import random_atom_design
from stbc_forge.cli import main
from stbc_forge.codec import fixture_names, load_fixture, load_fixture_record
from stbc_forge.constructions import (
    build_tilde,
    cis_code,
    cis_substitute,
    generate,
    h_prime,
    hat_4m,
    pair_design_rows,
    pair_rows,
    square_cod,
    transpose_to_maximal,
)
from stbc_forge.design import (
    Classification,
    check_cod_characterization,
    classify,
    is_conjugation_separated,
    is_orthogonal,
)
from stbc_forge.indexing import bit, build_index_maps, ceil_half, neighbor_rows, weight
from stbc_forge.metrics import QPSK, zero_fraction_counted, zero_fraction_formula
from stbc_forge.simulator import Constraint, SimConfig, alamouti_qpsk_ser, parse_snr_range, run

SIM_TRIALS = 100_000
SIM_GRID = parse_snr_range("0:14:2")
SIM_SEED = 1
PAIRS = {"3-antenna": (2, 3), "5-antenna": (4, 5)}  # (order of the COD, antennas of the CIS code)


def report(capsys, label: str, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {label}: {detail}")
    assert ok, detail


def _overlap(p, q) -> bool:
    return not (p.ci_low > q.ci_high or q.ci_low > p.ci_high)


@lru_cache(maxsize=None)
def _simulate(pair: str, constraint: Constraint):
    a, t = PAIRS[pair]
    out = []
    for design in (h_prime(a), cis_code(t)):
        cfg = SimConfig(design, QPSK, SIM_GRID, constraint, trials=SIM_TRIALS, seed=SIM_SEED, n_rx=1)
        out.append(run(cfg))
    return tuple(out)


# --------------------------------------------------------------------------


def test_criterion_1_exact_gram_identity(capsys):
    start = time.perf_counter()
    failures = []
    checked = 0
    for a in range(1, 7):
        checked += 1
        if not is_orthogonal(square_cod(a)):
            failures.append(f"square {a}")
    for a in range(1, 9):
        checked += 1
        if not is_orthogonal(h_prime(a)):
            failures.append(f"hprime {a}")
    for m in (1, 2):
        checked += 1
        if not is_orthogonal(hat_4m(m)):
            failures.append(f"hat {m}")
    for n in range(2, 7):
        for l in range(1, 1 << n):
            m, plan = pair_rows(n, l)
            checked += 2
            if not is_orthogonal(m):
                failures.append(f"paired {n},{l}")
            if not is_orthogonal(cis_substitute(m, plan)):
                failures.append(f"cis {n},{l}")
    for t in range(3, 9):
        checked += 1
        if not is_orthogonal(cis_code(t)):
            failures.append(f"cis family {t}")
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 60
    report(capsys, "1", ok, f"{checked} designs satisfy G^H G = (sum |x|^2) I exactly in {elapsed:.1f}s; failures={failures}")


def test_criterion_2_sizes(capsys):
    got = {
        3: generate("maximal", 3).size,
        5: generate("maximal", 5).size,
        6: generate("maximal", 6).size,
        8: generate("hat4m", 8).size,
    }
    want = {3: (4, 3, 3), 5: (15, 5, 10), 6: (30, 6, 20), 8: (56, 8, 35)}
    cis_sizes = {t: cis_code(t).size for t in want}
    ok = got == want and cis_sizes == want
    report(capsys, "2", ok, f"[p,n,k] maximal/hat {got}, cis {cis_sizes}")


def test_criterion_3_fixture_equality(capsys):
    generators = {
        "alamouti_g1": square_cod(1),
        "square_g2": square_cod(2),
        "three_antenna_cod": square_cod(2).select(range(4), range(3)),
        "three_antenna_paired": pair_design_rows(square_cod(2).select(range(4), range(3)), range(4), 1)[0],
        "three_antenna_cis": cis_substitute(*pair_design_rows(square_cod(2).select(range(4), range(3)), range(4), 1)),
        "tilde_h4": build_tilde(4),
        "h4": transpose_to_maximal(build_tilde(4)),
        "hat_h8": hat_4m(2),
        "l4": cis_substitute(*pair_design_rows(square_cod(2), range(4), 1)),
        "l5": cis_code(5),
    }
    problems, logged = [], 0
    for name in fixture_names():
        fixture, gen = load_fixture(name), generators[name]
        corrections = load_fixture_record(name)["corrections"]
        logged += len(corrections)
        if any(c.get("printed") is None or c.get("corrected") is None for c in corrections):
            problems.append(f"{name}: unjustified correction")
        cells = [(r, c) for r in range(fixture.p) for c in range(fixture.n)]
        if gen.size != fixture.size:
            problems.append(f"{name}: size")
        elif any(gen[x].is_zero() != fixture[x].is_zero() or gen[x].variables() != fixture[x].variables() for x in cells):
            problems.append(f"{name}: zero pattern or variables")
        elif gen != fixture:
            problems.append(f"{name}: signs or coefficients")
    ok = not problems
    report(capsys, "3", ok, f"{len(generators)} fixtures equal generator output; {logged} logged printed-cell corrections; problems={problems}")


def test_criterion_4_closed_form_equals_count(capsys):
    start = time.perf_counter()
    mismatches, total = [], 0
    for n in range(2, 9):
        for l in range(1, 1 << n):
            total += 1
            if zero_fraction_formula(n, l) != zero_fraction_counted(pair_rows(n, l)[0]):
                mismatches.append((n, l))
    elapsed = time.perf_counter() - start
    report(capsys, "4", not mismatches, f"{total} (n, l) pairs, n=2..8, exact equality; mismatches={mismatches[:5]}; {elapsed:.1f}s")


def test_criterion_5_table(capsys):
    table = {
        4: [0.1067, 0.1067, 0.1200, 0.1200],
        5: [0.1111, 0.1111, 0.1111, 0.1111, 0.3333],
        6: [0.1709, 0.1709, 0.1607, 0.1607, 0.1837, 0.1837],
        7: [0.1741, 0.1741, 0.1607, 0.1607, 0.1741, 0.1741, 0.3750],
    }
    bad = []
    for n, row in table.items():
        for w, expected in enumerate(row, start=1):
            got = round(float(zero_fraction_counted(pair_rows(n, (1 << w) - 1)[0])), 4)
            if got != expected:
                bad.append((n, w, got, expected))
    report(capsys, "5", not bad, f"{sum(map(len, table.values()))} table cells reproduced to 4 decimals; mismatches={bad}")


def test_criterion_6_low_papr_zero_counts(capsys):
    l4_zeros = load_fixture("l4").zero_count()
    l4_family_zeros = cis_code(4).zero_count()
    l5_fraction = zero_fraction_counted(cis_code(5))
    ok = l4_zeros == 0 and l4_family_zeros == 0 and l5_fraction == Fraction(8, 75) == zero_fraction_counted(load_fixture("l5"))
    report(capsys, "6", ok, f"L_4 zeros={l4_zeros} (family {l4_family_zeros}), L_5 zero fraction={l5_fraction}")


def test_criterion_7_lemma_suite(capsys):
    issues = []
    for a in range(1, 11):
        cs = set(build_index_maps(a).c_set)
        for s in range(a):
            for i in cs:
                if i ^ (1 << s) in cs and (weight(i) + ceil_half(a) + bit(i, s)) % 2 != 1:
                    issues.append(("parity-1", a, s, i))
            for t in range(s + 1, a):
                for i in cs:
                    if i ^ (1 << s) ^ (1 << t) in cs and bit(i, s) + bit(i, t) != 1:
                        issues.append(("parity-2", a, s, t, i))
        covered = set().union(*(neighbor_rows(i, a) for i in cs))
        if covered != set(build_index_maps(a).r_set):
            issues.append(("cover", a))
    for a in range(1, 9):
        if not is_conjugation_separated(build_tilde(a)):
            issues.append(("separation", a))
    for n in range(2, 7):
        maps = build_index_maps(n)
        for l in range(1, 1 << n):
            m, _ = pair_rows(n, l)
            expected = {(i, j) for i in range(m.k) for j in range(i + 1, m.k) if maps.g(i) ^ maps.g(j) == l}
            partner = {v: q for i, j in expected for v, q in ((i, j), (j, i))}
            seen = set()
            for row in m.entries:
                for e in row:
                    vs = e.variables()
                    if len(vs) == 2:
                        seen.add(tuple(sorted(vs)))
                    for v in vs:
                        if v in partner and vs != {v, partner[v]}:
                            issues.append(("uniform", n, l, v))
            if seen != expected:
                issues.append(("pairs", n, l))
    report(capsys, "7", not issues, f"parity and cover (a<=10), separation (a<=8), pairing uniformity (n<=6); issues={issues[:5]}")


def test_criterion_8_local_characterization(capsys):
    rng = random.Random(20240)
    samples, disagreements, orthogonal = 10_000, [], 0
    for idx in range(samples):
        d = random_atom_design(rng)
        gram_ok = is_orthogonal(d)
        orthogonal += gram_ok
        if check_cod_characterization(d).ok != gram_ok:
            disagreements.append(idx)
    ok = not disagreements and orthogonal > 0
    report(capsys, "8", ok, f"{samples} random atom designs, {orthogonal} orthogonal, disagreements={len(disagreements)}")


@pytest.mark.parametrize("pair", sorted(PAIRS))
def test_criterion_9a_average_constraint_curves_match(pair, capsys):
    cod, cis = _simulate(pair, Constraint.AVERAGE)
    overlaps = [_overlap(p, q) for p, q in zip(cod.points, cis.points)]
    detail = ", ".join(f"{p.snr_db:g}dB {p.ser:.2e}/{q.ser:.2e}" for p, q in zip(cod.points, cis.points))
    report(capsys, f"9a ({pair})", all(overlaps), f"COD/CIS SER with overlapping 95% intervals at {sum(overlaps)}/8 points: {detail}")


@pytest.mark.xfail(strict=True, reason="peak normalization gives both designs the same scale; see ledger")
@pytest.mark.parametrize("pair", sorted(PAIRS))
def test_criterion_9b_peak_constraint_cis_better(pair, capsys):
    cod, cis = _simulate(pair, Constraint.PEAK)
    top = list(zip(cod.points, cis.points))[-3:]
    wins = [q.ser < p.ser and not _overlap(p, q) for p, q in top]
    detail = ", ".join(f"{p.snr_db:g}dB COD {p.ser:.2e} [{p.ci_low:.1e},{p.ci_high:.1e}] CIS {q.ser:.2e} [{q.ci_low:.1e},{q.ci_high:.1e}]" for p, q in top)
    report(
        capsys,
        f"9b ({pair})",
        all(wins),
        f"CIS below COD with separated intervals at {sum(wins)}/3 top points (scales {cod.scale:.3f}/{cis.scale:.3f}): {detail}",
    )


def test_criterion_9c_alamouti_baseline(capsys):
    res = run(SimConfig(square_cod(1), QPSK, SIM_GRID, Constraint.AVERAGE, trials=SIM_TRIALS, seed=SIM_SEED))
    inside = [p.ci_low <= alamouti_qpsk_ser(p.snr_db) <= p.ci_high for p in res.points]
    detail = ", ".join(f"{p.snr_db:g}dB {p.ser:.3e}~{alamouti_qpsk_ser(p.snr_db):.3e}" for p in res.points)
    report(capsys, "9c", all(inside), f"closed form inside the interval at {sum(inside)}/8 points: {detail}")


def test_criterion_10_determinism(tmp_path, capsys):
    outputs = {}
    for workers in ("1", "4", "1"):
        for fam, t in (("cis", 5), ("maximal", 5)):
            path = tmp_path / f"{fam}-{workers}-{len(outputs)}.csv"
            argv = [
                "simulate", "--family", fam, "--antennas", str(t), "--constraint", "peak", "--snr", "0:14:2",
                "--trials", "20000", "--seed", "7", "--workers", workers, "--out", str(path),
            ]
            assert main(argv) == 0
            outputs.setdefault(fam, []).append(path.read_text())
    ok = all(len(set(v)) == 1 for v in outputs.values())
    report(capsys, "10", ok, "identical CSV (error counts) for repeated runs with 1 and 4 workers")
