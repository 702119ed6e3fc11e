"""Acceptance criteria 1-12, one pass/fail line each (also listed in the terminal summary)."""

from __future__ import annotations

import time
from fractions import Fraction

import pytest

from wildtorsor.field import field
from wildtorsor.globalcount import (
    GlobalHeight,
    Place,
    adelic_series,
    check_global_oracle,
    comparable_heights_harness,
    conductor_height,
    fit_exponents,
    global_classes_up_to,
    global_count_series,
    perturbed_height,
    ratio_test_exponent,
    series_counts,
)
from wildtorsor.invariants import (
    ab_invariants,
    brute_ab,
    conductor_spec,
    ct_construct,
    ct_threshold,
    flag_count_bound,
    flag_enumerate,
    index_flag_bound,
    naive_flag_bound,
    sht,
    standard_reps,
    strongly_suitable_check,
    v_ab,
    v_gap_check,
    v_spec,
)
from wildtorsor.selftest import ghost_identity_holds, homogeneity_holds
from wildtorsor.torsor import (
    GroupSpec,
    class_eq,
    conductor,
    disc_exponent,
    flag_disc,
    local_class_count,
    long_flag_of,
    orbit_oracle,
    reduce,
)

CONFIGS = [
    (GroupSpec(2, (1,)), 2, 4),
    (GroupSpec(2, (2,)), 2, 2),
    (GroupSpec(2, (1, 1)), 2, 2),
    (GroupSpec(3, (1,)), 3, 3),
]


CRITERIA_LINES: list[str] = []


def report(n: int, ok: bool, detail: str = "") -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
    CRITERIA_LINES.append(line)
    print("\n" + line)


def _oracle(group, q, pb):
    fq = field(group.p, 1 if q == group.p else 2)
    return orbit_oracle(group, fq, pb)


def test_criterion_01_ghost_identity():
    start = time.perf_counter()
    cases = [(p, e) for p in (2, 3, 5) for e in range(1, 5)]
    bad = [(p, e) for p, e in cases if not ghost_identity_holds(p, e)]
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 60
    report(1, ok, f"{len(cases)} (p, e) cases, {elapsed:.1f}s")
    assert ok, bad


def test_criterion_02_homogeneity():
    cases = [(p, e) for p in (2, 3, 5) for e in range(1, 5)]
    bad = [(p, e) for p, e in cases if not homogeneity_holds(p, e)]
    report(2, not bad, f"{len(cases)} (p, e) cases")
    assert not bad


def test_criterion_03_oracle_equivalence():
    start = time.perf_counter()
    pairs = disagreements = 0
    for group, q, pb in CONFIGS:
        classes = _oracle(group, q, pb)
        members = [(m, k) for k, oc in enumerate(classes) for m in oc.members]
        for x, i in members:
            for y, j in members:
                pairs += 1
                if class_eq(x, y) != (i == j):
                    disagreements += 1
        if len({reduce(oc.representative) for oc in classes}) != len(classes):
            disagreements += 1
    elapsed = time.perf_counter() - start
    ok = disagreements == 0 and elapsed < 600
    report(3, ok, f"{pairs} pairs over 4 configurations, {disagreements} disagreements, {elapsed:.1f}s")
    assert ok


def test_criterion_04_class_counts():
    rows = []
    for group, q, pb in CONFIGS:
        classes = _oracle(group, q, pb)
        for n in range(pb + 2):
            found = sum(1 for oc in classes if oc.oracle_conductor() <= n)
            rows.append((str(group), n, found, local_class_count(group, q, n)[0]))
    bad = [r for r in rows if r[2] != r[3]]
    report(4, not bad, f"{len(rows)} (configuration, n) checks")
    assert not bad, bad


def test_criterion_05_conductor_disc():
    flag_mismatch = cyclic_mismatch = checked = 0
    for group, q, pb in CONFIGS:
        for oc in _oracle(group, q, pb):
            c = reduce(oc.representative)
            checked += 1
            if disc_exponent(c) != flag_disc(long_flag_of(c)):
                flag_mismatch += 1
            if group.rank == 1 and group.exponent == 1:
                if disc_exponent(c) != (group.p - 1) * conductor(c):
                    cyclic_mismatch += 1
    ok = flag_mismatch == 0 and cyclic_mismatch == 0
    report(
        5,
        ok,
        f"{checked} classes; disc = flag disc everywhere; disc = (p-1) cond on the prime-order configurations "
        "(it does not hold for Z/4, where disc is the sum of character conductors)",
    )
    assert ok


def _flags_for_6():
    for group in (GroupSpec(2, (1,)), GroupSpec(3, (1,)), GroupSpec(2, (2,)), GroupSpec(2, (1, 1))):
        for n in range(31):
            yield group, n, flag_enumerate(group, n)


def test_criterion_06_flag_bounds():
    count_ok = True
    naive_failures = []
    index_ok = True
    for group, n, flags in _flags_for_6():
        if len(flags) > flag_count_bound(group, n):
            count_ok = False
        for flag in flags:
            d = flag_disc(flag)
            if d > naive_flag_bound(flag):
                naive_failures.append((str(group), flag.jumps(), d, naive_flag_bound(flag)))
            if d > index_flag_bound(flag):
                index_ok = False
    literal_ok = count_ok and not naive_failures
    example = naive_failures[0] if naive_failures else None
    report(
        6,
        literal_ok,
        f"counts within bound: {count_ok}; stated flag inequality violated by {len(naive_failures)} flags"
        f" (first: group {example[0]} jumps {example[1]} disc {example[2]} > {example[3]})"
        if example
        else f"counts within bound: {count_ok}",
    )
    # the corrected bound max(J) * (#G - #S_0) and the count bound do hold
    assert count_ok and index_ok
    if not literal_ok:
        pytest.xfail("the stated flag inequality is false; see the corrected bound index_flag_bound")


def test_criterion_07_conductor_ab():
    results = []
    for p in (2, 3, 5):
        spec = conductor_spec(GroupSpec.cyclic(p))
        ab = ab_invariants(spec)
        brute = brute_ab(spec, 3 * p * p)
        results.append(
            ab.certified
            and ab.a == 1
            and ab.D == tuple(Fraction(r) for r in range(2, p + 1))
            and ab.b == p - 1
            and (brute.a, brute.D, brute.b) == (ab.a, ab.D, ab.b)
        )
    report(7, all(results), "p = 2, 3, 5 certified and brute-scanned to 3p^2")
    assert all(results)


def test_criterion_08_v_functions():
    ok = True
    for rep in standard_reps():
        p = rep.p
        b = sum(1 for j in range(1, p) if rep.l - rep.d + j - sht(rep, j) == -1)
        ab = v_ab(rep)
        gaps = dict(v_gap_check(rep, 10 * p))
        ok &= rep.D_V == p and ab.a == 1 and ab.b == b
        ok &= all(g <= -1 for g in gaps.values()) and gaps[p - 1] == -1
        ok &= strongly_suitable_check(v_spec(rep), ab).ok
    report(8, ok, f"{len(standard_reps())} representations")
    assert ok


def test_criterion_09_ct_family():
    ok = True
    for group in (GroupSpec.cyclic(2), GroupSpec.cyclic(3)):
        for m in (2, 3, 4):
            spec = ct_construct(group, m, ct_threshold(group, m) / 2)
            ab = ab_invariants(spec)
            ok &= ab.certified and ab.b == m and strongly_suitable_check(spec, ab).ok
    report(9, ok, "m = 2, 3, 4 for Z/2 and Z/3")
    assert ok


def test_criterion_10_exponent_fits():
    start = time.perf_counter()
    f2 = fit_exponents(series_counts(adelic_series(2, conductor_height(GroupSpec.cyclic(2)), 40)), 2)
    f3 = fit_exponents(series_counts(adelic_series(3, conductor_height(GroupSpec.cyclic(3)), 30)), 3)
    elapsed = time.perf_counter() - start
    ok = (
        0.9 <= f2.a_hat <= 1.1
        and abs(f2.b_hat - 1) <= 0.3
        and 0.9 <= f3.a_hat <= 1.1
        and 1.5 <= f3.b_hat <= 2.5
        and elapsed < 300
    )
    report(
        10,
        ok,
        f"(2,2): a={f2.a_hat:.3f} b={f2.b_hat:.3f}; (3,3): a={f3.a_hat:.3f} b={f3.b_hat:.3f}; {elapsed:.1f}s",
    )
    assert ok


def test_criterion_11_global_counts():
    series = global_count_series(2, 2, 14)
    exponent = ratio_test_exponent(series_counts(series, jumps_only=False), 2)
    support = [Place(2, (0, 1)), Place(2, (1, 1)), Place(2, None)]
    agreements = [check_global_oracle(2, support, list(b)) for b in ((1, 1, 1), (2, 1, 1), (2, 2, 1), (2, 2, 2))]
    ok = 0.8 <= exponent <= 1.2 and all(a.agree for a in agreements)
    report(11, ok, f"ratio exponent {exponent:.3f}; oracle boxes agree: {[a.agree for a in agreements]}")
    assert ok


def test_criterion_12_comparability():
    group = GroupSpec.cyclic(2)
    base = conductor_height(group)
    bumped = perturbed_height(base, {2: 2, 4: 2})
    overrides = tuple((v, bumped) for v in (Place(2, (0, 1)), Place(2, (1, 1)), Place(2, None)))
    sample = [g for g, _ in global_classes_up_to(2, 2, 8)]
    rep = comparable_heights_harness(GlobalHeight(base, overrides), GlobalHeight(base), 2, 40, sample, 0.1)
    report(
        12,
        rep.ok,
        f"gap range [{rep.inf_gap}, {rep.sup_gap}] on {rep.sampled} classes; "
        f"a {rep.fit1.a_hat:.3f} vs {rep.fit2.a_hat:.3f}, b {rep.fit1.b_hat:.3f} vs {rep.fit2.b_hat:.3f}",
    )
    assert rep.ok
