from __future__ import annotations


import pytest
from hypothesis import given, strategies as st

from wildtorsor.errors import BudgetExceeded, InputError
from wildtorsor.globalcount import (
    CoeffSeries,
    GlobalHeight,
    Place,
    adelic_series,
    brute_global_enum,
    check_global_oracle,
    comparable_heights_harness,
    conductor_height,
    convolution_series,
    count_N,
    disc_height,
    fit_exponents,
    global_classes_up_to,
    global_count_series,
    irreducible_count,
    local_factor,
    perturbed_height,
    places_up_to,
    poly_is_irreducible,
    ratio_test_exponent,
    rescaled_height,
    series_counts,
    series_div,
    sieve_irreducible_counts,
    vfun_height,
)
from wildtorsor.field import field
from wildtorsor.invariants import RepSpec
from wildtorsor.torsor import GroupSpec

Z2, Z3, Z4 = GroupSpec.cyclic(2), GroupSpec.cyclic(3), GroupSpec.cyclic(2, 2)
T, T1, INF = Place(2, (0, 1)), Place(2, (1, 1)), Place(2, None)


# ---- places


def test_irreducible_counts():
    assert [irreducible_count(2, d) for d in (1, 2, 4)] == [2, 1, 3]
    for q in (2, 3, 4):
        sieve = sieve_irreducible_counts(q, 5)
        assert all(sieve[d] == irreducible_count(q, d) for d in range(1, 6))


def test_places_up_to():
    places = places_up_to(2, 2)
    assert sorted(str(v) for v in places) == sorted(["t", "t+1", "inf", "t^2+t+1"])
    for v in places:
        if not v.is_infinite:
            assert poly_is_irreducible(field(2), v.poly)
    assert not poly_is_irreducible(field(2), (1, 0, 1))
    with pytest.raises(BudgetExceeded):
        places_up_to(2, 12, budget=100)


# ---- series


def test_local_factor_examples():
    assert local_factor(2, conductor_height(Z2), 6).coeffs == (1, 0, 1, 0, 2, 0, 4)
    assert local_factor(3, conductor_height(Z3), 3).coeffs == (1, 0, 2, 6)
    for g in (Z2, Z3, Z4):
        assert local_factor(g.p, conductor_height(g), 0).coeffs == (1,)


def test_local_factor_matches_class_counts():
    # the partial sums of the local factor are the weighted class counts
    from wildtorsor.torsor import local_class_count

    for g, Q in ((Z2, 2), (Z2, 4), (Z3, 3), (Z4, 2), (GroupSpec(2, (1, 1)), 2)):
        sums = local_factor(Q, conductor_height(g), 10).partial_sums()
        for n in range(11):
            assert sums[n] == local_class_count(g, Q, n)[1]


def test_adelic_examples():
    assert adelic_series(2, conductor_height(Z2), 0).coeffs == (1,)
    s = adelic_series(2, conductor_height(Z2), 4)
    assert s[2] == 3
    sums = adelic_series(3, conductor_height(Z3), 12).partial_sums()
    assert all(a <= b for a, b in zip(sums, sums[1:]))


def test_adelic_equals_convolution():
    h = conductor_height(Z2)
    places = places_up_to(2, 2)
    direct = convolution_series(2, h, places, 8)
    full = adelic_series(2, h, 8)
    # a degree-d place first contributes at level 2d
    assert direct.coeffs[:6] == full.coeffs[:6]
    assert convolution_series(2, h, places_up_to(2, 4), 8).coeffs == full.coeffs


@given(st.lists(st.integers(0, 20), min_size=1, max_size=8), st.integers(1, 5))
def test_power_matches_repeated_mul(tail, n):
    s = CoeffSeries((1,) + tuple(tail))
    expected = CoeffSeries.one(s.N)
    for _ in range(n):
        expected = expected.mul(s)
    assert s.power(n).coeffs == expected.coeffs
    assert series_div(expected, s).coeffs == s.power(n - 1).coeffs


# ---- global enumeration


def test_brute_examples():
    assert len(brute_global_enum(2, 2, [], [])) == 2
    assert all(g.log_height(conductor_height(Z2)) == 0 for g in brute_global_enum(2, 2, [], []))
    one = brute_global_enum(2, 2, [T], [1])
    ramified = [g for g in one if g.local]
    assert len(ramified) == 2 and {g.log_height(conductor_height(Z2)) for g in ramified} == {2}
    two = brute_global_enum(2, 2, [T, T1], [1, 1])
    doubly = [g for g in two if len(g.local) == 2]
    assert len(doubly) == 2 and {g.log_height(conductor_height(Z2)) for g in doubly} == {4}


def test_brute_rejects_bad_input():
    with pytest.raises(InputError):
        brute_global_enum(3, 2, [T], [1])
    with pytest.raises(InputError):
        brute_global_enum(2, 2, [T], [1, 2])


@pytest.mark.parametrize("bounds", [(1, 1, 1), (2, 1, 1), (2, 2, 1), (2, 2, 2)])
def test_ratfn_oracle_agrees(bounds):
    report = check_global_oracle(2, [T, T1, INF], list(bounds))
    assert report.agree and report.orbits == report.brute


def test_ratfn_oracle_q3():
    places = [Place(3, (0, 1)), Place(3, None)]
    assert check_global_oracle(3, places, [2, 1]).agree


def test_ratfn_oracle_rejects_higher_degree():
    with pytest.raises(InputError):
        check_global_oracle(2, [Place(2, (1, 1, 1))], [1])


def test_global_count_is_p_times_adelic():
    for q, p, N in ((2, 2, 10), (3, 3, 6), (4, 2, 5)):
        g = global_count_series(q, p, N)
        a = adelic_series(q, conductor_height(GroupSpec.cyclic(p)), N)
        assert list(g.coeffs) == [p * x for x in a.coeffs]


def test_k_invariance():
    classes = global_classes_up_to(2, 2, 6)
    by_local: dict = {}
    for g, lv in classes:
        by_local.setdefault(g.key()[0], set()).add(lv)
    # changing only the unramified residue never changes the height
    assert all(len(levels) == 1 for levels in by_local.values())


def test_height_additive_over_places():
    from wildtorsor.torsor import conductor

    h = conductor_height(Z2)
    for g, lv in global_classes_up_to(2, 2, 6):
        assert lv == sum(v.degree * conductor(c) for v, c in g.local) == g.log_height(h)


def test_northcott_monotone():
    sums = global_count_series(2, 2, 10).partial_sums()
    assert all(0 < a <= b for a, b in zip(sums, sums[1:]))
    assert count_N(global_count_series(2, 2, 10), 10) == sums[-1]


# ---- fits


def test_degenerate_fit():
    with pytest.raises(InputError):
        fit_exponents([(M, 1) for M in range(20)], 2)
    with pytest.raises(InputError):
        fit_exponents([(1, 2), (2, 3)], 2)


def test_fit_recovers_synthetic_exponents():
    import math

    counts = [(M, round(5 * 2 ** M * M ** 1.0)) for M in range(1, 60)]
    fit = fit_exponents(counts, 2)
    assert abs(fit.a_hat - 1) < 0.01 and abs(fit.b_hat - 2) < 0.05
    counts = [(M, round(3 ** (M / 2) * 7)) for M in range(1, 60)]
    fit = fit_exponents(counts, 3)
    assert abs(fit.a_hat - 0.5) < 0.01 and abs(fit.b_hat - 1) < 0.1
    assert math.isfinite(fit.ratio_exponent)


def test_fit_conductor_z2():
    fit = fit_exponents(series_counts(adelic_series(2, conductor_height(Z2), 40)), 2)
    assert 0.9 <= fit.a_hat <= 1.1 and abs(fit.b_hat - 1) <= 0.3


def test_ratio_exponent_global():
    counts = series_counts(global_count_series(2, 2, 12), jumps_only=False)
    assert 0.8 <= ratio_test_exponent(counts, 2) <= 1.2


# ---- other heights


def test_disc_height_z3_is_twice_conductor():
    cond = adelic_series(3, conductor_height(Z3), 6)
    disc = adelic_series(3, disc_height(Z3), 12)
    assert disc.coeffs == cond.spread(2, 12).coeffs


def test_disc_height_enumerated_for_z4():
    s = local_factor(2, disc_height(Z4), 8)
    assert s.coeffs[0] == 1 and sum(s.coeffs) > 1
    assert s.coeffs[8] >= 1  # the class t^-1 has conductor 3 and disc 8


def test_vfun_height():
    s = local_factor(3, vfun_height(RepSpec(3, (3,))), 6)
    assert s[2] == 2 and s[3] == 6


# ---- comparability


def test_harness_identity():
    h = conductor_height(Z2)
    report = comparable_heights_harness(h, h, 2, 30)
    assert report.ok and report.fit1 == report.fit2


def test_harness_finite_perturbation():
    base = conductor_height(Z2)
    bumped = perturbed_height(base, {2: 2, 4: 2})
    overrides = tuple((v, bumped) for v in (T, T1, INF))
    H1, H2 = GlobalHeight(base, overrides), GlobalHeight(base)
    sample = [g for g, _ in global_classes_up_to(2, 2, 8)]
    report = comparable_heights_harness(H1, H2, 2, 40, sample)
    assert report.pointwise_ok and report.sup_gap == 2 and report.inf_gap == 0
    assert report.exponents_agree


def test_harness_rejects_unbounded_gap():
    base = conductor_height(Z2)
    with pytest.raises(InputError):
        comparable_heights_harness(base, perturbed_height(base, {2: 2}), 2, 20)
    with pytest.raises(InputError):
        comparable_heights_harness(base, rescaled_height(base, 2), 2, 20)


def test_harness_disc_vs_rescaled_conductor_z3():
    report = comparable_heights_harness(rescaled_height(disc_height(Z3), 2), conductor_height(Z3), 3, 24)
    assert report.ok
