from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from wildtorsor.errors import InputError
from wildtorsor.field import field
from wildtorsor.invariants import (
    Fiber,
    RaisingSpec,
    RepSpec,
    ab_invariants,
    brute_ab,
    conductor_spec,
    conductor_values,
    ct_construct,
    ct_threshold,
    disc_fiber_count,
    disc_fiber_dim_estimate,
    flag_count_bound,
    flag_enumerate,
    index_flag_bound,
    naive_flag_bound,
    ratio,
    sht,
    standard_reps,
    strongly_suitable_check,
    subgroup_chains,
    subgroups,
    v_ab,
    v_gap_check,
    v_spec,
    v_value,
)
from wildtorsor.torsor import GroupSpec, check_flag, dim_group, flag_disc

F = Fraction
Z2, Z3, Z4 = GroupSpec.cyclic(2), GroupSpec.cyclic(3), GroupSpec.cyclic(2, 2)
V4 = GroupSpec(2, (1, 1))


# ---- conductor spec


def test_conductor_fiber_dims():
    spec = conductor_spec(Z2)
    assert spec.fiber_dim(2) == 1 and spec.fiber_dim(4) == 2
    for p in (3, 5):
        spec = conductor_spec(GroupSpec.cyclic(p))
        for r in spec.values(4 * p):
            assert spec.fiber_dim(r) == (r - 1) - (r - 1) // p
    assert dim_group(Z4, 5) == 3


def test_conductor_value_set():
    assert conductor_values(Z2, 9) == [2, 4, 6, 8]
    assert conductor_values(Z3, 8) == [2, 3, 5, 6, 8]
    # for Z/4 the conductor-<=r dimension stalls exactly when 4 | r - 1
    assert conductor_values(Z4, 10) == [2, 3, 4, 6, 7, 8, 10]


@pytest.mark.parametrize("group", [Z2, Z3, Z4, V4, GroupSpec(2, (1, 2)), GroupSpec(3, (1, 2))], ids=str)
def test_conductor_periodicity(group):
    spec = conductor_spec(group)
    P = spec.period
    for r in spec.values(3 * P):
        assert spec.fiber(r + P).dim - spec.fiber_dim(r) == spec.delta
        assert spec.fiber_dim(r) == dim_group(group, int(r))
    for r in range(2, int(3 * P)):
        assert (spec.fiber(r) is not None) == (dim_group(group, r) > dim_group(group, r - 1))


@pytest.mark.parametrize("p", [2, 3, 5])
def test_conductor_ab(p):
    ab = ab_invariants(conductor_spec(GroupSpec.cyclic(p)))
    assert ab.certified
    assert ab.a == 1 and ab.D == tuple(F(r) for r in range(2, p + 1)) and ab.b == p - 1
    brute = brute_ab(conductor_spec(GroupSpec.cyclic(p)), 3 * p * p)
    assert (brute.a, brute.D, brute.b) == (ab.a, ab.D, ab.b)
    assert not brute.certified


def test_conductor_ab_json_and_margin():
    ab = ab_invariants(conductor_spec(Z2))
    assert ab.epsilon_margin == F(1, 4)
    assert ab.to_json()["a"] == "1/1" and ab.to_json()["D"] == [2]
    ab3 = ab_invariants(conductor_spec(Z3))
    assert ab3.to_json()["D"] == [2, 3] and ab3.b == 2


def test_other_groups_ab():
    ab = ab_invariants(conductor_spec(V4))
    assert ab.a == F(3, 2) and ab.D == (2,) and ab.b == 1
    ab = ab_invariants(conductor_spec(Z4))
    assert ab.a == 1 and ab.D == (2, 3, 4) and ab.b == 3


@pytest.mark.parametrize("group", [Z2, Z3, Z4, V4, GroupSpec(5, (1,)), GroupSpec(2, (1, 2))], ids=str)
def test_certified_ab_invariant(group):
    spec = conductor_spec(group)
    ab = ab_invariants(spec)
    for f in spec.fibers(6 * spec.period):
        if f.value in ab.D:
            assert 1 + f.dim == ab.a * f.value
        else:
            assert ratio(f) <= ab.a - ab.epsilon_margin
    assert ab.b == sum(spec.fiber_top_components(r) for r in ab.D)
    assert strongly_suitable_check(spec, ab).ok


# ---- generic specs


def test_tie_outside_d_is_rejected():
    spec = RaisingSpec("tie", explicit=(Fiber(F(2), 1), Fiber(F(4), 3), Fiber(F(5), 1)))
    ab = ab_invariants(spec)
    assert ab.D == (2, 4)
    forged = type(ab)(ab.a, (F(2),), 1, F(1, 10), True, F(3, 5))
    report = strongly_suitable_check(spec, forged)
    assert not report.ok and report.witness == 1


def test_spec_validation():
    with pytest.raises(InputError):
        RaisingSpec("x", base=(Fiber(F(2), 1),))
    with pytest.raises(InputError):
        RaisingSpec("x", explicit=(Fiber(F(2), 1), Fiber(F(2), 2)))
    with pytest.raises(InputError):
        ab_invariants(RaisingSpec("empty"))
    with pytest.raises(InputError):
        ab_invariants(conductor_spec(Z2), scan_bound=1)


def test_limit_supremum_not_attained():
    spec = RaisingSpec("lim", base=(Fiber(F(1), 0),), period=F(1), delta=1)
    ab = ab_invariants(spec)
    assert ab.a == 1 and ab.d_infinite
    assert not strongly_suitable_check(spec, ab).ok


@given(
    st.lists(st.tuples(st.integers(1, 40), st.integers(0, 30), st.integers(1, 3)), min_size=1, max_size=8, unique_by=lambda t: t[0])
)
def test_finite_ab_matches_definition(rows):
    spec = RaisingSpec("h", explicit=tuple(Fiber(F(v), d, c) for v, d, c in rows))
    ab = ab_invariants(spec)
    best = max(F(1 + d, v) for v, d, _ in rows)
    assert ab.a == best
    assert set(ab.D) == {F(v) for v, d, _ in rows if F(1 + d, v) == best}
    assert ab.b == sum(c for v, d, c in rows if F(1 + d, v) == best)


# ---- v-functions


def test_sht_examples():
    v3 = RepSpec(3, (3,))
    assert (sht(v3, 1), sht(v3, 2)) == (0, 1)
    assert (v_value(v3, 1), v_value(v3, 2)) == (2, 3)
    assert RepSpec.parse(7, "4,2").D_V == 7
    for p in (2, 3, 5, 7):
        assert RepSpec.parse(p, f"2^{p}").D_V == p
    with pytest.raises(InputError):
        sht(v3, 3)


def test_v_ab_examples():
    assert (v_ab(RepSpec(3, (3,))).a, v_ab(RepSpec(3, (3,))).b) == (1, 2)
    ab = v_ab(RepSpec(2, (2, 2)))
    assert (ab.a, ab.b) == (1, 1)


@pytest.mark.parametrize("rep", standard_reps(), ids=lambda r: f"{r}-p{r.p}")
def test_v_functions(rep):
    assert rep.D_V == rep.p
    ab = v_ab(rep)
    expected_b = sum(1 for j in range(1, rep.p) if rep.l - rep.d + j - sht(rep, j) == -1)
    assert ab.a == 1 and ab.b == expected_b
    spec = v_spec(rep)
    assert strongly_suitable_check(spec, ab).ok
    rows = dict(v_gap_check(rep))
    assert all(gap <= -1 for gap in rows.values()) and rows[rep.p - 1] == -1
    for j in range(1, 4 * rep.p):
        if j % rep.p:
            assert sht(rep, j + rep.p) == sht(rep, j) + rep.p


def test_v_collisions_reported():
    spec = v_spec(RepSpec(5, (2,) * 5))
    assert spec.collisions == ((5, (1, 2, 3, 4)),)
    assert spec.fiber_top_components(5) == 1


def test_v_rejects_wrong_dv():
    with pytest.raises(InputError):
        v_ab(RepSpec(3, (2,)))
    with pytest.raises(InputError):
        RepSpec(3, (4,))


# ---- c^t


def test_ct_m1():
    spec = ct_construct(Z2, 1, ct_threshold(Z2, 1) / 2)
    ab = ab_invariants(spec)
    assert len(ab.D) == 1 and ab.b == 1


@pytest.mark.parametrize("group", [Z2, Z3], ids=str)
@pytest.mark.parametrize("m", [2, 3, 4])
def test_ct_family(group, m):
    t = ct_threshold(group, m) / 2
    spec = ct_construct(group, m, t)
    ab = ab_invariants(spec)
    assert ab.certified and ab.b == m and len(ab.D) == m and ab.a == 1 / t
    assert strongly_suitable_check(spec, ab).ok


def test_ct_threshold_rejects():
    with pytest.raises(InputError):
        ct_construct(Z2, 2, ct_threshold(Z2, 2))
    with pytest.raises(InputError):
        ct_construct(Z2, 0, F(1, 10))


# ---- flags


def test_subgroups():
    assert len(subgroups(Z2)) == 2 and len(subgroups(V4)) == 5 and len(subgroups(Z4)) == 3
    assert len(subgroups(GroupSpec(2, (1, 1, 1)))) == 16
    assert len(subgroup_chains(V4)) == 8


def test_flag_enumerate_examples():
    flags = flag_enumerate(Z2, 2)
    assert len(flags) == 1 and flags[0].jumps() == [0, 2]
    assert [f.jumps() for f in flag_enumerate(Z2, 3)] == [[0, 3]]
    for g in (Z2, Z3, V4):
        flags = flag_enumerate(g, 0)
        assert len(flags) == 1 and flags[0].jumps() == [0]


@pytest.mark.parametrize("group", [Z2, Z3, Z4, V4], ids=str)
def test_flag_counts_and_bounds(group):
    for n in range(31):
        flags = flag_enumerate(group, n)
        assert len(flags) <= flag_count_bound(group, n)
        for flag in flags:
            check_flag(flag)
            assert flag_disc(flag) == n
            assert flag_disc(flag) <= index_flag_bound(flag)


def test_naive_flag_bound_counterexample():
    flags = [f for f in flag_enumerate(V4, 9) if f.jumps() == [0, 3] and len(f.steps[0][1]) == 1]
    assert flags
    assert flag_disc(flags[0]) == 9 > naive_flag_bound(flags[0]) == 6


def test_flag_counts_polynomial_growth():
    counts = [len(flag_enumerate(Z3, n)) for n in range(1, 31)]
    assert max(counts) <= 30 ** 3


# ---- discriminant fibers


def test_disc_fiber_estimates():
    est = disc_fiber_dim_estimate(Z2, 2, 2)
    assert est.counts == ((2, 1), (4, 3)) and est.dim == 1
    est = disc_fiber_dim_estimate(Z2, 3, 2)
    assert est.dim is None and est.to_json()["empty"]
    est = disc_fiber_dim_estimate(Z3, 4, 3)
    assert est.dim == 1


def test_disc_fiber_oracle_agrees_with_canonical():
    for r in range(0, 5):
        assert disc_fiber_count(Z2, field(2), r, "oracle") == disc_fiber_count(Z2, field(2), r)


def test_conductor_fibers_irreducible_by_point_counts():
    # #{wild classes of conductor exactly r} = q^dim - q^dim_prev, consistent with one top component
    from wildtorsor.torsor import canonical_classes, conductor

    for group, p in ((Z2, 2), (Z3, 3)):
        for k in (1, 2):
            fq = field(p, k)
            for r in range(2, 7):
                n = sum(1 for c in canonical_classes(group, fq, r) if conductor(c) == r)
                expected = fq.q ** dim_group(group, r) - fq.q ** dim_group(group, r - 1)
                assert n == expected
