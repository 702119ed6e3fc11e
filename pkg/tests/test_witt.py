from __future__ import annotations

import itertools

import pytest
from hypothesis import given, strategies as st

from wildtorsor.errors import CapExceeded, InvariantViolation
from wildtorsor.field import field
from wildtorsor.selftest import ghost_identity_holds, homogeneity_holds
from wildtorsor.witt import (
    IntegerRing,
    Var,
    WeightedPoly,
    addition_polys,
    check_weighted_homogeneous,
    dary_add_polys,
    evaluate,
    ghost_poly,
    int_to_witt_fp,
    inverse_polys,
    scalar_poly,
    witt_add_values,
    witt_neg_values,
    witt_scale_values,
    x_vars,
    xy_vars,
)


def poly(variables, spec):
    return WeightedPoly(variables, spec)


def test_ghost_small_cases():
    assert str(ghost_poly(2, 0)) == "X0"
    xs = x_vars(2, 2)
    assert ghost_poly(2, 1) == poly(xs, {(2, 0): 1, (0, 1): 2})
    xs3 = x_vars(3, 3)
    assert ghost_poly(3, 2) == poly(xs3, {(9, 0, 0): 1, (0, 3, 0): 3, (0, 0, 1): 9})


def test_addition_small_cases():
    v = xy_vars(2, 2)
    S = addition_polys(2, 2).S
    assert S[0] == poly(v, {(1, 0, 0, 0): 1, (0, 0, 1, 0): 1})
    assert S[1] == poly(v, {(0, 1, 0, 0): 1, (0, 0, 0, 1): 1, (1, 0, 1, 0): -1})
    v3 = xy_vars(3, 2)
    S3 = addition_polys(3, 2).S
    assert S3[1] == poly(v3, {(0, 1, 0, 0): 1, (0, 0, 0, 1): 1, (2, 0, 1, 0): -1, (1, 0, 2, 0): -1})
    assert len(addition_polys(2, 1).S) == 1


def test_inverse_small_cases():
    xs = x_vars(2, 2)
    I = inverse_polys(2, 2)
    assert I[0] == poly(xs, {(1, 0): -1})
    assert I[1] == poly(xs, {(0, 1): -1, (2, 0): -1})
    zero = {f"X{j}": 0 for j in range(3)}
    for p in (2, 3):
        assert all(evaluate(i, zero, IntegerRing()) == 0 for i in inverse_polys(p, 3))


@pytest.mark.parametrize("p,e", [(2, 4), (3, 4), (5, 3)])
def test_ghost_identity(p, e):
    assert ghost_identity_holds(p, e)


@pytest.mark.parametrize("p,e", [(2, 4), (3, 4), (5, 3)])
def test_homogeneity(p, e):
    assert homogeneity_holds(p, e)


def test_supports_only_lower_indices():
    system = addition_polys(3, 3)
    for n, s in enumerate(system.S):
        for name in s.used_variables():
            assert int(name[1:]) <= n


def test_homogeneity_checker():
    assert check_weighted_homogeneous(ghost_poly(2, 2)).degree == 4
    xs = x_vars(2, 2)
    h = check_weighted_homogeneous(poly(xs, {(1, 0): 1, (0, 1): 1}))
    assert not h.ok and h.witness is not None
    assert check_weighted_homogeneous(WeightedPoly.zero(xs)).any_degree


def test_exact_div_failure_is_invariant_violation():
    xs = x_vars(2, 1)
    with pytest.raises(InvariantViolation):
        poly(xs, {(1,): 3}).exact_div(2)


def test_caps():
    with pytest.raises(CapExceeded):
        addition_polys(11, 2)
    with pytest.raises(CapExceeded):
        addition_polys(2, 5)


def test_scalar_examples():
    xs = x_vars(2, 2)
    assert all(c.is_zero() for c in scalar_poly(2, 2, 0))
    assert scalar_poly(2, 2, 1) == tuple(WeightedPoly.var(xs, f"X{j}") for j in range(2))
    two = scalar_poly(2, 2, 2)
    assert two[0].mod(2).is_zero()
    assert two[1].mod(2) == poly(xs, {(2, 0): 1})


@pytest.mark.parametrize("p,e", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_scalar_matches_repeated_addition(p, e):
    fp = field(p)
    for k in range(p**e):
        for x in itertools.product(range(p), repeat=e):
            acc = (0,) * e
            for _ in range(k):
                acc = witt_add_values(p, e, acc, x, fp)
            assert witt_scale_values(p, e, k, x, fp) == acc


def test_dary_sum_matches_folded_addition():
    p, e, d = 2, 2, 3
    fp = field(p)
    S = dary_add_polys(p, e, d)
    for pts in itertools.product(itertools.product(range(p), repeat=e), repeat=d):
        assignment = {f"X{u + 1}_{j}": pts[u][j] for u in range(d) for j in range(e)}
        got = tuple(evaluate(s, assignment, fp) for s in S)
        acc = (0,) * e
        for pt in pts:
            acc = witt_add_values(p, e, acc, pt, fp)
        assert got == acc


@pytest.mark.parametrize("p,e", [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (3, 3), (5, 1), (5, 2)])
def test_witt_fp_is_cyclic(p, e):
    fp = field(p)
    for a in range(p**e):
        for b in range(p**e):
            got = witt_add_values(p, e, int_to_witt_fp(p, e, a), int_to_witt_fp(p, e, b), fp)
            assert got == int_to_witt_fp(p, e, (a + b) % p**e)


def test_eval_examples():
    fp = field(2)
    S = addition_polys(2, 2).S
    assert evaluate(S[0], {"X0": 1, "X1": 0, "Y0": 1, "Y1": 0}, fp) == 0
    assert witt_add_values(2, 2, (1, 0), (1, 0), fp) == (0, 1)


vec = st.lists(st.integers(0, 15), min_size=3, max_size=3)


@given(vec, vec, vec)
def test_group_laws_over_f16(x, y, z):
    f16 = field(2, 4)
    p, e = 2, 3
    add = lambda a, b: witt_add_values(p, e, a, b, f16)  # noqa: E731
    assert add(x, y) == add(y, x)
    assert add(add(x, y), z) == add(x, add(y, z))
    assert add(x, witt_neg_values(p, e, x, f16)) == (0, 0, 0)


@given(st.lists(st.integers(0, 8), min_size=2, max_size=2), st.lists(st.integers(0, 8), min_size=2, max_size=2))
def test_group_laws_over_f9(x, y):
    f9 = field(3, 2)
    assert witt_add_values(3, 2, x, y, f9) == witt_add_values(3, 2, y, x, f9)
    assert witt_add_values(3, 2, x, witt_neg_values(3, 2, x, f9), f9) == (0, 0)


def test_json_is_deterministic():
    from wildtorsor.witt import dumps_system

    assert dumps_system(addition_polys(3, 2)) == dumps_system(addition_polys(3, 2))
    assert Var("X0", 1).weight == 1
