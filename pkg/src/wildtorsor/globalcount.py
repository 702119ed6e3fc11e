"""Counting G-torsors over F_q(t) by height.

Local factors come from the fiber dimensions of the conductor strata; the
adelic zeta series is their product over places.  For G = Z/p the global
classes are also enumerated directly, and that enumeration is checked
against a rational-function orbit oracle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import InputError, InvariantViolation, check_budget
from .field import GF, LaurentTail, field as make_field
from .invariants import RepSpec, conductor_values, ct_construct, v_value
from .torsor import (
    GroupSpec,
    LocalClass,
    canonical_classes,
    conductor,
    dim_group,
    disc_exponent,
    reduce,
    unram_table,
    WittTail,
)


# --------------------------------------------------------------------------
# polynomials over F_q and places


def _q_field(q: int) -> GF:
    for p in (2, 3, 5, 7, 11, 13):
        k, n = 0, 1
        while n < q:
            n *= p
            k += 1
        if n == q:
            return make_field(p, k)
    raise InputError(f"unsupported q = {q}")


def poly_mul(fq: GF, a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] = fq.add(out[i + j], fq.mul(x, y))
    return tuple(out)


def poly_rem(fq: GF, a: Sequence[int], m: Sequence[int]) -> tuple[int, ...]:
    """Remainder of a modulo the monic m (coefficients low to high)."""
    r = list(a)
    dm = len(m) - 1
    for i in range(len(r) - 1, dm - 1, -1):
        c = r[i]
        if c:
            for j in range(dm + 1):
                r[i - dm + j] = fq.sub(r[i - dm + j], fq.mul(c, m[j]))
    r = r[:dm]
    while r and r[-1] == 0:
        r.pop()
    return tuple(r)


def monic(fq: GF, degree: int) -> Iterable[tuple[int, ...]]:
    for low in itertools.product(range(fq.q), repeat=degree):
        yield tuple(reversed(low)) + (1,) if degree else (1,)


def _monic_lowfirst(fq: GF, degree: int) -> list[tuple[int, ...]]:
    return [tuple(low) + (1,) for low in itertools.product(range(fq.q), repeat=degree)]


def poly_is_irreducible(fq: GF, f: Sequence[int]) -> bool:
    d = len(f) - 1
    if d < 1:
        return False
    for k in range(1, d // 2 + 1):
        for g in _monic_lowfirst(fq, k):
            if not poly_rem(fq, f, g):
                return False
    return True


@dataclass(frozen=True)
class Place:
    """A monic irreducible polynomial (coefficients low to high) or infinity (poly None)."""

    q: int
    poly: tuple[int, ...] | None

    @property
    def is_infinite(self) -> bool:
        return self.poly is None

    @property
    def degree(self) -> int:
        return 1 if self.poly is None else len(self.poly) - 1

    @property
    def residue_size(self) -> int:
        return self.q**self.degree

    def sort_key(self):
        return (self.degree, self.poly is None, self.poly or ())

    def __str__(self) -> str:
        if self.poly is None:
            return "inf"
        fq = _q_field(self.q)
        terms = []
        for i in range(len(self.poly) - 1, -1, -1):
            c = self.poly[i]
            if not c:
                continue
            mono = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
            coef = fq.format(c)
            if mono and c == 1:
                terms.append(mono)
            elif mono:
                terms.append(f"{coef}*{mono}")
            else:
                terms.append(coef)
        return "+".join(terms)


def mobius(n: int) -> int:
    result, m, d = 1, n, 2
    while d * d <= m:
        if m % d == 0:
            m //= d
            if m % d == 0:
                return 0
            result = -result
        d += 1
    return -result if m > 1 else result


def irreducible_count(q: int, d: int) -> int:
    """Number of monic irreducibles of degree d over F_q (necklace formula)."""
    if d < 1:
        raise InputError("degree must be >= 1")
    total = sum(mobius(m) * q ** (d // m) for m in range(1, d + 1) if d % m == 0)
    return total // d


def sieve_irreducible_counts(q: int, D: int, budget: int | None = None) -> list[int]:
    """Counts for degrees 0..D by striking out products of monics."""
    check_budget(q**D * D, budget, "irreducible sieve")
    fq = _q_field(q)
    composite: set[tuple[int, ...]] = set()
    by_deg = {k: _monic_lowfirst(fq, k) for k in range(1, D + 1)}
    for da in range(1, D // 2 + 1):
        for db in range(da, D - da + 1):
            for a in by_deg[da]:
                for b in by_deg[db]:
                    composite.add(poly_mul(fq, a, b))
    counts = [0] * (D + 1)
    for k in range(1, D + 1):
        counts[k] = sum(1 for f in by_deg[k] if f not in composite)
    return counts


def places_up_to(q: int, D: int, budget: int | None = None) -> list[Place]:
    check_budget(q**D, budget, "place enumeration")
    fq = _q_field(q)
    out = [Place(q, None)]
    for k in range(1, D + 1):
        found = [Place(q, f) for f in _monic_lowfirst(fq, k) if poly_is_irreducible(fq, f)]
        if len(found) != irreducible_count(q, k):
            raise InvariantViolation(f"trial division found {len(found)} irreducibles of degree {k}")
        out.extend(found)
    return sorted(out, key=Place.sort_key)


# --------------------------------------------------------------------------
# series


@dataclass(frozen=True)
class CoeffSeries:
    """a_0 + a_1 u + ... + a_N u^N, exact."""

    coeffs: tuple

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def one(cls, N: int) -> "CoeffSeries":
        return cls((1,) + (0,) * N)

    def __getitem__(self, n: int):
        return self.coeffs[n] if 0 <= n <= self.N else 0

    def mul(self, other: "CoeffSeries") -> "CoeffSeries":
        N = min(self.N, other.N)
        out = [0] * (N + 1)
        for i, a in enumerate(self.coeffs[: N + 1]):
            if a:
                for j in range(N + 1 - i):
                    b = other.coeffs[j]
                    if b:
                        out[i + j] += a * b
        return CoeffSeries(tuple(out))

    def spread(self, d: int, N: int) -> "CoeffSeries":
        """Substitute u -> u^d, truncated at N."""
        out = [0] * (N + 1)
        for i, a in enumerate(self.coeffs):
            if i * d <= N:
                out[i * d] = a
        return CoeffSeries(tuple(out))

    def power(self, n: int) -> "CoeffSeries":
        """self^n via the recurrence k f_0 g_k = sum_i ((n+1) i - k) f_i g_{k-i}; needs a_0 = 1."""
        if self.coeffs[0] != 1:
            raise InputError("power needs constant term 1")
        f = self.coeffs
        g = [1] + [0] * self.N
        for k in range(1, self.N + 1):
            acc = 0
            for i in range(1, k + 1):
                if f[i]:
                    acc += ((n + 1) * i - k) * f[i] * g[k - i]
            val = Fraction(acc, k)
            g[k] = int(val) if val.denominator == 1 else val
        return CoeffSeries(tuple(g))

    def partial_sums(self) -> list:
        return list(itertools.accumulate(self.coeffs))

    def to_rows(self) -> list[tuple]:
        return [(n, a, s) for n, (a, s) in enumerate(zip(self.coeffs, self.partial_sums()))]


# --------------------------------------------------------------------------
# heights


@dataclass(frozen=True)
class HeightSpec:
    """A raising function on local classes, evaluated through conductor strata.

    ``value_of(r)`` gives the height exponent on the conductor-r stratum (None
    to drop it), ``scale`` is the M making M * value integral, and ``mode``
    names the function.  Mode ``disc`` on a non-cyclic group is evaluated by
    enumerating classes instead.
    """

    group: GroupSpec
    mode: str
    value_of: Callable[[int], Fraction | None]
    scale: int = 1
    label: str = ""
    enumerate_disc: bool = False

    def level(self, r: int) -> int | None:
        v = self.value_of(r)
        if v is None:
            return None
        lv = Fraction(v) * self.scale
        if lv.denominator != 1:
            raise InvariantViolation(f"height value {v} not integral after scale {self.scale}")
        return int(lv)

    def local_value(self, c: LocalClass) -> Fraction:
        if self.enumerate_disc:
            return Fraction(disc_exponent(c))
        r = conductor(c)
        return Fraction(0) if r == 0 else Fraction(self.value_of(r))


def conductor_height(group: GroupSpec) -> HeightSpec:
    return HeightSpec(group, "conductor", lambda r: Fraction(r), 1, f"conductor[{group}]")


def disc_height(group: GroupSpec) -> HeightSpec:
    p = group.p
    if group.exponents == (1,):
        return HeightSpec(group, "disc", lambda r: Fraction((p - 1) * r), 1, f"disc[{group}]")
    return HeightSpec(group, "disc", lambda r: None, 1, f"disc[{group}]", enumerate_disc=True)


def vfun_height(rep: RepSpec) -> HeightSpec:
    """v(jump) on Z/p classes; the conductor-r stratum has jump r - 1."""
    group = GroupSpec.cyclic(rep.p)
    return HeightSpec(group, "vfun", lambda r: Fraction(v_value(rep, r - 1)), 1, f"vfun[{rep}]")


def ct_height(group: GroupSpec, m: int, t) -> HeightSpec:
    spec = ct_construct(group, m, t)
    moved = {r: f for r, f in zip(sorted(spec.excluded), sorted(spec.explicit, key=lambda f: f.value))}
    return HeightSpec(
        group,
        "ct",
        lambda r: moved[r].value if r in moved else Fraction(r),
        spec.denominator(),
        spec.label,
    )


def perturbed_height(base: HeightSpec, shifts: dict[int, int]) -> HeightSpec:
    """base with the value on finitely many strata moved by the given amounts."""
    f = base.value_of
    return HeightSpec(
        base.group,
        base.mode,
        lambda r: None if f(r) is None else f(r) + shifts.get(r, 0),
        base.scale,
        f"{base.label}+perturbed{sorted(shifts.items())}",
    )


def rescaled_height(base: HeightSpec, factor) -> HeightSpec:
    factor = Fraction(factor)
    f = base.value_of
    return HeightSpec(
        base.group,
        base.mode,
        lambda r: None if f(r) is None else f(r) / factor,
        base.scale,
        f"{base.label}/{factor}",
    )


def height_from_name(group: GroupSpec, name: str, rep: RepSpec | None = None, m: int = 2, t=None) -> HeightSpec:
    if name == "conductor":
        return conductor_height(group)
    if name == "disc":
        return disc_height(group)
    if name == "vfun":
        if rep is None:
            raise InputError("vfun height needs a representation")
        return vfun_height(rep)
    if name == "ct":
        from .invariants import ct_threshold

        t = ct_threshold(group, m) / 2 if t is None else Fraction(t)
        return ct_height(group, m, t)
    raise InputError(f"unknown height {name!r}")


# --------------------------------------------------------------------------
# local and adelic series


def stratum_measure(group: GroupSpec, Q: int, r: int) -> int:
    """Weighted measure of classes with conductor exactly r (r >= 2)."""
    return Q ** dim_group(group, r) - Q ** dim_group(group, r - 1)


def local_factor(Q: int, height: HeightSpec, N: int, budget: int | None = None) -> CoeffSeries:
    """Level n coefficient: measure of local classes with M * c = n (level 0 = 1)."""
    if N < 0:
        raise InputError("N must be >= 0")
    coeffs = [0] * (N + 1)
    coeffs[0] = 1
    if N == 0:
        return CoeffSeries(tuple(coeffs))
    group = height.group
    if height.enumerate_disc:
        p = group.p
        k = round(math.log(Q, p))
        fq = make_field(p, k)
        for c in canonical_classes(group, fq, N, budget):
            if conductor(c) == 0:
                continue
            d = disc_exponent(c)
            if d <= N:
                coeffs[d] += 1
        return CoeffSeries(tuple(coeffs))
    # every stratum value is at least its conductor minus one period
    r_max = N * height.scale + group.p ** group.exponent + 2
    for r in conductor_values(group, r_max):
        lv = height.level(r)
        if lv is not None and 0 < lv <= N:
            coeffs[lv] += stratum_measure(group, Q, r)
        elif lv is not None and lv <= 0:
            raise InvariantViolation("nonpositive height on a ramified stratum")
    return CoeffSeries(tuple(coeffs))


def adelic_series(q: int, height: HeightSpec, N: int, budget: int | None = None) -> CoeffSeries:
    """Product over places of the local factors, exact to u^N (infinity counts as degree 1)."""
    total = CoeffSeries.one(N)
    for d in range(1, N + 1):
        mult = irreducible_count(q, d) + (1 if d == 1 else 0)
        local = local_factor(q**d, height, N // d, budget)
        factor = local.spread(d, N).power(mult)
        total = total.mul(factor)
    return total


def convolution_series(q: int, height: HeightSpec, places: Sequence[Place], N: int) -> CoeffSeries:
    """Direct product of local factors over an explicit place list."""
    total = CoeffSeries.one(N)
    for v in places:
        local = local_factor(v.residue_size, height, N // v.degree)
        total = total.mul(local.spread(v.degree, N))
    return total


# --------------------------------------------------------------------------
# global classes for G = Z/p


@dataclass(frozen=True)
class GlobalClass:
    """Per-place wild data plus the global unramified residue in Z/p."""

    p: int
    q: int
    local: tuple[tuple[Place, LocalClass], ...]
    residue: int

    def log_height(self, height: HeightSpec) -> Fraction:
        return sum((v.degree * height.local_value(c) for v, c in self.local), Fraction(0))

    def key(self) -> tuple:
        return (
            tuple((str(v), tuple(tuple(coord) for vec in c.wild for coord in vec)) for v, c in self.local),
            self.residue,
        )

    def to_row(self, height: HeightSpec) -> dict:
        return {
            "places": ";".join(str(v) for v, _ in self.local) or "-",
            "local": ";".join(
                ",".join(f"{i}:{c.field.format(a)}" for i, a in c.wild[0][0]) for _, c in self.local
            )
            or "-",
            "residue": self.residue,
            "log_q_height": str(self.log_height(height)),
        }


def _local_wild(p: int, Q: int, pole_bound: int) -> list[LocalClass]:
    """Nontrivial wild data at one place: exponents prime to p up to pole_bound."""
    k = round(math.log(Q, p))
    fq = make_field(p, k)
    group = GroupSpec.cyclic(p)
    return [c for c in canonical_classes(group, fq, pole_bound + 1) if c.has_wild()]


def brute_global_enum(
    q: int,
    p: int,
    support: Sequence[Place],
    pole_bounds: Sequence[int] | int,
    budget: int | None = None,
) -> list[GlobalClass]:
    """Every class ramified only inside ``support`` with jumps bounded per place."""
    if isinstance(pole_bounds, int):
        pole_bounds = [pole_bounds] * len(support)
    if len(pole_bounds) != len(support):
        raise InputError("one pole bound per support place")
    fq = _q_field(q)
    if fq.p != p:
        raise InputError("q must be a power of p")
    options = []
    size = p
    for v, pb in zip(support, pole_bounds):
        opts = [None] + _local_wild(p, v.residue_size, pb)
        options.append((v, opts))
        size *= len(opts)
    check_budget(size, budget, "global enumeration")
    out = []
    for choice in itertools.product(*(opts for _, opts in options)):
        local = tuple((v, c) for (v, _), c in zip(options, choice) if c is not None)
        for res in range(p):
            out.append(GlobalClass(p, q, local, res))
    return out


def global_classes_up_to(q: int, p: int, max_level: int, budget: int | None = None) -> list[tuple[GlobalClass, int]]:
    """All Z/p classes with log_q(conductor height) <= max_level, with that level."""
    group = GroupSpec.cyclic(p)
    height = conductor_height(group)
    places = places_up_to(q, max_level // 2, budget)
    per_place = []
    for v in places:
        bound = max_level // v.degree
        classes = [(c, v.degree * conductor(c)) for c in _local_wild(p, v.residue_size, bound - 1)] if bound >= 2 else []
        per_place.append((v, [(c, lv) for c, lv in classes if lv <= max_level]))
    out: list[tuple[GlobalClass, int]] = []

    def walk(i, chosen, level):
        if i == len(per_place):
            for res in range(p):
                out.append((GlobalClass(p, q, tuple(chosen), res), level))
                check_budget(len(out), budget, "global enumeration")
            return
        walk(i + 1, chosen, level)
        v, opts = per_place[i]
        for c, lv in opts:
            if level + lv <= max_level:
                walk(i + 1, chosen + [(v, c)], level + lv)

    walk(0, [], 0)
    for g, lv in out:
        if g.log_height(height) != lv:
            raise InvariantViolation("height is not additive over places")
    return out


def global_count_series(q: int, p: int, max_level: int, budget: int | None = None) -> CoeffSeries:
    coeffs = [0] * (max_level + 1)
    for _, lv in global_classes_up_to(q, p, max_level, budget):
        coeffs[lv] += 1
    return CoeffSeries(tuple(coeffs))


# --------------------------------------------------------------------------
# rational-function oracle (degree-1 places)


def _place_root(v: Place) -> int:
    if v.degree != 1:
        raise InputError("the rational-function oracle handles degree-1 places only")
    return 0 if v.is_infinite else v.poly[0]


@dataclass(frozen=True)
class _RatFn:
    """Constant plus principal parts: parts[k][i-1] is the coefficient of (t - a_k)^{-i} (or t^i at infinity)."""

    const: int
    parts: tuple[tuple[int, ...], ...]


def _ratfn_add(fq: GF, f: _RatFn, g: _RatFn) -> _RatFn:
    return _RatFn(
        fq.add(f.const, g.const),
        tuple(tuple(fq.add(a, b) for a, b in zip(x, y)) for x, y in zip(f.parts, g.parts)),
    )


def _ratfn_wp(fq: GF, g: _RatFn, bounds: Sequence[int]) -> _RatFn | None:
    """g^p - g expressed in the same basis, or None if it leaves the box.

    For the basis at one place with uniformizer s (s = t - a, or 1/t at
    infinity), (sum c_i s^{-i})^p = sum c_i^p s^{-pi}; the parts at distinct
    places do not interact because each basis function vanishes at every
    other place and has zero constant term.
    """
    p = fq.p
    parts = []
    for coeffs, bound in zip(g.parts, bounds):
        new = [fq.neg(c) for c in coeffs] + [0] * (bound - len(coeffs))
        for i, c in enumerate(coeffs, start=1):
            if c:
                if p * i > bound:
                    return None
                new[p * i - 1] = fq.add(new[p * i - 1], fq.frobenius(c))
        parts.append(tuple(new[:bound]))
    return _RatFn(fq.sub(fq.frobenius(g.const), g.const), tuple(parts))


def _box(fq: GF, bounds: Sequence[int]) -> list[_RatFn]:
    out = []
    for const in range(fq.q):
        for combo in itertools.product(*(itertools.product(range(fq.q), repeat=b) for b in bounds)):
            out.append(_RatFn(const, tuple(combo)))
    return out


def ratfn_canonical(fq: GF, f: _RatFn, support: Sequence[Place]) -> tuple:
    """Canonical global form: local reduce of each principal part plus the residue of the constant."""
    group = GroupSpec.cyclic(fq.p)
    local = []
    for v, coeffs in zip(support, f.parts):
        tail = LaurentTail(fq, {i: c for i, c in enumerate(coeffs, start=1) if c})
        c = reduce(WittTail(group, fq, ((tail,),)))
        if any(c.unram):
            raise InvariantViolation("principal part produced an unramified residue")
        if c.has_wild():
            local.append((str(v), c.wild[0][0]))
    residue = unram_table(fq, 1).labels[(f.const,)]
    return (tuple(local), residue)


def ratfn_oracle(q: int, support: Sequence[Place], pole_bounds: Sequence[int], budget: int | None = None) -> list[list[_RatFn]]:
    """Classes of the box L(D) of rational functions modulo g^p - g.

    Differences g^p - g inside the box come from g with pole orders at most
    bound/p at each place, and all such g lie in the box too.
    """
    fq = _q_field(q)
    for v in support:
        _place_root(v)
    elements = _box(fq, pole_bounds)
    check_budget(len(elements) ** 2, budget, "rational-function oracle")
    index = {f: n for n, f in enumerate(elements)}
    parent = list(range(len(elements)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    shifts = {w for g in elements if (w := _ratfn_wp(fq, g, pole_bounds)) is not None}
    for n, f in enumerate(elements):
        for w in shifts:
            m = index[_ratfn_add(fq, f, w)]
            ra, rb = find(n), find(m)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[_RatFn]] = {}
    for n, f in enumerate(elements):
        groups.setdefault(find(n), []).append(f)
    return [groups[k] for k in sorted(groups)]


@dataclass(frozen=True)
class OracleAgreement:
    orbits: int
    brute: int
    agree: bool
    detail: str


def check_global_oracle(q: int, support: Sequence[Place], pole_bounds: Sequence[int], budget: int | None = None) -> OracleAgreement:
    """The orbit quotient maps bijectively onto the brute-force canonical set."""
    fq = _q_field(q)
    orbits = ratfn_oracle(q, support, pole_bounds, budget)
    images = []
    for orbit in orbits:
        forms = {ratfn_canonical(fq, f, support) for f in orbit}
        if len(forms) != 1:
            return OracleAgreement(len(orbits), -1, False, "orbit with several canonical forms")
        images.append(forms.pop())
    if len(set(images)) != len(images):
        return OracleAgreement(len(orbits), -1, False, "two orbits share a canonical form")
    brute = brute_global_enum(q, fq.p, support, pole_bounds, budget)
    brute_keys = {(tuple((str(v), c.wild[0][0]) for v, c in g.local), g.residue) for g in brute}
    agree = brute_keys == set(images)
    return OracleAgreement(len(orbits), len(brute), agree, "ok" if agree else "canonical sets differ")


# --------------------------------------------------------------------------
# fitting


def count_N(series: CoeffSeries, M: int) -> int:
    return sum(series.coeffs[: M + 1])


@dataclass(frozen=True)
class FitResult:
    a_hat: float
    b_hat: float
    residuals: tuple[float, ...]
    window: tuple[int, int]
    ratio_exponent: float

    def to_json(self) -> dict:
        return {
            "a_hat": round(self.a_hat, 12),
            "b_hat": round(self.b_hat, 12),
            "ratio_exponent": round(self.ratio_exponent, 12),
            "residuals": [round(r, 12) for r in self.residuals],
            "window": list(self.window),
        }


def fit_exponents(counts: Sequence[tuple[int, int]], q: int) -> FitResult:
    """Least squares of log N against a * M log q + (b - 1) log M + c on the upper half."""
    pts = sorted((M, N) for M, N in counts if M >= 1)
    if len(pts) < 8:
        raise InputError("need at least 8 fit points")
    if any(N <= 0 for _, N in pts):
        raise InputError("counts must be positive")
    if len({N for _, N in pts}) == 1:
        raise InputError("degenerate fit: all counts equal")
    window = pts[len(pts) // 2 :]
    Ms = np.array([M for M, _ in window], dtype=float)
    logN = np.array([math.log(N) for _, N in window])
    A = np.column_stack([Ms * math.log(q), np.log(Ms), np.ones_like(Ms)])
    coef, *_ = np.linalg.lstsq(A, logN, rcond=None)
    resid = logN - A @ coef
    (M0, N0), (M1, N1) = window[0], window[-1]
    ratio_exp = (math.log(N1, q) - math.log(N0, q)) / (M1 - M0)
    return FitResult(float(coef[0]), float(coef[1]) + 1.0, tuple(float(r) for r in resid), (window[0][0], window[-1][0]), ratio_exp)


def series_counts(series: CoeffSeries, jumps_only: bool = True) -> list[tuple[int, int]]:
    """(M, N(q^M)) pairs; by default only at levels where the count actually grows.

    When every height is a multiple of some step (all conductors of Z/2 are
    even), sampling between jumps only adds a sawtooth that the log-power fit
    cannot absorb.
    """
    sums = series.partial_sums()
    return [(M, s) for M, s in enumerate(sums) if not jumps_only or M == 0 or series.coeffs[M]]


def ratio_test_exponent(counts: Sequence[tuple[int, int]], q: int) -> float:
    pts = sorted((M, N) for M, N in counts if M >= 1)
    window = pts[len(pts) // 2 :]
    (M0, N0), (M1, N1) = window[0], window[-1]
    return (math.log(N1, q) - math.log(N0, q)) / (M1 - M0)


# --------------------------------------------------------------------------
# comparable heights


@dataclass(frozen=True)
class GlobalHeight:
    """A local height at every place, with finitely many places overridden."""

    default: HeightSpec
    overrides: tuple[tuple[Place, HeightSpec], ...] = ()

    def at(self, v: Place) -> HeightSpec:
        for w, h in self.overrides:
            if w == v:
                return h
        return self.default

    def log_height(self, g: GlobalClass) -> Fraction:
        return sum((v.degree * self.at(v).local_value(c) for v, c in g.local), Fraction(0))

    def series(self, q: int, N: int) -> CoeffSeries:
        total = adelic_series(q, self.default, N)
        for v, h in self.overrides:
            # swap the default factor at v for the override
            old = local_factor(v.residue_size, self.default, N // v.degree).spread(v.degree, N)
            new = local_factor(v.residue_size, h, N // v.degree).spread(v.degree, N)
            total = series_div(total, old).mul(new)
        return total


def series_div(a: CoeffSeries, b: CoeffSeries) -> CoeffSeries:
    """a / b for b with constant term 1."""
    if b.coeffs[0] != 1:
        raise InputError("divisor needs constant term 1")
    N = min(a.N, b.N)
    out = list(a.coeffs[: N + 1])
    for n in range(N + 1):
        for k in range(1, n + 1):
            if b.coeffs[k]:
                out[n] -= b.coeffs[k] * out[n - k]
    return CoeffSeries(tuple(out))


def local_gap(h1: HeightSpec, h2: HeightSpec, r_max: int) -> tuple[Fraction, Fraction]:
    """sup and inf of c1 - c2 over conductor strata, requiring the gap to die out.

    The gap is certified bounded only if it vanishes on the upper half of the
    scanned strata.
    """
    if h1.group != h2.group:
        raise InputError("heights on different groups")
    gaps = [Fraction(0)]
    for r in conductor_values(h1.group, r_max):
        v1, v2 = h1.value_of(r), h2.value_of(r)
        if v1 is None or v2 is None:
            raise InputError("comparability needs both heights on every stratum")
        gap = Fraction(v1) - Fraction(v2)
        if gap and r > r_max // 2:
            raise InputError(f"local gap does not die out (nonzero at stratum {r})")
        gaps.append(gap)
    return max(gaps), min(gaps)


@dataclass(frozen=True)
class HarnessReport:
    sup_gap: Fraction
    inf_gap: Fraction
    pointwise_ok: bool
    sampled: int
    fit1: FitResult
    fit2: FitResult
    tolerance: float

    @property
    def exponents_agree(self) -> bool:
        return (
            abs(self.fit1.a_hat - self.fit2.a_hat) <= self.tolerance
            and abs(self.fit1.b_hat - self.fit2.b_hat) <= self.tolerance
        )

    @property
    def ok(self) -> bool:
        return self.pointwise_ok and self.exponents_agree

    def to_json(self) -> dict:
        return {
            "sup_gap": f"{self.sup_gap.numerator}/{self.sup_gap.denominator}",
            "inf_gap": f"{self.inf_gap.numerator}/{self.inf_gap.denominator}",
            "pointwise_ok": self.pointwise_ok,
            "sampled": self.sampled,
            "fit1": self.fit1.to_json(),
            "fit2": self.fit2.to_json(),
            "exponents_agree": self.exponents_agree,
            "tolerance": self.tolerance,
        }


def comparable_heights_harness(
    H1: GlobalHeight | HeightSpec,
    H2: GlobalHeight | HeightSpec,
    q: int,
    N: int,
    sample: Sequence[GlobalClass] = (),
    tolerance: float = 0.1,
) -> HarnessReport:
    """Certify that log H1 - log H2 is bounded, check it on a sample, then compare fits.

    The defaults must agree on every stratum; the overridden places may differ
    by a gap that vanishes beyond finitely many strata.  The bound on
    log H1 - log H2 is then the sum over those places of deg(v) times the
    local gap range.
    """
    H1 = H1 if isinstance(H1, GlobalHeight) else GlobalHeight(H1)
    H2 = H2 if isinstance(H2, GlobalHeight) else GlobalHeight(H2)
    if H1.default.scale != H2.default.scale:
        raise InputError("heights must share the value denominator")
    r_max = max(4 * N, 8 * H1.default.group.p ** H1.default.group.exponent)
    dsup, dinf = local_gap(H1.default, H2.default, r_max)
    if dsup or dinf:
        raise InputError("default local heights differ; global gap unbounded")
    places = {v for v, _ in H1.overrides} | {v for v, _ in H2.overrides}
    hi = lo = Fraction(0)
    sup_gap = inf_gap = Fraction(0)
    for v in places:
        s, i = local_gap(H1.at(v), H2.at(v), r_max)
        hi += v.degree * s
        lo += v.degree * i
        sup_gap, inf_gap = max(sup_gap, s), min(inf_gap, i)
    pointwise_ok = all(lo <= H1.log_height(g) - H2.log_height(g) <= hi for g in sample)
    scale = H1.default.scale
    fit1 = fit_exponents(_rescaled_counts(H1.series(q, N * scale), scale), q)
    fit2 = fit_exponents(_rescaled_counts(H2.series(q, N * scale), scale), q)
    return HarnessReport(sup_gap, inf_gap, pointwise_ok, len(sample), fit1, fit2, tolerance)


def _rescaled_counts(series: CoeffSeries, scale: int) -> list[tuple[int, int]]:
    """Counts at heights q^M for integral M, sampled where the count grows."""
    sums = series.partial_sums()
    out = []
    for M in range(0, series.N // scale + 1):
        lo = (M - 1) * scale + 1
        if M == 0 or any(series.coeffs[lo : M * scale + 1]):
            out.append((M, sums[M * scale]))
    return out
