"""a- and b-invariants of raising functions.

A raising function is described by its value set together with, for each
value r, the dimension of the fiber over r and the number of top-dimensional
components of that fiber.  The value sets used here are eventually periodic:
a finite base window of values repeats with period P while fiber dimensions
grow by a fixed increment per period.  That structure makes the supremum of
(1 + dim) / r exactly computable.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .errors import InputError, InvariantViolation, check_budget
from .field import GF, field as make_field
from .torsor import (
    GroupSpec,
    LongFlag,
    canonical_classes,
    dim_group,
    disc_exponent,
    orbit_oracle,
    reduce,
)


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def format_fraction(x: Fraction) -> str:
    x = _frac(x)
    return f"{x.numerator}/{x.denominator}"


# --------------------------------------------------------------------------
# raising specs


@dataclass(frozen=True)
class Fiber:
    value: Fraction
    dim: int
    components: int = 1


@dataclass(frozen=True)
class RaisingSpec:
    """Value set with fiber data.

    explicit: finitely many values listed outright.
    base, period, delta: each base value r spawns r + l*period (l >= 0) with
    dim + l*delta and the same component count.
    excluded: values removed from the periodic part.
    """

    label: str
    explicit: tuple[Fiber, ...] = ()
    base: tuple[Fiber, ...] = ()
    period: Fraction | None = None
    delta: int = 0
    excluded: frozenset = frozenset()
    collisions: tuple = ()

    def __post_init__(self):
        if self.base and self.period is None:
            raise InputError("a periodic base needs a period")
        if self.period is not None and self.period <= 0:
            raise InputError("period must be positive")
        for f in self.explicit + self.base:
            if f.value <= 0 or f.dim < 0 or f.components < 1:
                raise InputError(f"bad fiber {f}")
        if self.base:
            lo = min(f.value for f in self.base)
            if max(f.value for f in self.base) >= lo + self.period:
                raise InputError("base values must fit in one period window")
        values = [f.value for f in self.explicit]
        if len(set(values)) != len(values):
            raise InputError("repeated explicit value")
        for f in self.explicit:
            if self._periodic_fiber(f.value) is not None:
                raise InputError(f"explicit value {f.value} collides with the periodic part")

    @property
    def certified(self) -> bool:
        return self.period is not None or not self.base

    def _periodic_fiber(self, value: Fraction) -> Fiber | None:
        if value in self.excluded:
            return None
        for f in self.base:
            steps = (value - f.value) / self.period
            if steps >= 0 and steps.denominator == 1:
                return Fiber(value, f.dim + int(steps) * self.delta, f.components)
        return None

    def fiber(self, value) -> Fiber | None:
        value = _frac(value)
        for f in self.explicit:
            if f.value == value:
                return f
        return self._periodic_fiber(value)

    def fiber_dim(self, value) -> int:
        f = self.fiber(value)
        if f is None:
            raise InputError(f"{value} is not a value of {self.label}")
        return f.dim

    def fiber_top_components(self, value) -> int:
        f = self.fiber(value)
        if f is None:
            raise InputError(f"{value} is not a value of {self.label}")
        return f.components

    def fibers(self, up_to) -> list[Fiber]:
        """All fibers with value <= up_to, increasing."""
        up_to = _frac(up_to)
        out = [f for f in self.explicit if f.value <= up_to]
        for b in self.base:
            ell = 0
            while b.value + ell * self.period <= up_to:
                f = self._periodic_fiber(b.value + ell * self.period)
                if f is not None:
                    out.append(f)
                ell += 1
        out.sort(key=lambda f: f.value)
        return out

    def values(self, up_to) -> list[Fraction]:
        return [f.value for f in self.fibers(up_to)]

    def denominator(self) -> int:
        """M with M * value integral for every value."""
        dens = [f.value.denominator for f in self.explicit + self.base]
        if self.period is not None:
            dens.append(self.period.denominator)
        return math.lcm(*dens) if dens else 1

    def limit_ratio(self) -> Fraction | None:
        if self.period is None:
            return None
        return Fraction(self.delta) / self.period


def ratio(f: Fiber) -> Fraction:
    return Fraction(1 + f.dim) / f.value


@dataclass(frozen=True)
class ABResult:
    a: Fraction
    D: tuple[Fraction, ...]
    b: int
    epsilon_margin: Fraction
    certified: bool
    best_other: Fraction | None = None
    d_infinite: bool = False

    def to_json(self) -> dict:
        return {
            "a": format_fraction(self.a),
            "D": [format_fraction(v) if v.denominator != 1 else int(v) for v in self.D],
            "b": self.b,
            "epsilon_margin": format_fraction(self.epsilon_margin),
            "certified": self.certified,
            "d_infinite": self.d_infinite,
        }


def ab_invariants(spec: RaisingSpec, scan_bound=None) -> ABResult:
    """a = sup (1 + dim)/r, D = values attaining it, b = components over D.

    With a periodic part each orbit r + lP has ratio moving monotonically
    toward the limit delta/P, so one pass over the base (skipping excluded
    values) plus the limit settles the supremum exactly.
    """
    if spec.period is None:
        fibers = list(spec.explicit)
        if scan_bound is not None:
            fibers = [f for f in fibers if f.value <= _frac(scan_bound)]
        if not fibers:
            raise InputError("empty value set")
        return _finite_ab(fibers, certified=not spec.base)
    if scan_bound is not None and _frac(scan_bound) < min(f.value for f in spec.base) + spec.period:
        raise InputError("scan bound shorter than one period")
    limit = spec.limit_ratio()
    candidates: list[tuple[Fraction, Fiber]] = [(ratio(f), f) for f in spec.explicit]
    runners_up: list[Fraction] = [limit]
    d_infinite = False
    for b in spec.base:
        first, second = _orbit_members(spec, b, 2)
        r0 = ratio(first)
        if r0 > limit:
            candidates.append((r0, first))
            runners_up.append(ratio(second))
        elif r0 == limit:
            d_infinite = True
    a = max([limit] + [r for r, _ in candidates])
    D = sorted(f.value for r, f in candidates if r == a)
    if a == limit:
        # supremum only approached (or attained infinitely often)
        others = [r for r, _ in candidates if r < a]
        best = max(others, default=None)
        return ABResult(a, tuple(D), 0, Fraction(0), True, best, d_infinite or bool(D))
    b_count = sum(f.components for r, f in candidates if r == a)
    others = [r for r, _ in candidates if r < a] + runners_up
    best = max(others)
    return ABResult(a, tuple(D), b_count, a - best, True, best, False)


def _orbit_members(spec: RaisingSpec, base: Fiber, count: int) -> list[Fiber]:
    out, ell = [], 0
    limit = len(spec.excluded) + count + 1
    while len(out) < count:
        f = spec._periodic_fiber(base.value + ell * spec.period)
        if f is not None:
            out.append(f)
        ell += 1
        if ell > limit + count:
            raise InvariantViolation("orbit exhausted by exclusions")
    return out


def _finite_ab(fibers: list[Fiber], certified: bool) -> ABResult:
    rs = [(ratio(f), f) for f in fibers]
    a = max(r for r, _ in rs)
    D = tuple(sorted(f.value for r, f in rs if r == a))
    b = sum(f.components for r, f in rs if r == a)
    others = [r for r, _ in rs if r < a]
    best = max(others, default=None)
    margin = a - best if best is not None else a
    return ABResult(a, D, b, margin, certified, best)


def brute_ab(spec: RaisingSpec, scan_bound) -> ABResult:
    """Uncertified scan of every value up to scan_bound."""
    fibers = spec.fibers(scan_bound)
    if not fibers:
        raise InputError("empty value set")
    return _finite_ab(fibers, certified=False)


@dataclass(frozen=True)
class SuitabilityReport:
    ok: bool
    reason: str
    witness: Fraction | None

    def to_json(self) -> dict:
        return {
            "strongly_suitable": self.ok,
            "reason": self.reason,
            "best_other_ratio": None if self.witness is None else format_fraction(self.witness),
        }


def strongly_suitable_check(spec: RaisingSpec, ab: ABResult, scan_bound=None) -> SuitabilityReport:
    """D finite and nonempty with a positive gap to every other ratio.

    Also re-checks the gap against every scanned value, so a result whose D
    omits a tying value is rejected.
    """
    if not ab.certified:
        return SuitabilityReport(False, "result not certified", ab.best_other)
    if ab.d_infinite or not ab.D:
        return SuitabilityReport(False, "supremum not attained on a finite set", ab.best_other)
    if ab.epsilon_margin <= 0:
        return SuitabilityReport(False, "no positive margin", ab.best_other)
    bound = scan_bound if scan_bound is not None else _default_scan(spec, ab)
    dset = set(ab.D)
    for f in spec.fibers(bound):
        r = ratio(f)
        if f.value in dset:
            if r != ab.a:
                return SuitabilityReport(False, f"value {f.value} in D has ratio {r}", r)
        elif r > ab.a - ab.epsilon_margin:
            return SuitabilityReport(False, f"value {f.value} outside D has ratio {r}", r)
    return SuitabilityReport(True, "ok", ab.best_other)


def _default_scan(spec: RaisingSpec, ab: ABResult) -> Fraction:
    top = max([f.value for f in spec.explicit + spec.base] + list(ab.D) + [Fraction(1)])
    return top + 3 * (spec.period or 0) + 1


def check_periodicity(spec: RaisingSpec, dim_fn, periods: int = 2) -> None:
    """dim_fn(r + P) - dim_fn(r) equals the increment for r over `periods` windows."""
    if spec.period is None:
        return
    for b in spec.base:
        for ell in range(periods):
            r = b.value + ell * spec.period
            if dim_fn(r + spec.period) - dim_fn(r) != spec.delta:
                raise InvariantViolation(f"periodicity fails at {r}")


# --------------------------------------------------------------------------
# conductor


def conductor_values(group: GroupSpec, up_to: int) -> list[int]:
    """Conductor values r >= 2 (where the conductor-<=r dimension increases)."""
    return [r for r in range(2, up_to + 1) if dim_group(group, r) > dim_group(group, r - 1)]


def conductor_spec(group: GroupSpec) -> RaisingSpec:
    p = group.p
    P = p**group.exponent
    delta = sum(P - p ** (group.exponent - e) for e in group.exponents)
    base = tuple(Fiber(Fraction(r), dim_group(group, r)) for r in conductor_values(group, P + 1))
    spec = RaisingSpec(f"conductor[{group}]", base=base, period=Fraction(P), delta=delta)
    check_periodicity(spec, lambda r: dim_group(group, int(r)))
    return spec


# --------------------------------------------------------------------------
# v-functions


@dataclass(frozen=True)
class RepSpec:
    """V = sum of Jordan blocks V_{d_lambda} of the Z/p action."""

    p: int
    dims: tuple[int, ...]

    def __post_init__(self):
        if not self.dims:
            raise InputError("empty representation")
        if any(not 1 <= d <= self.p for d in self.dims):
            raise InputError(f"block sizes must lie in [1, {self.p}]")
        object.__setattr__(self, "dims", tuple(sorted(self.dims, reverse=True)))

    @classmethod
    def parse(cls, p: int, text: str) -> "RepSpec":
        """``"3,2,2"`` or ``"2^5"`` style block lists."""
        dims: list[int] = []
        for part in text.split(","):
            part = part.strip()
            if "^" in part:
                d, k = part.split("^")
                dims.extend([int(d)] * int(k))
            elif part:
                dims.append(int(part))
        return cls(p, tuple(dims))

    @property
    def d(self) -> int:
        return sum(self.dims)

    @property
    def l(self) -> int:
        return len(self.dims)

    @property
    def D_V(self) -> int:
        return sum((d - 1) * d // 2 for d in self.dims)

    def __str__(self) -> str:
        counts = Counter(self.dims)
        return "+".join(f"V{d}^{k}" if k > 1 else f"V{d}" for d, k in sorted(counts.items(), reverse=True))


def sht(rep: RepSpec, j: int) -> int:
    if j % rep.p == 0:
        raise InputError("shift number needs p not dividing j")
    return sum((i * j) // rep.p for d in rep.dims for i in range(1, d))


def v_value(rep: RepSpec, j: int) -> int:
    return rep.d - rep.l + sht(rep, j)


def jump_dim(p: int, j: int) -> int:
    return j - j // p


def _require_dv(rep: RepSpec) -> None:
    if rep.D_V != rep.p:
        raise InputError(f"D_V = {rep.D_V} differs from p = {rep.p}")


def v_spec(rep: RepSpec) -> RaisingSpec:
    """Values v(j) over jumps p ∤ j; colliding jumps keep the larger dimension."""
    _require_dv(rep)
    p = rep.p
    by_value: dict[int, list[int]] = {}
    for j in range(1, p):
        by_value.setdefault(v_value(rep, j), []).append(j)
    base, collisions = [], []
    for value, js in sorted(by_value.items()):
        dims = [jump_dim(p, j) for j in js]
        top = max(dims)
        if len(js) > 1:
            collisions.append((value, tuple(js)))
        base.append(Fiber(Fraction(value), top, dims.count(top)))
    spec = RaisingSpec(
        f"v[{rep}, p={p}]", base=tuple(base), period=Fraction(p), delta=p - 1, collisions=tuple(collisions)
    )
    for j in range(1, 3 * p):
        if j % p and v_value(rep, j + p) != v_value(rep, j) + rep.D_V:
            raise InvariantViolation("shift number is not periodic")
    return spec


def v_gap_check(rep: RepSpec, up_to: int | None = None) -> list[tuple[int, int]]:
    """(j, dim C_j - v(j)) for p ∤ j <= up_to; raises unless all <= -1 with -1 at j = p-1."""
    _require_dv(rep)
    p = rep.p
    up_to = 10 * p if up_to is None else up_to
    rows = [(j, jump_dim(p, j) - v_value(rep, j)) for j in range(1, up_to + 1) if j % p]
    if any(gap > -1 for _, gap in rows):
        raise InvariantViolation(f"dimension exceeds v - 1 for {rep}")
    if dict(rows)[p - 1] != -1:
        raise InvariantViolation(f"gap at j = p-1 is not -1 for {rep}")
    return rows


def v_ab(rep: RepSpec) -> ABResult:
    """a = 1 and b = #{j < p : l - d + j - sht(j) = -1}, cross-checked against the scan."""
    _require_dv(rep)
    p = rep.p
    b = sum(1 for j in range(1, p) if rep.l - rep.d + j - sht(rep, j) == -1)
    v_gap_check(rep)
    spec = v_spec(rep)
    general = ab_invariants(spec)
    if general.a != 1 or general.b != b:
        raise InvariantViolation(f"closed form (1, {b}) disagrees with scan ({general.a}, {general.b})")
    return general


# the five families of representations with D_V = p
def standard_reps() -> list[RepSpec]:
    reps = [RepSpec(p, (2,) * p) for p in (2, 3, 5, 7)]
    reps += [RepSpec(2, (2, 2)), RepSpec(3, (3,)), RepSpec(5, (3, 2, 2)), RepSpec(7, (4, 2))]
    return reps


# --------------------------------------------------------------------------
# c^t family


def ct_construct(group: GroupSpec, m: int, t) -> RaisingSpec:
    """A strongly suitable raising function with b = m.

    Picks r_i = r* + (i-1)P (r* the best base value of the conductor), whose
    ratios strictly decrease, and moves fiber r_i to the value (1 + dim r_i) t.
    Every moved fiber then has ratio 1/t; the untouched conductor fibers keep
    ratio <= a(c_cond) < 1/t.  Requiring (1 + dim r_m) t < 2 keeps the moved
    values below every conductor value, so no fibers merge.
    """
    if m < 1:
        raise InputError("m must be >= 1")
    t = _frac(t)
    if t <= 0:
        raise InputError("t must be positive")
    cond = conductor_spec(group)
    ab = ab_invariants(cond)
    if ab.d_infinite or not ab.D:
        raise InputError("conductor supremum not attained; no c^t family")
    r_star = min(ab.D)
    chosen = [r_star + i * cond.period for i in range(m)]
    fibers = [cond.fiber(r) for r in chosen]
    ratios = [ratio(f) for f in fibers]
    if any(x <= y for x, y in zip(ratios, ratios[1:])):
        raise InvariantViolation("selected ratios are not strictly decreasing")
    threshold = min(1 / ab.a, Fraction(2, 1 + fibers[-1].dim))
    if t >= threshold:
        raise InputError(f"t = {t} violates the threshold {threshold}")
    explicit = tuple(Fiber((1 + f.dim) * t, f.dim, f.components) for f in fibers)
    return RaisingSpec(
        f"ct[{group}, m={m}, t={format_fraction(t)}]",
        explicit=explicit,
        base=cond.base,
        period=cond.period,
        delta=cond.delta,
        excluded=frozenset(chosen),
    )


def ct_threshold(group: GroupSpec, m: int) -> Fraction:
    cond = conductor_spec(group)
    ab = ab_invariants(cond)
    r_m = min(ab.D) + (m - 1) * cond.period
    return min(1 / ab.a, Fraction(2, 1 + cond.fiber_dim(r_m)))


# --------------------------------------------------------------------------
# subgroups and long flags


def closure(group: GroupSpec, gens) -> frozenset:
    zero = tuple(0 for _ in group.exponents)
    elems = {zero}
    frontier = [zero]
    gens = [tuple(g) for g in gens]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                s = group.add(a, g)
                if s not in elems:
                    elems.add(s)
                    nxt.append(s)
        frontier = nxt
    return frozenset(elems)


def subgroups(group: GroupSpec) -> list[frozenset]:
    """All subgroups of the character group (isomorphic to G), sorted by size then content."""
    if group.order > 64:
        raise InputError("subgroup lattice capped at #G <= 64")
    elements = list(group.elements())
    found = {closure(group, [])}
    frontier = list(found)
    while frontier:
        nxt = []
        for s in frontier:
            for g in elements:
                if g not in s:
                    t = closure(group, list(s) + [g])
                    if t not in found:
                        found.add(t)
                        nxt.append(t)
        frontier = nxt
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def subgroup_chains(group: GroupSpec) -> list[tuple[frozenset, ...]]:
    """Strictly increasing chains of subgroups ending at the whole group."""
    subs = subgroups(group)
    full = frozenset(group.elements())
    above = {s: [t for t in subs if s < t] for s in subs}
    out = []

    def extend(chain):
        if chain[-1] == full:
            out.append(tuple(chain))
            return
        for t in above[chain[-1]]:
            extend(chain + [t])

    for s in subs:
        extend([s])
    return out


def flag_enumerate(group: GroupSpec, n: int, budget: int | None = None) -> list[LongFlag]:
    """All long flags with disc = n, jumps being non-negative integers."""
    if n < 0:
        raise InputError("disc must be >= 0")
    subs = subgroups(group)
    full = frozenset(group.elements())
    above = {s: [t for t in subs if s < t] for s in subs}
    out: list[LongFlag] = []

    def extend(steps, current, last, remaining):
        if current == full:
            if remaining == 0:
                out.append(LongFlag(group, tuple(steps)))
                check_budget(len(out), budget, "flag enumeration")
            return
        for t in above[current]:
            grow = len(t) - len(current)
            for j in range(last + 1, remaining // grow + 1):
                extend(steps + [(j, t)], t, j, remaining - j * grow)

    for s0 in subs:
        extend([(0, s0)], s0, 0, n)
    return out


def flag_count_bound(group: GroupSpec, n: int) -> int:
    """A * sum_{k <= #G} C(n, k), with A the number of subgroup chains.

    Positive jumps form a subset of {1..n} of size at most #G, and the
    subgroups at the jumps form a chain, so this bounds the flag count for
    every n (the single binomial C(n, #G) only does so for large n).
    """
    A = len(subgroup_chains(group))
    return A * sum(math.comb(n, k) for k in range(group.order + 1))


def naive_flag_bound(flag: LongFlag) -> Fraction:
    """max(J) * #G * (1 - 1/p)."""
    g = flag.group
    return max(flag.jumps()) * g.order * (1 - Fraction(1, g.p))


def index_flag_bound(flag: LongFlag) -> int:
    """max(J) * (#G - #S_0), which every flag satisfies."""
    return max(flag.jumps()) * (flag.group.order - len(flag.steps[0][1]))


# --------------------------------------------------------------------------
# discriminant fibers


@dataclass(frozen=True)
class FiberEstimate:
    group: GroupSpec
    r: int
    counts: tuple[tuple[int, int], ...]  # (q, number of wild classes with disc = r)
    dim: int | None
    method: str

    def to_json(self) -> dict:
        return {
            "group": str(self.group),
            "r": self.r,
            "counts": [{"q": q, "count": c} for q, c in self.counts],
            "dim_estimate": self.dim,
            "empty": self.dim is None,
            "method": self.method,
            "label": "empirical",
        }


def disc_fiber_count(group: GroupSpec, fq: GF, r: int, method: str = "canonical", budget: int | None = None) -> int:
    """Number of classes with disc exponent r, weighted by 1/#G.

    The conductor never exceeds the disc exponent, so classes of conductor
    <= r cover the fiber.  ``oracle`` walks the pole-bounded orbit quotient,
    ``canonical`` walks the reduced wild data directly.
    """
    if method == "canonical":
        return sum(1 for c in canonical_classes(group, fq, r, budget) if disc_exponent(c) == r)
    if method == "oracle":
        total = 0
        for oc in orbit_oracle(group, fq, max(r - 1, 0), budget):
            c = reduce(oc.representative)
            if disc_exponent(c) == r:
                total += 1
        if total % group.order:
            raise InvariantViolation("oracle fiber not a union of unramified twists")
        return total // group.order
    raise InputError(f"unknown method {method!r}")


def disc_fiber_dim_estimate(
    group: GroupSpec, r: int, q: int, extensions=(1, 2), method: str = "canonical", budget: int | None = None
) -> FiberEstimate:
    """Dimension guess round(log_{q^s} N_s) at the largest s, with all counts."""
    p = group.p
    k = round(math.log(q, p))
    if p**k != q:
        raise InputError(f"q = {q} is not a power of {p}")
    counts = []
    for s in extensions:
        fq = make_field(p, k * s)
        counts.append((fq.q, disc_fiber_count(group, fq, r, method, budget)))
    q_top, n_top = counts[-1]
    dim = None if n_top == 0 else round(math.log(n_top) / math.log(q_top))
    return FiberEstimate(group, r, tuple(counts), dim, method)


def disc_ab_estimate(group: GroupSpec, q: int, r_max: int, extensions=(1, 2), budget: int | None = None) -> ABResult:
    """Empirical a/b for the discriminant exponent from estimated fiber dimensions."""
    fibers = []
    for r in range(1, r_max + 1):
        est = disc_fiber_dim_estimate(group, r, q, extensions, budget=budget)
        if est.dim is not None:
            fibers.append(Fiber(Fraction(r), est.dim))
    if not fibers:
        raise InputError("no nonempty discriminant fibers in range")
    return _finite_ab(fibers, certified=False)
