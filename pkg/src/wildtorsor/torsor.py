"""G-torsors over F_q((t)) for finite abelian p-groups G = prod Z/p^{e_u}.

A torsor is represented by a Witt vector over Laurent tails (one vector per
cyclic factor) modulo the image of the Artin-Schreier-Witt operator.  This
module reduces such vectors to a canonical ``LocalClass``, and computes
conductors, pushforwards along homomorphisms, discriminant exponents and long
flags.  ``orbit_oracle`` is an independent brute-force classifier used to
validate all of it.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .errors import InputError, InvariantViolation, check_budget
from .field import GF, LaurentRing, LaurentTail, field as default_field, format_tail, parse_tail
from .witt import witt_add_values, witt_neg_values, witt_scale_values


# --------------------------------------------------------------------------
# groups


@dataclass(frozen=True)
class GroupSpec:
    """G = prod_u Z/p^{e_u}, exponents sorted ascending."""

    p: int
    exponents: tuple[int, ...]

    def __post_init__(self):
        if self.p < 2 or any(self.p % d == 0 for d in range(2, int(self.p**0.5) + 1)):
            raise InputError(f"p={self.p} is not prime")
        if not self.exponents or any(e < 1 for e in self.exponents):
            raise InputError("group needs at least one factor, each exponent >= 1")
        object.__setattr__(self, "exponents", tuple(sorted(self.exponents)))

    @classmethod
    def parse(cls, text: str) -> "GroupSpec":
        """Parse ``"p:e1,e2,..."``, e.g. ``"2:1,1"`` for (Z/2)^2."""
        try:
            p_part, e_part = text.split(":")
            p = int(p_part)
            exps = tuple(int(s) for s in e_part.split(","))
        except ValueError:
            raise InputError(f"bad group string {text!r}; expected p:e1,e2,...") from None
        return cls(p, exps)

    @classmethod
    def cyclic(cls, p: int, e: int = 1) -> "GroupSpec":
        return cls(p, (e,))

    @property
    def order(self) -> int:
        return self.p ** sum(self.exponents)

    @property
    def rank(self) -> int:
        return len(self.exponents)

    @property
    def exponent(self) -> int:
        return self.exponents[-1]

    def elements(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(self.p**e) for e in self.exponents))

    def add(self, a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
        return tuple((x + y) % self.p**e for x, y, e in zip(a, b, self.exponents))

    def neg(self, a: Sequence[int]) -> tuple[int, ...]:
        return tuple((-x) % self.p**e for x, e in zip(a, self.exponents))

    def __str__(self) -> str:
        return f"{self.p}:{','.join(map(str, self.exponents))}"


def dim_cyclic(p: int, e: int, n: int) -> int:
    """Dimension of the conductor-<=n moduli for Z/p^e (0 for n <= 1)."""
    if n <= 1:
        return 0
    return sum((n - 1) // p ** (e - 1 - j) - (n - 1) // p ** (e - j) for j in range(e))


def dim_group(group: GroupSpec, n: int) -> int:
    return sum(dim_cyclic(group.p, e, n) for e in group.exponents)


def local_class_count(group: GroupSpec, Q: int, n: int) -> tuple[int, int]:
    """(raw count, #G^{-1}-weighted measure) of classes of conductor <= n over F_Q."""
    if n < 0:
        raise InputError("conductor bound must be >= 0")
    measure = Q ** dim_group(group, n)
    return group.order * measure, measure


# --------------------------------------------------------------------------
# Witt vectors over tails


@functools.lru_cache(maxsize=None)
def _ring(fq: GF) -> LaurentRing:
    return LaurentRing(fq)


def _zero(fq: GF, e: int) -> tuple[LaurentTail, ...]:
    return tuple(LaurentTail(fq) for _ in range(e))


def vec_add(fq: GF, e: int, x, y) -> tuple[LaurentTail, ...]:
    return witt_add_values(fq.p, e, x, y, _ring(fq))


def vec_neg(fq: GF, e: int, x) -> tuple[LaurentTail, ...]:
    return witt_neg_values(fq.p, e, x, _ring(fq))


def vec_sub(fq: GF, e: int, x, y) -> tuple[LaurentTail, ...]:
    return vec_add(fq, e, x, vec_neg(fq, e, y))


def vec_scale(fq: GF, e: int, k: int, x) -> tuple[LaurentTail, ...]:
    return witt_scale_values(fq.p, e, k, x, _ring(fq))


def vec_frobenius(x) -> tuple[LaurentTail, ...]:
    return tuple(c.frobenius() for c in x)


def vec_wp(fq: GF, e: int, x) -> tuple[LaurentTail, ...]:
    """F(x) - x on one Witt vector of tails."""
    return vec_sub(fq, e, vec_frobenius(x), x)


@dataclass(frozen=True)
class WittTail:
    """Per cyclic factor u, a tuple of e_u Laurent tails (b_{u0}, ..., b_{u,e_u-1})."""

    group: GroupSpec
    field: GF
    coords: tuple[tuple[LaurentTail, ...], ...]

    def __post_init__(self):
        if len(self.coords) != self.group.rank:
            raise InputError("one coordinate tuple per cyclic factor expected")
        for vec, e in zip(self.coords, self.group.exponents):
            if len(vec) != e:
                raise InputError(f"factor of exponent {e} needs {e} coordinates")
            for c in vec:
                if c.field != self.field:
                    raise InputError("coordinates over a different field")
        if self.field.p != self.group.p:
            raise InputError("field characteristic differs from the group prime")

    @classmethod
    def zero(cls, group: GroupSpec, fq: GF) -> "WittTail":
        return cls(group, fq, tuple(_zero(fq, e) for e in group.exponents))

    @classmethod
    def from_dict(cls, group: GroupSpec, fq: GF, entries: dict[tuple[int, int], LaurentTail]) -> "WittTail":
        coords = []
        for u, e in enumerate(group.exponents):
            coords.append(tuple(entries.get((u, j), LaurentTail(fq)) for j in range(e)))
        return cls(group, fq, tuple(coords))

    def key(self) -> tuple:
        return tuple(tuple(frozenset(c.coeffs.items()) for c in vec) for vec in self.coords)

    def is_tail_only(self) -> bool:
        return all(i >= 0 for vec in self.coords for c in vec for i in c.coeffs)

    def __str__(self) -> str:
        return format_witt_tail(self)


def _check_pair(x: WittTail, y: WittTail) -> None:
    if x.group != y.group or x.field != y.field:
        raise InputError("Witt tails over different groups or fields")


def witt_add(x: WittTail, y: WittTail) -> WittTail:
    _check_pair(x, y)
    coords = tuple(vec_add(x.field, e, a, b) for a, b, e in zip(x.coords, y.coords, x.group.exponents))
    return WittTail(x.group, x.field, coords)


def witt_neg(x: WittTail) -> WittTail:
    coords = tuple(vec_neg(x.field, e, a) for a, e in zip(x.coords, x.group.exponents))
    return WittTail(x.group, x.field, coords)


def witt_sub(x: WittTail, y: WittTail) -> WittTail:
    return witt_add(x, witt_neg(y))


def wp(x: WittTail) -> WittTail:
    coords = tuple(vec_wp(x.field, e, a) for a, e in zip(x.coords, x.group.exponents))
    return WittTail(x.group, x.field, coords)


def is_simple(x: WittTail, n: int) -> bool:
    """-ord(b_{uj}) <= (n-1)/p^{e_u-1-j} for every factor and coordinate."""
    p = x.group.p
    for vec, e in zip(x.coords, x.group.exponents):
        for j, b in enumerate(vec):
            # compare p^{e-1-j} * (-ord) <= n - 1 in integers
            no = b.neg_ord()
            if no != float("-inf") and p ** (e - 1 - j) * no > n - 1:
                return False
    return True


def is_very_simple(x: WittTail, n: int) -> bool:
    return x.is_tail_only() and is_simple(x, n)


def simple_conductor(x: WittTail) -> int:
    """Least n with x simple <= n (0 when no coordinate has a pole)."""
    p = x.group.p
    best = None
    for vec, e in zip(x.coords, x.group.exponents):
        for j, b in enumerate(vec):
            no = b.neg_ord()
            if no != float("-inf"):
                val = p ** (e - 1 - j) * no
                best = val if best is None else max(best, val)
    return 0 if best is None else best + 1


# --------------------------------------------------------------------------
# canonical classes


@dataclass(frozen=True)
class UnramTable:
    """W_e(F_q) / wp W_e(F_q), identified with Z/p^e.

    ``generator`` is the lexicographically first vector whose coset has order
    p^e; residue r is the coset of r * generator; ``representatives[r]`` is
    the lexicographically smallest vector of that coset.
    """

    e: int
    labels: dict
    representatives: tuple
    generator: tuple


@functools.lru_cache(maxsize=None)
def unram_table(fq: GF, e: int, budget: int | None = None) -> UnramTable:
    p = fq.p
    check_budget(fq.q**e, budget, "unramified coset table")
    vectors = list(itertools.product(range(fq.q), repeat=e))

    def add(a, b):
        return witt_add_values(p, e, a, b, fq)

    def wp_const(v):
        return add(tuple(fq.frobenius(c) for c in v), witt_neg_values(p, e, v, fq))

    image = {wp_const(v) for v in vectors}
    if len(image) * p**e != len(vectors):
        raise InvariantViolation("image of wp on W_e(F_q) has the wrong index")
    generator = None
    for v in vectors:
        acc, order = v, 1
        while acc not in image:
            acc = add(acc, v)
            order += 1
        if order == p**e:
            generator = v
            break
    if generator is None:
        raise InvariantViolation("W_e(F_q)/wp is not cyclic")
    labels: dict = {}
    reps = []
    base = (0,) * e
    for r in range(p**e):
        coset = [add(base, w) for w in image]
        for c in coset:
            labels[c] = r
        reps.append(min(coset))
        base = add(base, generator)
    if len(labels) != len(vectors):
        raise InvariantViolation("cosets do not partition W_e(F_q)")
    return UnramTable(e, labels, tuple(reps), generator)


WildPart = tuple[tuple[tuple[tuple[int, int], ...], ...], ...]


@dataclass(frozen=True)
class LocalClass:
    """Canonical class: unramified residues and wild coefficients.

    ``wild[u][j]`` is a sorted tuple of (exponent i, coefficient) with i > 0
    and p not dividing i, for the j-th coordinate of factor u.
    """

    group: GroupSpec
    field: GF
    unram: tuple[int, ...]
    wild: WildPart

    def __post_init__(self):
        p = self.group.p
        for e, r in zip(self.group.exponents, self.unram):
            if not 0 <= r < p**e:
                raise InputError("unramified residue out of range")
        for vec in self.wild:
            for coord in vec:
                for i, c in coord:
                    if i <= 0 or i % p == 0 or c == 0:
                        raise InputError(f"wild support must be positive and prime to p, got {i}")

    def is_trivial(self) -> bool:
        return not any(self.unram) and not self.has_wild()

    def has_wild(self) -> bool:
        return any(coord for vec in self.wild for coord in vec)

    def wild_tails(self) -> tuple[tuple[LaurentTail, ...], ...]:
        return tuple(tuple(LaurentTail(self.field, dict(coord)) for coord in vec) for vec in self.wild)

    def to_json(self) -> dict:
        return {
            "group": str(self.group),
            "unram": list(self.unram),
            "wild": [
                [{str(i): self.field.format(c) for i, c in coord} for coord in vec] for vec in self.wild
            ],
            "text": format_witt_tail(WittTail(self.group, self.field, self.wild_tails())),
        }


def _freeze(tail: LaurentTail) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(tail.coeffs.items()))


def reduce_vector(fq: GF, e: int, coords: Sequence[LaurentTail]) -> tuple[tuple[LaurentTail, ...], tuple[int, ...]]:
    """Split one Witt vector of tails into (wild part, constant vector K in W_e(F_q)).

    Walks coordinates upward.  In coordinate j, terms a t^{-i} with p | i are
    folded to a^{1/p} t^{-i/p} (largest i first) by subtracting wp of the
    single-coordinate vector V^j[a^{1/p} t^{-i/p}]; then the free term c is
    moved into K by subtracting V^j[c].  Both moves leave coordinates below j
    untouched and change coordinate j exactly as described, because S_j is
    linear in the top variables.
    """
    p = fq.p
    x = tuple(coords)
    for c in x:
        if any(i < 0 for i in c.coeffs):
            raise InputError("reduce expects tails (no positive powers of t)")
    K = (0,) * e
    zero = LaurentTail(fq)
    for j in range(e):
        while True:
            divisible = [i for i in x[j].coeffs if i > 0 and i % p == 0]
            if not divisible:
                break
            i = max(divisible)
            a = LaurentTail.monomial(fq, i // p, fq.pth_root(x[j].coeffs[i]))
            y = tuple(a if k == j else zero for k in range(e))
            before = x[j]
            x = vec_sub(fq, e, x, vec_wp(fq, e, y))
            if x[j] != before - (a.frobenius() - a):
                raise InvariantViolation("fold changed coordinate j unexpectedly")
        c0 = x[j].coeffs.get(0)
        if c0:
            y = tuple(LaurentTail.constant(fq, c0) if k == j else zero for k in range(e))
            x = vec_sub(fq, e, x, y)
            K = witt_add_values(p, e, K, tuple(c0 if k == j else 0 for k in range(e)), fq)
    return x, K


def reduce(x: WittTail) -> LocalClass:
    """Canonical representative of the class of x modulo wp."""
    fq = x.field
    unram, wild = [], []
    for vec, e in zip(x.coords, x.group.exponents):
        w, K = reduce_vector(fq, e, vec)
        unram.append(unram_table(fq, e).labels[K])
        wild.append(tuple(_freeze(c) for c in w))
    return LocalClass(x.group, fq, tuple(unram), tuple(wild))


def embed(c: LocalClass) -> WittTail:
    """A WittTail in the class c: wild tails plus the residue's coset representative."""
    fq = c.field
    coords = []
    for vec, r, e in zip(c.wild_tails(), c.unram, c.group.exponents):
        if r:
            rep = unram_table(fq, e).representatives[r]
            const = tuple(LaurentTail.constant(fq, a) for a in rep)
            vec = vec_add(fq, e, vec, const)
        coords.append(tuple(vec))
    return WittTail(c.group, fq, tuple(coords))


def class_eq(x: WittTail, y: WittTail) -> bool:
    return reduce(witt_sub(x, y)).is_trivial()


def conductor(c: LocalClass) -> int:
    """0 without wild part, else 1 + max_{u,j} p^{e_u-1-j} * (largest pole in wild_{uj})."""
    p = c.group.p
    best = None
    for vec, e in zip(c.wild, c.group.exponents):
        for j, coord in enumerate(vec):
            if coord:
                val = p ** (e - 1 - j) * coord[-1][0]
                best = val if best is None else max(best, val)
    return 0 if best is None else best + 1


def jump(c: LocalClass) -> int:
    """Ramification jump of a Z/p-class (its largest pole), 0 if unramified."""
    if c.group.exponents != (1,):
        raise InputError("jump is defined here for Z/p only")
    return max(conductor(c) - 1, 0)


# --------------------------------------------------------------------------
# homomorphisms and characters


def _vp(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("v_p(0)")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class Hom:
    """phi: source -> target with images[h][u] = phi(generator u) in Z/p^{g_h}."""

    source: GroupSpec
    target: GroupSpec
    images: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        p = self.source.p
        if self.target.p != p:
            raise InputError("homomorphism between groups of different primes")
        if len(self.images) != self.target.rank or any(len(r) != self.source.rank for r in self.images):
            raise InputError("image matrix has the wrong shape")
        norm = []
        for row, g in zip(self.images, self.target.exponents):
            mod = p**g
            row = tuple(m % mod for m in row)
            for m, e in zip(row, self.source.exponents):
                if (m * p**e) % mod:
                    raise InputError(f"image {m} has order exceeding p^{e}")
            norm.append(row)
        object.__setattr__(self, "images", tuple(norm))

    def __call__(self, g: Sequence[int]) -> tuple[int, ...]:
        p = self.source.p
        return tuple(
            sum(m * a for m, a in zip(row, g)) % p**gh for row, gh in zip(self.images, self.target.exponents)
        )

    def compose(self, other: "Hom") -> "Hom":
        """self o other."""
        if other.target != self.source:
            raise InputError("composition of incompatible homomorphisms")
        cols = []
        for u, e in enumerate(other.source.exponents):
            unit = tuple(1 if i == u else 0 for i in range(other.source.rank))
            cols.append(self(other(unit)))
        images = tuple(tuple(cols[u][h] for u in range(other.source.rank)) for h in range(self.target.rank))
        return Hom(other.source, self.target, images)


def identity_hom(group: GroupSpec) -> Hom:
    n = group.rank
    return Hom(group, group, tuple(tuple(1 if h == u else 0 for u in range(n)) for h in range(n)))


def type_of(phi: Hom) -> tuple:
    """Per target factor h, per source factor u: (k~, rho) with rho = ('s'|'i', e_u, g_h).

    k~ is the scalar applied after rho; for an inclusion it is phi(1_u)/p^{g_h-e_u}
    so that the composite agrees with phi on F_p-points.
    """
    p = phi.source.p
    out = []
    for row, g in zip(phi.images, phi.target.exponents):
        entry = []
        for m, e in zip(row, phi.source.exponents):
            if e >= g:
                entry.append((m, ("s", e, g)))
            else:
                entry.append((m // p ** (g - e), ("i", e, g)))
        out.append(tuple(entry))
    return tuple(out)


def _apply_rho(fq: GF, vec, rho) -> tuple:
    kind, e, g = rho
    if kind == "s":
        return tuple(vec[:g])
    return _zero(fq, g - e) + tuple(vec)


def w_phi(phi: Hom, x: WittTail) -> WittTail:
    """Witt-level pushforward: per target factor, d-ary sum of k~ * rho(x_u)."""
    if x.group != phi.source:
        raise InputError("Witt tail does not match the homomorphism source")
    fq = x.field
    coords = []
    for entry, g in zip(type_of(phi), phi.target.exponents):
        acc = _zero(fq, g)
        for (k, rho), vec in zip(entry, x.coords):
            if k % fq.p**g == 0:
                continue
            term = vec_scale(fq, g, k, _apply_rho(fq, vec, rho))
            acc = vec_add(fq, g, acc, term)
        coords.append(acc)
    return WittTail(phi.target, fq, tuple(coords))


def w_phi_fp(phi: Hom, point: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    """W_phi on W_G(F_p)-points (coordinates as ints mod p)."""
    p = phi.source.p
    fp = default_field(p, 1)
    coords = []
    for entry, g in zip(type_of(phi), phi.target.exponents):
        acc = (0,) * g
        for (k, rho), vec in zip(entry, point):
            kind, e, _ = rho
            moved = tuple(vec[:g]) if kind == "s" else (0,) * (g - e) + tuple(vec)
            acc = witt_add_values(p, g, acc, witt_scale_values(p, g, k, moved, fp), fp)
        coords.append(acc)
    return tuple(coords)


def characters(group: GroupSpec) -> list[tuple[int, ...]]:
    """G^* as tuples (k_u), k_u in Z/p^{e_u}, in lexicographic order."""
    return list(group.elements())


def character_height(group: GroupSpec, chi: Sequence[int]) -> int:
    """h with chi: G -> Z/p^h of minimal target; 0 for the trivial character."""
    p = group.p
    hs = [e - _vp(k, p) for k, e in zip(chi, group.exponents) if k % p**e]
    return max(hs) if hs else 0


def character_hom(group: GroupSpec, chi: Sequence[int]) -> Hom | None:
    """chi as a homomorphism into Z/p^h (None for the trivial character).

    chi(g) = sum_u k_u g_u / p^{e_u} in Q/Z, so the generator u maps to
    k_u * p^{h - e_u} in Z/p^h.
    """
    h = character_height(group, chi)
    if h == 0:
        return None
    p = group.p
    row = []
    for k, e in zip(chi, group.exponents):
        val = Fraction(k * p**h, p**e)
        if val.denominator != 1:
            raise InvariantViolation("character height too small")
        row.append(int(val) % p**h)
    return Hom(group, GroupSpec.cyclic(p, h), (tuple(row),))


def pushforward(c: LocalClass, chi: Sequence[int]) -> LocalClass | None:
    """Delta_chi(c) as a canonical class of Z/p^h (None for the trivial character)."""
    phi = character_hom(c.group, chi)
    if phi is None:
        return None
    return reduce(w_phi(phi, embed(c)))


def character_conductors(c: LocalClass) -> dict[tuple[int, ...], int]:
    out = {}
    for chi in characters(c.group):
        pushed = pushforward(c, chi)
        out[chi] = 0 if pushed is None else conductor(pushed)
    return out


def disc_exponent(c: LocalClass) -> int:
    """Sum over all characters of the conductor of the pushed-forward class."""
    return sum(character_conductors(c).values())


# --------------------------------------------------------------------------
# long flags


@dataclass(frozen=True)
class LongFlag:
    """Jumps (n, S_n) in increasing n; the last subgroup is all of G^*."""

    group: GroupSpec
    steps: tuple[tuple[int, frozenset], ...]

    def jumps(self) -> list[int]:
        return [n for n, _ in self.steps]

    def subgroup_at(self, n: int) -> frozenset:
        current: frozenset = frozenset()
        for m, s in self.steps:
            if m <= n:
                current = s
        return current

    def to_json(self) -> dict:
        return {
            "jumps": self.jumps(),
            "sizes": [len(s) for _, s in self.steps],
            "subgroups": [sorted(list(map(list, s))) for _, s in self.steps],
            "disc": flag_disc(self),
        }


def flag_disc(flag: LongFlag) -> int:
    total, prev = 0, 0
    for n, s in flag.steps:
        total += n * (len(s) - prev)
        prev = len(s)
    return total


def flag_jumps(flag: LongFlag) -> set[int]:
    return set(flag.jumps())


def is_subgroup(group: GroupSpec, s: Iterable[Sequence[int]]) -> bool:
    s = set(map(tuple, s))
    if tuple(0 for _ in group.exponents) not in s:
        return False
    return all(group.add(a, b) in s for a in s for b in s) and all(group.neg(a) in s for a in s)


def check_flag(flag: LongFlag) -> None:
    """Raise InvariantViolation unless the flag is increasing subgroups ending at G^*."""
    prev: frozenset = frozenset()
    last_n = -1
    for n, s in flag.steps:
        if n <= last_n or not prev < s or not is_subgroup(flag.group, s):
            raise InvariantViolation(f"bad long flag step at {n}")
        prev, last_n = s, n
    if len(prev) != flag.group.order:
        raise InvariantViolation("long flag does not end at G^*")
    if len(flag.steps) > flag.group.order:
        raise InvariantViolation("more jumps than #G")


def long_flag_of(c: LocalClass) -> LongFlag:
    conds = character_conductors(c)
    steps = []
    for n in sorted(set(conds.values()) | {0}):
        steps.append((n, frozenset(chi for chi, m in conds.items() if m <= n)))
    flag = LongFlag(c.group, tuple(steps))
    check_flag(flag)
    return flag


# --------------------------------------------------------------------------
# brute-force oracle


@dataclass
class OracleClass:
    representative: WittTail
    members: list[WittTail]

    @property
    def size(self) -> int:
        return len(self.members)

    def oracle_conductor(self) -> int:
        """Least n such that some member of the orbit is simple <= n."""
        return min(simple_conductor(m) for m in self.members)


def box_tails(fq: GF, pole_bound: int) -> list[LaurentTail]:
    out = []
    for coeffs in itertools.product(range(fq.q), repeat=pole_bound + 1):
        out.append(LaurentTail(fq, {i: c for i, c in enumerate(coeffs) if c}))
    return out


def box(group: GroupSpec, fq: GF, pole_bound: int, budget: int | None = None) -> list[WittTail]:
    """All WittTails whose coordinates are supported in exponents [0, pole_bound]."""
    ncoords = sum(group.exponents)
    check_budget(fq.q ** ((pole_bound + 1) * ncoords), budget, "oracle box")
    tails = box_tails(fq, pole_bound)
    out = []
    for combo in itertools.product(tails, repeat=ncoords):
        coords, pos = [], 0
        for e in group.exponents:
            coords.append(tuple(combo[pos : pos + e]))
            pos += e
        out.append(WittTail(group, fq, tuple(coords)))
    return out


def _in_box(x: WittTail, pole_bound: int) -> bool:
    return all(0 <= i <= pole_bound for vec in x.coords for c in vec for i in c.coeffs)


def orbit_oracle(
    group: GroupSpec, fq: GF | int, pole_bound: int, budget: int | None = None
) -> list[OracleClass]:
    """Quotient of the pole-bounded box by x ~ x + wp(u).

    u ranges over the same box.  That suffices: if x and x' = x + wp(u) both
    lie in the box, every coordinate of u has pole order at most pole_bound
    (coordinate by coordinate, the u_j^p term has to cancel against lower
    terms of weighted degree p^j).  Constants in u are included, so the
    unramified part is quotiented too.
    """
    if isinstance(fq, int):
        fq = default_field(group.p, _log_p(fq, group.p))
    elements = box(group, fq, pole_bound, budget)
    check_budget(len(elements) ** 2, budget, "oracle pair scan")
    index = {x.key(): n for n, x in enumerate(elements)}
    parent = list(range(len(elements)))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    shifts = []
    seen = set()
    for u in elements:
        w = wp(u)
        k = w.key()
        if k not in seen:
            seen.add(k)
            shifts.append(w)
    for n, x in enumerate(elements):
        for w in shifts:
            y = witt_add(x, w)
            if _in_box(y, pole_bound):
                m = index[y.key()]
                ra, rb = find(n), find(m)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[WittTail]] = {}
    for n, x in enumerate(elements):
        groups.setdefault(find(n), []).append(x)
    return [OracleClass(members[0], members) for _, members in sorted(groups.items())]


def _log_p(q: int, p: int) -> int:
    k, n = 0, 1
    while n < q:
        n *= p
        k += 1
    if n != q:
        raise InputError(f"q={q} is not a power of p={p}")
    return k


def canonical_classes(group: GroupSpec, fq: GF, n: int, budget: int | None = None) -> Iterator[LocalClass]:
    """Every class with conductor <= n and zero unramified residue (wild data only)."""
    p = group.p
    slots = []
    for u, e in enumerate(group.exponents):
        for j in range(e):
            if n <= 1:
                continue
            bound = (n - 1) // p ** (e - 1 - j)
            for i in range(1, bound + 1):
                if i % p:
                    slots.append((u, j, i))
    check_budget(fq.q ** len(slots), budget, "canonical class enumeration")
    unram = (0,) * group.rank
    for values in itertools.product(range(fq.q), repeat=len(slots)):
        wild = [[[] for _ in range(e)] for e in group.exponents]
        for (u, j, i), c in zip(slots, values):
            if c:
                wild[u][j].append((i, c))
        yield LocalClass(group, fq, unram, tuple(tuple(tuple(coord) for coord in vec) for vec in wild))


# --------------------------------------------------------------------------
# text syntax: "u,j: tail; u,j: tail"


def format_witt_tail(x: WittTail) -> str:
    parts = []
    for u, vec in enumerate(x.coords):
        for j, c in enumerate(vec):
            if not c.is_zero():
                parts.append(f"{u},{j}: {format_tail(c)}")
    return "; ".join(parts) if parts else "0"


def parse_witt_tail(text: str, group: GroupSpec, fq: GF) -> WittTail:
    """Parse ``"0,0: t^-1; 0,1: w*t^-3"``; a bare tail means factor 0, coordinate 0."""
    text = text.strip()
    entries: dict[tuple[int, int], LaurentTail] = {}
    if text in ("", "0"):
        return WittTail.zero(group, fq)
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        head, sep, body = chunk.partition(":")
        if sep and "," in head and head.replace(",", "").strip().isdigit():
            u, j = (int(s) for s in head.split(","))
        else:
            u, j, body = 0, 0, chunk
        if u >= group.rank or j >= group.exponents[u]:
            raise InputError(f"coordinate tag {u},{j} outside the group")
        entries[(u, j)] = entries.get((u, j), LaurentTail(fq)) + parse_tail(body, fq)
    return WittTail.from_dict(group, fq, entries)
