"""Universal Witt vector polynomials over the integers.

Ghost polynomials, addition polynomials ``S_n`` (via the ghost recursion),
inverse polynomials ``I_n``, scalar multiples and d-ary sums, together with a
weighted-homogeneity checker and a ring-generic evaluator.

Polynomials are sparse: monomials are packed into a single Python integer
(``_BITS`` bits per variable) so that multiplying monomials is one integer
addition.  Keys are unpacked into exponent tuples only at the API boundary.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Protocol, Sequence

from .errors import CapExceeded, InputError, InvariantViolation

_BITS = 32
_MASK = (1 << _BITS) - 1


@dataclass
class Caps:
    """Generation caps; polynomial size grows violently past these."""

    max_length: int = 4
    max_prime: int = 7
    max_arity: int = 8


CAPS = Caps()


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _check_caps(p: int, e: int, d: int = 1) -> None:
    if not _is_prime(p):
        raise InputError(f"p={p} is not prime")
    if e < 1:
        raise InputError("Witt length must be >= 1")
    if e > CAPS.max_length:
        raise CapExceeded(f"Witt length {e} exceeds cap {CAPS.max_length}")
    if p > CAPS.max_prime:
        raise CapExceeded(f"prime {p} exceeds cap {CAPS.max_prime}")
    if d > CAPS.max_arity:
        raise CapExceeded(f"arity {d} exceeds cap {CAPS.max_arity}")


@dataclass(frozen=True)
class Var:
    name: str
    weight: int


def _pack(exps: Sequence[int]) -> int:
    key = 0
    for i, a in enumerate(exps):
        if a < 0 or a > _MASK:
            raise InputError(f"exponent {a} out of range")
        key |= a << (_BITS * i)
    return key


def _unpack(key: int, n: int) -> tuple[int, ...]:
    return tuple((key >> (_BITS * i)) & _MASK for i in range(n))


class WeightedPoly:
    """Sparse integer polynomial whose variables carry weights (powers of p).

    ``terms`` maps exponent tuples (aligned with ``variables``) to nonzero
    integer coefficients; the zero polynomial has no terms.
    """

    __slots__ = ("variables", "_packed", "_terms")

    def __init__(self, variables: Sequence[Var], terms: Mapping[tuple[int, ...], int] | None = None):
        self.variables = tuple(variables)
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise InputError(f"duplicate variable names in {names}")
        packed: dict[int, int] = {}
        for exps, c in (terms or {}).items():
            if len(exps) != len(self.variables):
                raise InputError("exponent tuple does not match the declared variables")
            if c:
                k = _pack(exps)
                packed[k] = packed.get(k, 0) + int(c)
        self._packed = {k: c for k, c in packed.items() if c}
        self._terms: dict[tuple[int, ...], int] | None = None

    @classmethod
    def _from_packed(cls, variables: tuple[Var, ...], packed: dict[int, int]) -> "WeightedPoly":
        obj = cls.__new__(cls)
        obj.variables = variables
        obj._packed = packed
        obj._terms = None
        return obj

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, variables: Sequence[Var]) -> "WeightedPoly":
        return cls(variables)

    @classmethod
    def constant(cls, variables: Sequence[Var], c: int) -> "WeightedPoly":
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def var(cls, variables: Sequence[Var], name: str) -> "WeightedPoly":
        variables = tuple(variables)
        idx = [v.name for v in variables].index(name)
        exps = [0] * len(variables)
        exps[idx] = 1
        return cls(variables, {tuple(exps): 1})

    # accessors ----------------------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, ...], int]:
        if self._terms is None:
            n = len(self.variables)
            self._terms = {_unpack(k, n): c for k, c in self._packed.items()}
        return self._terms

    def is_zero(self) -> bool:
        return not self._packed

    def __len__(self) -> int:
        return len(self._packed)

    def used_variables(self) -> set[str]:
        used = set()
        for exps in self.terms:
            used.update(v.name for v, a in zip(self.variables, exps) if a)
        return used

    def monomial_weight(self, exps: Sequence[int]) -> int:
        return sum(v.weight * a for v, a in zip(self.variables, exps))

    def sorted_terms(self) -> list[tuple[tuple[int, ...], int]]:
        """Terms in graded-lexicographic order (highest weighted degree first)."""
        return sorted(
            self.terms.items(),
            key=lambda kv: (self.monomial_weight(kv[0]), kv[0]),
            reverse=True,
        )

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other: Any) -> "WeightedPoly":
        if isinstance(other, WeightedPoly):
            if other.variables != self.variables:
                raise InputError("polynomials over different variable lists")
            return other
        if isinstance(other, int):
            return WeightedPoly.constant(self.variables, other)
        return NotImplemented

    def __add__(self, other: Any) -> "WeightedPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._packed)
        for k, c in other._packed.items():
            s = out.get(k, 0) + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return WeightedPoly._from_packed(self.variables, out)

    __radd__ = __add__

    def __neg__(self) -> "WeightedPoly":
        return WeightedPoly._from_packed(self.variables, {k: -c for k, c in self._packed.items()})

    def __sub__(self, other: Any) -> "WeightedPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other: Any) -> "WeightedPoly":
        return (-self) + other

    def __mul__(self, other: Any) -> "WeightedPoly":
        if isinstance(other, int):
            if other == 0:
                return WeightedPoly.zero(self.variables)
            return WeightedPoly._from_packed(self.variables, {k: c * other for k, c in self._packed.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._packed, other._packed
        if len(a) < len(b):
            a, b = b, a
        out: dict[int, int] = {}
        get = out.get
        for kb, cb in b.items():
            for ka, ca in a.items():
                k = ka + kb
                out[k] = get(k, 0) + ca * cb
        return WeightedPoly._from_packed(self.variables, {k: c for k, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "WeightedPoly":
        if n < 0:
            raise InputError("negative power")
        result = WeightedPoly.constant(self.variables, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def exact_div(self, d: int) -> "WeightedPoly":
        out = {}
        for k, c in self._packed.items():
            q, r = divmod(c, d)
            if r:
                raise InvariantViolation(f"coefficient {c} not divisible by {d}")
            out[k] = q
        return WeightedPoly._from_packed(self.variables, out)

    def mod(self, p: int) -> "WeightedPoly":
        """Coefficients reduced into [0, p); terms vanishing mod p are dropped."""
        return WeightedPoly._from_packed(
            self.variables, {k: c % p for k, c in self._packed.items() if c % p}
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightedPoly):
            return NotImplemented
        return self.variables == other.variables and self._packed == other._packed

    def __hash__(self) -> int:
        return hash((self.variables, frozenset(self._packed.items())))

    def substitute(self, images: Mapping[str, "WeightedPoly"], variables: Sequence[Var]) -> "WeightedPoly":
        """Compose: replace each variable by a polynomial over ``variables``.

        Variables absent from ``images`` must appear in ``variables`` and are
        kept as themselves.
        """
        variables = tuple(variables)
        imgs = []
        for v in self.variables:
            if v.name in images:
                img = images[v.name]
                if img.variables != variables:
                    raise InputError(f"image of {v.name} lives over a different variable list")
                imgs.append(img)
            else:
                imgs.append(WeightedPoly.var(variables, v.name))
        powers: list[dict[int, WeightedPoly]] = [{} for _ in imgs]

        def power(i: int, a: int) -> WeightedPoly:
            cache = powers[i]
            if a not in cache:
                cache[a] = imgs[i] ** a
            return cache[a]

        total = WeightedPoly.zero(variables)
        for exps, c in self.terms.items():
            term = WeightedPoly.constant(variables, c)
            for i, a in enumerate(exps):
                if a:
                    term = term * power(i, a)
            total = total + term
        return total

    # presentation -------------------------------------------------------
    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for exps, c in self.sorted_terms():
            mono = "*".join(
                v.name if a == 1 else f"{v.name}^{a}" for v, a in zip(self.variables, exps) if a
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        out = parts[0]
        for s in parts[1:]:
            out += " - " + s[1:] if s.startswith("-") else " + " + s
        return out

    def __repr__(self) -> str:
        return f"WeightedPoly({self})"

    def to_json(self) -> dict:
        return {
            "variables": [{"name": v.name, "weight": v.weight} for v in self.variables],
            "terms": [
                {"exponents": list(exps), "coefficient": c} for exps, c in self.sorted_terms()
            ],
        }


@dataclass(frozen=True)
class Homogeneity:
    """Outcome of a weighted-homogeneity check."""

    degree: int | None
    any_degree: bool = False
    witness: tuple[tuple[int, ...], tuple[int, ...]] | None = None

    @property
    def ok(self) -> bool:
        return self.any_degree or self.degree is not None


def check_weighted_homogeneous(poly: WeightedPoly) -> Homogeneity:
    if poly.is_zero():
        return Homogeneity(degree=None, any_degree=True)
    first = None
    deg = None
    for exps in poly.terms:
        w = poly.monomial_weight(exps)
        if deg is None:
            first, deg = exps, w
        elif w != deg:
            return Homogeneity(degree=None, witness=(first, exps))
    return Homogeneity(degree=deg)


# --------------------------------------------------------------------------
# variable lists


def x_vars(p: int, e: int, name: str = "X") -> tuple[Var, ...]:
    return tuple(Var(f"{name}{j}", p**j) for j in range(e))


def xy_vars(p: int, e: int) -> tuple[Var, ...]:
    return x_vars(p, e, "X") + x_vars(p, e, "Y")


def multi_vars(p: int, e: int, d: int) -> tuple[Var, ...]:
    return tuple(Var(f"X{u}_{j}", p**j) for u in range(1, d + 1) for j in range(e))


def ghost_poly(p: int, n: int, variables: Sequence[Var] | None = None, name: str = "X") -> WeightedPoly:
    """Phi_n = sum_{i<=n} p^i X_i^(p^(n-i))."""
    if n < 0:
        raise InputError("ghost index must be >= 0")
    variables = tuple(variables) if variables is not None else x_vars(p, n + 1, name)
    names = [v.name for v in variables]
    terms = {}
    for i in range(n + 1):
        exps = [0] * len(variables)
        exps[names.index(f"{name}{i}")] = p ** (n - i)
        terms[tuple(exps)] = p**i
    return WeightedPoly(variables, terms)


def ghost_of(p: int, n: int, components: Sequence[WeightedPoly]) -> WeightedPoly:
    """Phi_n evaluated on polynomial components (exact over the integers)."""
    total = None
    for i in range(n + 1):
        term = (components[i] ** (p ** (n - i))) * (p**i)
        total = term if total is None else total + term
    return total


@dataclass(frozen=True)
class PolySystem:
    """Addition and inverse polynomials of W_e for a prime p."""

    p: int
    e: int
    variables: tuple[Var, ...]
    S: tuple[WeightedPoly, ...]
    I: tuple[WeightedPoly, ...] = ()
    _modp: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def x_variables(self) -> tuple[Var, ...]:
        return self.variables[: self.e]

    def T(self, j: int) -> WeightedPoly:
        X = WeightedPoly.var(self.variables, f"X{j}")
        Y = WeightedPoly.var(self.variables, f"Y{j}")
        return self.S[j] - X - Y

    def compiled(self, which: str, j: int) -> "CompiledPoly":
        key = (which, j)
        if key not in self._modp:
            poly = self.S[j] if which == "S" else self.I[j]
            self._modp[key] = CompiledPoly.from_poly(poly, self.p)
        return self._modp[key]


@functools.lru_cache(maxsize=None)
def addition_polys(p: int, e: int) -> PolySystem:
    """S_0..S_{e-1} from the ghost recursion, dividing by p^n only at the end."""
    _check_caps(p, e)
    variables = xy_vars(p, e)
    X = [WeightedPoly.var(variables, f"X{j}") for j in range(e)]
    Y = [WeightedPoly.var(variables, f"Y{j}") for j in range(e)]
    S: list[WeightedPoly] = []
    # cache S_i^(p^k) across n; each step is one p-th power of the previous
    power_chain: list[list[WeightedPoly]] = []
    for n in range(e):
        rhs = ghost_of(p, n, X) + ghost_of(p, n, Y)
        for i in range(n):
            chain = power_chain[i]
            while len(chain) <= n - i:
                chain.append(chain[-1] ** p)
            rhs = rhs - chain[n - i] * (p**i)
        s_n = rhs.exact_div(p**n)
        S.append(s_n)
        power_chain.append([s_n])
    I = _inverse_from(p, e, variables, S)
    return PolySystem(p, e, variables, tuple(S), tuple(I))


def _inverse_from(p: int, e: int, variables: tuple[Var, ...], S: list[WeightedPoly]) -> list[WeightedPoly]:
    xv = variables[:e]
    I: list[WeightedPoly] = []
    for j in range(e):
        Xj = WeightedPoly.var(variables, f"X{j}")
        Yj = WeightedPoly.var(variables, f"Y{j}")
        Tj = S[j] - Xj - Yj
        images = {f"X{k}": WeightedPoly.var(xv, f"X{k}") for k in range(e)}
        images.update({f"Y{k}": I[k] if k < j else WeightedPoly.zero(xv) for k in range(e)})
        # T_j only involves indices < j, so the zero images for k >= j are inert
        Tsub = _restrict(Tj, variables).substitute(images, xv)
        I.append(-WeightedPoly.var(xv, f"X{j}") - Tsub)
    return I


def _restrict(poly: WeightedPoly, variables: tuple[Var, ...]) -> WeightedPoly:
    return poly if poly.variables == variables else WeightedPoly(variables, poly.terms)


def inverse_polys(p: int, e: int) -> tuple[WeightedPoly, ...]:
    """I_0 = -X_0, I_j = -X_j - T_j(X_0..X_{j-1}, I_0..I_{j-1})."""
    return addition_polys(p, e).I


def add_tuples(p: int, e: int, A: Sequence[WeightedPoly], B: Sequence[WeightedPoly]) -> tuple[WeightedPoly, ...]:
    """Witt sum of two polynomial tuples (over the same variables) by substitution into S."""
    system = addition_polys(p, e)
    target = A[0].variables
    images = {f"X{j}": A[j] for j in range(e)}
    images.update({f"Y{j}": B[j] for j in range(e)})
    return tuple(system.S[n].substitute(images, target) for n in range(e))


@functools.lru_cache(maxsize=None)
def scalar_poly(p: int, e: int, k: int) -> tuple[WeightedPoly, ...]:
    """Coordinates of x -> k*x on W_e, built from a binary addition chain."""
    _check_caps(p, e)
    if not 0 <= k < p**e:
        raise InputError(f"scalar {k} outside [0, {p**e - 1}]")
    xv = x_vars(p, e)
    result: tuple[WeightedPoly, ...] | None = None
    base = tuple(WeightedPoly.var(xv, f"X{j}") for j in range(e))
    n = k
    while n:
        if n & 1:
            result = base if result is None else add_tuples(p, e, result, base)
        n >>= 1
        if n:
            base = add_tuples(p, e, base, base)
    if result is None:
        return tuple(WeightedPoly.zero(xv) for _ in range(e))
    return result


@functools.lru_cache(maxsize=None)
def dary_add_polys(p: int, e: int, d: int) -> tuple[WeightedPoly, ...]:
    """Coordinates of x_1 + ... + x_d on W_e^d, folded as a balanced tree."""
    _check_caps(p, e, d)
    if d < 1:
        raise InputError("arity must be >= 1")
    mv = multi_vars(p, e, d)
    leaves = [tuple(WeightedPoly.var(mv, f"X{u}_{j}") for j in range(e)) for u in range(1, d + 1)]
    while len(leaves) > 1:
        nxt = [add_tuples(p, e, leaves[i], leaves[i + 1]) for i in range(0, len(leaves) - 1, 2)]
        if len(leaves) % 2:
            nxt.append(leaves[-1])
        leaves = nxt
    return leaves[0]


# --------------------------------------------------------------------------
# evaluation


class Ring(Protocol):
    zero: Any
    one: Any

    def add(self, a: Any, b: Any) -> Any: ...

    def mul(self, a: Any, b: Any) -> Any: ...

    def neg(self, a: Any) -> Any: ...

    def from_int(self, n: int) -> Any: ...


class IntegerRing:
    zero = 0
    one = 1

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def from_int(self, n):
        return n


class ModRing:
    """Z/nZ with elements as ints in [0, n)."""

    def __init__(self, n: int):
        self.n = n
        self.zero = 0
        self.one = 1 % n

    def add(self, a, b):
        return (a + b) % self.n

    def mul(self, a, b):
        return (a * b) % self.n

    def neg(self, a):
        return (-a) % self.n

    def from_int(self, k):
        return k % self.n


@dataclass(frozen=True)
class CompiledPoly:
    """Polynomial flattened for repeated evaluation: (coef, ((var_index, exp), ...))."""

    nvars: int
    terms: tuple[tuple[int, tuple[tuple[int, int], ...]], ...]

    @classmethod
    def from_poly(cls, poly: WeightedPoly, p: int | None = None) -> "CompiledPoly":
        src = poly.mod(p) if p is not None else poly
        terms = []
        for exps, c in src.sorted_terms():
            terms.append((c, tuple((i, a) for i, a in enumerate(exps) if a)))
        return cls(len(poly.variables), tuple(terms))

    def __call__(self, values: Sequence[Any], ring: Ring) -> Any:
        cache: dict[tuple[int, int], Any] = {}

        def power(i: int, a: int) -> Any:
            key = (i, a)
            got = cache.get(key)
            if got is None:
                if a == 1:
                    got = values[i]
                else:
                    half = power(i, a // 2)
                    got = ring.mul(half, half)
                    if a % 2:
                        got = ring.mul(got, values[i])
                cache[key] = got
            return got

        total = ring.zero
        for c, mono in self.terms:
            term = None
            for i, a in mono:
                f = power(i, a)
                term = f if term is None else ring.mul(term, f)
            coef = ring.from_int(c)
            term = coef if term is None else (term if c == 1 else ring.mul(coef, term))
            total = ring.add(total, term)
        return total


def evaluate(poly: WeightedPoly, assignment: Mapping[str, Any], ring: Ring) -> Any:
    """Evaluate exactly in ``ring``; integer coefficients act through ``ring.from_int``."""
    values = []
    for v in poly.variables:
        if v.name not in assignment:
            # unused variables may be left out
            if any(exps[len(values)] for exps in poly.terms):
                raise InputError(f"no value assigned to variable {v.name}")
            values.append(ring.zero)
        else:
            values.append(assignment[v.name])
    return CompiledPoly.from_poly(poly)(values, ring)


# --------------------------------------------------------------------------
# Witt vector arithmetic on concrete coordinates


def witt_add_values(p: int, e: int, x: Sequence[Any], y: Sequence[Any], ring: Ring) -> tuple:
    system = addition_polys(p, e)
    vals = list(x) + list(y)
    return tuple(system.compiled("S", n)(vals, ring) for n in range(e))


def witt_neg_values(p: int, e: int, x: Sequence[Any], ring: Ring) -> tuple:
    system = addition_polys(p, e)
    vals = list(x)
    return tuple(system.compiled("I", n)(vals, ring) for n in range(e))


def witt_scale_values(p: int, e: int, k: int, x: Sequence[Any], ring: Ring) -> tuple:
    """k*x by double-and-add on values (same result as ``scalar_poly``)."""
    k %= p**e
    result = tuple(ring.zero for _ in range(e))
    base = tuple(x)
    while k:
        if k & 1:
            result = witt_add_values(p, e, result, base, ring)
        k >>= 1
        if k:
            base = witt_add_values(p, e, base, base, ring)
    return result


def int_to_witt_fp(p: int, e: int, n: int) -> tuple[int, ...]:
    """Image of n under Z -> W_e(F_p) (n times the unit vector)."""
    ring = ModRing(p)
    one = (1,) + (0,) * (e - 1)
    return witt_scale_values(p, e, n, one, ring)


def system_to_json(system: PolySystem) -> dict:
    return {
        "p": system.p,
        "e": system.e,
        "S": [{"name": f"S_{n}", "text": str(s), **s.to_json()} for n, s in enumerate(system.S)],
        "I": [{"name": f"I_{n}", "text": str(i), **i.to_json()} for n, i in enumerate(system.I)],
    }


def dumps_system(system: PolySystem) -> str:
    return json.dumps(system_to_json(system), sort_keys=True)


def all_generated(p: int, e: int) -> Iterable[WeightedPoly]:
    system = addition_polys(p, e)
    yield from system.S
    yield from system.I
