"""Finite fields F_q and finite-tailed Laurent expressions over them.

Elements of F_q are plain ints in ``[0, q)``: the base-p digits are the
coefficients of 1, w, w^2, ... where w is a root of the stored defining
polynomial.  Multiplication goes through log/antilog tables.
"""

from __future__ import annotations

import functools
import re
from typing import Iterable, Iterator, Mapping

from .errors import BudgetExceeded, InputError

# Conway polynomials, coefficients from the constant term upward (monic).
CONWAY = {
    (2, 1): (1, 1),
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (3, 1): (1, 1),
    (3, 2): (2, 2, 1),
    (3, 3): (1, 2, 0, 1),
    (3, 4): (2, 0, 0, 2, 1),
    (5, 1): (3, 1),
    (5, 2): (2, 4, 1),
    (5, 3): (3, 3, 0, 1),
    (5, 4): (2, 4, 4, 0, 1),
    (7, 1): (4, 1),
    (7, 2): (3, 6, 1),
    (7, 3): (4, 0, 6, 1),
    (7, 4): (3, 4, 5, 0, 1),
}

MAX_Q = 1 << 16


# --- dense polynomials over F_p as coefficient lists (constant term first) ---


def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_mod(a: list[int], m: list[int], p: int) -> list[int]:
    a = _trim([c % p for c in a])
    m = _trim([c % p for c in m])
    inv = pow(m[-1], -1, p)
    while len(a) >= len(m):
        c = a[-1] * inv % p
        shift = len(a) - len(m)
        for i, mc in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mc) % p
        _trim(a)
    return a


def monic_polys(p: int, degree: int) -> Iterator[tuple[int, ...]]:
    """All monic polynomials of the given degree, in lexicographic digit order."""
    for n in range(p**degree):
        digits = []
        for _ in range(degree):
            n, r = divmod(n, p)
            digits.append(r)
        yield tuple(digits) + (1,)


def is_irreducible(poly: tuple[int, ...], p: int) -> bool:
    """Trial division by every monic polynomial of degree <= deg/2."""
    poly = tuple(c % p for c in poly)
    deg = len(poly) - 1
    if deg < 1 or poly[-1] == 0:
        return False
    if deg == 1:
        return True
    for d in range(1, deg // 2 + 1):
        for m in monic_polys(p, d):
            if not poly_mod(list(poly), list(m), p):
                return False
    return True


def first_irreducible(p: int, k: int) -> tuple[int, ...]:
    for cand in monic_polys(p, k):
        if is_irreducible(cand, p):
            return cand
    raise AssertionError("unreachable: irreducibles exist in every degree")


class GF:
    """F_q with q = p^k, relative to an explicit irreducible modulus.

    Implements the ring interface used by the Witt evaluator
    (``zero``, ``one``, ``add``, ``mul``, ``neg``, ``from_int``).
    """

    def __init__(self, p: int, k: int = 1, modulus: Iterable[int] | None = None):
        if p < 2 or any(p % d == 0 for d in range(2, int(p**0.5) + 1)):
            raise InputError(f"p={p} is not prime")
        if k < 1:
            raise InputError("extension degree must be >= 1")
        self.p, self.k, self.q = p, k, p**k
        if self.q > MAX_Q:
            raise BudgetExceeded(f"q={self.q} exceeds the cap {MAX_Q}")
        if modulus is None:
            modulus = CONWAY.get((p, k)) or first_irreducible(p, k)
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != k + 1 or modulus[-1] != 1:
            raise InputError("modulus must be monic of degree k")
        if not is_irreducible(modulus, p):
            raise InputError(f"modulus {modulus} is reducible over F_{p}")
        self.modulus = modulus
        self.zero, self.one = 0, 1
        self._build_tables()

    # representation helpers
    def digits(self, a: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.k):
            a, r = divmod(a, self.p)
            out.append(r)
        return tuple(out)

    def from_digits(self, digits: Iterable[int]) -> int:
        n = 0
        for i, c in enumerate(digits):
            n += (c % self.p) * self.p**i
        return n

    def _mul_slow(self, a: int, b: int) -> int:
        da, db = self.digits(a), self.digits(b)
        prod = [0] * (2 * self.k - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] += x * y
        return self.from_digits(poly_mod(prod, list(self.modulus), self.p) if len(prod) > self.k else prod)

    def _build_tables(self) -> None:
        q = self.q
        # find a primitive element; w itself when the modulus is primitive
        order = q - 1
        factors = [f for f in range(2, order + 1) if order % f == 0 and all(f % d for d in range(2, int(f**0.5) + 1))]
        gen = None
        for cand in range(1, q):
            if cand == 0:
                continue
            ok = True
            for f in factors:
                if self._pow_slow(cand, order // f) == 1:
                    ok = False
                    break
            if ok and (order == 1 or self._pow_slow(cand, order) == 1):
                gen = cand
                break
        w = self.p if self.k > 1 else None
        if w is not None and all(self._pow_slow(w, order // f) != 1 for f in factors):
            gen = w
        self.primitive = gen
        exp = [0] * (2 * order) if order else [1]
        log = [0] * q
        x = 1
        for i in range(order):
            exp[i] = x
            log[x] = i
            x = self._mul_slow(x, gen)
        for i in range(order, 2 * order):
            exp[i] = exp[i - order]
        self._exp, self._log = exp, log
        self.generator_is_primitive = self.k == 1 or gen == self.p
        self._frob_table: list[int] | None = None
        self._root_table: list[int] | None = None
        self._wp_preimage: dict[int, int] | None = None

    def _pow_slow(self, a: int, n: int) -> int:
        r, b = 1, a
        while n:
            if n & 1:
                r = self._mul_slow(r, b)
            b = self._mul_slow(b, b)
            n >>= 1
        return r

    # ring interface
    def add(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        p, out, place = self.p, 0, 1
        while a or b:
            a, ra = divmod(a, p)
            b, rb = divmod(b, p)
            out += ((ra + rb) % p) * place
            place *= p
        return out

    def neg(self, a: int) -> int:
        if self.p == 2:
            return a
        if self.k == 1:
            return (-a) % self.p
        p, out, place = self.p, 0, 1
        while a:
            a, r = divmod(a, p)
            out += ((-r) % p) * place
            place *= p
        return out

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[self._log[a] + self._log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in F_q")
        return self._exp[(self.q - 1 - self._log[a]) % (self.q - 1)]

    def pow(self, a: int, n: int) -> int:
        if a == 0:
            return 0 if n else 1
        return self._exp[(self._log[a] * n) % (self.q - 1)]

    def from_int(self, n: int) -> int:
        return n % self.p

    def scale(self, n: int, a: int) -> int:
        """Integer multiple n*a (acts through n mod p)."""
        n %= self.p
        if n == 0 or a == 0:
            return 0
        return self.mul(n, a)

    def elements(self) -> range:
        return range(self.q)

    # Frobenius and friends
    def frobenius(self, a: int) -> int:
        if self._frob_table is None:
            self._frob_table = [self.pow(x, self.p) for x in range(self.q)]
        return self._frob_table[a]

    def pth_root(self, a: int) -> int:
        if self._root_table is None:
            self._root_table = [self.pow(x, self.p ** (self.k - 1)) for x in range(self.q)]
        return self._root_table[a]

    def trace_to_fp(self, a: int) -> int:
        total, x = 0, a
        for _ in range(self.k):
            total = self.add(total, x)
            x = self.frobenius(x)
        if total >= self.p:
            raise AssertionError("absolute trace left F_p")
        return total

    def solve_wp(self, a: int) -> int | None:
        """Some u with u^p - u = a, or None (exhaustive over F_q)."""
        if self._wp_preimage is None:
            table: dict[int, int] = {}
            for u in range(self.q):
                table.setdefault(self.sub(self.frobenius(u), u), u)
            self._wp_preimage = table
        return self._wp_preimage.get(a)

    # text
    def format(self, a: int) -> str:
        if a < self.p:
            return str(a)
        if self.generator_is_primitive:
            return f"w^{self._log[a]}"
        terms = [
            (f"{c}*" if c != 1 else "") + ("w" if i == 1 else f"w^{i}") if i else str(c)
            for i, c in enumerate(self.digits(a))
            if c
        ]
        return "(" + "+".join(reversed(terms)) + ")"

    def parse(self, text: str) -> int:
        text = text.strip()
        if text.startswith("(") and text.endswith(")"):
            total = 0
            for part in text[1:-1].split("+"):
                total = self.add(total, self.parse(part))
            return total
        m = re.fullmatch(r"(?:(\d+)\*)?w(?:\^(\d+))?", text)
        if m:
            coeff = int(m.group(1) or 1)
            power = int(m.group(2) or 1)
            w = self.p if self.k > 1 else self.from_int(-self.modulus[0])
            return self.scale(coeff, self.pow(w, power))
        if re.fullmatch(r"-?\d+", text):
            return self.from_int(int(text))
        raise InputError(f"cannot parse field element {text!r}")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GF) and (self.p, self.k, self.modulus) == (other.p, other.k, other.modulus)

    def __hash__(self) -> int:
        return hash((self.p, self.k, self.modulus))

    def __repr__(self) -> str:
        return f"GF({self.p}^{self.k}, modulus={self.modulus})"


@functools.lru_cache(maxsize=None)
def field(p: int, k: int = 1) -> GF:
    """Shared field instance with the canonical (Conway or first irreducible) modulus."""
    return GF(p, k)


NEG_INF = float("-inf")


class LaurentTail:
    """Finite sum sum_i b_i t^{-i} over F_q.

    Keys are the exponents i of t^{-i}: positive i is the pole part, 0 the
    constant term; negative i (positive powers of t) are tolerated as scratch.
    Instances are treated as immutable.
    """

    __slots__ = ("field", "coeffs", "_hash")

    def __init__(self, fq: GF, coeffs: Mapping[int, int] | None = None):
        self.field = fq
        self.coeffs = {int(i): c for i, c in (coeffs or {}).items() if c}
        self._hash = None

    @classmethod
    def monomial(cls, fq: GF, i: int, c: int = 1) -> "LaurentTail":
        return cls(fq, {i: c})

    @classmethod
    def constant(cls, fq: GF, c: int) -> "LaurentTail":
        return cls(fq, {0: c})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __getitem__(self, i: int) -> int:
        return self.coeffs.get(i, 0)

    def support(self) -> list[int]:
        return sorted(self.coeffs)

    def neg_ord(self) -> float | int:
        poles = [i for i in self.coeffs if i > 0]
        return max(poles) if poles else NEG_INF

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int) and other == 0:
            return not self.coeffs
        return isinstance(other, LaurentTail) and self.field == other.field and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.coeffs.items()))
        return self._hash

    def __add__(self, other: "LaurentTail") -> "LaurentTail":
        F = self.field
        out = dict(self.coeffs)
        for i, c in other.coeffs.items():
            s = F.add(out.get(i, 0), c)
            if s:
                out[i] = s
            else:
                out.pop(i, None)
        return LaurentTail(F, out)

    def __neg__(self) -> "LaurentTail":
        F = self.field
        return LaurentTail(F, {i: F.neg(c) for i, c in self.coeffs.items()})

    def __sub__(self, other: "LaurentTail") -> "LaurentTail":
        return self + (-other)

    def __mul__(self, other: "LaurentTail") -> "LaurentTail":
        F = self.field
        out: dict[int, int] = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                k = i + j
                out[k] = F.add(out.get(k, 0), F.mul(a, b))
        return LaurentTail(F, out)

    def scale(self, n: int) -> "LaurentTail":
        F = self.field
        return LaurentTail(F, {i: F.scale(n, c) for i, c in self.coeffs.items()})

    def frobenius(self) -> "LaurentTail":
        F = self.field
        return LaurentTail(F, {i * F.p: F.frobenius(c) for i, c in self.coeffs.items()})

    def pth_root(self) -> "LaurentTail":
        F = self.field
        if any(i % F.p for i in self.coeffs):
            raise InputError("p-th root of a tail needs every exponent divisible by p")
        return LaurentTail(F, {i // F.p: F.pth_root(c) for i, c in self.coeffs.items()})

    def __repr__(self) -> str:
        return f"LaurentTail({format_tail(self)})"

    def __str__(self) -> str:
        return format_tail(self)


def neg_ord(b: LaurentTail) -> float | int:
    return b.neg_ord()


def wp_series(u: LaurentTail) -> LaurentTail:
    """Artin-Schreier operator on one coordinate: u^p - u."""
    return u.frobenius() - u


class LaurentRing:
    """Ring interface over LaurentTail values for the Witt evaluator."""

    def __init__(self, fq: GF):
        self.field = fq
        self.zero = LaurentTail(fq)
        self.one = LaurentTail.constant(fq, 1)

    def add(self, a, b):
        if not a.coeffs:
            return b
        if not b.coeffs:
            return a
        return a + b

    def mul(self, a, b):
        if not a.coeffs or not b.coeffs:
            return self.zero
        return a * b

    def neg(self, a):
        return -a

    def from_int(self, n):
        return LaurentTail.constant(self.field, self.field.from_int(n))


def format_tail(b: LaurentTail) -> str:
    if b.is_zero():
        return "0"
    F = b.field
    parts = []
    for i in sorted(b.coeffs, reverse=True):
        c = F.format(b.coeffs[i])
        if i == 0:
            parts.append(c)
        else:
            parts.append(f"{c}*t^{-i}")
    return " + ".join(parts)


_TERM = re.compile(r"^(?:(?P<coef>.+?)\*)?t(?:\^(?P<exp>-?\d+))?$")


def parse_tail(text: str, fq: GF) -> LaurentTail:
    """Inverse of ``format_tail``; accepts e.g. ``w^1*t^-3 + 1*t^-1 + 2``."""
    text = text.strip()
    if text in ("", "0"):
        return LaurentTail(fq)
    depth, cur, chunks = 0, "", []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "+" and depth == 0:
            chunks.append(cur)
            cur = ""
        else:
            cur += ch
    chunks.append(cur)
    out = LaurentTail(fq)
    for chunk in chunks:
        chunk = chunk.strip()
        if not chunk:
            raise InputError(f"empty term in {text!r}")
        m = _TERM.match(chunk)
        if m and "t" in chunk:
            coef = fq.parse(m.group("coef")) if m.group("coef") else 1
            exp = int(m.group("exp")) if m.group("exp") is not None else 1
            out = out + LaurentTail.monomial(fq, -exp, coef)
        else:
            out = out + LaurentTail.constant(fq, fq.parse(chunk))
    return out
