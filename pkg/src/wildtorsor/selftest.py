"""Quick invariant suites, one per module, used by ``--selftest``."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .field import field as make_field
from .witt import (
    addition_polys,
    check_weighted_homogeneous,
    ghost_of,
    ghost_poly,
    xy_vars,
)


@dataclass
class Report:
    suite: str
    checks: list[tuple[str, bool]] = field(default_factory=list)

    def add(self, name: str, ok: bool) -> None:
        self.checks.append((name, bool(ok)))

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.checks)

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "checks": [{"name": n, "ok": ok} for n, ok in self.checks],
        }


def ghost_identity_holds(p: int, e: int) -> bool:
    """Phi_n(S) = Phi_n(X) + Phi_n(Y) for n < e, exactly over Z."""
    system = addition_polys(p, e)
    variables = xy_vars(p, e)
    for n in range(e):
        lhs = ghost_of(p, n, system.S)
        rhs = ghost_poly(p, n, variables, "X") + ghost_poly(p, n, variables, "Y")
        if lhs != rhs:
            return False
    return True


def homogeneity_holds(p: int, e: int) -> bool:
    system = addition_polys(p, e)
    for n in range(e):
        for poly in (system.S[n], system.I[n]):
            h = check_weighted_homogeneous(poly)
            if h.degree != p**n:
                return False
    return True


def witt_suite() -> Report:
    rep = Report("witt-core")
    for p, e in ((2, 3), (3, 3), (5, 2)):
        rep.add(f"ghost identity p={p} e={e}", ghost_identity_holds(p, e))
        rep.add(f"homogeneity p={p} e={e}", homogeneity_holds(p, e))
    return rep


def torsor_suite() -> Report:
    from .torsor import (
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

    rep = Report("torsor-local")
    for text, q, pb in (("2:1", 2, 4), ("2:2", 2, 2)):
        group = GroupSpec.parse(text)
        fq = make_field(group.p, 1 if q == group.p else 2)
        classes = orbit_oracle(group, fq, pb)
        reduced = [reduce(oc.representative) for oc in classes]
        rep.add(f"oracle classes distinct {text}", len(set(reduced)) == len(classes))
        rep.add(
            f"orbit members share a class {text}",
            all(class_eq(m, oc.representative) for oc in classes for m in oc.members[:4]),
        )
        for n in range(pb + 2):
            count = sum(1 for oc in classes if oc.oracle_conductor() <= n)
            rep.add(f"class count {text} n={n}", count == local_class_count(group, fq.q, n)[0])
        rep.add(
            f"disc equals flag disc {text}",
            all(disc_exponent(c) == flag_disc(long_flag_of(c)) for c in reduced),
        )
        if group.exponents == (1,):
            rep.add(
                "disc = (p-1) cond",
                all(disc_exponent(c) == (group.p - 1) * conductor(c) for c in reduced),
            )
    return rep


def invariants_suite() -> Report:
    from .invariants import (
        ab_invariants,
        brute_ab,
        conductor_spec,
        ct_construct,
        ct_threshold,
        standard_reps,
        strongly_suitable_check,
        v_ab,
    )
    from .torsor import GroupSpec

    rep = Report("invariants")
    for p in (2, 3, 5):
        spec = conductor_spec(GroupSpec.cyclic(p))
        ab = ab_invariants(spec)
        rep.add(f"conductor Z/{p}", ab.a == 1 and ab.D == tuple(Fraction(r) for r in range(2, p + 1)) and ab.b == p - 1)
        brute = brute_ab(spec, 3 * p * p)
        rep.add(f"brute scan Z/{p}", brute.a == ab.a and brute.D == ab.D)
    for r in standard_reps():
        ab = v_ab(r)
        rep.add(f"v-function {r} p={r.p}", ab.a == 1)
    group = GroupSpec.cyclic(2)
    for m in (2, 3):
        spec = ct_construct(group, m, ct_threshold(group, m) / 2)
        ab = ab_invariants(spec)
        rep.add(f"c^t b={m}", ab.b == m and strongly_suitable_check(spec, ab).ok)
    return rep


def global_suite() -> Report:
    from .globalcount import (
        adelic_series,
        conductor_height,
        global_count_series,
        irreducible_count,
        local_factor,
        sieve_irreducible_counts,
    )
    from .torsor import GroupSpec

    rep = Report("global-count")
    sieve = sieve_irreducible_counts(2, 6)
    rep.add("necklace vs sieve", all(irreducible_count(2, d) == sieve[d] for d in range(1, 7)))
    g2 = GroupSpec.cyclic(2)
    rep.add("local factor Z/2", local_factor(2, conductor_height(g2), 6).coeffs == (1, 0, 1, 0, 2, 0, 4))
    rep.add("local factor Z/3", local_factor(3, conductor_height(GroupSpec.cyclic(3)), 3).coeffs == (1, 0, 2, 6))
    ad = adelic_series(2, conductor_height(g2), 8)
    gl = global_count_series(2, 2, 8)
    rep.add("global = p * adelic", list(gl.coeffs) == [2 * a for a in ad.coeffs])
    return rep


SUITES: dict[str, Callable[[], Report]] = {
    "witt": witt_suite,
    "torsor": torsor_suite,
    "invariants": invariants_suite,
    "global": global_suite,
}
