"""Command-line front end.

Every subcommand prints one JSON document (or CSV with a commented header)
that echoes the parsed configuration and the library version.  Exit codes:
0 success, 2 usage or input error, 3 budget exceeded, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Any, Callable, Sequence

from . import __version__
from .errors import BUDGET_ENV, BudgetExceeded, InputError, InvariantViolation, WildTorsorError
from .field import field as make_field

CSV_SCHEMA = "v1"


# --------------------------------------------------------------------------
# helpers


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _config(args: argparse.Namespace) -> dict:
    skip = {"func", "suite"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def emit_json(args: argparse.Namespace, payload: dict, out) -> None:
    doc = {"version": __version__, "config": _config(args), "result": _jsonable(payload)}
    out.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def emit_csv(args: argparse.Namespace, header: Sequence[str], rows: Sequence[Sequence[Any]], out) -> None:
    out.write(f"# wildtorsor {__version__}\n")
    out.write(f"# csv-schema: {args.command}/{CSV_SCHEMA}\n")
    out.write(f"# config: {json.dumps(_config(args), sort_keys=True)}\n")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_jsonable(x) for x in row])
    out.write(buf.getvalue())


def parallel_map(fn: Callable, items: Sequence, jobs: int) -> list:
    """Order-preserving map; results do not depend on the worker count."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _group(args):
    from .torsor import GroupSpec

    return GroupSpec.parse(args.group)


def _field_for(group, q: int):
    from .torsor import _log_p

    return make_field(group.p, _log_p(q, group.p))


def _witt_tail(args):
    from .torsor import parse_witt_tail

    group = _group(args)
    fq = _field_for(group, args.q)
    return parse_witt_tail(args.x, group, fq)


# --------------------------------------------------------------------------
# subcommands


def cmd_witt_polys(args, out) -> int:
    from .witt import addition_polys, check_weighted_homogeneous, system_to_json

    system = addition_polys(args.p, args.e)
    payload = system_to_json(system)
    payload["weighted_degrees"] = {
        "S": [check_weighted_homogeneous(s).degree for s in system.S],
        "I": [check_weighted_homogeneous(i).degree for i in system.I],
    }
    emit_json(args, payload, out)
    return 0


def _class_payload(x) -> tuple[dict, Any]:
    from .torsor import conductor, reduce

    c = reduce(x)
    return {"input": str(x), "class": c.to_json(), "conductor": conductor(c)}, c


def cmd_reduce(args, out) -> int:
    payload, _ = _class_payload(_witt_tail(args))
    emit_json(args, payload, out)
    return 0


cmd_conductor = cmd_reduce


def cmd_disc(args, out) -> int:
    from .torsor import character_conductors, disc_exponent

    payload, c = _class_payload(_witt_tail(args))
    payload["disc"] = disc_exponent(c)
    payload["character_conductors"] = [
        {"character": list(chi), "conductor": n} for chi, n in character_conductors(c).items()
    ]
    emit_json(args, payload, out)
    return 0


def _flag_rows(args_tuple):
    text, n = args_tuple
    from .invariants import flag_count_bound, flag_enumerate, index_flag_bound, naive_flag_bound
    from .torsor import GroupSpec, flag_disc

    group = GroupSpec.parse(text)
    flags = flag_enumerate(group, n)
    return {
        "n": n,
        "count": len(flags),
        "count_bound": flag_count_bound(group, n),
        "index_bound_holds": all(flag_disc(f) <= index_flag_bound(f) for f in flags if f.jumps() != [0]),
        "naive_bound_violations": sum(
            1 for f in flags if len(f.steps) > 1 and flag_disc(f) > naive_flag_bound(f)
        ),
    }


def cmd_flags(args, out) -> int:
    if args.enumerate is not None:
        rows = parallel_map(_flag_rows, [(args.group, n) for n in range(args.enumerate + 1)], args.jobs)
        emit_json(args, {"flags_by_disc": rows}, out)
        return 0
    if args.x is None:
        raise InputError("flags needs --x or --enumerate")
    from .invariants import index_flag_bound, naive_flag_bound
    from .torsor import long_flag_of

    payload, c = _class_payload(_witt_tail(args))
    flag = long_flag_of(c)
    payload["flag"] = flag.to_json()
    payload["naive_bound"] = naive_flag_bound(flag)
    payload["index_bound"] = index_flag_bound(flag)
    emit_json(args, payload, out)
    return 0


def _ab_payload(spec, ab) -> dict:
    from .invariants import strongly_suitable_check

    payload = ab.to_json()
    payload["label"] = spec.label
    payload["denominator_M"] = spec.denominator()
    payload["suitability"] = strongly_suitable_check(spec, ab).to_json()
    if spec.collisions:
        payload["collisions"] = [{"value": v, "jumps": list(js)} for v, js in spec.collisions]
    return payload


def cmd_invariants(args, out) -> int:
    from .invariants import (
        RepSpec,
        ab_invariants,
        conductor_spec,
        ct_construct,
        ct_threshold,
        disc_ab_estimate,
        v_spec,
    )

    group = _group(args)
    if args.function == "conductor":
        spec = conductor_spec(group)
        payload = _ab_payload(spec, ab_invariants(spec))
    elif args.function == "vfun":
        if not args.rep:
            raise InputError("--function vfun needs --rep")
        spec = v_spec(RepSpec.parse(group.p, args.rep))
        payload = _ab_payload(spec, ab_invariants(spec))
    elif args.function == "ct":
        t = Fraction(args.t) if args.t else ct_threshold(group, args.m) / 2
        spec = ct_construct(group, args.m, t)
        payload = _ab_payload(spec, ab_invariants(spec))
    else:
        q = args.q or group.p
        ab = disc_ab_estimate(group, q, args.r_max)
        payload = ab.to_json()
        payload["label"] = "empirical"
    emit_json(args, payload, out)
    return 0


def cmd_vfun(args, out) -> int:
    from .invariants import RepSpec, sht, v_ab, v_gap_check, v_spec, v_value

    rep = RepSpec.parse(args.p, args.rep)
    spec = v_spec(rep)
    ab = v_ab(rep)
    payload = _ab_payload(spec, ab)
    payload.update(
        {
            "rep": str(rep),
            "d": rep.d,
            "l": rep.l,
            "D_V": rep.D_V,
            "table": [
                {"j": j, "sht": sht(rep, j), "v": v_value(rep, j), "dim_minus_v": gap}
                for j, gap in v_gap_check(rep, args.up_to)
            ],
        }
    )
    emit_json(args, payload, out)
    return 0


def cmd_ct(args, out) -> int:
    from .invariants import ab_invariants, ct_construct, ct_threshold

    group = _group(args)
    threshold = ct_threshold(group, args.m)
    t = Fraction(args.t) if args.t else threshold / 2
    spec = ct_construct(group, args.m, t)
    payload = _ab_payload(spec, ab_invariants(spec))
    payload["t"] = t
    payload["threshold"] = threshold
    emit_json(args, payload, out)
    return 0


def cmd_local_count(args, out) -> int:
    from .torsor import dim_group, local_class_count

    group = _group(args)
    raw, measure = local_class_count(group, args.Q, args.n)
    emit_json(args, {"raw": raw, "measure": measure, "dim": dim_group(group, args.n)}, out)
    return 0


def _height(args):
    from .globalcount import height_from_name
    from .invariants import RepSpec

    group = _group(args)
    rep = RepSpec.parse(group.p, args.rep) if getattr(args, "rep", None) else None
    return height_from_name(group, args.height, rep=rep, m=getattr(args, "m", 2), t=getattr(args, "t", None))


def cmd_euler_series(args, out) -> int:
    from .globalcount import adelic_series

    height = _height(args)
    series = adelic_series(args.q, height, args.levels)
    emit_csv(args, ["level", "coefficient", "partial_sum"], series.to_rows(), out)
    return 0


def cmd_global_count(args, out) -> int:
    from .globalcount import brute_global_enum, conductor_height, disc_height, places_up_to
    from .torsor import GroupSpec

    group = GroupSpec.cyclic(args.p)
    places = places_up_to(args.q, args.max_degree)
    height = disc_height(group) if args.height == "disc" else conductor_height(group)
    classes = brute_global_enum(args.q, args.p, places, args.pole_bound)
    rows = []
    for g in classes:
        r = g.to_row(height)
        rows.append((r["places"], r["local"], r["residue"], r["log_q_height"]))
    rows.sort(key=lambda r: (Fraction(r[3]), r[0], r[1], r[2]))
    emit_csv(args, ["places", "wild_data", "residue", "log_q_height"], rows, out)
    return 0


def cmd_fit(args, out) -> int:
    from .globalcount import adelic_series, fit_exponents, global_count_series, series_counts

    if args.source == "global":
        group = _group(args)
        if group.exponents != (1,):
            raise InputError("global enumeration is for G = Z/p")
        series = global_count_series(args.q, group.p, args.levels)
    else:
        series = adelic_series(args.q, _height(args), args.levels)
    fit = fit_exponents(series_counts(series, jumps_only=not args.all_levels), args.q)
    emit_json(args, fit.to_json(), out)
    return 0


def _oracle_case(case):
    text, q, pb = case
    from .torsor import (
        GroupSpec,
        class_eq,
        local_class_count,
        orbit_oracle,
        reduce,
    )

    group = GroupSpec.parse(text)
    fq = _field_for(group, q)
    classes = orbit_oracle(group, fq, pb)
    reduced = [reduce(oc.representative) for oc in classes]
    consistent = all(reduce(m) == r for oc, r in zip(classes, reduced) for m in oc.members)
    counts = []
    for n in range(pb + 2):
        got = sum(1 for oc in classes if oc.oracle_conductor() <= n)
        counts.append({"n": n, "oracle": got, "formula": local_class_count(group, fq.q, n)[0]})
    reps = [oc.representative for oc in classes]
    cross = all(not class_eq(reps[i], reps[j]) for i in range(len(reps)) for j in range(i + 1, min(len(reps), i + 6)))
    return {
        "group": text,
        "q": q,
        "pole_bound": pb,
        "classes": len(classes),
        "distinct_reduced": len(set(reduced)),
        "members_consistent": consistent,
        "neighbours_distinct": cross,
        "counts": counts,
        "agree": consistent and len(set(reduced)) == len(classes) and all(c["oracle"] == c["formula"] for c in counts),
    }


def cmd_oracle_check(args, out) -> int:
    if args.global_box:
        from .globalcount import check_global_oracle, places_up_to

        places = places_up_to(args.q, 1)
        res = check_global_oracle(args.q, places, [args.pole_bound] * len(places))
        emit_json(args, {"orbits": res.orbits, "brute": res.brute, "agree": res.agree, "detail": res.detail}, out)
        return 0 if res.agree else 4
    if args.group:
        cases = [(args.group, args.q, args.pole_bound)]
    else:
        cases = [("2:1", 2, 4), ("2:2", 2, 2), ("2:1,1", 2, 2), ("3:1", 3, 3)]
    rows = parallel_map(_oracle_case, cases, args.jobs)
    emit_json(args, {"cases": rows, "agree": all(r["agree"] for r in rows)}, out)
    return 0 if all(r["agree"] for r in rows) else 4


# --------------------------------------------------------------------------
# parser


SUITE_OF = {
    "witt-polys": "witt",
    "reduce": "torsor",
    "conductor": "torsor",
    "disc": "torsor",
    "flags": "torsor",
    "oracle-check": "torsor",
    "invariants": "invariants",
    "vfun": "invariants",
    "ct": "invariants",
    "local-count": "global",
    "euler-series": "global",
    "global-count": "global",
    "fit": "global",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wildtorsor", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"wildtorsor {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(func=func)
        sp.add_argument("--selftest", action="store_true", help="run this module's invariant suite")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes (output is independent of this)")
        sp.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
        return sp

    sp = add("witt-polys", cmd_witt_polys, "Witt addition and inverse polynomials")
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("--e", type=int, default=2)

    for name, func, text in (
        ("reduce", cmd_reduce, "canonical form of a Witt tail"),
        ("conductor", cmd_conductor, "conductor of a Witt tail's class"),
        ("disc", cmd_disc, "discriminant exponent via characters"),
        ("flags", cmd_flags, "long flag of a class, or flag enumeration"),
    ):
        sp = add(name, func, text)
        sp.add_argument("--group", default="2:1", help="p:e1,e2,...")
        sp.add_argument("--q", type=int, default=None)
        sp.add_argument("--x", default=None if name == "flags" else "0", help='e.g. "0,0: t^-3; 0,1: w*t^-1"')
        if name == "flags":
            sp.add_argument("--enumerate", type=int, default=None, metavar="N", help="count flags with disc <= N")

    sp = add("invariants", cmd_invariants, "a/b invariants of a raising function")
    sp.add_argument("--group", default="2:1")
    sp.add_argument("--function", choices=["conductor", "vfun", "ct", "disc"], default="conductor")
    sp.add_argument("--rep", default=None, help='Jordan blocks, e.g. "3,2,2" or "2^5"')
    sp.add_argument("--m", type=int, default=2)
    sp.add_argument("--t", default=None)
    sp.add_argument("--q", type=int, default=None)
    sp.add_argument("--r-max", dest="r_max", type=int, default=8)

    sp = add("vfun", cmd_vfun, "v-function of a Z/p representation")
    sp.add_argument("--p", type=int, default=3)
    sp.add_argument("--rep", default="3")
    sp.add_argument("--up-to", dest="up_to", type=int, default=None)

    sp = add("ct", cmd_ct, "c^t raising function with prescribed b")
    sp.add_argument("--group", default="2:1")
    sp.add_argument("--m", type=int, default=2)
    sp.add_argument("--t", default=None)

    sp = add("local-count", cmd_local_count, "local classes of conductor <= n")
    sp.add_argument("--group", default="2:1")
    sp.add_argument("--Q", type=int, default=2)
    sp.add_argument("--n", type=int, default=2)

    for name, func, text in (
        ("euler-series", cmd_euler_series, "adelic height zeta coefficients (CSV)"),
        ("fit", cmd_fit, "fit counting exponents"),
    ):
        sp = add(name, func, text)
        sp.add_argument("--q", type=int, default=2)
        sp.add_argument("--group", default="2:1")
        sp.add_argument("--height", choices=["conductor", "disc", "vfun", "ct"], default="conductor")
        sp.add_argument("--rep", default=None)
        sp.add_argument("--m", type=int, default=2)
        sp.add_argument("--t", default=None)
        sp.add_argument("--levels", type=int, default=20)
        if name == "fit":
            sp.add_argument("--source", choices=["euler", "global"], default="euler")
            sp.add_argument("--all-levels", dest="all_levels", action="store_true")

    sp = add("global-count", cmd_global_count, "brute-force Z/p classes over F_q(t) (CSV)")
    sp.add_argument("--q", type=int, default=2)
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("--max-degree", dest="max_degree", type=int, default=1)
    sp.add_argument("--pole-bound", dest="pole_bound", type=int, default=1)
    sp.add_argument("--height", choices=["conductor", "disc"], default="conductor")

    sp = add("oracle-check", cmd_oracle_check, "compare reduce with brute-force orbit classification")
    sp.add_argument("--group", default=None)
    sp.add_argument("--q", type=int, default=2)
    sp.add_argument("--pole-bound", dest="pole_bound", type=int, default=2)
    sp.add_argument("--global", dest="global_box", action="store_true", help="rational-function box over F_q(t)")
    return parser


def run_selftest(args, out) -> int:
    from .selftest import SUITES

    report = SUITES[SUITE_OF[args.command]]()
    emit_json(args, report.to_json(), out)
    return 0 if report.passed else 4


def _fill_defaults(args) -> None:
    if getattr(args, "q", "absent") is None and hasattr(args, "group") and args.group:
        args.q = int(args.group.split(":")[0]) if args.group.split(":")[0].isdigit() else None


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        _fill_defaults(args)
        if args.selftest:
            return run_selftest(args, out)
        return args.func(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc} (raise {BUDGET_ENV} to allow)", file=sys.stderr)
        return 3
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 4
    except WildTorsorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
