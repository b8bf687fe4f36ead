"""Command-line interface.

    msrcodes profile --variant A -n 6 -k 2 -d 4 --field-width 5 -o code.msrp
    msrcodes encode  --profile code.msrp input.bin --out-dir shards/
    msrcodes decode  --profile code.msrp --shard-dir shards/ -o output.bin
    msrcodes payload --profile code.msrp --failed 0 --helpers 1,2,3,4 --shard shards/shard_001.msrs -o h1.msrh
    msrcodes repair  --profile code.msrp --failed 0 --helpers 1,2,3,4 --shard-dir shards/
    msrcodes verify  --profile code.msrp --report json
    msrcodes bench   --profile code.msrp --size 1048576

Failures print ``error: <class>: <message>`` on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import codec, formats, reduction, repair
from .construction import (
    CodeParams,
    CodeProfile,
    check_global_constraints,
    check_local_constraints,
    count_selections,
    enumerate_selections,
)
from .errors import CapacityError, FormatError, MSRError, TooManyErasuresError
from .gf import FieldContext, smallest_width
from .reduction import CertificateError

EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_ERROR = 3

# encode re-runs the brute-force MDS check when it is at most this many selections
CERTIFY_BUDGET = 20_000


def _csv_ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _hex(text: str) -> int:
    try:
        return int(text, 16)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a hex polynomial, got {text!r}")


def _add_code_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("code parameters (when no --profile is given)")
    g.add_argument("--variant", choices=["A", "B"], default="A")
    g.add_argument("-n", type=int)
    g.add_argument("-k", type=int)
    g.add_argument("-d", type=int)
    g.add_argument("--field-width", type=int, help="w of GF(2^w); default: smallest w reaching the search guarantee")
    g.add_argument("--poly", type=_hex, help="reduction polynomial in hex, e.g. 0x25")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="msrcodes", description="Explicit MSR array codes: encode, decode, repair.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="generate a code profile (MSRP file)")
    _add_code_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--no-global-check", action="store_true", help="skip the brute-force MDS check")
    p.add_argument("--report", choices=["text", "json"], default="text")

    p = sub.add_parser("encode", help="encode a file into n shards")
    p.add_argument("--profile", required=True)
    p.add_argument("input")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("decode", help="rebuild a file from at least k shards")
    p.add_argument("--profile", required=True)
    p.add_argument("--shard-dir", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("payload", help="compute one helper's repair payload from its shard")
    p.add_argument("--profile", required=True)
    p.add_argument("--failed", type=int, required=True)
    p.add_argument("--helpers", type=_csv_ints, required=True)
    p.add_argument("--shard", required=True)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("repair", help="rebuild one shard from exactly d helpers")
    p.add_argument("--profile", required=True)
    p.add_argument("--failed", type=int, required=True)
    p.add_argument("--helpers", type=_csv_ints, required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--shard-dir", help="read helper shards shard_NNN.msrs from here")
    src.add_argument("--payloads", nargs="+", help="helper payload files (MSRH)")
    p.add_argument("-o", "--output", help="repaired shard path (default: <shard-dir>/shard_<failed>.msrs)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--report", choices=["text", "json"], default="text")

    p = sub.add_parser("verify", help="run constraint, reduction and repair suites")
    p.add_argument("--profile")
    _add_code_flags(p)
    p.add_argument("--suites", type=lambda s: s.split(","), default=["local", "global", "reduction", "repair"])
    p.add_argument("--budget", type=int, default=200_000, help="max selections / cases per suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", choices=["text", "json"], default="text")

    p = sub.add_parser("bench", help="throughput of encode, decode and repair")
    p.add_argument("--profile")
    _add_code_flags(p)
    p.add_argument("--size", type=int, default=1 << 20, help="bytes of random input")
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", choices=["text", "json"], default="text")
    return parser


# -- helpers ------------------------------------------------------------------


def _params_from_flags(args) -> CodeParams:
    if args.n is None or args.k is None or args.d is None:
        raise ValueError("either --profile or all of -n, -k, -d are required")
    return CodeParams(args.n, args.k, args.d, args.variant)


def _profile_from_flags(args) -> CodeProfile:
    params = _params_from_flags(args)
    width = args.field_width if args.field_width is not None else smallest_width(params.field_bound)
    field = FieldContext(width, args.poly)
    return CodeProfile.build(params, field)


def _load_profile(args) -> CodeProfile:
    if getattr(args, "profile", None):
        return formats.read_profile(args.profile)
    return _profile_from_flags(args)


def _profile_summary(profile: CodeProfile) -> dict:
    p = profile.params
    return {
        "variant": p.variant, "n": p.n, "k": p.k, "d": p.d, "r": p.r, "s": p.s, "ell": p.ell,
        "groups": p.groups, "dropped": p.dropped,
        "field_width": profile.field.width, "poly": hex(profile.field.poly),
        "field_bound": p.field_bound, "digest": profile.digest.hex(),
        "lambdas": list(profile.lambdas),
    }


def _emit(report: dict, fmt: str, text_lines: list[str]) -> None:
    if fmt == "json":
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print("\n".join(text_lines))


def _certify(profile: CodeProfile) -> None:
    p = profile.params
    if count_selections(p, p.r) > CERTIFY_BUDGET:
        print("warning: profile too large to re-certify; output is uncertified", file=sys.stderr)
        return
    report = check_global_constraints(profile)
    if not report.passed:
        raise CertificateError(f"profile fails the MDS check on {len(report.failures)} selections")


def _read_shards(profile: CodeProfile, shard_dir: str) -> dict[int, formats.Shard]:
    d = Path(shard_dir)
    if not d.is_dir():
        raise FormatError(f"{shard_dir} is not a directory")
    shards = {}
    for path in sorted(d.glob("shard_*.msrs")):
        sh = formats.shard_from_bytes(profile, formats.read_file(path))
        if sh.node in shards:
            raise FormatError(f"two shards claim node {sh.node}")
        shards[sh.node] = sh
    if shards:
        meta = {(sh.stripes, sh.length) for sh in shards.values()}
        if len(meta) != 1:
            raise FormatError("shards disagree on stripe count or file length")
    return shards


# -- commands -----------------------------------------------------------------


def cmd_profile(args) -> int:
    profile = _profile_from_flags(args)
    status = "skipped"
    checked = 0
    if not args.no_global_check:
        rep = check_global_constraints(profile)
        checked = rep.checked
        status = "passed" if rep.passed else "failed"
        if not rep.passed:
            raise CertificateError(f"generated profile fails the MDS check on {len(rep.failures)} selections")
    formats.write_file(args.output, profile.to_bytes())
    info = _profile_summary(profile)
    info.update(global_check=status, selections_checked=checked, path=args.output)
    _emit(info, args.report, [
        f"profile {args.output}: variant {info['variant']} n={info['n']} k={info['k']} d={info['d']}"
        f" ell={info['ell']} GF(2^{info['field_width']}) poly={info['poly']}",
        f"global check: {status} ({checked} selections)",
        f"digest: {info['digest']}",
    ])
    return 0


def cmd_encode(args) -> int:
    profile = formats.read_profile(args.profile)
    _certify(profile)
    data = formats.read_file(args.input)
    word = codec.encode_bytes(profile, data, threads=args.threads)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i, node in enumerate(word.nodes):
        shard = formats.Shard(profile.digest, i, len(data), node)
        formats.write_file(out / formats.shard_name(i), formats.shard_to_bytes(profile, shard))
    print(f"encoded {len(data)} bytes into {profile.n} shards ({word.nodes[0].shape[1]} stripes) in {out}")
    return 0


def cmd_decode(args) -> int:
    profile = formats.read_profile(args.profile)
    shards = _read_shards(profile, args.shard_dir)
    if len(shards) < profile.k:
        raise TooManyErasuresError(f"found {len(shards)} shards, need at least k={profile.k}")
    length = next(iter(shards.values())).length
    nodes = [shards[i].symbols if i in shards else None for i in range(profile.n)]
    # only k survivors are needed; extra ones become a consistency check
    word = codec.decode_erasures(profile, codec.Codeword(nodes), threads=args.threads)
    formats.write_file(args.output, codec.join_stripes(profile, word.nodes[: profile.k], length))
    print(f"decoded {length} bytes from {len(shards)} shards to {args.output}")
    return 0


def cmd_payload(args) -> int:
    profile = formats.read_profile(args.profile)
    plan = repair.plan_repair(profile, args.failed, args.helpers)
    shard = formats.shard_from_bytes(profile, formats.read_file(args.shard))
    if shard.node not in plan.helpers:
        raise ValueError(f"shard belongs to node {shard.node}, which is not a helper of this repair")
    sym = repair.helper_payload(profile, plan, shard.node, shard.symbols)
    payload = formats.Payload(shard.node, plan.digest(profile), shard.length, sym)
    formats.write_file(args.output, formats.payload_to_bytes(profile, payload))
    rule = plan.send_for(shard.node)
    print(f"node {shard.node}: read {len(rule.read_set)} sent {rule.sent} symbols per stripe -> {args.output}")
    return 0


def cmd_repair(args) -> int:
    profile = formats.read_profile(args.profile)
    plan = repair.plan_repair(profile, args.failed, args.helpers)
    if args.shard_dir:
        shards = _read_shards(profile, args.shard_dir)
        missing = [h for h in plan.helpers if h not in shards]
        if missing:
            raise FormatError(f"helper shards missing for nodes {missing}")
        ref = shards[plan.helpers[0]]
        payloads = {h: repair.helper_payload(profile, plan, h, shards[h].symbols) for h in plan.helpers}
        stripes, length = ref.stripes, ref.length
        out = args.output or str(Path(args.shard_dir) / formats.shard_name(plan.failed))
    else:
        if args.output is None:
            raise ValueError("--output is required when repairing from payload files")
        payloads, meta = {}, set()
        digest = plan.digest(profile)
        for path in args.payloads:
            pl = formats.payload_from_bytes(profile, formats.read_file(path))
            if pl.plan_digest != digest:
                raise FormatError(f"{path} was computed for a different repair plan")
            payloads[pl.node] = pl.symbols
            meta.add((pl.stripes, pl.length))
        if set(payloads) != set(plan.helpers):
            raise FormatError(f"payloads cover nodes {sorted(payloads)}, plan needs {list(plan.helpers)}")
        if len(meta) != 1:
            raise FormatError("payloads disagree on stripe count or file length")
        stripes, length = meta.pop()
        out = args.output
    node = repair.execute_repair(profile, plan, payloads, threads=args.threads)
    formats.write_file(out, formats.shard_to_bytes(profile, formats.Shard(profile.digest, plan.failed, length, node)))
    ledger = repair.account(plan)
    report = {
        "failed": plan.failed, "helpers": list(plan.helpers), "stripes": stripes, "output": out,
        "per_stripe": ledger.as_dict(),
        "total_read": ledger.total_read * stripes, "total_sent": ledger.total_sent * stripes,
        "bound": profile.params.d * profile.ell // profile.s, "naive": repair.naive_download(profile),
    }
    lines = [f"repaired node {plan.failed} from helpers {','.join(map(str, plan.helpers))} -> {out}"]
    for h in plan.helpers:
        lines.append(f"  helper {h}: read {ledger.read[h]} sent {ledger.sent[h]}")
    lines.append(f"per stripe: read={ledger.total_read} sent={ledger.total_sent} (naive decode {report['naive']})")
    lines.append(f"all {stripes} stripes: read={report['total_read']} sent={report['total_sent']}")
    _emit(report, args.report, lines)
    return 0


# -- verify -------------------------------------------------------------------


def _suite_local(profile: CodeProfile, budget: int, rng) -> dict:
    checked, failures = 0, []
    for a in range(profile.params.groups):
        rep = check_local_constraints(profile, a)
        checked += rep.checked
        failures += [[a, list(B)] for B in rep.failures]
    return {"passed": not failures, "checked": checked, "failures": failures}


def _suite_global(profile: CodeProfile, budget: int, rng) -> dict:
    rep = check_global_constraints(profile, budget=budget)
    return {"passed": rep.passed, "checked": rep.checked, "failures": [repr(f) for f in rep.failures[:20]]}


def _suite_reduction(profile: CodeProfile, budget: int, rng) -> dict:
    p = profile.params
    if count_selections(p, p.r) > budget:
        raise CapacityError(f"reduction suite exceeds the budget of {budget} selections")
    failures, checked = [], 0
    for sel in enumerate_selections(p, p.r):
        rep = reduction.verify_triangular_reduction(profile, sel)
        checked += 1
        if not rep.passed:
            failures.append(f"{sel}: {rep.detail}")
    return {"passed": not failures, "checked": checked, "failures": failures[:20]}


def _suite_repair(profile: CodeProfile, budget: int, rng) -> dict:
    p = profile.params
    data = [rng.integers(0, profile.field.order, size=(p.ell, 2)) for _ in range(p.k)]
    word = codec.encode(profile, data)
    failures, checked = [], 0
    for f in range(p.n):
        others = [j for j in range(p.n) if j != f]
        for helpers in itertools.combinations(others, p.d):
            if checked >= budget:
                raise CapacityError(f"repair suite exceeds the budget of {budget} cases")
            checked += 1
            try:
                got = repair.repair_node(profile, word, f, helpers)
                if not np.array_equal(got, word.nodes[f]):
                    failures.append(f"node {f} helpers {list(helpers)}: wrong output")
            except MSRError as exc:
                failures.append(f"node {f} helpers {list(helpers)}: {exc}")
    return {"passed": not failures, "checked": checked, "failures": failures[:20]}


SUITES = {"local": _suite_local, "global": _suite_global, "reduction": _suite_reduction, "repair": _suite_repair}


def cmd_verify(args) -> int:
    profile = _load_profile(args)
    unknown = [s for s in args.suites if s not in SUITES]
    if unknown:
        raise ValueError(f"unknown suites {unknown}; choose from {sorted(SUITES)}")
    rng = np.random.default_rng(args.seed)
    results = {}
    for name in args.suites:
        t0 = time.perf_counter()
        res = SUITES[name](profile, args.budget, rng)
        res["seconds"] = round(time.perf_counter() - t0, 4)
        results[name] = res
    ok = all(r["passed"] for r in results.values())
    report = {"profile": _profile_summary(profile), "suites": results, "passed": ok}
    lines = [f"{name:10s} {'PASS' if r['passed'] else 'FAIL'}  {r['checked']} checked  {r['seconds']:.3f}s"
             for name, r in results.items()]
    for name, r in results.items():
        lines += [f"  {name}: {f}" for f in r["failures"]]
    _emit(report, args.report, lines)
    return 0 if ok else EXIT_FAIL


# -- bench --------------------------------------------------------------------


def _best(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cmd_bench(args) -> int:
    profile = _load_profile(args)
    p = profile.params
    rng = np.random.default_rng(args.seed)
    data = rng.integers(0, 256, size=args.size, dtype=np.uint8).tobytes()
    word = codec.encode_bytes(profile, data, threads=args.threads)
    erased = word.erase(range(p.k))
    helpers = list(range(1, p.d + 1))
    plan = repair.plan_repair(profile, 0, helpers)
    payloads = {h: repair.helper_payload(profile, plan, h, word.nodes[h]) for h in plan.helpers}
    timings = {
        "encode": _best(lambda: codec.encode_bytes(profile, data, threads=args.threads), args.repeat),
        "decode": _best(lambda: codec.decode_erasures(profile, erased, threads=args.threads), args.repeat),
        "repair": _best(lambda: repair.execute_repair(profile, plan, payloads, threads=args.threads), args.repeat),
    }
    mb = args.size / 1e6
    report = {
        "bytes": args.size, "stripes": word.nodes[0].shape[1], "threads": args.threads,
        "seconds": timings, "mb_per_s": {k: mb / v if v else None for k, v in timings.items()},
    }
    lines = [f"{name:7s} {t * 1e3:9.2f} ms  {mb / t:8.2f} MB/s" for name, t in timings.items()]
    _emit(report, args.report, lines)
    return 0


COMMANDS = {
    "profile": cmd_profile, "encode": cmd_encode, "decode": cmd_decode, "payload": cmd_payload,
    "repair": cmd_repair, "verify": cmd_verify, "bench": cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        print("error: usage: --threads must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except MSRError as exc:
        print(f"error: {exc.kind}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
