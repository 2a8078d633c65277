"""Command line driver: ``dnfapprox {approx,sweep,verify,gen}``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiment as ex
from .boolfn import parity_table, write_table
from .dnf import closeness, dnf_to_table
from .oracle import exact_error, exact_min_dnf, mc_error, random_dnf, slow_eval
from .parity import block_error, parity_block_approx
from .seeding import make_rng

_FLAGS = {
    "n": "n", "eps": "epsilon", "epsilon": "epsilon", "trials": "trials", "seed": "seed",
    "source": "source", "out": "out", "exhaustive_cap": "exhaustive_cap", "d": "d",
    "blocks": "blocks", "w": "w", "workers": "workers", "construction": "construction",
}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--n", help="arity or list, e.g. 12 or 8,12,16 or 8..12")
    p.add_argument("--eps", "--epsilon", dest="eps", help="epsilon or comma list")
    p.add_argument("--trials")
    p.add_argument("--seed", help="64-bit unsigned master seed")
    p.add_argument("--source", help="parity|majority|and|or|const0|const1|random:Q|monotone:Q|file:PATH")
    p.add_argument("--out", help=f"output directory (default ${ex.OUT_ENV} or ./results)")
    p.add_argument("--exhaustive-cap", dest="exhaustive_cap")
    p.add_argument("--d", help="universal: theorem11, simple_loglog or an integer (list ok)")
    p.add_argument("--blocks", help="parity: block count(s)")
    p.add_argument("--w", help="majority: term width(s), overrides eps")
    p.add_argument("--workers", help="parallel trial workers")


def _build_config(args, construction: str | None) -> ex.ExperimentConfig:
    cfg = ex.ExperimentConfig()
    if args.config:
        try:
            cfg = ex.ExperimentConfig.from_text(Path(args.config).read_text())
        except OSError as e:
            raise ex.ConfigError(f"cannot read config: {e}") from None
    if construction:
        cfg.construction = construction
    for flag, key in _FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            cfg.set(key, str(v))
    return cfg


def _cmd_approx(args) -> int:
    out = ex.run(_build_config(args, args.construction))
    print(f"wrote {out / 'report.csv'} and {out / 'summary.json'}")
    return 0


def _cmd_sweep(args) -> int:
    out = ex.sweep(_build_config(args, None))
    print(f"wrote {out / 'report.csv'} and {out / 'summary.json'}")
    return 0


def oracle_suite(n: int, seed: int) -> list[tuple[str, int, bool]]:
    """(check name, count, passed) for the dual-path cross-checks."""
    rng = make_rng(seed)
    checks = []
    dnfs = [random_dnf(n, int(rng.integers(1, 12)), rng) for _ in range(100)]
    disagreements = 0
    points = 0
    for D in dnfs:
        fast = dnf_to_table(D).bits
        for x in range(1 << n):
            points += 1
            disagreements += bool(fast[x]) != slow_eval(D, x)
    checks.append(("dnf_to_table == slow_eval (points)", points, disagreements == 0))
    ref = dnf_to_table(dnfs[0])
    mism = 0
    for D in dnfs:
        mism += exact_error(D, ref).estimate != closeness(dnf_to_table(D), ref)
    checks.append(("exact_error == closeness (dnfs)", len(dnfs), mism == 0))
    m = min(n, 4)
    small = [random_dnf(m, int(rng.integers(0, 6)), rng) for _ in range(50)]
    ok = True
    for D in small + [parity_block_approx(2, 1)]:
        T = dnf_to_table(D)
        E = exact_min_dnf(T)
        ok &= dnf_to_table(E) == T and E.size <= T.popcount()
    ok &= exact_min_dnf(parity_table(2)).size == 2
    checks.append(("exact_min_dnf exact and no larger than minterms", len(small) + 1, ok))
    reps, hits = 50, 0
    for r in range(reps):
        D = dnfs[r]
        T = dnf_to_table(dnfs[(r + 1) % len(dnfs)])
        exact = closeness(dnf_to_table(D), T)
        est = mc_error(D, lambda x: bool(T.bits[x]), samples=min(1000, (1 << n) // 2 or 100),
                       seed=seed * 1000 + r)
        hits += abs(est.estimate - exact) <= est.half_width
    checks.append(("mc_error within half-width (reps)", reps, hits >= 0.9 * reps))
    return checks


def parity_suite(n: int) -> list[tuple[str, int, bool]]:
    checks = []
    for b in range(1, n + 1):
        if n % b:
            continue
        err = closeness(dnf_to_table(parity_block_approx(n, b)), parity_table(n))
        checks.append((f"parity n={n} b={b} error == 1/2 - 2^-b", 1 << n, err == block_error(b)))
    return checks


def _cmd_verify(args) -> int:
    if args.row is not None:
        report = Path(args.report or Path(args.out or ex.ExperimentConfig().out_dir()) / "report.csv")
        ok, want, got = ex.verify_row(report, args.row)
        for k in ("size", "width", "error", "error_0side", "error_1side"):
            print(f"{k}: recorded={want[k]} recomputed={got[k]}")
        print("PASS" if ok else "FAIL")
        return 0 if ok else 1
    n = int(args.n or 10)
    seed = int(args.seed or 0)
    suites = {"oracles": lambda: oracle_suite(n, seed), "parity": lambda: parity_suite(n)}
    names = list(suites) if args.suite == "all" else [args.suite]
    results = []
    for s in names:
        for name, count, passed in suites[s]():
            results.append({"suite": s, "check": name, "count": count, "passed": passed})
            print(f"[{'PASS' if passed else 'FAIL'}] {s}: {name} ({count})")
    total = sum(r["passed"] for r in results)
    print(json.dumps({"checks": len(results), "passed": total}, sort_keys=True))
    return 0 if total == len(results) else 1


def _cmd_gen(args) -> int:
    cfg = _build_config(args, None)
    if len(cfg.n) != 1:
        raise ex.ConfigError("gen takes a single n")
    src = cfg.source or "random:0.5"
    T = ex.load_source(src, cfg.n[0], cfg.seed)
    write_table(T, args.path)
    print(f"wrote {args.path} ({src}, n={cfg.n[0]}, ones={T.popcount()})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dnfapprox", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("approx", help="run one construction")
    a.add_argument("construction", choices=ex.CONSTRUCTIONS)
    _add_config_flags(a)
    a.set_defaults(func=_cmd_approx)

    s = sub.add_parser("sweep", help="grid over list-valued n / eps / parameters")
    s.add_argument("--construction", help="universal|parity|majority|monotone|all")
    _add_config_flags(s)
    s.set_defaults(func=_cmd_sweep)

    v = sub.add_parser("verify", help="oracle cross-checks or re-run a report row")
    v.add_argument("--suite", default="oracles", choices=["oracles", "parity", "all"])
    v.add_argument("--n")
    v.add_argument("--seed")
    v.add_argument("--row", type=int, help="0-based data row of a report to re-run")
    v.add_argument("--report", help="report.csv path (default: <out>/report.csv)")
    v.add_argument("--out")
    v.set_defaults(func=_cmd_verify)

    g = sub.add_parser("gen", help="write a builtin or random table to a file")
    g.add_argument("path")
    _add_config_flags(g)
    g.set_defaults(func=_cmd_gen)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ex.ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
