"""Experiment configuration, the run/sweep engine and report writers."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Union

import numpy as np

from . import majority, monotone, parity, universal
from .boolfn import (MAX_N, TruthTable, and_table, is_monotone, majority_table, or_table,
                     parity_table, random_monotone_table, random_table, read_table)
from .dnf import ApproxReport, Dnf, dnf_to_table, dnf_to_text, error_split
from .oracle import DEFAULT_SAMPLES, EXHAUSTIVE_CAP, mc_error
from .seeding import MASK64, make_rng, trial_seed

OUT_ENV = "DNFAPPROX_OUT"
CONSTRUCTIONS = ("universal", "parity", "majority", "monotone")

COLUMNS = ["construction", "n", "epsilon", "param_name", "param_value", "trial", "seed",
           "source", "source_seed", "size", "width", "error", "error_0side",
           "error_1side", "error_method", "bound_universal", "bound_specific", "status"]


class ConfigError(ValueError):
    pass


def fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


# -- config ------------------------------------------------------------------

def _parse_list(text: str, conv) -> list:
    out = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        if ".." in part:
            a, b = part.split("..", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(conv(part))
    return out


def _d_value(s: str) -> Union[str, int]:
    return s if s in ("theorem11", "simple_loglog") else int(s)


@dataclass
class ExperimentConfig:
    construction: str = "universal"
    n: list[int] = field(default_factory=lambda: [10])
    epsilon: list[float] = field(default_factory=lambda: [0.2])
    trials: int = 1
    seed: int = 0
    source: str = ""
    out: str = ""
    exhaustive_cap: int = EXHAUSTIVE_CAP
    d: list = field(default_factory=lambda: ["simple_loglog"])
    blocks: list[int] = field(default_factory=list)
    w: list[int] = field(default_factory=list)
    workers: int = 1

    _LISTS = {"n": int, "epsilon": float, "d": _d_value, "blocks": int, "w": int}
    _SCALARS = {"construction": str, "trials": int, "seed": int, "source": str, "out": str,
                "exhaustive_cap": int, "workers": int}

    def to_text(self, exclude: tuple[str, ...] = ()) -> str:
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            if f.name in exclude:
                continue
            v = getattr(self, f.name)
            if isinstance(v, list):
                v = ",".join(fmt(x) for x in v)
            else:
                v = fmt(v)
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        cfg = cls()
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"config line without '=': {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            cfg.set(key, value)
        return cfg

    def set(self, key: str, value: str) -> None:
        key = key.replace("-", "_")
        try:
            if key in self._LISTS:
                setattr(self, key, _parse_list(value, self._LISTS[key]))
            elif key in self._SCALARS:
                setattr(self, key, self._SCALARS[key](value))
            else:
                raise ConfigError(f"unknown config key {key!r}")
        except ValueError as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"bad value for {key}: {value!r}") from None

    def constructions(self) -> list[str]:
        return list(CONSTRUCTIONS) if self.construction == "all" else [self.construction]

    def out_dir(self) -> Path:
        return Path(self.out or os.environ.get(OUT_ENV, "results"))

    def validate(self) -> None:
        if self.construction not in CONSTRUCTIONS + ("all",):
            raise ConfigError(f"unknown construction {self.construction!r}")
        if not self.n:
            raise ConfigError("n must not be empty")
        for n in self.n:
            if not 2 <= n <= MAX_N:
                raise ConfigError(f"n must lie in [2, {MAX_N}], got {n}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not 0 <= self.seed <= MASK64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if not 1 <= self.exhaustive_cap <= MAX_N:
            raise ConfigError(f"exhaustive_cap must lie in [1, {MAX_N}]")
        cons = self.constructions()
        needs_eps = any(c != "parity" for c in cons) or ("parity" in cons and not self.blocks)
        if needs_eps and not self.epsilon:
            raise ConfigError("epsilon must not be empty")
        for e in self.epsilon:
            if not 0 < e <= 1:
                raise ConfigError(f"epsilon must lie in (0, 1], got {e}")
        if "universal" in cons:
            for d in self.d:
                if isinstance(d, int) and d < 1:
                    raise ConfigError(f"d must be >= 1, got {d}")
            for n in self.n:
                for e in self.epsilon:
                    for d in self.d:
                        try:
                            universal.choose_d(n, e, d)
                        except ValueError as exc:
                            raise ConfigError(str(exc)) from None
        if "parity" in cons:
            for n in self.n:
                for b in self.blocks:
                    if not 1 <= b <= n:
                        raise ConfigError(f"blocks must lie in [1, n], got {b} for n={n}")
            if not self.blocks:
                for e in self.epsilon:
                    if not 0 < e < 0.5:
                        raise ConfigError("parity needs blocks or epsilon in (0, 1/2)")
        if "majority" in cons:
            for w in self.w:
                if w < 1:
                    raise ConfigError(f"w must be >= 1, got {w}")
        if "monotone" in cons:
            for e in self.epsilon:
                if not 0 < e < 1:
                    raise ConfigError("monotone needs epsilon in (0, 1)")
        for c in cons:
            if c in ("universal", "monotone"):
                for n in self.n:
                    f = load_source(self.source_for(c), n, self.seed)
                    if c == "monotone" and not is_monotone(f):
                        raise ConfigError(f"source {self.source_for(c)!r} is not monotone")

    def source_for(self, construction: str) -> str:
        if self.source:
            return self.source
        return "monotone:0.05" if construction == "monotone" else "random:0.5"


# -- function sources ----------------------------------------------------------

_BUILTINS = {"parity": parity_table, "majority": majority_table, "and": and_table,
             "or": or_table, "const0": lambda n: TruthTable.constant(n, False),
             "const1": lambda n: TruthTable.constant(n, True)}


def load_source(text: str, n: int, seed: int) -> TruthTable:
    """builtin name | random:<q> | monotone:<q> | file:<path>."""
    kind, _, arg = text.partition(":")
    try:
        if kind in _BUILTINS and not arg:
            return _BUILTINS[kind](n)
        if kind == "random":
            return random_table(n, float(arg), seed)
        if kind == "monotone":
            return random_monotone_table(n, float(arg), seed)
        if kind == "file":
            T = read_table(arg)
            if T.n != n:
                raise ConfigError(f"table file {arg} has n={T.n}, run asks for n={n}")
            return T
    except (OSError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"cannot load source {text!r}: {e}") from None
    raise ConfigError(f"unknown source {text!r}")


# -- single rows ---------------------------------------------------------------

@dataclass
class Row:
    values: dict
    dnf: Dnf | None = None
    extra: dict | None = None

    def csv_fields(self) -> list[str]:
        return [fmt(self.values[c]) for c in COLUMNS]


def _measure(h: Dnf, f: TruthTable, cap: int, seed: int) -> tuple[float, float, float, str]:
    if f.n <= cap:
        return (*error_split(dnf_to_table(h), f), "exhaustive")
    est = mc_error(h, lambda x: bool(f.bits[x]), DEFAULT_SAMPLES, seed)
    return est.estimate, float("nan"), float("nan"), "monte_carlo"


def _bound_universal(n: int) -> float:
    return 2.0 ** n / math.log2(n)


def run_row(construction: str, n: int, epsilon: float, param, trial: int, seed: int,
            source: str, source_seed: int, cap: int) -> Row:
    """One trial; ``seed`` is the trial's own seed, so a row re-runs from its fields."""
    base = {"construction": construction, "n": n, "epsilon": epsilon, "trial": trial,
            "seed": seed, "source": source, "source_seed": source_seed,
            "bound_universal": _bound_universal(n), "status": "ok"}
    extra = None
    if construction == "universal":
        f = load_source(source, n, source_seed)
        d = universal.choose_d(n, epsilon, param)
        rec = universal.stage1_flip(f, epsilon, make_rng(seed))
        h = universal.stage2_cover(rec.g, d)
        err, e0, e1, method = _measure(h, f, cap, seed)
        base.update(param_name="d", param_value=d,
                    bound_specific=universal.size_bound(n, epsilon, d))
        if not universal.balance_ok(f, epsilon):
            base["status"] = "ok;unbalanced"
    elif construction == "parity":
        b = param
        f = parity_table(n)
        h = parity.parity_block_approx(n, b)
        err, e0, e1, method = _measure(h, f, cap, seed)
        eps_b = float(parity.block_error(b))
        base.update(epsilon=eps_b, param_name="b", param_value=b, source="parity",
                    bound_specific=parity.theorem_size_bound(n, eps_b))
    elif construction == "majority":
        w = param
        T = majority.term_count(w)
        h = majority.talagrand_sample(n, w, T, make_rng(seed))
        f = majority_table(n)
        err, e0, e1, method = _measure(h, f, cap, seed)
        base.update(param_name="w", param_value=w, source="majority", bound_specific=T)
        if epsilon < 1 / math.sqrt(n):
            base["status"] = "ok;below_threshold"
    elif construction == "monotone":
        f = load_source(source, n, source_seed)
        res = monotone.theorem31_approx(f, epsilon, seed, trial)
        h = res.dnf
        err, e0, e1, method = _measure(h, f, cap, seed)
        base.update(param_name="t", param_value=res.decomposition.t,
                    bound_specific=f.popcount())
        fails = res.report.flags["lemma33_failures"]
        if fails:
            base["status"] = f"partial;lemma33_failures={fails}"
        extra = monotone.decomposition_report(res.decomposition, res.pieces)
    else:
        raise ConfigError(f"unknown construction {construction!r}")
    base.update(size=h.size, width=h.width, error=err, error_0side=e0, error_1side=e1,
                error_method=method)
    return Row(base, h, extra)


def _grid(cfg: ExperimentConfig, construction: str):
    """(n, epsilon, param) combinations in a fixed order."""
    for n in cfg.n:
        if construction == "parity":
            blocks = cfg.blocks or [parity.blocks_for_epsilon(e) for e in cfg.epsilon]
            for b in blocks:
                yield n, float(parity.block_error(b)), b
        elif construction == "majority":
            for e in cfg.epsilon:
                for w in (cfg.w or [majority.width_for_epsilon(n, e)]):
                    yield n, e, w
        elif construction == "universal":
            for e in cfg.epsilon:
                for d in cfg.d:
                    yield n, e, d
        else:
            for e in cfg.epsilon:
                yield n, e, None


def execute(cfg: ExperimentConfig) -> list[Row]:
    tasks = []
    for c in cfg.constructions():
        for n, e, param in _grid(cfg, c):
            trials = 1 if c == "parity" else cfg.trials
            for t in range(trials):
                seed = cfg.seed if c == "parity" else trial_seed(cfg.seed, t)
                tasks.append((c, n, e, param, t, seed, cfg.source_for(c), cfg.seed,
                              cfg.exhaustive_cap))
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            return list(pool.map(lambda a: run_row(*a), tasks))
    return [run_row(*a) for a in tasks]


def rows_to_csv(rows: list[Row]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow(r.csv_fields())
    return buf.getvalue()


def summarize(cfg: ExperimentConfig, rows: list[Row]) -> dict:
    groups: dict[tuple, list[Row]] = {}
    for r in rows:
        v = r.values
        groups.setdefault((v["construction"], v["n"], v["epsilon"], v["param_value"]), []).append(r)
    runs = []
    for (c, n, e, pv), rs in groups.items():
        errs = [r.values["error"] for r in rs]
        best = min(rs, key=lambda r: (r.values["error"], r.values["size"], r.values["trial"]))
        runs.append({
            "construction": c, "n": n, "epsilon": fmt(e),
            "param_name": rs[0].values["param_name"], "param_value": pv,
            "trials": len(rs), "mean_error": fmt(float(np.mean(errs))),
            "best_trial": best.values["trial"], "best_error": fmt(best.values["error"]),
            "best_size": best.values["size"], "best_width": best.values["width"],
            "statuses": sorted({r.values["status"] for r in rs}),
        })
    # output location and worker count must not leak into the reproducible summary
    return {"config": cfg.to_text(exclude=("out", "workers")), "rows": len(rows), "runs": runs, "completed": True}


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_outputs(cfg: ExperimentConfig, rows: list[Row], dnf_files: bool) -> Path:
    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    _atomic_write(out / "report.csv", rows_to_csv(rows))
    summary = summarize(cfg, rows)
    _atomic_write(out / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if dnf_files:
        for run in summary["runs"]:
            best = next(r for r in rows if r.values["construction"] == run["construction"]
                        and r.values["n"] == run["n"] and fmt(r.values["epsilon"]) == run["epsilon"]
                        and r.values["param_value"] == run["param_value"]
                        and r.values["trial"] == run["best_trial"])
            stem = (f"{run['construction']}_n{run['n']}_eps{run['epsilon']}"
                    f"_{run['param_name']}{run['param_value']}")
            _atomic_write(out / f"{stem}.dnf", dnf_to_text(best.dnf))
            if best.extra is not None:
                _atomic_write(out / f"{stem}.decomposition.json",
                              json.dumps(best.extra, indent=2, sort_keys=True) + "\n")
    return out


def run(cfg: ExperimentConfig) -> Path:
    """Validate, execute every requested construction, write report files."""
    cfg.validate()
    rows = execute(cfg)
    return write_outputs(cfg, rows, dnf_files=True)


def sweep(cfg: ExperimentConfig) -> Path:
    cfg.validate()
    rows = execute(cfg)
    return write_outputs(cfg, rows, dnf_files=False)


def rerun_csv_row(values: dict, cap: int = EXHAUSTIVE_CAP) -> Row:
    """Recompute a report row from its recorded fields."""
    c = values["construction"]
    n = int(values["n"])
    e = float(values["epsilon"])
    param = None if c == "monotone" else int(values["param_value"])
    return run_row(c, n, e, param, int(values["trial"]), int(values["seed"]),
                   values["source"], int(values["source_seed"]), cap)


def verify_row(report: Path, index: int, cap: int = EXHAUSTIVE_CAP) -> tuple[bool, dict, dict]:
    with open(report, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not 0 <= index < len(rows):
        raise ConfigError(f"row {index} out of range (report has {len(rows)} rows)")
    want = rows[index]
    got = dict(zip(COLUMNS, rerun_csv_row(want, cap).csv_fields()))
    keys = ["size", "width", "error", "error_0side", "error_1side"]
    return all(want[k] == got[k] for k in keys), want, got
