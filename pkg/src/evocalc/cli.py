"""Command line harness: `evocalc run <config>` and `evocalc suite <dir>`.

Configs are plain-text key = value files (comments with '#'); unknown keys
are rejected so a typo cannot silently fall back to a default.  Every run
writes the per-scale CSV (the single source of truth) and a JSON summary
derived from it; the exit status is a pure function of the verdict set.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .experiments import DEFAULTS, RUNNERS
from .homogenization import ConvergenceReport

GLOBAL_KEYS = {"experiment", "output", "expect", "configs_dir"}
LIST_KEYS = {"scales", "eta_list"}
STR_KEYS = {"experiment", "output", "expect", "control", "configs_dir"}


class ConfigError(ValueError):
    pass


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in STR_KEYS:
        return raw
    if key in LIST_KEYS:
        items = [x for x in (p.strip() for p in raw.split(",")) if x]
        if not items:
            raise ConfigError(f"{key}: empty list")
        out = []
        for x in items:
            out.append(float(x) if ("." in x or "e" in x.lower()) else int(x))
        return tuple(out)
    try:
        if any(ch in raw for ch in ".eE") and not raw.lstrip("+-").isdigit():
            return float(raw)
        return int(raw)
    except ValueError:
        return float(raw)


def parse_config(path) -> dict:
    """Read a key = value config; validate keys against the experiment."""
    text = Path(path).read_text()
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key in pairs:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        pairs[key] = raw
    if "experiment" not in pairs:
        raise ConfigError(f"{path}: missing 'experiment' key")
    name = pairs["experiment"].strip()
    if name == "suite-all":
        allowed = GLOBAL_KEYS
    elif name in RUNNERS:
        allowed = set(DEFAULTS[name]) | GLOBAL_KEYS | {"seed"}
        if name == "dbf":
            allowed.add("control")
    else:
        raise ConfigError(
            f"{path}: unknown experiment {name!r}; valid: "
            f"{', '.join(sorted(RUNNERS))}, suite-all"
        )
    cfg = {}
    for key, raw in pairs.items():
        if key not in allowed:
            raise ConfigError(f"{path}: unknown key {key!r} for experiment {name}")
        cfg[key] = _parse_value(key, raw)
    if name != "suite-all":
        merged = dict(DEFAULTS[name])
        merged.update(cfg)
        if "scales" in merged and not merged["scales"]:
            raise ConfigError(f"{path}: scales must be non-empty")
        cfg = merged
    expect = cfg.get("expect", "pass")
    if expect not in ("pass", "fail"):
        raise ConfigError(f"{path}: expect must be 'pass' or 'fail', got {expect!r}")
    cfg["expect"] = expect
    return cfg


def _write_outputs(report: ConvergenceReport, out_base: Path, runtime: float, seed):
    out_base.parent.mkdir(parents=True, exist_ok=True)
    report.write_csv(out_base.with_suffix(".csv"))
    summary = {
        "experiment": report.experiment,
        "seed": seed,
        "rows": report.rows,
        "verdict": "pass" if report.verdict else "fail",
        "runtime_seconds": round(runtime, 3),
        "metadata": {k: v for k, v in report.metadata.items() if k != "seed"},
    }
    with open(out_base.with_suffix(".json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=str)
    return summary


def run(config_path, out_override=None, verbose=False) -> int:
    """Execute one experiment config; returns the process exit status."""
    try:
        cfg = parse_config(config_path)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    name = cfg["experiment"]
    if name == "suite-all":
        return suite(cfg.get("configs_dir", "."), out_override, verbose)
    if out_override:
        out_base = Path(out_override)
    elif "output" in cfg:
        out_base = Path(cfg["output"])
        if not out_base.is_absolute():
            out_base = Path(config_path).parent / out_base
    else:
        out_base = Path(config_path).with_suffix("")
    t0 = time.time()
    report = RUNNERS[name](cfg)
    summary = _write_outputs(report, out_base, time.time() - t0, cfg.get("seed"))
    if verbose:
        for r in report.rows:
            print(f"  scale={r['scale']} pairing={r['pairing_error']:.3e} "
                  f"norm={r['norm_error']:.3e} bound={r['bound_rhs']:.3e} "
                  f"{'pass' if r['verdict'] else 'FAIL'}")
    ok = report.verdict
    print(f"{name}: {'pass' if ok else 'FAIL'} ({len(report.rows)} rows, "
          f"{summary['runtime_seconds']}s) -> {out_base.with_suffix('.csv')}")
    if not ok:
        for r in report.rows:
            if not r["verdict"]:
                print(f"  failing row: scale={r['scale']} "
                      f"value={max(r['pairing_error'], r['norm_error']):.4e} "
                      f"bound={r['bound_rhs']:.4e}", file=sys.stderr)
    return 0 if ok else 2


def suite(configs_dir, out_override=None, verbose=False) -> int:
    """Run every *.cfg in a directory; aggregate with expect-fail inversion."""
    cfg_dir = Path(configs_dir)
    paths = sorted(cfg_dir.glob("*.cfg"))
    if not paths:
        print(f"no .cfg files in {cfg_dir}", file=sys.stderr)
        return 1
    results = []
    all_ok = True
    for path in paths:
        try:
            cfg = parse_config(path)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            results.append({"config": path.name, "verdict": "error", "effective": "fail"})
            all_ok = False
            continue
        status = run(path, verbose=verbose)
        raw_pass = status == 0
        expected_fail = cfg["expect"] == "fail"
        effective = raw_pass != expected_fail
        results.append({
            "config": path.name,
            "experiment": cfg["experiment"],
            "verdict": "pass" if raw_pass else "fail",
            "expect": cfg["expect"],
            "effective": "pass" if effective else "fail",
        })
        all_ok = all_ok and effective
    aggregate = {
        "configs": results,
        "verdict": "pass" if all_ok else "fail",
    }
    out_path = Path(out_override) if out_override else cfg_dir / "suite_summary.json"
    with open(out_path, "w") as fh:
        json.dump(aggregate, fh, indent=2, sort_keys=True)
    print(f"suite: {'pass' if all_ok else 'FAIL'} ({len(results)} configs) -> {out_path}")
    return 0 if all_ok else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="evocalc",
        description="certification experiments for causal evolution systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="override output base path")
    p_run.add_argument("--verbose", action="store_true")
    p_suite = sub.add_parser("suite", help="run every config in a directory")
    p_suite.add_argument("configs_dir")
    p_suite.add_argument("--out", default=None, help="override summary path")
    p_suite.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)
    if args.command == "run":
        return run(args.config, args.out, args.verbose)
    return suite(args.configs_dir, args.out, args.verbose)


if __name__ == "__main__":
    sys.exit(main())
