"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import sweep
from ._backend import BACKEND
from .errors import FsnomaError
from .sweep import SpecError

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, spec_required: bool = True) -> None:
    if spec_required:
        p.add_argument("specfile", help="TOML spec file")
    else:
        p.add_argument("specfile", nargs="?", help="TOML spec file (defaults if omitted)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a setting, e.g. system.a2=0.2 or monte_carlo.n_samples=1e5")
    p.add_argument("--snr-db", type=float, help="shorthand for --set system.snr_db=...")
    p.add_argument("--a2", type=float, help="shorthand for --set system.a2=...")
    p.add_argument("--samples", type=int, help="Monte-Carlo sample count")
    p.add_argument("--seed", type=int, help="Monte-Carlo master seed")
    p.add_argument("--print-config", action="store_true", dest="print_config",
                   help="echo the fully resolved configuration and exit")


def _outputs(p):
    p.add_argument("--out-dir", default=".", help="directory for relative output paths")
    p.add_argument("--only", action="append", default=[], metavar="NAME",
                   help="run only the named block(s)")
    p.add_argument("--timing", action="store_true",
                   help="record wall_ms (makes output run-dependent)")
    p.add_argument("--workers", type=int,
                   help="worker processes (the FSNOMA_WORKERS variable takes precedence)")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fsnoma", description="Cooperative NOMA/OMA capacity over F fading.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    s = sub.add_parser("sweep", help="run the [[sweep]] blocks of a spec file")
    _common(s)
    _outputs(s)
    o = sub.add_parser("optimize", help="run the [[optimize]] blocks of a spec file")
    _common(o)
    _outputs(o)
    v = sub.add_parser("validate", help="oracle-triangle checks at the base configuration")
    _common(v, spec_required=False)
    c = sub.add_parser("print-config", help="echo the fully resolved configuration")
    _common(c, spec_required=False)
    return p


def _load(args) -> sweep.SweepSpec:
    spec = sweep.load_spec(args.specfile) if args.specfile else sweep.parse_spec({})
    for item in args.set:
        if "=" not in item:
            raise SpecError(f"--set expects KEY=VALUE, got {item!r}")
        key, raw = item.split("=", 1)
        sweep.apply_override(spec, key.strip(), raw.strip())
    shorthands = {"system.snr_db": args.snr_db, "system.a2": args.a2,
                  "monte_carlo.n_samples": args.samples, "monte_carlo.seed": args.seed}
    for key, val in shorthands.items():
        if val is not None:
            sweep.apply_override(spec, key, repr(val))
    if getattr(args, "timing", False):
        spec.timing = True
    if getattr(args, "workers", None) is not None:
        if args.workers < 1:
            raise SpecError("--workers must be >= 1")
        spec.monte_carlo["workers"] = args.workers
    # re-validate after overrides
    spec = sweep.parse_spec(_as_data(spec), spec.source)
    if getattr(args, "timing", False):
        spec.timing = True
    return spec


def _as_data(spec: sweep.SweepSpec) -> dict:
    r = spec.resolved()
    data = {"system": r["system"], "numerics": r["numerics"], "monte_carlo": r["monte_carlo"],
            "output": r["output"]}
    for b in r["blocks"]:
        entry = {"name": b["name"], "axis": b["axis"], "values": b["values"],
                 "output": b["output"], "set": b["set"]}
        if b["kind"] == "sweep":
            entry["methods"] = b["methods"]
        data.setdefault(b["kind"], []).append(entry)
    return data


def _blocks(spec, kind, only):
    blocks = [b for b in spec.blocks if b.kind == kind]
    if only:
        unknown = set(only) - {b.name for b in blocks}
        if unknown:
            raise SpecError(f"no {kind} block named {', '.join(sorted(unknown))}")
        blocks = [b for b in blocks if b.name in only]
    if not blocks:
        raise SpecError(f"spec file has no [[{kind}]] blocks")
    return blocks


def _cmd_run(args, kind) -> int:
    spec = _load(args)
    workers = sweep.worker_count(spec.monte_carlo["workers"])
    failed = False
    for blk in _blocks(spec, kind, args.only):
        if kind == "sweep":
            rows = sweep.run_sweep(spec, blk, workers)
            cols = sweep.COLUMNS
        else:
            rows = sweep.run_optimize(spec, blk, workers)
            cols = sweep.OPT_COLUMNS
        path = Path(blk.output)
        if not path.is_absolute():
            path = Path(args.out_dir) / path
        sweep.write_csv(rows, path, cols)
        bad = [r for r in rows if not r["status"].startswith("ok")]
        failed |= bool(bad)
        print(f"{blk.name}: {len(rows)} rows -> {path}" + (f" ({len(bad)} failed)" if bad else ""))
    return EXIT_NUMERICAL if failed else EXIT_OK


def _cmd_validate(args) -> int:
    spec = _load(args)
    cfg = sweep.build_config(spec.system)
    mc = spec.mc()
    mc = type(mc)(mc.n_samples, mc.master_seed, sweep.worker_count(mc.n_workers))
    checks = sweep.validate(cfg, spec.policy(), mc)
    print(sweep.CHECK_HEADER)
    for c in checks:
        print(c.line())
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VALIDATION


def _cmd_print(args) -> int:
    spec = _load(args)
    data = spec.resolved()
    cfg = sweep.build_config(spec.system)
    data["derived"] = {
        "mean_snr_linear": cfg.mean_snr,
        "a1": cfg.a1,
        "links": {n: {"m": lk.m, "m_s": lk.m_s, "gain": lk.mean_snr}
                  for n, lk in zip(("sr", "rd", "sd"), (cfg.links.sr, cfg.links.rd, cfg.links.sd))},
        "workers": sweep.worker_count(spec.monte_carlo["workers"]),
        "backend": BACKEND,
    }
    print(json.dumps(data, indent=2, sort_keys=True))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.print_config or args.command == "print-config":
            return _cmd_print(args)
        if args.command == "sweep":
            return _cmd_run(args, "sweep")
        if args.command == "optimize":
            return _cmd_run(args, "optimize")
        return _cmd_validate(args)
    except (SpecError, OSError) as exc:
        print(f"fsnoma: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FsnomaError as exc:
        print(f"fsnoma: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
