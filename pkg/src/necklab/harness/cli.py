"""Command line entry point ``necklab``.

Exit status: 0 on success, 1 when a check or a family member failed, 2 on a
configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from ..collar import CollarSpec
from ..exceptions import ConfigError, NecklabError
from ..grid import load_field, save_field
from .config import config_from_dict, load_config
from .experiments import (RECORD_FIELDS, field_summary, run_collar_table,
                          run_degeneration, run_segment, run_single)
from .export import export, render_svg

logger = logging.getLogger("necklab")


def _parser():
    p = argparse.ArgumentParser(prog="necklab", description="Harmonic maps on long cylinders.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, help="JSON configuration file")
        sp.add_argument("--out", help="output directory (overrides the config)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--seed", type=int, help="random seed (overrides the config)")
        return sp

    common(sub.add_parser("solve", help="solve one Dirichlet problem and check every invariant"))
    deg = common(sub.add_parser("degenerate", help="run a degenerating collar family"))
    deg.add_argument("--svg", action="store_true", help="also write log-log trend plots")
    deg.add_argument("--threads", type=int, default=1)
    col = common(sub.add_parser("collar", help="print collar geometry"), config_required=False)
    col.add_argument("--l", type=float, action="append", help="core length (repeatable)")
    col.add_argument("--delta", type=float, help="thin-part threshold for the subcollar")
    common(sub.add_parser("segment", help="bubble/neck segmentation of the configured field"))
    chk = sub.add_parser("check", help="evaluate every invariant on a saved map field")
    chk.add_argument("field", help="map field file")
    chk.add_argument("--out", help="write the JSON report here instead of stdout")
    return p


def _config(args, kind):
    cfg = load_config(args.config) if getattr(args, "config", None) else config_from_dict({"kind": kind})
    if cfg.kind != kind:
        raise ConfigError(f"configuration kind is {cfg.kind!r}, command needs {kind!r}")
    if getattr(args, "seed", None) is not None:
        if args.seed < 0:
            raise ConfigError("seed must be non-negative")
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "out", None):
        cfg = replace(cfg, out=args.out)
    return cfg


def _outdir(cfg):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, default=str) + "\n", encoding="utf-8")


def cmd_solve(args):
    cfg = _config(args, "single")
    report, f = run_single(cfg)
    out = _outdir(cfg)
    _dump(report, out / "report.json")
    save_field(f, out / "solution.field")
    print(f"solve: {'pass' if report['pass'] else 'FAIL'}; report in {out / 'report.json'}")
    return 0 if report["pass"] else 1


def cmd_segment(args):
    cfg = _config(args, "segment")
    report, _ = run_segment(cfg)
    out = _outdir(cfg)
    _dump(report, out / "segment.json")
    d = report["decomposition"]
    print(f"segment: {d['case']}, {len(d['bubbles'])} bubble interval(s); report in {out / 'segment.json'}")
    return 0 if report["pass"] else 1


def cmd_degenerate(args):
    cfg = _config(args, "degeneration")
    if args.threads < 1:
        raise ConfigError("--threads must be at least 1")
    rows, verdict = run_degeneration(cfg, threads=args.threads)
    out = _outdir(cfg)
    path = export(rows, RECORD_FIELDS, out / f"family.{args.format}", args.format)
    _dump({"verdict": verdict}, out / "verdict.json")
    if args.svg:
        ok = [r for r in rows if r["status"] == "ok"]
        inv_l = [1 / r["l"] for r in ok]
        for key, label in (("E_neck", "neck energy"), ("L_neck", "neck average length")):
            try:
                render_svg({key: list(zip(inv_l, [r[key] for r in ok]))}, out / f"{key}.svg",
                           title=f"{label} against 1/l", xlabel="1/l", ylabel=key)
            except (ValueError, NecklabError) as exc:
                logger.warning("no plot for %s: %s", key, exc)
    failed = [r for r in rows if r["status"] != "ok" or not r["bounds_pass"]]
    regime = verdict["regime"] if verdict else None
    print(f"degenerate: {len(rows)} member(s), regime {regime}; table in {path}")
    return 1 if failed or verdict is None else 0


def cmd_collar(args):
    if args.config:
        cfg = _config(args, "collar")
        table = run_collar_table(cfg)
    else:
        ls = args.l or [0.1]
        table = [CollarSpec(l).summary(args.delta) for l in ls]
    if args.format == "json":
        print(json.dumps(table if len(table) > 1 else table[0], indent=2))
    else:
        keys = list(table[0])
        width = max(len(k) for k in keys)
        for row in table:
            for k in keys:
                print(f"{k:<{width}}  {row[k]:.12g}")
            print()
    return 0


def cmd_check(args):
    try:
        f = load_field(args.field)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot read map field {args.field}: {exc}", file=sys.stderr)
        return 1
    summary = field_summary(f)
    text = json.dumps(summary, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0 if summary["checks_pass"] else 1


COMMANDS = {"solve": cmd_solve, "segment": cmd_segment, "degenerate": cmd_degenerate,
            "collar": cmd_collar, "check": cmd_check}


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (NecklabError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
