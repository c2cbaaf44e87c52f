"""``mchit`` command line: every operation as a subcommand with file I/O.

Exit status: 0 on success, 1 when a must-pass verification record fails,
2 on usage or validation errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any

import numpy as np

from . import errors
from .chain import load_chain, point_mass, save_chain, check_distribution
from .config import DEFAULT, Config
from .families import NAMES, FamilySpec, make_family
from .hitting import expected_hitting, t_hit_alpha, t_hit_product
from .mixing import cesaro_mixing_time, mixing_time
from .montecarlo import mean_and_se, sample_rule_stops
from .records import failures, to_csv, to_json
from .stopping import build_rule, rule_from_dict, rule_mean, rule_law
from .verify import DEFAULT_ALPHAS, run_suite


def _dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        out.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")


def _read_json(path: Path):
    with path.open("r", encoding="utf-8") as fh:
        return json.load(fh)


def _parse_set(value: str) -> list[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated state indices, got {value!r}")


def _parse_param(value: str) -> tuple[str, float]:
    key, sep, val = value.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {value!r}")
    return key, float(val)


def _config(args) -> Config:
    return DEFAULT.with_overrides(max_exact=args.max_exact, seed=args.seed,
                                  output_format=args.format)


def cmd_family(args, cfg):
    spec = FamilySpec(args.name, args.n, args.mode, dict(args.param or []), args.seed, args.lazy)
    chain = make_family(spec, cfg)
    if args.out:
        save_chain(chain, args.out)
    else:
        _emit(_dumps(chain.to_dict()), None)


def cmd_validate(args, cfg):
    chain = load_chain(args.chain, cfg)
    _emit(_dumps({"valid": True, "mode": chain.mode, "n": chain.n,
                  "labels": list(chain.labels)}), args.out)


def cmd_stationary(args, cfg):
    chain = load_chain(args.chain, cfg)
    _emit(_dumps({"labels": list(chain.labels), "pi": chain.pi.tolist()}), args.out)


def cmd_hitting(args, cfg):
    chain = load_chain(args.chain, cfg)
    h = expected_hitting(chain, args.set)
    _emit(_dumps({"set": sorted(set(args.set)), "expected_hitting": h.tolist()}), args.out)


def cmd_thit(args, cfg):
    chain = load_chain(args.chain, cfg)
    if args.alpha is None:
        rep = t_hit_product(chain)
    else:
        rep = t_hit_alpha(chain, args.alpha, heuristic=args.heuristic, seed=args.seed)
    _emit(_dumps(rep.to_dict()), args.out)


def cmd_rule(args, cfg):
    chain = load_chain(args.chain, cfg)
    mu0 = point_mass(chain.n, args.start)
    target = None
    if args.target_dist:
        target = check_distribution(_read_json(args.target_dist), chain.n, cfg)
    rule = build_rule(chain, mu0, target)
    payload = rule.to_dict()
    payload["mean"] = rule_mean(chain, rule)
    _emit(_dumps(payload), args.out)


def cmd_mix(args, cfg):
    chain = load_chain(args.chain, cfg)
    prof = cesaro_mixing_time(chain, args.delta) if args.cesaro else mixing_time(chain, args.delta)
    _emit(_dumps(prof.to_dict()), args.out)


def cmd_simulate(args, cfg):
    chain = load_chain(args.chain, cfg)
    rule = rule_from_dict(chain, _read_json(args.rule))
    times, states = sample_rule_stops(chain, rule, args.samples, args.seed, args.workers)
    mean, se = mean_and_se(times)
    law = np.bincount(states, minlength=chain.n) / args.samples
    _emit(_dumps({"samples": args.samples, "seed": args.seed, "mean_T": mean, "se_T": se,
                  "exact_mean_T": rule_mean(chain, rule), "law": law.tolist(),
                  "exact_law": rule_law(chain, rule).tolist()}), args.out)


def cmd_verify(args, cfg):
    alphas = DEFAULT_ALPHAS if args.alpha is None else (args.alpha,)
    recs, report = run_suite(args.suite, alphas=alphas, workers=args.workers)
    bad = failures(recs)
    if args.format == "csv":
        _emit(to_csv(recs), args.out)
    else:
        report["n_records"] = len(recs)
        report["n_failures"] = len(bad)
        _emit('{"report": ' + _dumps(report) + ',\n"records": ' + to_json(recs) + "}", args.out)
    for r in bad:
        print(f"FAIL {r.claim} {r.chain} {r.params} slack={r.slack:.3e}", file=sys.stderr)
    return 1 if bad else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=None, help="write output here instead of stdout")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    common.add_argument("--seed", type=int, default=DEFAULT.seed)
    common.add_argument("--max-exact", type=int, default=DEFAULT.max_exact)

    parser = argparse.ArgumentParser(prog="mchit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("family", parents=[common], help="generate a named chain")
    p.add_argument("--name", choices=NAMES, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=["continuous", "discrete"], default="continuous")
    p.add_argument("--lazy", action="store_true")
    p.add_argument("--param", type=_parse_param, action="append",
                   help="family parameter key=value (cw, ccw, up, sparsity)")
    p.set_defaults(func=cmd_family)

    for name, func, text in (("validate", cmd_validate, "check a chain file"),
                             ("stationary", cmd_stationary, "stationary distribution")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--chain", type=Path, required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("hitting", parents=[common], help="expected hitting times of a set")
    p.add_argument("--chain", type=Path, required=True)
    p.add_argument("--set", type=_parse_set, required=True)
    p.set_defaults(func=cmd_hitting)

    p = sub.add_parser("thit", parents=[common],
                       help="worst expected hitting time of sets with mass >= alpha "
                            "(product form without --alpha)")
    p.add_argument("--chain", type=Path, required=True)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--heuristic", action="store_true")
    p.set_defaults(func=cmd_thit)

    p = sub.add_parser("rule", parents=[common], help="build the nested-set stopping rule")
    p.add_argument("--chain", type=Path, required=True)
    p.add_argument("--start", type=int, required=True)
    p.add_argument("--target-dist", type=Path, default=None)
    p.set_defaults(func=cmd_rule)

    p = sub.add_parser("mix", parents=[common], help="mixing time profile")
    p.add_argument("--chain", type=Path, required=True)
    p.add_argument("--delta", type=float, default=0.25)
    p.add_argument("--cesaro", action="store_true")
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("simulate", parents=[common], help="sample the stopping rule")
    p.add_argument("--chain", type=Path, required=True)
    p.add_argument("--rule", type=Path, required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", parents=[common], help="run a certification suite")
    p.add_argument("--suite", choices=["default", "random"], default="default")
    p.add_argument("--alpha", type=float, default=None)
    p.set_defaults(func=cmd_verify)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        if getattr(args, "samples", 1) < 1 or args.workers < 1:
            raise errors.MarkovError("--samples and --workers must be positive")
        return args.func(args, cfg) or 0
    except (errors.MarkovError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"mchit {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
