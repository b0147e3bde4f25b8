"""Command line driver: one subcommand per experiment, reports to disk.

Exit codes: 0 completed, 2 configuration error, 3 invariant violation
(a bound or reproduction check failed inside an experiment).
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .config import ConfigError, build_config, parse_config_file
from .experiments import RUNNERS
from .report import write_report

_EXPERIMENTS = {
    "bowers-ruane": "bowers_ruane",
    "doubling-family": "doubling_family",
    "rigid-family": "rigid_family",
    "coxeter-family": "coxeter_family",
    "spectrum-scan": "spectrum_scan",
}


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="key = value config file")
    p.add_argument("--out", help="output directory (default reports/<experiment>)")
    p.add_argument("--ball", type=int, help="scan ball radius")
    p.add_argument("--horizon", type=int, help="sequence horizon")
    p.add_argument("--threads", type=int, help="worker threads for scan sharding")
    p.add_argument("--seed", type=int, help="seed for sampled checks")
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cat0lab",
                                 description="CAT(0) model-space experiments")
    sub = ap.add_subparsers(dest="experiment", required=True)
    for name in _EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name.replace('-', ' ')} experiment")
        _add_common(p)
        if name == "bowers-ruane":
            p.add_argument("--i-max", type=int, help="directions a^i b^i to probe")
            p.add_argument("--identity-sanity", action="store_const", const=True,
                           default=None,
                           help="replace the twisted action by the plain one")
        if name in ("doubling-family", "coxeter-family"):
            p.add_argument("--identity-sanity", action="store_const", const=True, default=None)
        if name == "rigid-family":
            p.add_argument("--family",
                           choices=["z2_lattice", "z2_free_z2", "zn_cyclic", "zn1_zn2"])
            p.add_argument("--chain-horizon", type=int)
        if name == "spectrum-scan":
            p.add_argument("--pq", dest="pq_list",
                           help="pairs like '1,1 2,1' with p >= q >= 1")
            p.add_argument("--word-length-max", type=int)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    experiment = _EXPERIMENTS[args.experiment]
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("experiment", "config", "no_figures") and v is not None}
    if getattr(args, "no_figures", False):
        overrides["figures"] = False
    try:
        file_values = parse_config_file(args.config) if args.config else {}
        cfg = build_config(experiment, file_values, **overrides)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    outdir = Path(cfg.out) / experiment if cfg.out == "reports" else Path(cfg.out)
    t0 = time.monotonic()
    report = RUNNERS[experiment](cfg)
    report.timing["total"] = round(time.monotonic() - t0, 3)
    paths = write_report(report, outdir, figures=cfg.figures)
    print(f"{experiment}: wrote {len(paths)} files to {outdir}")
    for v in report.verdicts.get("__summary__", []):
        print(f"  {v}")
    if report.violations:
        for v in report.violations:
            print(f"invariant violation: {v}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
