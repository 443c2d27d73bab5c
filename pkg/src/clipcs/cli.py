"""Command line entry point: ``clipcs <experiment> [options]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import harness
from .harness import ExperimentSpec

log = logging.getLogger("clipcs")


def _floats(text: str) -> list[float]:
    """Comma list (``1.9,2.0``) or inclusive range ``start:stop:step``."""
    if ":" in text:
        a, b, step = (float(v) for v in text.split(":"))
        n = int(round((b - a) / step)) + 1
        return [round(a + i * step, 10) for i in range(n)]
    return [float(v) for v in text.split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="clipcs", description="Clipping recovery Monte Carlo experiments")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, default_out):
        sp.add_argument("--config", help="JSON experiment file (keys of ExperimentSpec)")
        sp.add_argument("--seed", type=int, help="master seed")
        sp.add_argument("--trials", type=int, help="trials per grid point")
        sp.add_argument("--out", default=None, help=f"output CSV (default {default_out})")
        sp.add_argument("--methods", help="comma separated method tags")
        sp.add_argument("--gammas", type=_floats, help="threshold grid in envelope units")
        sp.add_argument("--workers", type=int, help="worker processes")
        sp.add_argument("-v", "--verbose", action="store_true")

    sp = sub.add_parser("sweep", help="SER/NMSE against gamma")
    common(sp, "sweep.csv")
    sp.add_argument("--timing", action="store_true", help="record wall times (output no longer byte-stable)")
    sp.add_argument("--scheme", choices=["ps", "dmc"])
    sp.add_argument("--zeta", type=float, help="DMC magnitude in envelope units")

    sp = sub.add_parser("nmse-zeta", help="NMSE against the DMC magnitude")
    common(sp, "nmse_zeta.csv")
    sp.add_argument("--zetas", type=_floats, default=_floats("0.4:1.4:0.1"))

    sp = sub.add_parser("inclusion", help="probability that the clip support lies in the candidate pool")
    common(sp, "inclusion.csv")
    sp.add_argument("--betas", type=_floats, default=_floats("0.05:1.0:0.05"))

    sp = sub.add_parser("papr-ccdf", help="distribution of the PAPR reduction")
    common(sp, "papr_ccdf.csv")

    sp = sub.add_parser("capacity", help="capacity with and without reserved tones")
    common(sp, "capacity.csv")
    sp.add_argument("--snrs", type=_floats, help="SNR grid in dB (default: the configured SNR)")

    sp = sub.add_parser("timing", help="CCDF of normalized execution times")
    common(sp, "timing.csv")
    return p


DEFAULTS = {
    "sweep": {},
    "nmse-zeta": {"methods": ("pal_str", "pal_rts", "oracle_phase"), "gamma_grid": (2.374,), "scheme": "dmc",
                  "zeta": 0.8},
    "inclusion": {"methods": ("none",), "gamma_grid": (2.0, 2.2, 2.4)},
    "papr-ccdf": {"methods": ("none",), "gamma_grid": (2.02, 2.25, 2.26, 2.40), "n_trials": 2000},
    "capacity": {"methods": ("wpal",), "gamma_grid": (2.0, 2.1, 2.2, 2.3, 2.4, 2.5)},
    "timing": {"methods": ("lasso", "wl", "wpal", "beta_fbmp"), "gamma_grid": (2.0,)},
}


def make_spec(args) -> ExperimentSpec:
    base = dict(DEFAULTS[args.command])
    if args.config:
        with open(args.config) as f:
            base.update(json.load(f))
    spec = ExperimentSpec.from_dict(base)
    changes = {}
    if args.seed is not None:
        changes["cfg"] = spec.cfg.replace(seed=args.seed)
    if args.trials is not None:
        changes["n_trials"] = args.trials
    if args.methods:
        changes["methods"] = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    if args.gammas:
        changes["gamma_grid"] = tuple(args.gammas)
    if args.workers is not None:
        changes["workers"] = args.workers
    if args.out:
        changes["output_path"] = args.out
    for name in ("timing", "scheme", "zeta"):
        if getattr(args, name, None) not in (None, False):
            changes[name] = getattr(args, name)
    return spec.replace(**changes) if changes else spec


def run(args) -> str:
    spec = make_spec(args)
    cmd = args.command
    if cmd == "sweep":
        path = harness.run_sweep(spec)
    elif cmd == "nmse-zeta":
        path = harness.write_nmse_zeta(spec, harness.nmse_zeta(spec, args.zetas))
    elif cmd == "inclusion":
        path = harness.inclusion_sweep(spec, args.betas)
    elif cmd == "papr-ccdf":
        path = harness.write_papr_ccdf(spec, harness.papr_ccdf(spec))
    elif cmd == "capacity":
        path = harness.write_capacity(spec, harness.capacity_sweep(spec, args.snrs))
    else:
        path = harness.write_timing(spec, harness.timing_ccdf(spec))
    return str(path)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    np.seterr(all="ignore")
    try:
        path = run(args)
    except (ValueError, OSError, json.JSONDecodeError, TypeError) as e:
        print(f"clipcs: error: {e}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
