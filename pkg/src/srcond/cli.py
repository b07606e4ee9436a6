"""Command line interface.

Subcommands: ``sweep`` (phase-transition experiment from a JSON config),
``bound-check`` (random-instance verification of the singular value
bound), ``minorant`` (admissibility certification and radial profiles),
and ``fim`` (Fisher information and Cramer-Rao diagonal for a given
instance).  Exit codes: 0 success, 1 configuration error, 2 bound or
certification violation.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import minorant, moments, sweeps, torus
from .errors import ConfigError, SrcondError


def _fig_path(csv_path: str) -> str:
    return str(Path(csv_path).with_suffix(".svg"))


def _cmd_sweep(args) -> int:
    with open(args.config) as fh:
        config = sweeps.SweepConfig.from_json(fh.read())
    if args.out:
        config.output_path = args.out
    result = sweeps.run_sweep(config, max_workers=args.workers)
    sweeps.emit_csv(result, config.output_path)
    fig = _fig_path(config.output_path)
    sweeps.emit_plot(result, fig)
    skipped = [r for r in result.rows if r.skip_reason]
    print(f"wrote {config.output_path} and {fig} "
          f"({len(result.rows)} rows, {len(skipped)} skipped)")
    for row in skipped:
        print(f"  skipped sep_n={row.nominal_sep_n} count={row.count}: {row.skip_reason}")
    return 0


def _cmd_bound_check(args) -> int:
    report = sweeps.run_bound_campaign(
        dim=args.dim, tau=args.tau, n_grid=args.n, trials=args.trials,
        seed=args.seed, count=args.count,
    )
    doc = report.to_json()
    text = json.dumps(doc, indent=2)
    if args.out:
        Path(args.out).write_text(text)
    print(text)
    return 0 if report.passed else 2


def _cmd_minorant(args) -> int:
    model = minorant.MinorantModel.build(args.dim, args.tau)
    if args.certify:
        report = minorant.certify_admissibility(model, args.resolution)
        text = json.dumps(report.to_json(), indent=2)
        if args.out:
            Path(args.out).write_text(text)
        print(text)
        return 0 if report.passed else 2
    out = args.out or f"profile_{args.profile}_d{args.dim}_tau{args.tau}.csv"
    minorant.profile_to_csv(model, args.profile, out, rmax=args.rmax,
                            points=args.points)
    rs, vals = minorant.profile_values(model, args.profile, rmax=args.rmax,
                                       points=args.points)
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(rs, vals)
    ax.axhline(0.0, color="0.7", lw=0.8)
    ax.set_xlabel("radius")
    ax.set_ylabel(args.profile)
    ax.set_title(f"{args.profile}, d={args.dim}, tau={args.tau:g}")
    fig.tight_layout()
    fig.savefig(_fig_path(out))
    plt.close(fig)
    print(f"wrote {out} and {_fig_path(out)}")
    return 0


def _parse_weights(doc, count: int) -> moments.WeightVector:
    if isinstance(doc, dict):
        doc = doc.get("values", doc)
    vals = []
    for item in doc:
        if isinstance(item, (list, tuple)):
            vals.append(complex(item[0], item[1]))
        else:
            vals.append(complex(item))
    if len(vals) != count:
        raise ConfigError(f"{len(vals)} weights for {count} nodes")
    return moments.WeightVector(np.asarray(vals))


def _cmd_fim(args) -> int:
    nodes = torus.NodeSet.from_json(Path(args.nodes).read_text())
    weights = _parse_weights(json.loads(Path(args.weights).read_text()), len(nodes))
    I = moments.index_set(nodes.dim, args.n)
    J = moments.fisher_information(nodes, weights, args.delta, I)
    doc = moments.fim_report(J)
    text = json.dumps(doc, indent=2)
    if args.out:
        Path(args.out).write_text(text)
    print(text)
    return 0 if doc["crb_diag"] is not None else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srcond",
        description="Conditioning of sparse super-resolution on the torus",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a phase-transition sweep from a JSON config")
    p.add_argument("--config", required=True, help="path to the JSON sweep config")
    p.add_argument("--out", help="override the config's output_path")
    p.add_argument("--workers", type=int, default=4)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("bound-check", help="verify the singular value lower bound")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--n", type=float, nargs="+", required=True,
                   help="bandlimit grid, e.g. --n 10 20 40")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=None,
                   help="nodes per instance (default: packing heuristic)")
    p.add_argument("--out", help="also write the JSON report here")
    p.set_defaults(func=_cmd_bound_check)

    p = sub.add_parser("minorant", help="certify admissibility or export profiles")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--tau", type=float, required=True)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--certify", action="store_true")
    mode.add_argument("--profile", choices=minorant.PROFILES)
    p.add_argument("--resolution", type=int, default=2000)
    p.add_argument("--out", help="output CSV path (profiles) or report path")
    p.add_argument("--rmax", type=float, default=None)
    p.add_argument("--points", type=int, default=800)
    p.set_defaults(func=_cmd_minorant)

    p = sub.add_parser("fim", help="Fisher information and Cramer-Rao diagonal")
    p.add_argument("--nodes", required=True, help="node set JSON file")
    p.add_argument("--weights", required=True, help="weights JSON file")
    p.add_argument("--n", type=float, required=True, help="bandlimit")
    p.add_argument("--delta", type=float, required=True, help="noise level")
    p.add_argument("--out", help="also write the JSON report here")
    p.set_defaults(func=_cmd_fim)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except SrcondError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
