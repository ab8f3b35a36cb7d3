"""Command-line driver: metric generation, spread-reduction, randomized
surveys, and machine-readable reports.

Every run is a deterministic function of its flags and seed; every output
file embeds the invoking configuration and the library version.  Exit codes:
0 success, 2 invalid parameters, 3 insufficient depth, 4 internal contract
failure (always a bug).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .dyadic import cylinder_spread, generate, spread_threshold, sup_distance
from .errors import (
    InsufficientDepthError,
    InternalCheckError,
    InvalidParameterError,
)
from .freenorm import (
    build_cylinder_operator,
    cylinder_operator_norm,
    extension_defect,
    free_norm,
)
from .numerics import as_fraction
from .probes import (
    box_dim_estimate,
    default_box_levels,
    dim_formula,
    line_distortion,
)
from .serialize import (
    lipfn_to_dict,
    load_metric,
    metric_to_dict,
    molecule_from_dict,
    save_metric,
    write_json,
)
from .surgery import reduce_cylinder_spread

OUTDIR_ENV = "CANTORFREE_OUTDIR"

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DEPTH = 3
EXIT_INTERNAL = 4


@dataclass
class ExperimentConfig:
    """Echoed verbatim into every output file this run produces."""

    command: str
    params: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {"command": self.command, "version": __version__}
        out.update({k: v for k, v in sorted(self.params.items())
                    if v is not None})
        return out


def _resolve_out(path: str) -> str:
    if os.path.isabs(path):
        return path
    base = os.environ.get(OUTDIR_ENV, "")
    return os.path.join(base, path) if base else path


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path, config, fieldnames, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("# cantorfree " + __version__ + "\n")
        fh.write("# config " + json.dumps(config, sort_keys=True,
                                          separators=(",", ":")) + "\n")
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _csv_mirror_json(path, config, fieldnames, rows):
    data = {"config": config,
            "rows": [dict(zip(fieldnames, [_fmt(v) for v in row]))
                     for row in rows]}
    write_json(data, os.path.splitext(path)[0] + ".json")


def _parse_fraction_list(text):
    return [as_fraction(v) for v in text.split(",") if v.strip()]


# ---------------------------------------------------------------------------
# subcommands


def _cmd_gen(args) -> int:
    kind = args.kind.replace("-", "_")
    kwargs = {}
    if args.lam is not None:
        kwargs["lam"] = as_fraction(args.lam)
    if args.fractions is not None:
        kwargs["removal_fractions"] = _parse_fraction_list(args.fractions)
    if args.scales is not None:
        kwargs["level_scales"] = _parse_fraction_list(args.scales)
    if args.seed is not None:
        kwargs["seed"] = args.seed
    if args.roughness is not None:
        kwargs["roughness"] = as_fraction(args.roughness)
    if args.grid is not None:
        kwargs["grid"] = args.grid
    d = generate(kind, args.depth, mode=args.mode, base_index=args.base_index,
                 **kwargs)
    config = ExperimentConfig("gen", {
        "kind": args.kind, "depth": args.depth, "mode": d.mode,
        "lambda": args.lam, "fractions": args.fractions,
        "scales": args.scales, "seed": args.seed,
        "roughness": args.roughness, "grid": args.grid,
        "base_index": args.base_index,
    }).as_dict()
    save_metric(d, _resolve_out(args.out), config=config)
    return EXIT_OK


def _cmd_push(args) -> int:
    d = load_metric(args.input)
    eps = as_fraction(args.epsilon) if d.rational else float(args.epsilon)
    level, dtilde = reduce_cylinder_spread(d, eps, args.n0)
    before = cylinder_spread(d, level)
    after = cylinder_spread(dtilde, level)
    moved = sup_distance(d, dtilde)
    if not d.tolerance().lt(after.value, spread_threshold(level)):
        raise InternalCheckError("spread did not drop below its threshold")
    config = ExperimentConfig("push", {
        "input": os.path.basename(args.input), "epsilon": str(args.epsilon),
        "n0": args.n0, "mode": d.mode,
    }).as_dict()
    out_path = _resolve_out(args.out)
    save_metric(dtilde, out_path, config=config)
    report = {
        "config": config,
        "n": level,
        "chi_before": _fmt(before.value),
        "chi_after": _fmt(after.value),
        "sup_distance": _fmt(moved),
    }
    report_path = args.report or os.path.splitext(out_path)[0] + ".report.json"
    write_json(report, _resolve_out(report_path))
    return EXIT_OK


SURVEY_FIELDS = ("trial", "seed", "chi_min_before", "best_n", "in_Un_before",
                 "chi_after", "sup_distance", "push_success")


def _cmd_survey(args) -> int:
    if args.trials < 1:
        raise InvalidParameterError("trials must be at least 1")
    if args.n0 < 1 or args.n0 > args.depth - 1:
        raise InvalidParameterError("n0 must lie in [1, depth-1]")
    config = ExperimentConfig("survey", {
        "depth": args.depth, "trials": args.trials,
        "epsilon": str(args.epsilon), "n0": args.n0, "seed": args.seed,
        "mode": args.mode or ("rational" if args.depth <= 8 else "double"),
        "roughness": args.roughness, "grid": args.grid,
    }).as_dict()
    seeds = np.random.SeedSequence(args.seed).generate_state(args.trials)
    rows = []
    n_in_before = 0
    n_success = 0
    sum_chi_before = Fraction(0)
    eps = as_fraction(args.epsilon)
    for t in range(args.trials):
        trial_seed = int(seeds[t])
        d = generate("random", args.depth, seed=trial_seed,
                     roughness=as_fraction(args.roughness), grid=args.grid,
                     mode=args.mode)
        spreads = [cylinder_spread(d, n) for n in range(args.n0, d.depth)]
        best = min(spreads, key=lambda s: (s.value, s.level))
        in_before = any(s.within_threshold for s in spreads)
        eps_t = eps if d.rational else float(eps)
        level, dtilde = reduce_cylinder_spread(d, eps_t, args.n0)
        after = cylinder_spread(dtilde, level)
        moved = sup_distance(d, dtilde)
        success = bool(d.tolerance().lt(after.value, after.threshold)) and \
            bool(d.tolerance().lt(moved, eps_t))
        n_in_before += in_before
        n_success += success
        sum_chi_before += as_fraction(best.value)
        rows.append((t, trial_seed, best.value, best.level, in_before,
                     after.value, moved, int(success)))
    rate_in = Fraction(n_in_before, args.trials)
    rate_success = Fraction(n_success, args.trials)
    mean_chi = sum_chi_before / args.trials
    rows.append(("summary", args.seed, mean_chi, "", rate_in, "", "",
                 rate_success))
    out = _resolve_out(args.out)
    _write_csv(out, config, SURVEY_FIELDS, rows)
    _csv_mirror_json(out, config, SURVEY_FIELDS, rows)
    if rate_success != 1:
        raise InternalCheckError("push success rate below 100%")
    return EXIT_OK


def _cmd_report(args) -> int:
    what = args.what
    out = _resolve_out(args.out)
    if what == "chi-table":
        d = load_metric(args.input)
        config = ExperimentConfig("report", {
            "what": what, "input": os.path.basename(args.input),
        }).as_dict()
        rows = []
        for n in range(1, d.depth):
            s = cylinder_spread(d, n)
            rows.append((n, s.value, s.within_threshold))
        _write_csv(out, config, ("n", "chi", "in_Un"), rows)
        _csv_mirror_json(out, config, ("n", "chi", "in_Un"), rows)
    elif what == "freenorm":
        d = load_metric(args.input)
        if not args.molecule:
            raise InvalidParameterError("freenorm report needs --molecule")
        with open(args.molecule, "r", encoding="utf-8") as fh:
            mol = molecule_from_dict(json.load(fh), mode=d.mode)
        res = free_norm(mol, d)
        config = ExperimentConfig("report", {
            "what": what, "input": os.path.basename(args.input),
            "molecule": os.path.basename(args.molecule),
        }).as_dict()
        write_json({
            "config": config,
            "value": _fmt(res.value),
            "plan": [[p, q, _fmt(a)] for p, q, a in res.plan],
            "dual": lipfn_to_dict(res.dual),
        }, out)
    elif what == "defect":
        d = load_metric(args.input)
        if args.level is None:
            raise InvalidParameterError("defect report needs --level")
        op = build_cylinder_operator(d, args.level)
        norm = cylinder_operator_norm(d, args.level)
        config = ExperimentConfig("report", {
            "what": what, "input": os.path.basename(args.input),
            "level": args.level,
        }).as_dict()
        write_json({
            "config": config,
            "level": args.level,
            "defect": _fmt(extension_defect(op, d)),
            "op_norm_exact": _fmt(norm.exact),
            "chi_bound": _fmt(norm.spread_bound),
        }, out)
    elif what == "dims":
        if not args.lambdas:
            raise InvalidParameterError("dims report needs --lambdas")
        if args.depth is None:
            raise InvalidParameterError("dims report needs --depth")
        lams = _parse_fraction_list(args.lambdas)
        config = ExperimentConfig("report", {
            "what": what, "lambdas": args.lambdas, "depth": args.depth,
        }).as_dict()
        rows = []
        for lam in lams:
            d = generate("middle_lambda", args.depth, lam=lam)
            r = (1 - lam) / 2
            scales = [r ** k for k in default_box_levels(args.depth)]
            est = box_dim_estimate(d, scales)
            true = dim_formula(lam)
            rows.append((lam, true, est, abs(est - true)))
        fields = ("lambda", "dim_formula", "box_dim_estimate", "abs_error")
        _write_csv(out, config, fields, rows)
        _csv_mirror_json(out, config, fields, rows)
    elif what == "distortion":
        d = load_metric(args.input)
        if not args.points:
            raise InvalidParameterError("distortion report needs --points")
        pts = [int(v) for v in args.points.split(",") if v.strip()]
        rep = line_distortion(pts, d)
        config = ExperimentConfig("report", {
            "what": what, "input": os.path.basename(args.input),
            "points": args.points,
        }).as_dict()
        write_json({
            "config": config,
            "distortion": _fmt(rep.distortion),
            "ordering": list(rep.ordering),
            "witness_map": [_fmt(v) for v in rep.witness_map],
        }, out)
    else:  # pragma: no cover - argparse restricts choices
        raise InvalidParameterError(f"unknown report {what!r}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cantorfree",
        description="exact metrics on dyadic Cantor nets: generation, "
                    "surgery, transport norms, and geometry reports")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a metric file")
    g.add_argument("--kind", required=True,
                   choices=["mu", "middle-lambda", "fat-cantor",
                            "ultrametric", "random"])
    g.add_argument("--depth", type=int, required=True)
    g.add_argument("--lambda", dest="lam", default=None,
                   help="removal fraction, e.g. 1/3")
    g.add_argument("--fractions", default=None,
                   help="comma-separated per-level removal fractions")
    g.add_argument("--scales", default=None,
                   help="comma-separated decreasing ultrametric scales")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--roughness", default=None)
    g.add_argument("--grid", type=int, default=None)
    g.add_argument("--mode", choices=["rational", "double"], default=None)
    g.add_argument("--base-index", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_gen)

    p = sub.add_parser("push", help="reduce the cylinder spread of a metric")
    p.add_argument("input")
    p.add_argument("--epsilon", required=True)
    p.add_argument("--n0", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(func=_cmd_push)

    s = sub.add_parser("survey",
                       help="randomized survey of spreads and reductions")
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--epsilon", required=True)
    s.add_argument("--n0", type=int, default=1)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--mode", choices=["rational", "double"], default=None)
    s.add_argument("--roughness", default="1/2")
    s.add_argument("--grid", type=int, default=64)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_survey)

    r = sub.add_parser("report", help="tabulated library computations")
    r.add_argument("--what", required=True,
                   choices=["chi-table", "freenorm", "defect", "dims",
                            "distortion"])
    r.add_argument("input", nargs="?", default=None)
    r.add_argument("--molecule", default=None)
    r.add_argument("--level", type=int, default=None)
    r.add_argument("--lambdas", default=None)
    r.add_argument("--depth", type=int, default=None)
    r.add_argument("--points", default=None)
    r.add_argument("--out", required=True)
    r.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InsufficientDepthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEPTH
    except InternalCheckError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (InvalidParameterError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
