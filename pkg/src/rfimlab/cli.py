"""Command-line interface: `rfim-lab <field|ground|mag|psi|animal|grow|curve|fit>`.

Exit codes: 0 success, 1 usage or domain error, 2 invariant/validator
violation, 3 unexpected runtime error.  `RFIM_LAB_WORKERS` overrides the
worker count from any other source.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import animal, bench, ising, polygrow
from .bench import ExperimentConfig
from .errors import ConfigError, ValidationViolation
from .field import box_sites, sample_field


def _int_list(text):
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _float_list(text):
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _beta_list(text):
    return [math.inf if tok.strip() == "inf" else float(tok.strip())
            for tok in text.split(",") if tok.strip()]


def _beta_one(text):
    return math.inf if text.strip() == "inf" else float(text)


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="master seed (required unless --config sets it)")
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--out", default=None,
                        help="output path (default: stdout)")
    common.add_argument("--config", default=None,
                        help="key=value config file")

    p = argparse.ArgumentParser(
        prog="rfim-lab",
        description="Random-field Ising model laboratory")
    sub = p.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("field", parents=[common],
                        help="sample and dump a disorder field")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--eps", type=float, default=1.0)

    sp = sub.add_parser("ground", parents=[common],
                        help="exact ground state on a box")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--eps", type=float, default=1.0)
    sp.add_argument("--bc", choices=("plus", "minus"), default="plus")
    sp.add_argument("--spins", default=None,
                    help="also dump `x y s` spin rows to this path")

    sp = sub.add_parser("mag", parents=[common],
                        help="magnetization grid -> JSONL records")
    sp.add_argument("--n", type=_int_list, default=None)
    sp.add_argument("--eps", type=_float_list, default=None)
    sp.add_argument("--beta", type=_beta_list, default=None)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--summary", default=None,
                    help="also write the CSV summary to this path")

    sp = sub.add_parser("psi", parents=[common],
                        help="correlation-length search per epsilon")
    sp.add_argument("--eps", type=_float_list, default=None)
    sp.add_argument("--beta", type=_beta_list, default=None)
    sp.add_argument("--m-target", type=float, default=None)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--n-max", type=int, default=None)

    sp = sub.add_parser("animal", parents=[common],
                        help="greedy animal search")
    sp.add_argument("mode", choices=("exact", "anneal"))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--max-size", type=int, default=8)
    sp.add_argument("--budget", type=int, default=None,
                    help="anneal steps (default 40*(2N+1))")
    sp.add_argument("--class", dest="cls",
                    choices=("connected", "simply_connected"),
                    default="connected")

    sp = sub.add_parser("grow", parents=[common],
                        help="randomized polygon growth to P*")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--m", type=float, required=True)
    sp.add_argument("--mode", choices=("lattice", "continuum"),
                    default="lattice")
    sp.add_argument("--vertices", default=None,
                    help="also dump `x y` vertex rows to this path")

    sp = sub.add_parser("curve", parents=[common],
                        help="curve-calculus property suites")
    sp.add_argument("action", choices=("check",))
    sp.add_argument("--suite", choices=bench.CURVE_SUITES, required=True)
    sp.add_argument("--trials", type=int, default=100)

    sp = sub.add_parser("fit", parents=[common],
                        help="scaling fits over summarized records")
    sp.add_argument("--model", choices=sorted(bench.MODELS), required=True)
    sp.add_argument("--in", dest="records", default=None,
                    help="JSONL records file to summarize and fit")
    sp.add_argument("--points", default=None,
                    help="inline points, e.g. 8=1.2,16=1.9")
    return p


def _resolve_workers(args, cfg=None):
    env = os.environ.get("RFIM_LAB_WORKERS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError("RFIM_LAB_WORKERS must be an integer") from None
    if args.workers is not None:
        return max(1, args.workers)
    if cfg is not None:
        return max(1, cfg.workers)
    return 1


def _read_config(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise ConfigError("cannot read config %s: %s" % (path, exc)) from None


def _grid_config(args, experiment, overrides):
    """Config file if given, CLI flags layered on top; seed is mandatory."""
    if args.config:
        cfg = bench.parse_config(_read_config(args.config))
        if cfg.experiment != experiment:
            raise ConfigError("config is for experiment %r, not %r"
                              % (cfg.experiment, experiment))
    else:
        if args.seed is None:
            raise ConfigError("--seed is required without --config")
        cfg = ExperimentConfig(experiment=experiment, seed=args.seed)
    if args.seed is not None:
        cfg.seed = args.seed
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    cfg.workers = _resolve_workers(args, cfg)
    return cfg


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _records_text(records):
    lines = []
    for rec in records:
        clean = {k: v for k, v in rec.items() if not k.startswith("_")}
        lines.append(json.dumps(clean, sort_keys=True))
    return "".join(line + "\n" for line in lines)


def _require_seed(args):
    if args.seed is None:
        raise ConfigError("--seed is required")
    return args.seed


def _cmd_field(args):
    fld = sample_field(args.n, _require_seed(args), args.eps)
    fld.dump(args.out if args.out else "/dev/stdout")


def _cmd_ground(args):
    fld = sample_field(args.n, _require_seed(args), args.eps)
    region = ising.Region(frozenset(box_sites(args.n)), args.bc)
    cfgn = ising.ground_state(region, fld)
    mean = sum(cfgn.spins.values()) / len(cfgn.spins)
    payload = {"N": args.n, "eps": args.eps, "bc": args.bc,
               "seed": args.seed, "energy": cfgn.energy,
               "origin_spin": cfgn.spins[(0, 0)], "mean_spin": mean}
    _emit(json.dumps(payload, sort_keys=True) + "\n", args.out)
    if args.spins:
        with open(args.spins, "w") as fh:
            for v in box_sites(args.n):
                fh.write("%d %d %d\n" % (v[0], v[1], cfgn.spins[v]))


def _cmd_mag(args):
    cfg = _grid_config(args, "mag", {
        "N": args.n, "eps": args.eps, "beta": args.beta,
        "samples": args.samples})
    records = bench.run_experiment(cfg)
    _emit(_records_text(records), args.out)
    if args.summary:
        bench.write_summary_csv(bench.summarize(records), args.summary,
                                experiment="mag")


def _cmd_psi(args):
    overrides = {"eps": args.eps, "samples": args.samples,
                 "n_max": args.n_max}
    if args.m_target is not None:
        overrides["m_target"] = args.m_target
    if args.beta is not None:
        overrides["beta"] = args.beta
    cfg = _grid_config(args, "psi", overrides)
    if not cfg.beta:
        cfg.beta = [math.inf]
    records = bench.run_experiment(cfg)
    _emit(_records_text(records), args.out)


def _cmd_animal(args):
    fld = sample_field(args.n, _require_seed(args), 1.0)
    if args.mode == "exact":
        res = animal.greedy_value_exact(fld, args.max_size, cls=args.cls)
    else:
        budget = args.budget if args.budget is not None \
            else 40 * (2 * args.n + 1)
        res = animal.greedy_value_anneal(fld, budget, args.seed, cls=args.cls)
    _emit(animal.dump_animal(res.best) + "\n", args.out)


def _cmd_grow(args):
    mode = "lattice_simplified" if args.mode == "lattice" else "continuum"
    seed = _require_seed(args)
    fld = sample_field(args.n, seed, args.eps)
    state = polygrow.init_growth(args.n, args.eps, args.m, seed=seed,
                                 mode=mode)
    report = polygrow.run(state, fld)
    payload = {"N": args.n, "eps": args.eps, "m": args.m, "seed": seed,
               "n_star": state.n_star, "sides": len(state.sides),
               "perimeter": report.perimeter,
               "lattice_boundary": report.lattice_boundary,
               "gamma_value": report.gamma_value,
               "ratio": report.certificate_ratio,
               "violations": list(report.violations)}
    _emit(json.dumps(payload, sort_keys=True) + "\n", args.out)
    if args.vertices:
        with open(args.vertices, "w") as fh:
            for x, y in report.P_star:
                fh.write("%.17g %.17g\n" % (x, y))


def _cmd_curve(args):
    seed = _require_seed(args)
    if args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    for trial in range(args.trials):
        violation = bench.curve_trial(args.suite, seed, trial)
        if violation is not None:
            print("suite %s trial %d seed %d: %s"
                  % (args.suite, trial, seed, violation), file=sys.stderr)
            raise ValidationViolation(violation)
    _emit("ok: %s suite, %d trials\n" % (args.suite, args.trials), args.out)


def _fit_points(args):
    if args.points:
        pts = []
        for tok in args.points.split(","):
            if not tok.strip():
                continue
            if "=" not in tok:
                raise ConfigError("--points entries must look like x=y")
            x, y = tok.split("=", 1)
            pts.append((float(x), float(y)))
        return pts
    if not args.records:
        raise ConfigError("fit needs --in records or --points")
    rows = bench.summarize(bench.load_records(args.records))
    axis = "N" if args.model == "logn34" else "eps"
    pts = []
    for cell, mean, _stderr, _n in rows:
        if axis not in cell:
            raise ConfigError("records carry no %r axis to fit over" % axis)
        pts.append((float(cell[axis]), mean))
    return pts


def _cmd_fit(args):
    pts = _fit_points(args)
    if args.model == "logn34":
        fit = bench.fit_scaling(pts, "logn34")
        payload = {"model": fit.model, "coefficients": fit.coefficients,
                   "r_squared": fit.r_squared}
    else:
        # the two competing psi models are always reported side by side
        payload = {"selected": args.model}
        for name in ("eps43", "eps2"):
            fit = bench.fit_scaling(pts, name)
            payload[name] = {"model": fit.model,
                             "coefficients": fit.coefficients,
                             "r_squared": fit.r_squared}
    _emit(json.dumps(payload, sort_keys=True) + "\n", args.out)


_DISPATCH = {
    "field": _cmd_field,
    "ground": _cmd_ground,
    "mag": _cmd_mag,
    "psi": _cmd_psi,
    "animal": _cmd_animal,
    "grow": _cmd_grow,
    "curve": _cmd_curve,
    "fit": _cmd_fit,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 1
        return 0 if code == 0 else 1
    try:
        _DISPATCH[args.cmd](args)
        return 0
    except ValidationViolation as exc:
        print("violation: %s" % exc, file=sys.stderr)
        return 2
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 0
    except Exception as exc:  # runtime failures distinct from usage errors
        print("runtime error: %s: %s" % (type(exc).__name__, exc),
              file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
