"""Experiment orchestration: config parsing, deterministic parallel driving,
JSONL/CSV persistence, summary statistics, and scaling fits.

Determinism contract: every sample is a pure function of
(master_seed, cell index, sample index); outputs are reduced to canonical
(cell, sample) order and serialized with sorted keys, so reruns and any
worker count produce byte-identical files.  Wall-clock timings are kept
in-memory only (keys starting with "_" are never serialized).
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import animal, curve, ising, polygrow, rng
from .errors import ConfigError, DomainError
from .field import sample_field

EXPERIMENTS = ("mag", "psi", "animal_scan", "grow_scan", "curve_suite")
_LIST_KEYS = {"N", "eps", "beta", "suites"}
_INT_KEYS = {"N", "samples", "seed", "workers", "trials", "n_max",
             "budget_base", "max_size"}
_KNOWN_KEYS = {"experiment", "N", "eps", "beta", "m", "m_target", "samples",
               "seed", "workers", "out", "budget_base", "animal_class",
               "mode", "n_max", "suites", "trials", "max_size"}
CURVE_SUITES = ("coarsening", "splitting", "good", "distance", "skeleton")


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    N: list = dataclass_field(default_factory=list)
    eps: list = dataclass_field(default_factory=list)
    beta: list = dataclass_field(default_factory=list)
    suites: list = dataclass_field(default_factory=list)
    m: float = 0.5
    m_target: float = 0.9
    samples: int = 1
    workers: int = 1
    out: str | None = None
    budget_base: int = 40
    animal_class: str = "connected"
    mode: str = "lattice_simplified"
    n_max: int = 64
    trials: int = 100
    max_size: int = 8


def _parse_scalar(key, raw):
    if key in _INT_KEYS:
        return int(raw)
    if key == "beta":
        return math.inf if raw == "inf" else float(raw)
    if key in ("eps", "m", "m_target"):
        return float(raw)
    return raw


def parse_config(text):
    """Flat `key=value` config; comma lists; unknown keys are hard errors."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError("line %d: expected key=value" % lineno)
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError("line %d: unknown key %r" % (lineno, key))
        if key in _LIST_KEYS:
            values[key] = [_parse_scalar(key, tok.strip())
                           for tok in raw.split(",") if tok.strip()]
        else:
            values[key] = _parse_scalar(key, raw)
    if values.get("experiment") not in EXPERIMENTS:
        raise ConfigError("experiment must be one of %s" % (EXPERIMENTS,))
    if "seed" not in values:
        raise ConfigError("master seed is required (no wall-clock seeding)")
    for suite in values.get("suites", []):
        if suite not in CURVE_SUITES:
            raise ConfigError("unknown curve suite %r" % suite)
    return ExperimentConfig(**values)


def _cells(cfg):
    """Grid cells in canonical order (the order axes are documented in)."""
    if cfg.experiment == "mag":
        return [{"N": n, "eps": e, "beta": b}
                for n in cfg.N for e in cfg.eps for b in cfg.beta]
    if cfg.experiment == "psi":
        return [{"eps": e, "beta": b, "m_target": cfg.m_target}
                for e in cfg.eps for b in cfg.beta]
    if cfg.experiment == "animal_scan":
        return [{"N": n} for n in cfg.N]
    if cfg.experiment == "grow_scan":
        return [{"N": n, "eps": e, "m": cfg.m} for n in cfg.N for e in cfg.eps]
    if cfg.experiment == "curve_suite":
        return [{"suite": s} for s in cfg.suites]
    raise ConfigError("unknown experiment %r" % cfg.experiment)


def _beta_json(beta):
    return "inf" if math.isinf(beta) else beta


def curve_trial(suite, seed, trial):
    """One property-suite trial; returns a violation string or None."""
    if suite == "coarsening":
        fld = sample_field(10, rng.derive_seed(seed, trial, 99), 1.0)
        eta, bps = curve.gen_decomposition(seed, trial)
        _, _, res = curve.decompose_check(eta, bps, curve.signed_area_measure())
        if res != 0.0:
            return "signed-area residual %r" % res
        _, _, res = curve.decompose_check(eta, bps, curve.gaussian_measure(fld))
        if abs(res) > 1e-9:
            return "gaussian residual %r" % res
        return None
    if suite == "splitting":
        eta, S = curve.gen_splitting(seed, trial)
        if not curve.is_splitting(eta, S):
            return "generated chord not splitting"
        w = curve.probe_max_winding(eta, step=0.45)
        if w > 1:
            return "splitting max|w|=%d > 1" % w
        return None
    if suite == "good":
        eta, wit = curve.gen_good(seed, trial)
        if not curve.is_good(eta, wit):
            return "generated curve not good"
        w = curve.probe_max_winding(eta, step=0.45)
        if w > 3:
            return "good max|w|=%d > 3" % w
        return None
    if suite == "distance":
        v, w = curve.gen_pair_sequences(seed, trial)
        bound = curve.interpolation_bound(v, w)
        d = curve.d_nu_raster(curve.Curve(tuple(v)), curve.Curve(tuple(w)), 8)
        if d > bound * 1.02:
            return "distance %r > bound %r" % (d, bound)
        return None
    if suite == "skeleton":
        kappas = (2, 4, 8, 16, 32, 64)
        rhos = (0.01, 0.05, 0.1)
        kappa = kappas[trial % len(kappas)]
        rho = rhos[(trial // len(kappas)) % len(rhos)]
        v = curve.gen_skeleton(seed, trial, kappa, rho)
        lhs, ok = curve.skeleton_length_check(v, rho, 1.0)
        if not ok:
            return "skeleton lhs %r < %r" % (lhs, 1 + rho * rho * kappa / 40)
        return None
    raise ConfigError("unknown curve suite %r" % suite)


def _one_sample(cfg, cell_idx, k):
    """The pure (cell, sample) -> record function behind every experiment."""
    cell = _cells(cfg)[cell_idx]
    if cfg.experiment == "mag":
        seed = rng.derive_seed(cfg.seed, cell_idx, k)
        m_plus, m_minus = ising.magnetization_sample(
            cell["N"], cell["eps"], cell["beta"], seed)
        return {"exp": "mag", "N": cell["N"], "eps": cell["eps"],
                "beta": _beta_json(cell["beta"]), "seed": seed, "k": k,
                "m_plus": m_plus, "m_minus": m_minus}
    if cfg.experiment == "psi":
        seed = rng.derive_seed(cfg.seed, cell_idx)
        psi, trace = ising.correlation_length(
            cell["beta"], cell["m_target"], cell["eps"], cfg.samples,
            cfg.n_max, seed)
        return {"exp": "psi", "eps": cell["eps"],
                "beta": _beta_json(cell["beta"]),
                "m_target": cell["m_target"], "seed": seed, "k": k,
                "psi": psi, "trace": [[n, m, s] for n, m, s in trace]}
    if cfg.experiment == "animal_scan":
        seed = rng.derive_seed(cfg.seed, cell_idx, k)
        fld = sample_field(cell["N"], seed, 1.0)
        budget = cfg.budget_base * (2 * cell["N"] + 1)
        res = animal.greedy_value_anneal(fld, budget, seed,
                                         cls=cfg.animal_class)
        return {"exp": "animal", "N": cell["N"], "seed": seed, "k": k,
                "value": res.best.normalized_value,
                "boundary": res.best.boundary_size,
                "size": len(res.best.sites)}
    if cfg.experiment == "grow_scan":
        seed = rng.derive_seed(cfg.seed, cell_idx, k)
        fld = sample_field(cell["N"], seed, cell["eps"])
        state = polygrow.init_growth(cell["N"], cell["eps"], cell["m"],
                                     seed=seed, mode=cfg.mode)
        report = polygrow.run(state, fld, validators=False)
        violations = polygrow.validate(state)
        return {"exp": "grow", "N": cell["N"], "eps": cell["eps"],
                "m": cell["m"], "seed": seed, "k": k,
                "n_star": state.n_star, "sides": len(state.sides),
                "perimeter": report.perimeter,
                "lattice_boundary": report.lattice_boundary,
                "gamma_value": report.gamma_value,
                "ratio": report.certificate_ratio, "violations": violations}
    if cfg.experiment == "curve_suite":
        violation = curve_trial(cell["suite"], cfg.seed, k)
        return {"exp": "curve", "suite": cell["suite"], "k": k,
                "ok": violation is None,
                "violation": violation}
    raise ConfigError("unknown experiment %r" % cfg.experiment)


def _task(args):
    cfg, cell_idx, k = args
    try:
        return cell_idx, k, _one_sample(cfg, cell_idx, k)
    except Exception as exc:  # crash isolation: error payload per record
        cell = _cells(cfg)[cell_idx]
        rec = {"exp": cfg.experiment, "k": k,
               "error": "%s: %s" % (type(exc).__name__, exc)}
        rec.update(cell)
        if "beta" in rec:
            rec["beta"] = _beta_json(rec["beta"])
        return cell_idx, k, rec


def _chunk(args):
    return [_task(a) for a in args]


def run_experiment(cfg):
    """All grid cells x samples, reduced to canonical (cell, sample) order."""
    cells = _cells(cfg)
    if not cells:
        raise ConfigError("experiment grid is empty")
    per_cell = cfg.trials if cfg.experiment == "curve_suite" else cfg.samples
    if cfg.experiment == "psi":
        per_cell = 1
    tasks = [(cfg, ci, k) for ci in range(len(cells))
             for k in range(per_cell)]
    workers = max(1, int(cfg.workers or 1))
    if workers > 1 and len(tasks) > 1:
        chunks = [tasks[c::workers] for c in range(workers)]
        chunks = [c for c in chunks if c]
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            parts = pool.map(_chunk, chunks)
            rows = [r for part in parts for r in part]
    else:
        rows = [_task(t) for t in tasks]
    rows.sort(key=lambda r: (r[0], r[1]))
    return [rec for _ci, _k, rec in rows]


# ---------------------------------------------------------------------------
# persistence

def write_records(records, path):
    with open(path, "w") as fh:
        for rec in records:
            clean = {k: v for k, v in rec.items() if not k.startswith("_")}
            fh.write(json.dumps(clean, sort_keys=True) + "\n")


def load_records(path):
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


_CELL_KEYS = ("suite", "N", "eps", "beta", "m", "m_target")


def record_value(rec):
    """The scalar payload a record contributes to summaries and fits."""
    if "error" in rec:
        return None
    exp = rec["exp"]
    if exp == "mag":
        return 0.5 * (rec["m_plus"] - rec["m_minus"])
    if exp == "animal":
        return rec["value"]
    if exp == "grow":
        return rec["ratio"]
    if exp == "psi":
        return float(rec["psi"]) if isinstance(rec["psi"], (int, float)) \
            else None
    if exp == "curve":
        return 1.0 if rec["ok"] else 0.0
    raise DomainError("unknown record experiment %r" % exp)


def summarize(records):
    """Per-cell (cell dict, mean, stderr, n), in first-seen cell order."""
    if not records:
        raise DomainError("cannot summarize zero records")
    tags = {rec["exp"] for rec in records}
    if len(tags) != 1:
        raise DomainError("summarize needs a homogeneous experiment tag")
    order = []
    groups = {}
    for rec in records:
        key = tuple((k, rec[k]) for k in _CELL_KEYS if k in rec)
        if key not in groups:
            groups[key] = []
            order.append(key)
        val = record_value(rec)
        if val is not None:
            groups[key].append(val)
    out = []
    for key in order:
        vals = groups[key]
        if not vals:
            raise DomainError("cell %r has no usable samples" % (key,))
        arr = np.asarray(vals, dtype=np.float64)
        mean = float(np.mean(arr))
        stderr = float(math.sqrt(np.var(arr, ddof=1) / len(arr))) \
            if len(arr) > 1 else 0.0
        out.append((dict(key), mean, stderr, len(arr)))
    return out


def write_summary_csv(rows, path, experiment="mag"):
    """CSV summary; the mag header is the documented N,eps,beta layout."""
    with open(path, "w") as fh:
        if experiment == "mag":
            fh.write("N,eps,beta,samples,m_hat,stderr\n")
            for cell, mean, stderr, n in rows:
                fh.write("%s,%.17g,%s,%d,%.17g,%.17g\n"
                         % (cell["N"], cell["eps"], cell["beta"], n, mean,
                            stderr))
            return
        keys = list(rows[0][0]) if rows else []
        fh.write(",".join(keys + ["samples", "mean", "stderr"]) + "\n")
        for cell, mean, stderr, n in rows:
            cols = [str(cell[k]) for k in keys]
            fh.write(",".join(cols + ["%d" % n, "%.17g" % mean,
                                      "%.17g" % stderr]) + "\n")


# ---------------------------------------------------------------------------
# statistics

def _ranks(values):
    arr = np.asarray(values, dtype=np.float64)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(len(arr), dtype=np.float64)
    i = 0
    while i < len(arr):
        j = i
        while j + 1 < len(arr) and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        avg = 0.5 * (i + j) + 1.0
        for t in range(i, j + 1):
            ranks[order[t]] = avg
        i = j + 1
    return ranks


def spearman_rho(xs, ys):
    """Spearman rank correlation with average ranks on ties."""
    if len(xs) != len(ys) or len(xs) < 2:
        raise DomainError("need two same-length sequences of >= 2 points")
    rx = _ranks(xs)
    ry = _ranks(ys)
    rx -= rx.mean()
    ry -= ry.mean()
    den = math.sqrt(float(np.dot(rx, rx)) * float(np.dot(ry, ry)))
    if den == 0.0:
        return 0.0
    return float(np.dot(rx, ry)) / den


MODELS = {
    "logn34": "a*(logN)^(3/4)",
    "eps43": "log psi = a*eps^(-4/3) + b",
    "eps2": "log psi = a*eps^(-2) + b",
}


@dataclass(frozen=True)
class FitResult:
    model: str
    coefficients: tuple
    r_squared: float
    residuals: tuple


def fit_scaling(points, model):
    """OLS on transformed coordinates; R^2 clamped into [0, 1]."""
    if model not in MODELS:
        raise DomainError("model must be one of %s" % sorted(MODELS))
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise DomainError("fit needs at least 3 cells")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if model == "logn34":
        if np.any(xs < 1.0):
            raise DomainError("logn34 model needs N >= 1")
        X = np.log(xs) ** 0.75
        X = X[:, None]
        y = ys
    else:
        if np.any(ys <= 0.0):
            raise DomainError("psi models need positive psi values")
        if np.any(xs <= 0.0):
            raise DomainError("psi models need positive eps values")
        power = -4.0 / 3.0 if model == "eps43" else -2.0
        X = np.column_stack([xs ** power, np.ones(len(xs))])
        y = np.log(ys)
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise DomainError("rank-deficient design matrix")
    coef, _res, _rank, _sv = np.linalg.lstsq(X, y, rcond=None)
    fitted = X @ coef
    resid = y - fitted
    ss_res = float(np.dot(resid, resid))
    ss_tot = float(np.dot(y - y.mean(), y - y.mean()))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res <= 1e-24 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    r2 = min(1.0, max(0.0, r2))
    return FitResult(MODELS[model], tuple(float(c) for c in coef), r2,
                     tuple(float(r) for r in resid))
