"""Command-line front end.

Every subcommand is deterministic given its inputs and ``--seed``.  Exit
status is 0 on success, 1 on invalid input and 2 on numerical failure; in
the failure cases a single JSON line ``{"error": ..., "message": ...}`` is
written to standard error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from contextlib import contextmanager

import numpy as np

from . import __version__
from .errors import ConvergenceError, ValidationError

log = logging.getLogger("wsign")

FLOAT_FMT = "%.17g"


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT % v
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


# --- CSV ingestion ---------------------------------------------------------------

def read_numeric_csv(path, header=True):
    """Read a numeric CSV with a header row; returns ``(names, matrix)``.

    Non-numeric cells and ragged rows raise :class:`ValidationError` naming
    the 1-based row and column.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    rows = [r for r in rows if r]
    if not rows:
        raise ValidationError(f"{path}: empty file")
    names = [c.strip() for c in rows[0]] if header else None
    body = rows[1:] if header else rows
    width = len(rows[0])
    if not body:
        raise ValidationError(f"{path}: no data rows")
    data = np.empty((len(body), width))
    for i, row in enumerate(body, start=2 if header else 1):
        if len(row) != width:
            raise ValidationError(f"{path}: row {i} has {len(row)} fields, expected {width}")
        for j, cell in enumerate(row, start=1):
            try:
                data[i - (2 if header else 1), j - 1] = float(cell)
            except ValueError:
                raise ValidationError(f"{path}: row {i}, column {j}: non-numeric value {cell.strip()!r}") from None
    if not np.all(np.isfinite(data)):
        r, c = np.argwhere(~np.isfinite(data))[0]
        raise ValidationError(f"{path}: row {r + (2 if header else 1)}, column {c + 1}: non-finite value")
    return names, data


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


@contextmanager
def _sink(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    with _sink(path) as fh:
        fh.write(buf.getvalue())


def write_json(path, doc):
    with _sink(path) as fh:
        fh.write(json.dumps(_jsonable(doc), sort_keys=True) + "\n")


def matrix_rows(m):
    m = np.asarray(m)
    return [(i, j, m[i, j]) for i in range(m.shape[0]) for j in range(m.shape[1])]


# --- subcommands ---------------------------------------------------------------

def _seed(args, cfg):
    """An explicit ``--seed`` overrides the config's seed."""
    return args.seed if args.seed_given else cfg.get("seed", 0)


def _weight(name):
    from .depth_weights import WeightSpec

    return WeightSpec(name.upper())


def cmd_estimate_location(args):
    from .location import weighted_spatial_median

    _, x = read_numeric_csv(args.input)
    fit = weighted_spatial_median(x, _weight(args.weight), tol=args.tol, max_iter=args.max_iter)
    write_json(args.out, fit.to_dict())


def cmd_estimate_scatter(args):
    from .scatter import fit_scatter

    _, x = read_numeric_csv(args.input)
    _, fit = fit_scatter(x, args.estimator, args.weight, tol=args.tol, max_iter=args.max_iter,
                         k_groups=args.k_groups, seed=args.seed)
    write_csv(args.out, ["i", "j", "value"], matrix_rows(fit.matrix))


def cmd_eigenvalues(args):
    from .scatter import EigenvalueRecoverySpec, fit_scatter, recover_eigenvalues

    _, x = read_numeric_csv(args.input)
    loc, base = fit_scatter(x, "wscm", args.weight)
    lam, _ = recover_eigenvalues(x, base, EigenvalueRecoverySpec(args.k_groups, args.seed), center=loc.q_hat)
    p = x.shape[1]
    header = ["index", "lambda_dagger"] + [f"gamma_{j + 1}" for j in range(p)]
    rows = [[i, lam[i], *base.eigvecs[:, i]] for i in range(p)]
    write_csv(args.out, header, rows)


def cmd_influence_grid(args):
    from .asymptotics import cartesian_grid, influence_grid, polar_grid
    from .elliptical import EllipticalModel
    from .schemas import INFLUENCE, validate

    cfg = read_json(args.config)
    validate(cfg, INFLUENCE, args.config)
    model = EllipticalModel.from_dict(cfg["model"])
    grid = cfg.get("grid", {})
    if grid.get("kind", "cartesian") == "polar":
        if model.p != 2:
            raise ValidationError("polar grids are two-dimensional")
        pts = polar_grid(grid.get("radii", [0.5, 1, 2, 5]), grid.get("n_angles", 72), model.mu)
    else:
        pts = cartesian_grid(grid.get("limit", 5.0), grid.get("step", 0.5), model.p) + model.mu
    estimators = cfg.get("estimators", ["SAMPLE_COV_EVEC", "SCM_EVEC", "TYLER_EVEC",
                                        "WSCM_EVEC(HSD)", "WSCM_EVEC(MHD)", "WSCM_EVEC(PD)"])
    res = influence_grid(model, pts, estimators, i=cfg.get("index", 0), mc=cfg.get("mc", 100_000),
                         seed=_seed(args, cfg), eps=cfg.get("eps", 1e-4))
    header = ["estimator"] + [f"x0_{j + 1}" for j in range(model.p)] + ["if_norm"]
    rows = [[lab, *pt, val] for lab in res.estimators for pt, val in zip(res.grid_points, res.if_norms[lab])]
    write_csv(args.out, header, rows)


ARE_FAMILIES = [5, 6, 10, 15, 25, "normal"]


def cmd_are(args):
    from .asymptotics import evec_are_adcm
    from .depth_weights import WeightSpec
    from .elliptical import EllipticalModel
    from .schemas import ARE, validate

    cfg = {}
    if args.config:
        cfg = read_json(args.config)
        validate(cfg, ARE, args.config)
    families = cfg.get("families", ARE_FAMILIES)
    kinds = [k.upper() for k in cfg.get("weights", ["PD", "HSD"])]
    p_list = cfg.get("p_list", [2, 5, 10, 20])
    mc = cfg.get("mc", args.mc)
    adjusted = cfg.get("kurtosis_adjusted", not args.literal)
    seed = _seed(args, cfg)
    header = ["distribution"] + [f"{k}_p{p}" for k in kinds for p in p_list]
    rows = []
    for fam in families:
        row = ["MVN" if fam == "normal" else f"t{fam}"]
        for kind in kinds:
            for p in p_list:
                sigma = np.eye(p)
                model = (EllipticalModel.normal(np.zeros(p), sigma) if fam == "normal"
                         else EllipticalModel.student_t(fam, np.zeros(p), sigma))
                row.append(evec_are_adcm(model, WeightSpec(kind), mc=mc, seed=seed,
                                         kurtosis_adjusted=adjusted).value)
        rows.append(row)
    write_csv(args.out, header, rows)


def cmd_simulate_fse(args):
    from .bench import FseExperiment, run_fse
    from .schemas import FSE, validate

    cfg = read_json(args.config)
    validate(cfg, FSE, args.config)
    cfg["seed"] = _seed(args, cfg)
    exp = FseExperiment.from_dict(cfg, threads=args.threads)
    res = run_fse(exp)
    ests, rows = res.table_rows(list(exp.estimators))
    write_csv(args.out, ["n", *ests], [[n, *vals] for n, vals in rows])
    if args.se_out:
        write_csv(args.se_out, ["n", *ests], [[n, *[res.mc_standard_errors[e][n] for e in ests]] for n, _ in rows])
    failed = sum(res.failures.values())
    if failed:
        log.warning("%d replications dropped after fit failures", failed)


def cmd_simulate_sdr(args):
    from .bench import SdrBenchmark, run_sdr_benchmark
    from .schemas import SDR, validate

    cfg = {}
    if args.config:
        cfg = read_json(args.config)
        validate(cfg, SDR, args.config)
    rows = []
    for outliers in cfg.get("outliers", [False, True]):
        bench = SdrBenchmark(
            p_list=tuple(cfg.get("p_list", (5, 10, 25, 50, 75, 100, 125, 150))),
            n=cfg.get("n", 200), n_test=cfg.get("n_test", 200), reps=cfg.get("reps", args.reps),
            outliers=outliers, seed=_seed(args, cfg), weight=cfg.get("weight", "PD").upper(),
            d=cfg.get("d", 1), threads=args.threads,
        )
        res = run_sdr_benchmark(bench)
        for p in res.p_list:
            rows.append([p, outliers, res.robust[p], res.classical[p], res.robust_se[p], res.classical_se[p]])
    write_csv(args.out, ["p", "outliers", "robust_mse", "classical_mse", "robust_se", "classical_se"], rows)


def cmd_sdr(args):
    from .sdr import SdrModel, fit_sdr, predict_many

    if args.action == "fit":
        names, data = read_numeric_csv(args.train)
        col = names.index(args.y_col) if args.y_col in names else None
        if col is None:
            raise ValidationError(f"{args.train}: response column {args.y_col!r} not found in header")
        y = data[:, col]
        x = np.delete(data, col, axis=1)
        model = fit_sdr(x, y, args.d, args.weight.upper())
        doc = {
            "gamma1_hat": model.gamma1_hat, "sigma2_hat": model.sigma2_hat, "d": model.d,
            "train_x": model.train_x, "train_y": model.train_y,
            "x_columns": [n for k, n in enumerate(names) if k != col],
        }
        write_json(args.out, doc)
    else:
        doc = read_json(args.model)
        try:
            model = SdrModel(np.asarray(doc["gamma1_hat"], float), float(doc["sigma2_hat"]),
                             np.asarray(doc["train_x"], float), np.asarray(doc["train_y"], float), int(doc["d"]))
        except KeyError as exc:
            raise ValidationError(f"{args.model}: missing field {exc.args[0]}") from None
        names, x = read_numeric_csv(args.input)
        if x.shape[1] != model.train_x.shape[1]:
            raise ValidationError(f"{args.input}: {x.shape[1]} columns, model expects {model.train_x.shape[1]}")
        pred = predict_many(model, x)
        write_csv(args.out, ["row", "y_hat"], [[i, v] for i, v in enumerate(pred)])


def cmd_fpca_outliers(args):
    from .fdata import CurveSet, outlier_report, project_curves, robust_fpca

    try:
        with open(args.curves, newline="", encoding="utf-8") as fh:
            head = next(csv.reader(fh), None)
    except OSError as exc:
        raise ValidationError(f"cannot read {args.curves}: {exc.strerror}") from None
    if not head:
        raise ValidationError(f"{args.curves}: empty file")
    try:
        t = np.array([float(c) for c in head])
    except ValueError:
        raise ValidationError(f"{args.curves}: row 1 must hold numeric design points") from None
    _, values = read_numeric_csv(args.curves)
    curves = CurveSet(t, values)
    proj = project_curves(curves, args.p_basis)
    fit = robust_fpca(proj, args.q, args.weight.upper(), seed=args.seed)
    sd_df = args.sd_df if args.sd_df in ("fixed", "q") else int(args.sd_df)
    rep = outlier_report(proj, fit, sd_df)
    write_csv(args.report, ["curve", "od", "sd", "od_flag", "sd_flag"], rep.rows())
    write_json(args.out, {"od_cutoff": rep.od_cutoff, "sd_cutoff": rep.sd_cutoff,
                          "flagged": rep.flagged_indices})


# --- parser --------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    # default None so a config file's seed wins unless --seed is given;
    # set_defaults on a subparser would leak into the shared action
    common.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    common.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    common.add_argument("--out", default=None, help="output path (default: standard output)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="wsign", description="Weighted spatial sign estimators.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    weights = ["unit", "hsd", "mhd", "pd"]

    p = sub.add_parser("estimate-location", parents=[common], help="weighted spatial median as JSON")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--weight", choices=weights, default="unit")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=500)
    p.set_defaults(func=cmd_estimate_location)

    p = sub.add_parser("estimate-scatter", parents=[common], help="scatter matrix as i,j,value CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--estimator", choices=["wscm", "adcm", "plugin", "scm", "tyler", "cov"], required=True)
    p.add_argument("--weight", choices=weights, default="pd")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--k-groups", type=int, default=None)
    p.set_defaults(func=cmd_estimate_scatter)

    p = sub.add_parser("eigenvalues", parents=[common], help="robust eigenvalues along WSCM eigenvectors")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--weight", choices=weights, default="pd")
    p.add_argument("--k-groups", type=int, default=None)
    p.set_defaults(func=cmd_eigenvalues)

    p = sub.add_parser("influence-grid", parents=[common], help="eigenvector IF norms on a grid")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_influence_grid)

    p = sub.add_parser("are", parents=[common], help="ADCM eigenvector efficiencies as a family x (weight, p) table")
    p.add_argument("--config", default=None)
    p.add_argument("--mc", type=int, default=1_000_000)
    p.add_argument("--literal", action="store_true", help="normal-theory classical variance (no kurtosis factor)")
    p.set_defaults(func=cmd_are)

    p = sub.add_parser("simulate-fse", parents=[common], help="finite-sample efficiency table")
    p.add_argument("--config", required=True)
    p.add_argument("--se-out", default=None, help="also write Monte-Carlo standard errors here")
    p.set_defaults(func=cmd_simulate_fse)

    p = sub.add_parser("simulate-sdr", parents=[common], help="robust vs classical SDR prediction error")
    p.add_argument("--config", default=None)
    p.add_argument("--reps", type=int, default=100)
    p.set_defaults(func=cmd_simulate_sdr)

    p = sub.add_parser("sdr", parents=[common], help="fit or apply an SDR predictor")
    p.add_argument("action", choices=["fit", "predict"])
    p.add_argument("--train", help="training CSV (fit)")
    p.add_argument("--y-col", default="y", help="response column name (fit)")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--weight", choices=weights, default="pd")
    p.add_argument("--model", help="model JSON written by 'sdr fit' (predict)")
    p.add_argument("--in", dest="input", help="predictor CSV (predict)")
    p.set_defaults(func=cmd_sdr)

    p = sub.add_parser("fpca-outliers", parents=[common], help="functional outlier report")
    p.add_argument("--curves", required=True, help="CSV: design points in row 1, one curve per row")
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--p-basis", type=int, default=20)
    p.add_argument("--weight", choices=weights, default="pd")
    p.add_argument("--sd-df", default="fixed", help="'fixed' (2), 'q', or an integer")
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_fpca_outliers)
    return parser


def _fail(kind, message, code):
    sys.stderr.write(json.dumps({"error": kind, "message": " ".join(str(message).split())}) + "\n")
    return code


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 1
    args.seed_given = args.seed is not None
    if not args.seed_given:
        args.seed = 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    if args.command == "sdr":
        need = ["train"] if args.action == "fit" else ["model", "input"]
        missing = [n for n in need if getattr(args, n) is None]
        if missing:
            return _fail("validation", f"sdr {args.action} requires --{missing[0].replace('input', 'in')}", 1)
    try:
        args.func(args)
    except ValidationError as exc:
        return _fail("validation", exc, 1)
    except (ConvergenceError, np.linalg.LinAlgError, FloatingPointError) as exc:
        return _fail("numerical", exc, 2)
    except OSError as exc:
        return _fail("validation", f"{exc.filename}: {exc.strerror}", 1)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
