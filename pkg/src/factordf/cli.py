"""Command-line front door: ingestion, fitting, testing, simulation, bootstrap.

Every command is a pure function of its files, flags, and seed; stochastic
commands require an explicit --seed and emit byte-identical output at any
--threads setting.  Data go to stdout (or --output); diagnostics and errors
go to stderr.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__
from .datasets import AGE_COEF_INDEX, synthetic_study
from .dof import DofMethod
from .factors import variance_explained
from .fdr import BootstrapConfig, evaluate, report_to_csv, report_to_json
from .inference import compute_direction_stats, df_totals, response_tests
from .model import DatasetBundle, fit_two_sided
from .simulation import (SignalShape, SimConfig, grid_to_csv, grid_to_json,
                         noise_preset, basis_signal_preset, run_grid, run_sim)

FORMATS = ("table", "csv", "json")


class IngestError(Exception):
    """Input-file validation failure with a stable error code."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


def _read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IngestError("IO_ERROR", f"cannot read {path}: {exc}") from exc
    if len(rows) < 2:
        raise IngestError("PARSE_ERROR", f"{path}: need a header row and data")
    return rows[0], rows[1:]


def _parse_block(path: str, rows: list[list[str]], width: int) -> np.ndarray:
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width + 1:
            raise IngestError(
                "DIM_MISMATCH",
                f"{path}: row {i + 2} has {len(row)} fields, expected {width + 1}")
        for j, cell in enumerate(row[1:]):
            try:
                out[i, j] = float(cell)
            except ValueError:
                raise IngestError(
                    "PARSE_ERROR",
                    f"{path}: unparseable number {cell!r} at row {i + 2}") from None
        if not np.all(np.isfinite(out[i])):
            raise IngestError("PARSE_ERROR", f"{path}: non-finite value at row {i + 2}")
    return out


def _check_ids(ids: list[str], path: str) -> None:
    seen = set()
    for x in ids:
        if x in seen:
            raise IngestError("DUP_ID", f"{path}: duplicated id {x!r}")
        seen.add(x)


def ingest(y_path: str, x_path: str | None = None, z_path: str | None = None,
           add_intercepts: bool = False) -> DatasetBundle:
    """Load Y (and optional X / Z) CSVs into a validated bundle.

    Y is N rows by M named columns with a leading row-id column; X rows must
    carry the same ids in the same order, and Z rows must match Y's column
    names.  Intercept columns are added only when ``add_intercepts`` is set.
    """
    header, body = _read_csv(y_path)
    col_ids = header[1:]
    if not col_ids:
        raise IngestError("DIM_MISMATCH", f"{y_path}: no response columns")
    _check_ids(col_ids, y_path)
    row_ids = [r[0] if r else "" for r in body]
    _check_ids(row_ids, y_path)
    Y = _parse_block(y_path, body, len(col_ids))

    X = None
    if x_path is not None:
        xh, xb = _read_csv(x_path)
        x_ids = [r[0] if r else "" for r in xb]
        if x_ids != row_ids:
            raise IngestError("ID_MISMATCH",
                              f"{x_path}: row ids do not match {y_path}")
        X = _parse_block(x_path, xb, len(xh) - 1)
        if add_intercepts:
            X = np.column_stack([np.ones(X.shape[0]), X])

    Z = None
    if z_path is not None:
        zh, zb = _read_csv(z_path)
        z_ids = [r[0] if r else "" for r in zb]
        if z_ids != col_ids:
            raise IngestError("ID_MISMATCH",
                              f"{z_path}: row ids do not match {y_path} columns")
        Z = _parse_block(z_path, zb, len(zh) - 1)
        if add_intercepts:
            Z = np.column_stack([np.ones(Z.shape[0]), Z])

    try:
        return DatasetBundle(Y, X, Z, row_ids=tuple(row_ids),
                             col_ids=tuple(col_ids))
    except ValueError as exc:
        msg = str(exc)
        code = "RANK_DEFICIENT" if "rank" in msg else "DIM_MISMATCH"
        raise IngestError(code, msg) from exc


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def _emit_rows(header: list[str], rows: list[list], fmt: str, out) -> None:
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    elif fmt == "json":
        payload = [dict(zip(header, row)) for row in rows]
        out.write(json.dumps(payload, indent=2) + "\n")
    else:
        cells = [[_fmt(v) for v in row] for row in rows]
        widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h)
                  for i, h in enumerate(header)]
        out.write("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip() + "\n")
        for row in cells:
            out.write("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() + "\n")


def _open_output(args):
    if args.output:
        return open(args.output, "w"), True
    return sys.stdout, False


def _default_threads() -> int:
    env = os.environ.get("FACTORDF_THREADS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _add_common(sp, stochastic: bool) -> None:
    sp.add_argument("--format", choices=FORMATS, default="table")
    sp.add_argument("--output", default=None, help="write data here instead of stdout")
    sp.add_argument("--threads", type=int, default=_default_threads())
    sp.add_argument("--seed", type=int, required=stochastic, default=None,
                    help="random seed" + (" (required)" if stochastic else ""))


def _add_data_args(sp) -> None:
    sp.add_argument("--y", required=True, help="response matrix CSV")
    sp.add_argument("--x", default=None, help="row covariates CSV")
    sp.add_argument("--z", default=None, help="column covariates CSV")
    sp.add_argument("--add-intercepts", action="store_true",
                    help="prepend intercept columns to X and Z")


def cmd_fit(args, out) -> None:
    bundle = ingest(args.y, args.x, args.z, args.add_intercepts)
    if bundle.X is None:
        raise ValueError("fit output requires row covariates (--x)")
    _, resid = fit_two_sided(bundle)
    stats = compute_direction_stats(bundle, 0)
    header = ["response"] + [f"coef{k}" for k in range(bundle.p)]
    rows = [[bundle.col_ids[j]] + [float(stats.estimates[k, j])
                                   for k in range(bundle.p)]
            for j in range(bundle.M)]
    _emit_rows(header, rows, args.format, out)
    print(f"residual frobenius norm: {np.linalg.norm(resid.E_hat):.10g}",
          file=sys.stderr)


def cmd_scree(args, out) -> None:
    bundle = ingest(args.y, args.x, args.z, args.add_intercepts)
    _, resid = fit_two_sided(bundle)
    k = min(bundle.N - bundle.p, bundle.M - bundle.q)
    table = variance_explained(resid.E_hat, rows=k)
    header = ["factor", "variance_pct", "residual_pct"]
    rows = [[i, float(v), float(r)] for i, v, r in table.rows()]
    _emit_rows(header, rows, args.format, out)


def cmd_test(args, out) -> None:
    bundle = ingest(args.y, args.x, args.z, args.add_intercepts)
    r_hat = 0 if args.method == "none" else args.r_hat
    method = DofMethod(args.method) if r_hat > 0 else None
    if method is DofMethod.MANDEL and args.seed is None:
        raise ValueError("--method mandel requires --seed")
    stats = compute_direction_stats(bundle, r_hat)
    if r_hat > 0:
        df_tot = df_totals(stats, method, args.mandel_reps, args.seed)
    else:
        df_tot = np.zeros(bundle.M)
    est, t, df_resid, p = response_tests(stats, args.coef_index, df_tot)
    se = np.sqrt(stats.rss / df_resid
                 * stats.xtx_inv[args.coef_index, args.coef_index])
    order = sorted(range(bundle.M), key=lambda j: (p[j], bundle.col_ids[j]))
    header = ["response", "estimate", "se", "t", "df_resid", "p", "method"]
    label = method.value if method else "none"
    rows = [[bundle.col_ids[j], float(est[j]), float(se[j]), float(t[j]),
             float(df_resid[j]), float(p[j]), label] for j in order]
    _emit_rows(header, rows, args.format, out)
    n_sig = int(np.sum(p < args.alpha))
    print(f"significant at alpha={args.alpha:g}: {n_sig} of {bundle.M}",
          file=sys.stderr)


def cmd_simulate(args, out) -> None:
    mu = tuple(args.mu or ())
    cfg = SimConfig(n=args.n, m=args.m, r=len(mu), mu=mu,
                    shape=SignalShape(args.shape), sigma_sq=args.sigma_sq,
                    r_hat=args.r_hat, replicates=args.replicates,
                    seed=args.seed)
    res = run_sim(cfg, threads=args.threads)
    header = ["n", "m", "mu", "shape", "mean_df", "se_df", "theoretical_df",
              "ks_D", "ks_p"]
    row = [args.n, args.m, mu[0] if mu else None, args.shape,
           res.mean_df, res.se_df, res.theoretical_df,
           res.ks.statistic if res.ks else None,
           res.ks.p_value if res.ks else None]
    _emit_rows(header, [row], args.format, out)


def cmd_kstable(args, out) -> None:
    if args.preset == "paper-noise":
        configs = noise_preset(args.seed, replicates=args.replicates)
    elif args.preset == "paper-basis":
        configs = basis_signal_preset(args.seed, mu=args.mu_value,
                                      replicates=args.replicates)
    else:
        configs = [SimConfig(n=n, m=m, r=0, r_hat=args.r_hat,
                             replicates=args.replicates, seed=args.seed)
                   for n in args.n_list for m in args.m_list]
    cells = run_grid(configs, threads=args.threads)
    if args.format == "json":
        out.write(grid_to_json(cells))
    else:
        out.write(grid_to_csv(cells))


def cmd_bootstrap(args, out) -> None:
    bundle = ingest(args.y, args.x, args.z, args.add_intercepts)
    methods = tuple(DofMethod(m) for m in args.methods)
    cfg = BootstrapConfig(k_factors=args.k_factors, alpha=args.alpha,
                          n_datasets=args.n_datasets, seed=args.seed,
                          coef_index=args.coef_index, methods=methods,
                          mandel_reps=args.mandel_reps, threads=args.threads)
    report = evaluate(cfg, bundle)
    if args.format == "json":
        out.write(report_to_json(report))
    else:
        out.write(report_to_csv(report))


def cmd_generate(args, out) -> None:
    bundle, truth = synthetic_study(m_responses=args.m, seed=args.seed,
                                    signal_fraction=args.signal_fraction)
    os.makedirs(args.out_dir, exist_ok=True)

    def write(name, header, rows):
        with open(os.path.join(args.out_dir, name), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow(row)

    write("y.csv", ["id"] + list(bundle.col_ids),
          [[bundle.row_ids[i]] + [f"{v:.12g}" for v in bundle.Y[i]]
           for i in range(bundle.N)])
    write("x.csv", ["id", "intercept", "sex", "age"],
          [[bundle.row_ids[i]] + [f"{v:.12g}" for v in bundle.X[i]]
           for i in range(bundle.N)])
    write("z.csv", ["id", "intercept", "tissue"],
          [[bundle.col_ids[j]] + [f"{v:.12g}" for v in bundle.Z[j]]
           for j in range(bundle.M)])
    with open(os.path.join(args.out_dir, "truth.json"), "w") as fh:
        json.dump({"signal_genes": [bundle.col_ids[j]
                                    for j in np.nonzero(truth.signal_mask)[0]],
                   "age_coef_index": AGE_COEF_INDEX,
                   "seed": args.seed}, fh, indent=2)
        fh.write("\n")
    print(f"wrote y.csv, x.csv, z.csv, truth.json to {args.out_dir}",
          file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="factordf",
        description="Bilinear regression with latent-factor df adjustment. "
                    "CSV layouts: Y is N rows x M named columns with a leading "
                    "row-id column; X rows align with Y row ids; Z rows align "
                    "with Y column names.  See docs/formats.md.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("fit", help="fit the two-sided model, emit coefficients")
    _add_data_args(sp)
    _add_common(sp, stochastic=False)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("scree", help="residual variance explained per factor")
    _add_data_args(sp)
    _add_common(sp, stochastic=False)
    sp.set_defaults(func=cmd_scree)

    sp = sub.add_parser("test", help="per-response t tests with df adjustment")
    _add_data_args(sp)
    sp.add_argument("--coef-index", type=int, required=True,
                    help="0-based column of X to test")
    sp.add_argument("--r-hat", type=int, default=0)
    sp.add_argument("--method",
                    choices=["proposed", "gollob", "mandel", "naive", "none"],
                    default="proposed",
                    help="df scheme; 'none' skips factor adjustment "
                         "(ignores --r-hat)")
    sp.add_argument("--alpha", type=float, default=0.001)
    sp.add_argument("--mandel-reps", type=int, default=1000)
    _add_common(sp, stochastic=False)
    sp.set_defaults(func=cmd_test)

    sp = sub.add_parser("simulate", help="one Monte-Carlo df cell")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--mu", type=float, nargs="*", default=[])
    sp.add_argument("--shape", choices=[s.value for s in SignalShape],
                    default="basis")
    sp.add_argument("--sigma-sq", type=float, default=1.0)
    sp.add_argument("--r-hat", type=int, default=1)
    sp.add_argument("--replicates", type=int, default=10000)
    _add_common(sp, stochastic=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("ks-table", help="chi-squared goodness-of-fit grid")
    sp.add_argument("--preset", choices=["paper-noise", "paper-basis"],
                    default=None)
    sp.add_argument("--n-list", type=int, nargs="*", default=[50])
    sp.add_argument("--m-list", type=int, nargs="*", default=[500])
    sp.add_argument("--r-hat", type=int, default=1)
    sp.add_argument("--mu-value", type=float, default=3.0)
    sp.add_argument("--replicates", type=int, default=10000)
    _add_common(sp, stochastic=True)
    sp.set_defaults(func=cmd_kstable)

    sp = sub.add_parser("bootstrap", help="parametric-bootstrap FDR evaluation")
    _add_data_args(sp)
    sp.add_argument("--coef-index", type=int, required=True)
    sp.add_argument("--k-factors", type=int, default=2)
    sp.add_argument("--alpha", type=float, default=0.001)
    sp.add_argument("--n-datasets", type=int, default=1000)
    sp.add_argument("--methods", nargs="*",
                    default=["proposed", "gollob", "mandel", "naive"])
    sp.add_argument("--mandel-reps", type=int, default=1000)
    _add_common(sp, stochastic=True)
    sp.set_defaults(func=cmd_bootstrap)

    sp = sub.add_parser("generate", help="write a synthetic study fixture")
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--m", type=int, default=2000)
    sp.add_argument("--signal-fraction", type=float, default=0.03)
    _add_common(sp, stochastic=True)
    sp.set_defaults(func=cmd_generate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out, close = sys.stdout, False
    try:
        out, close = _open_output(args)
        args.func(args, out)
        return 0
    except IngestError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        if close:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
