"""Parametric-bootstrap evaluation of false discovery rates.

Fits the bilinear model once, zeroes the coefficient entries that fail the
significance threshold, and treats the result (coefficients, latent factor
term, per-gene variances) as a fixed generative truth.  Bootstrap datasets
re-simulated from that truth are refit under each df-assignment method, and
the discovery rates are averaged against the truth's nonzero set.
"""

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distributions import DOMAIN_FDR_DATASET, stream
from .dof import DofMethod
from .inference import compute_direction_stats, df_totals, response_tests
from .model import DatasetBundle

BASELINE = "none"   # the unadjusted (r_hat = 0) comparison row

DEFAULT_METHODS = (DofMethod.PROPOSED, DofMethod.GOLLOB,
                   DofMethod.MANDEL, DofMethod.NAIVE)


@dataclass(frozen=True)
class BootstrapConfig:
    k_factors: int = 2
    alpha: float = 0.001
    n_datasets: int = 1000
    seed: int = 0
    coef_index: int = 2
    methods: tuple = DEFAULT_METHODS
    include_baseline: bool = True
    mandel_reps: int = 1000
    threads: int = 1

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.n_datasets < 10:
            raise ValueError("n_datasets must be >= 10")
        if self.k_factors < 1:
            raise ValueError("k_factors must be >= 1")


@dataclass(frozen=True)
class GenerativeTruth:
    """Thresholded fit used as the fixed truth for the bootstrap."""

    X: np.ndarray
    Z: np.ndarray | None
    beta: np.ndarray          # (M, p), sub-threshold tested entries zeroed
    A_hat: np.ndarray         # (N, q)
    factor_term: np.ndarray   # (N, M), held fixed across datasets
    variances: np.ndarray     # (M,) per-response noise variances
    coef_index: int
    nonzero_mask: np.ndarray  # (M,) bool
    col_ids: tuple = ()
    row_ids: tuple = ()

    def mean_surface(self) -> np.ndarray:
        out = self.X @ self.beta.T + self.factor_term
        if self.Z is not None:
            out = out + self.A_hat @ self.Z.T
        return out


def build_generative_truth(data: DatasetBundle, k_factors: int, alpha: float,
                           coef_index: int = 2, *,
                           method: DofMethod = DofMethod.PROPOSED,
                           mandel_reps: int = 1000,
                           seed: int | None = None) -> GenerativeTruth:
    """Fit, threshold the tested coefficients at ``alpha``, estimate variances."""
    stats = compute_direction_stats(data, k_factors)
    df_tot = df_totals(stats, method, mandel_reps, seed)
    _, _, df_resid, p = response_tests(stats, coef_index, df_tot)
    keep = p < alpha

    from .model import fit_two_sided
    coef, _ = fit_two_sided(data)
    beta = coef.B_hat.copy()
    beta[~keep, coef_index] = 0.0

    factor_term = (stats.factor_left * stats.factor_sing) @ stats.factor_loadings.T
    variances = stats.rss / df_resid / stats.s_normsq
    return GenerativeTruth(data.X, data.Z, beta, coef.A_hat, factor_term,
                           variances, coef_index, keep,
                           data.col_ids, data.row_ids)


def simulate_dataset(truth: GenerativeTruth, seed: int,
                     index: int = 0) -> DatasetBundle:
    """One bootstrap dataset: fixed mean surface plus heteroscedastic noise."""
    rng = stream(seed, DOMAIN_FDR_DATASET, index)
    N, M = truth.factor_term.shape
    noise = np.sqrt(truth.variances)[None, :] * rng.standard_normal((N, M))
    return DatasetBundle(truth.mean_surface() + noise, truth.X, truth.Z,
                         row_ids=truth.row_ids, col_ids=truth.col_ids)


@dataclass(frozen=True)
class MethodRates:
    fdr_pct: float | None
    fpr_pct: float
    tpr_pct: float
    fdr_se: float | None
    fpr_se: float
    tpr_se: float


@dataclass(frozen=True)
class FdrReport:
    rates: dict
    n_datasets: int
    alpha: float
    n_signals: int
    n_nulls: int


def _dataset_rates(p_values: np.ndarray, alpha: float,
                   mask: np.ndarray) -> tuple[float, float, float, int]:
    declared = p_values < alpha
    tp = int(np.sum(declared & mask))
    fp = int(np.sum(declared & ~mask))
    n_disc = tp + fp
    fdr = fp / n_disc if n_disc > 0 else 0.0
    fpr = fp / max(int(np.sum(~mask)), 1)
    tpr = tp / max(int(np.sum(mask)), 1)
    return fdr, fpr, tpr, n_disc


def evaluate(config: BootstrapConfig, data: DatasetBundle) -> FdrReport:
    """Run the bootstrap and report averaged FDR / FPR / TPR per method."""
    truth = build_generative_truth(
        data, config.k_factors, config.alpha, config.coef_index,
        mandel_reps=config.mandel_reps, seed=config.seed)
    mask = truth.nonzero_mask
    labels = [m.value for m in config.methods]
    if config.include_baseline:
        labels.append(BASELINE)

    D = config.n_datasets
    fdr = np.zeros((D, len(labels)))
    fpr = np.zeros((D, len(labels)))
    tpr = np.zeros((D, len(labels)))
    n_disc = np.zeros((D, len(labels)), dtype=int)

    def one_dataset(d: int):
        bundle = simulate_dataset(truth, config.seed, d)
        stats = compute_direction_stats(bundle, config.k_factors)
        rows = []
        for meth in config.methods:
            df_tot = df_totals(stats, meth, config.mandel_reps, config.seed)
            _, _, _, p = response_tests(stats, config.coef_index, df_tot)
            rows.append(_dataset_rates(p, config.alpha, mask))
        if config.include_baseline:
            stats0 = compute_direction_stats(bundle, 0)
            _, _, _, p0 = response_tests(
                stats0, config.coef_index, np.zeros(bundle.M))
            rows.append(_dataset_rates(p0, config.alpha, mask))
        return rows

    if config.threads <= 1:
        all_rows = [one_dataset(d) for d in range(D)]
    else:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            all_rows = list(pool.map(one_dataset, range(D)))
    for d, rows in enumerate(all_rows):
        for c, (f, fp_, tp_, nd) in enumerate(rows):
            fdr[d, c], fpr[d, c], tpr[d, c], n_disc[d, c] = f, fp_, tp_, nd

    root = np.sqrt(D)
    rates = {}
    for c, label in enumerate(labels):
        any_disc = bool(np.any(n_disc[:, c] > 0))
        rates[label] = MethodRates(
            fdr_pct=100.0 * float(fdr[:, c].mean()) if any_disc else None,
            fpr_pct=100.0 * float(fpr[:, c].mean()),
            tpr_pct=100.0 * float(tpr[:, c].mean()),
            fdr_se=100.0 * float(fdr[:, c].std(ddof=1) / root) if any_disc else None,
            fpr_se=100.0 * float(fpr[:, c].std(ddof=1) / root),
            tpr_se=100.0 * float(tpr[:, c].std(ddof=1) / root),
        )
    return FdrReport(rates, D, config.alpha,
                     int(mask.sum()), int((~mask).sum()))


def _fmt(x) -> str:
    return "" if x is None else f"{x:.10g}"


def report_to_csv(report: FdrReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "fdr_pct", "fdr_se", "fpr_pct", "fpr_se",
                "tpr_pct", "tpr_se"])
    for label, r in report.rates.items():
        w.writerow([label, _fmt(r.fdr_pct), _fmt(r.fdr_se), _fmt(r.fpr_pct),
                    _fmt(r.fpr_se), _fmt(r.tpr_pct), _fmt(r.tpr_se)])
    return buf.getvalue()


def report_to_json(report: FdrReport) -> str:
    rows = {label: {"fdr_pct": r.fdr_pct, "fdr_se": r.fdr_se,
                    "fpr_pct": r.fpr_pct, "fpr_se": r.fpr_se,
                    "tpr_pct": r.tpr_pct, "tpr_se": r.tpr_se}
            for label, r in report.rates.items()}
    return json.dumps({"alpha": report.alpha, "n_datasets": report.n_datasets,
                       "n_signals": report.n_signals, "n_nulls": report.n_nulls,
                       "rates": rows}, indent=2) + "\n"
