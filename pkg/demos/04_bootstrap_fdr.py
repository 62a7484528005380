"""Parametric-bootstrap error-rate comparison of the df methods.

Fits a synthetic study, freezes the thresholded fit as a generative truth,
resimulates bootstrap datasets, and reports the false discovery rate, false
positive rate, and power of each df-assignment scheme next to the unadjusted
baseline.  Smaller than the acceptance-suite run so it finishes in seconds.
"""

from factordf.datasets import AGE_COEF_INDEX, synthetic_study
from factordf.fdr import BootstrapConfig, evaluate

bundle, truth = synthetic_study(m_responses=1000, seed=42)
print(f"dataset: {bundle.N} x {bundle.M}, "
      f"{truth.signal_mask.sum()} planted age-related genes")

config = BootstrapConfig(k_factors=2, alpha=0.001, n_datasets=100,
                         seed=2718, coef_index=AGE_COEF_INDEX, threads=4)
report = evaluate(config, bundle)
print(f"generative truth keeps {report.n_signals} nonzero age coefficients "
      f"({report.n_nulls} nulls); {report.n_datasets} bootstrap datasets\n")

print(f"{'method':10s} {'FDR %':>8s} {'FPR %':>8s} {'TPR %':>8s}")
for label, r in report.rates.items():
    fdr = f"{r.fdr_pct:.2f}" if r.fdr_pct is not None else "--"
    print(f"{label:10s} {fdr:>8s} {r.fpr_pct:>8.4f} {r.tpr_pct:>8.2f}")

print("\nWithout adjustment the latent factors inflate the per-gene variance")
print("estimates: power collapses and the few discoveries made are much less")
print("reliable.  The four adjusting schemes differ by well under a point.")
