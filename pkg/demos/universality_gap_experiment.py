"""Scaled-down entry-law universality experiment.

The full experiment (defaults in ExperimentConfig: N up to 200, 200
disorder replicas) takes about a minute; this demo shrinks everything so
the whole sweep runs in a few seconds while exercising the same harness
path.  The table prints the disorder-averaged autocorrelation gap of each
non-reference law against the shared-noise gaussian reference, next to the
bootstrap noise floor that calibrates what "zero" looks like at this
replica budget.  Interpretation: a law is indistinguishable from gaussian
when its gap sits at or below the floor, and the floor itself shrinks like
1/sqrt(N R).
"""

import tempfile

from spinlab.config import load_config
from spinlab.harness import run_universality

cfg = load_config(overrides={
    "n_particles": 32,
    "n_sweep": [8, 16, 32],
    "replicas": 40,
    "laws": ["gaussian", "rademacher", "cexp", "gaussian"],
    "kappa": 5,
    "substeps": 10,
    "bootstrap_resamples": 200,
    "phi_replicas": 8,
    "master_seed": 7,
})

with tempfile.TemporaryDirectory() as out:
    summary = run_universality(cfg, out_dir=out)

print(f"{'law':<12} {'N':>4} {'sup-t gap':>10} {'stderr':>9} "
      f"{'noise floor':>12} {'W2 surrogate':>13}")
for g in summary.gaps:
    print(f"{g['law']:<12} {g['n']:>4} {g['sup_gap']:>10.4f} "
          f"{g['sup_gap_stderr']:>9.4f} {g['noise_floor']:>12.4f} "
          f"{g['w2_surrogate']:>13.4f}")

print("\nmedian change-of-measure tilt per (law, N); the universality")
print("mechanism needs this to shrink as N grows:")
for p in summary.phi_medians:
    print(f"  {p['law']:<12} N={p['n']:>3}  median phi = {p['phi_median']:.3f}")
