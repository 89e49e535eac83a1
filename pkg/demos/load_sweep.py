"""
Does the predictor ranking survive a heavier load?
==================================================

Halve the first clinic's mean time between childbirth arrivals and compare
predictor error at both loads.
"""

from phcsim import ScenarioConfig, sensitivity_sweep

cfg = ScenarioConfig(policy="rst_state,est", replications=5, seed=0, out_dir="sweep_out")
rows, _ = sensitivity_sweep(cfg, "ia_childbirth", [1440, 720], write=False)

for row in rows:
    print(f"mean interarrival {row['value']:6.0f} min:"
          f"  MAPE w_rst {row['rst_state.mape_rst_state_mean']:6.1f}%"
          f"  MAPE w_est {row['est.mape_est_mean']:6.1f}%"
          f"  alpha(est) {100 * row['est.alpha_mean']:5.1f}%")

# Doubling the second clinic's rate instead would push it past saturation
# (load 4/3) and the queue would grow without bound.
