"""
An isolated labour room is an M/G/1 queue
=========================================

Switching off every other patient stream and the assessment step leaves a
Poisson stream into one bed with uniform labour times.  Its simulated mean
wait should settle near the Pollaczek-Khinchine value.
"""

from phcsim import PHC1, PHC2, ScenarioConfig, run_experiment
from phcsim.predictors import predict_rst_steady

for name, fac in (("PHC1", PHC1), ("PHC2", PHC2)):
    iso = fac.isolated()
    rho = iso.labour_load
    cfg = ScenarioConfig(policy="none", replications=10, warmup_days=0, horizon_days=730,
                         facilities=(iso, iso))
    report = run_experiment(cfg, write=False).reports["none"]
    mean, hw = report.fields["phc1.mean_labour_wait"]
    pk = predict_rst_steady(rho, iso.labour).value
    print(f"{name}: load {rho:.3f}  simulated {mean:6.1f} +/- {hw:5.1f}  analytic {pk:6.1f}")

# Ten two-year replications still leave a half-width of five to fifteen
# percent depending on the seed.  The labour times are nearly deterministic
# but the Poisson arrivals are not.
