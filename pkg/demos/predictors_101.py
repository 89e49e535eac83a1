"""
Predicting the labour-room wait
===============================

Four ways to guess how long a childbirth patient will wait for the single
labour bed, compared on a few hand-built queue states.
"""

from phcsim.distributions import ServiceDistribution
from phcsim.predictors import LabourRoomState, predict, project_state, residual_mean

labour = ServiceDistribution.uniform(360, 600)
print(labour, "mean", labour.mean, "scv", round(labour.scv, 4))
print("expected remaining labour seen by a random arrival:", residual_mean(labour))

# A bed occupied for 100 minutes with one woman queued.  The clairvoyant
# fields hold what the simulation knows but a real clinic would not.
state = LabourRoomState(busy=True, t_e=100, queue_len=1,
                        actual_remaining=420.0, queued_services=(500.0,))

for mode in ("actual", "rst_state", "est"):
    print(f"{mode:>10}: {predict(mode, state, labour).value:7.1f} min")
print(f"{'rst_steady':>10}: {predict('rst_steady', state, labour, rho=1/3).value:7.1f} min (load 1/3)")

# The elapsed-time predictor caps its estimate of the current labour at the
# longest possible one, so a long-running labour is predicted to end soon.
for t_e in (0, 240, 480, 550, 600):
    s = LabourRoomState(True, t_e, 0, max(600 - t_e, 0), ())
    print(f"elapsed {t_e:3d}: w_est = {predict('est', s, labour).value:5.1f}")

# A diverted patient arrives an hour later, so the remote queue is rolled
# forward by the trip before predicting.
ahead = project_state(state, 60, labour)
print("after 60 min:", ahead.t_e, ahead.queue_len, predict("est", ahead, labour).value)
