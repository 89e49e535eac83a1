"""Two-facility childbirth diversion simulator driven by real-time delay predictions."""

from .distributions import ServiceDistribution
from .diversion import Coordinator, DiversionDecision, DiversionPolicy, decide, enact
from .experiment import (
    ConfigError,
    ScenarioConfig,
    run_experiment,
    run_scenario,
    sensitivity_sweep,
    simulate,
)
from .facility import PHC1, PHC2, Patient, PatientClass, Phc, PhcConfig
from .kernel import Resource, ShiftCalendar, Simulation, StreamFactory
from .metrics import OutcomeReport, alpha, delta_rho, mape, occupancy, replicate_summary
from .predictors import (
    DelayPrediction,
    LabourRoomState,
    predict,
    predict_actual,
    predict_est,
    predict_rst_state,
    predict_rst_steady,
    project_state,
    residual_mean,
)

__version__ = "0.1.0"
