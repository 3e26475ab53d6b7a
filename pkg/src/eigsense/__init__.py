"""Eigenvalue-based spectrum sensing with overlapping sensor subgroups."""

__version__ = "0.1.0"

from .covariance import (
    CombinatorialMatrix,
    assemble_covariance_from_blocks,
    build_combinatorial,
    build_subgroups,
    combinatorial_covariance,
    eigvals_hermitian,
    sample_covariance,
    trace,
)
from .detectors import Decision, DetectorKind, decide, eme, glrt, mme, rlrt, statistic
from .errors import (
    ConfigError,
    DegenerateInputError,
    EigsenseError,
    NumericError,
    RankDeficiencyError,
    TrialError,
)
from .montecarlo import (
    CampaignConfig,
    RocCurve,
    SweepResult,
    auc_concordance,
    calibrate_threshold,
    estimate_pd,
    roc_curve,
    run_trials,
    sweep_overlap,
    sweep_snr,
)
from .signal_model import (
    ChannelModel,
    FieldMode,
    Hypothesis,
    ReceivedMatrix,
    ScenarioConfig,
    Stacking,
    gen_channel,
    gen_noise,
    gen_pu_signal,
    synthesize_received,
)
