"""Closed-loop continuous myoelectric hand control, simulated end to end.

Pipeline: rectified EMG windows -> per-channel KDE reference banks ->
Wasserstein mixture unmixing -> antagonist resolution and smoothing ->
virtual hand plant -> haptic feedback rendering. A task harness with
simulated users reproduces the matching-task statistics, and a WebSocket
service streams the loop to interactive clients.
"""
from ._backend import backend_name
from .control import (
    ControllerConfig,
    ControllerState,
    Mode,
    PreparedRefs,
    StepResult,
    control_step,
    synthesize_references,
)
from .errors import (
    ConfigError,
    DimError,
    EmptySample,
    InsufficientCalibration,
    InvalidSignal,
    MyoloopError,
    NotCalibrated,
    TooFewSamples,
)
from .harness import (
    StudyConfig,
    TaskKind,
    TaskResult,
    TaskSpec,
    UserKind,
    UserModel,
    gen_targets,
    mae,
    mann_whitney_u,
    run_study,
    run_trial,
)
from .haptics import FeedbackFrame, decode_wrist, render, vibration_profile
from .plant import (
    HandState,
    NO_OBJECT,
    PlantConfig,
    VirtualObject,
    grasp_force,
    plant_advance,
    plant_step,
)
from .service import Engine, SessionConfig, replay, serve_forever
from .signal import (
    Dof,
    EmgWindow,
    KdeModel,
    MusclePattern,
    ReferenceActivity,
    default_pattern,
    fit_kde,
    load_references,
    record_reference,
    rectify,
    save_references,
    synth_window,
)
from .transport import distance, superpose, w1_1d

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ControllerConfig",
    "ControllerState",
    "DimError",
    "Dof",
    "EmgWindow",
    "EmptySample",
    "Engine",
    "FeedbackFrame",
    "HandState",
    "InsufficientCalibration",
    "InvalidSignal",
    "KdeModel",
    "Mode",
    "MusclePattern",
    "MyoloopError",
    "NO_OBJECT",
    "NotCalibrated",
    "PlantConfig",
    "PreparedRefs",
    "ReferenceActivity",
    "SessionConfig",
    "StepResult",
    "StudyConfig",
    "TaskKind",
    "TaskResult",
    "TaskSpec",
    "TooFewSamples",
    "UserKind",
    "UserModel",
    "VirtualObject",
    "backend_name",
    "control_step",
    "decode_wrist",
    "default_pattern",
    "distance",
    "fit_kde",
    "gen_targets",
    "grasp_force",
    "load_references",
    "mae",
    "mann_whitney_u",
    "plant_advance",
    "plant_step",
    "record_reference",
    "rectify",
    "render",
    "replay",
    "run_study",
    "run_trial",
    "save_references",
    "serve_forever",
    "superpose",
    "synth_window",
    "synthesize_references",
    "vibration_profile",
    "w1_1d",
    "__version__",
]
