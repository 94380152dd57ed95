"""Python bindings for the skitrack tracking core."""

from ._core import (
    BBox,
    ConfigError,
    CropSpec,
    DatasetError,
    EvaluationError,
    FrameDims,
    GeometryError,
    ScenarioError,
    SkitrackError,
    StepOutput,
    SweepResult,
    TrackerConfig,
    canonical_script,
    clip_to_frame,
    compute_sampling_weights,
    global_to_local,
    ground_truth,
    iou,
    local_to_global,
    make_crop,
    needs_reattempt,
    reattempt_factor,
    scenario_suite,
    sweep_thresholds,
    track_script,
    update_cause,
)

__all__ = [name for name in dir() if not name.startswith("_")]
