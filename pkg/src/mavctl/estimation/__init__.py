from .ekf import GlobalEkf, GlobalEkfConfig, LocalEkf, LocalEkfConfig
from .height import HeightConfig, HeightFilter
from .matcher import (
    MatcherConfig,
    ScanMatchResult,
    apply_transform,
    match_scans,
    scan_points,
)
from .pipeline import EstimationPipeline, PipelineConfig
from .preprocess import PreprocessedFrame, preprocess
from .state import VehicleState
from .velocity import VelocityConfig, VelocityFusion

__all__ = [
    "GlobalEkf",
    "GlobalEkfConfig",
    "LocalEkf",
    "LocalEkfConfig",
    "HeightConfig",
    "HeightFilter",
    "MatcherConfig",
    "ScanMatchResult",
    "apply_transform",
    "match_scans",
    "scan_points",
    "EstimationPipeline",
    "PipelineConfig",
    "PreprocessedFrame",
    "preprocess",
    "VehicleState",
    "VelocityConfig",
    "VelocityFusion",
]
