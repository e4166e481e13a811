"""Vehicle velocimetry from push-broom satellite band offsets."""

from ._echovel import (
    BandTiming,
    CorrectionConfig,
    DroneCameraSpec,
    EchoDataset,
    EchoTrajectory,
    InvalidInput,
    IoError,
    OksConfig,
    RasterGrid,
    SceneOutput,
    VelocityEstimate,
    band_interval,
    correct_keypoints,
    dataset_from_json,
    dataset_to_json,
    describe,
    detect_h_maxima,
    drone_gsd,
    drone_velocity,
    estimate_velocity,
    evaluate,
    ks_two_sample,
    load_raster,
    normalize_band,
    oks,
    parse_dataset,
    pixel_to_world,
    render_scene,
    rmse_to_velocity_error,
    save_raster,
    world_to_pixel,
)

__all__ = [
    "BandTiming",
    "CorrectionConfig",
    "DroneCameraSpec",
    "EchoDataset",
    "EchoTrajectory",
    "InvalidInput",
    "IoError",
    "OksConfig",
    "RasterGrid",
    "SceneOutput",
    "VelocityEstimate",
    "band_interval",
    "correct_keypoints",
    "dataset_from_json",
    "dataset_to_json",
    "describe",
    "detect_h_maxima",
    "drone_gsd",
    "drone_velocity",
    "estimate_velocity",
    "evaluate",
    "ks_two_sample",
    "load_raster",
    "normalize_band",
    "oks",
    "parse_dataset",
    "pixel_to_world",
    "render_scene",
    "rmse_to_velocity_error",
    "save_raster",
    "world_to_pixel",
]

__version__ = "0.1.0"
