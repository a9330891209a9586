"""Per-object absolute distance from monocular depth maps and object detections."""

from .calib import CalibrationModel, CalibrationSample, fit_quadratic
from .detect import BoundingBox, Detection, DetectionSet, filter_confidence, iou, nms
from .evaluate import GroundTruthObject, MatchedPair, MetricsReport, match_objects
from .maps import DepthRange, MapKind, ScalarMap, disparity_to_depth, read_pfm, write_pfm
from .roi import IndexRect, ObjectDistance, measure_objects, median_depth, project_bbox
from .synth import SceneObject, SceneSpec, render_scene

__all__ = [
    "BoundingBox",
    "CalibrationModel",
    "CalibrationSample",
    "DepthRange",
    "Detection",
    "DetectionSet",
    "GroundTruthObject",
    "IndexRect",
    "MapKind",
    "MatchedPair",
    "MetricsReport",
    "ObjectDistance",
    "ScalarMap",
    "SceneObject",
    "SceneSpec",
    "disparity_to_depth",
    "filter_confidence",
    "fit_quadratic",
    "iou",
    "match_objects",
    "measure_objects",
    "median_depth",
    "nms",
    "project_bbox",
    "read_pfm",
    "render_scene",
    "write_pfm",
]
