"""Bounding-box projection onto the depth grid and median-pooled relative distance."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .detect import BoundingBox, Detection, DetectionSet
from .errors import DataError, DegenerateRoiError, DetectionFormatError
from .maps import MapKind, ScalarMap


@dataclass(frozen=True)
class IndexRect:
    """Half-open [col0, col1) x [row0, row1) region in map grid coordinates."""

    col0: int
    row0: int
    col1: int
    row1: int

    def __post_init__(self):
        if self.col0 < 0 or self.row0 < 0:
            raise DataError(f"negative rect index in {self}")
        if self.col0 >= self.col1 or self.row0 >= self.row1:
            raise DataError(f"empty rect {self}")


@dataclass(frozen=True)
class ObjectDistance:
    """A detection joined with its relative (REV) and, once calibrated, absolute (ABS) distance."""

    detection: Detection
    rev: float
    abs: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "rev", float(self.rev))
        if self.abs is not None:
            object.__setattr__(self, "abs", float(self.abs))
        if not (self.rev > 0 and math.isfinite(self.rev)):
            raise DataError(f"rev must be a positive finite distance, got {self.rev}")
        if self.abs is not None and not math.isfinite(self.abs):
            raise DataError(f"abs must be finite, got {self.abs}")


@dataclass(frozen=True)
class RoiFailure:
    """Per-object measurement failure; keeps batch evaluation going."""

    detection: Detection
    reason: str


def project_bbox(
    bbox: BoundingBox,
    image_dims: tuple[int, int],
    map_dims: tuple[int, int],
) -> IndexRect:
    """Map an image-space box to depth-grid indices.

    Coordinates are scaled by map_dim/image_dim, the near corner floored and
    the far corner ceiled so the rect is never empty for a valid box, then
    clamped to the grid.
    """
    iw, ih = image_dims
    mw, mh = map_dims
    if iw <= 0 or ih <= 0 or mw <= 0 or mh <= 0:
        raise DataError("image and map dimensions must be positive")
    sx = mw / iw
    sy = mh / ih
    col0 = max(0, math.floor(bbox.x0 * sx))
    row0 = max(0, math.floor(bbox.y0 * sy))
    col1 = min(mw, math.ceil(bbox.x1 * sx))
    row1 = min(mh, math.ceil(bbox.y1 * sy))
    if col0 >= col1 or row0 >= row1:
        raise DegenerateRoiError(
            f"bbox {bbox} projects to empty rect on a {mw}x{mh} grid"
        )
    return IndexRect(col0=col0, row0=row0, col1=col1, row1=row1)


def median_depth(depth: ScalarMap, rect: IndexRect) -> float:
    """Exact median of the depth values inside rect.

    Odd counts take the middle element; even counts the mean of the two
    middle elements.
    """
    if depth.kind is not MapKind.DEPTH:
        raise DataError(f"expected a depth map, got {depth.kind.value}")
    if rect.col1 > depth.width or rect.row1 > depth.height:
        raise DataError(f"rect {rect} exceeds map bounds {depth.width}x{depth.height}")
    window = depth.values[rect.row0 : rect.row1, rect.col0 : rect.col1]
    return float(np.median(window))


def measure_objects(
    depth: ScalarMap, dets: DetectionSet
) -> tuple[list[ObjectDistance], list[RoiFailure]]:
    """Compute the relative distance (REV) of every detection.

    REV is the median depth inside the detection's box projected onto the
    grid. Degenerate projections are recorded as failures, not raised, so a
    bad box never aborts the whole image.
    """
    results: list[ObjectDistance] = []
    failures: list[RoiFailure] = []
    image_dims = (dets.image_width, dets.image_height)
    map_dims = (depth.width, depth.height)
    for det in dets.detections:
        try:
            rect = project_bbox(det.bbox, image_dims, map_dims)
        except DegenerateRoiError as e:
            failures.append(RoiFailure(detection=det, reason=str(e)))
            continue
        results.append(ObjectDistance(detection=det, rev=median_depth(depth, rect)))
    return results, failures


def serialize_distances(
    image_id: str, objects: list[ObjectDistance], failures: list[RoiFailure] | None = None
) -> bytes:
    """Canonical `.dist.json` form."""
    doc = {
        "image": image_id,
        "objects": [
            {
                "class_name": od.detection.class_name,
                "confidence": od.detection.confidence,
                "bbox": [
                    od.detection.bbox.x0,
                    od.detection.bbox.y0,
                    od.detection.bbox.x1,
                    od.detection.bbox.y1,
                ],
                "rev_m": od.rev,
                "abs_m": od.abs,
            }
            for od in objects
        ],
    }
    if failures:
        doc["failures"] = [
            {
                "class_name": f.detection.class_name,
                "bbox": [
                    f.detection.bbox.x0,
                    f.detection.bbox.y0,
                    f.detection.bbox.x1,
                    f.detection.bbox.y1,
                ],
                "reason": f.reason,
            }
            for f in failures
        ]
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def parse_distances(data: bytes | str) -> tuple[str, list[ObjectDistance]]:
    """Parse `.dist.json` back into ObjectDistance records.

    The file does not carry class ids, so reconstructed detections use
    class_id 0; evaluation matches on class_name only.
    """
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise DetectionFormatError(f"malformed distances JSON: {e}") from None
    try:
        image = str(doc["image"])
        objects = []
        for o in doc["objects"]:
            bbox = BoundingBox(*(float(v) for v in o["bbox"]))
            det = Detection(
                class_id=0,
                class_name=str(o["class_name"]),
                confidence=float(o["confidence"]),
                bbox=bbox,
            )
            abs_m = o["abs_m"]
            objects.append(
                ObjectDistance(
                    detection=det,
                    rev=float(o["rev_m"]),
                    abs=None if abs_m is None else float(abs_m),
                )
            )
    except (KeyError, TypeError, ValueError) as e:
        raise DetectionFormatError(f"missing or malformed field: {e}") from None
    except DataError as e:
        raise DetectionFormatError(str(e)) from None
    return image, objects
