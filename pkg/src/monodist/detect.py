"""Detection data model, JSON (de)serialization and detector postprocessing."""
from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .errors import DataError, DetectionFormatError

DEFAULT_MIN_CONFIDENCE = 0.25
DEFAULT_IOU_THRESHOLD = 0.45


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in image pixel coordinates, origin top-left."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        for name in ("x0", "y0", "x1", "y1"):
            object.__setattr__(self, name, float(getattr(self, name)))
        coords = (self.x0, self.y0, self.x1, self.y1)
        if not all(c == c and abs(c) != float("inf") for c in coords):
            raise DataError(f"non-finite bbox {coords}")
        if min(coords) < 0:
            raise DataError(f"negative bbox coordinate in {coords}")
        if self.x0 >= self.x1 or self.y0 >= self.y1:
            raise DataError(f"inverted or empty bbox {coords}")

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    @property
    def center_x(self) -> float:
        return 0.5 * (self.x0 + self.x1)


@dataclass(frozen=True)
class Detection:
    class_id: int
    class_name: str
    confidence: float
    bbox: BoundingBox

    def __post_init__(self):
        object.__setattr__(self, "confidence", float(self.confidence))
        if self.class_id < 0:
            raise DataError(f"negative class_id {self.class_id}")
        if not self.class_name:
            raise DataError("empty class_name")
        if not 0.0 <= self.confidence <= 1.0:
            raise DataError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class DetectionSet:
    """All detections for one image, in detector output order."""

    image_id: str
    image_width: int
    image_height: int
    detections: tuple[Detection, ...]

    def __post_init__(self):
        if self.image_width <= 0 or self.image_height <= 0:
            raise DataError(
                f"image dimensions must be positive, got {self.image_width}x{self.image_height}"
            )
        object.__setattr__(self, "detections", tuple(self.detections))


def _clamp_bbox(raw: list, width: int, height: int) -> BoundingBox:
    if not (isinstance(raw, list) and len(raw) == 4):
        raise DetectionFormatError(f"bbox must be a 4-element list, got {raw!r}")
    x0, y0, x1, y1 = (float(v) for v in raw)
    if x0 >= x1 or y0 >= y1:
        raise DetectionFormatError(f"inverted bbox {raw}")
    x0 = min(max(x0, 0.0), float(width))
    x1 = min(max(x1, 0.0), float(width))
    y0 = min(max(y0, 0.0), float(height))
    y1 = min(max(y1, 0.0), float(height))
    if x0 >= x1 or y0 >= y1:
        raise DetectionFormatError(f"bbox {raw} is empty after clamping to image bounds")
    return BoundingBox(x0, y0, x1, y1)


def parse_detections(data: bytes | str) -> DetectionSet:
    """Parse the `.det.json` format. Boxes are clamped to image bounds."""
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise DetectionFormatError(f"malformed detection JSON: {e}") from None
    try:
        image = doc["image"]
        width = int(doc["width"])
        height = int(doc["height"])
        raw_dets = doc["detections"]
    except (KeyError, TypeError, ValueError) as e:
        raise DetectionFormatError(f"missing or malformed field: {e}") from None

    dets = []
    for i, d in enumerate(raw_dets):
        try:
            conf = float(d["confidence"])
            if not 0.0 <= conf <= 1.0:
                raise DetectionFormatError(
                    f"detection {i}: confidence {conf} outside [0, 1]"
                )
            dets.append(
                Detection(
                    class_id=int(d["class_id"]),
                    class_name=str(d["class_name"]),
                    confidence=conf,
                    bbox=_clamp_bbox(d["bbox"], width, height),
                )
            )
        except (KeyError, TypeError, ValueError) as e:
            raise DetectionFormatError(f"detection {i}: {e}") from None
        except DataError as e:
            raise DetectionFormatError(f"detection {i}: {e}") from None
    try:
        return DetectionSet(str(image), width, height, tuple(dets))
    except DataError as e:
        raise DetectionFormatError(str(e)) from None


def serialize_detections(ds: DetectionSet) -> bytes:
    """Canonical `.det.json` form: fixed field order, shortest float repr."""
    doc = {
        "image": ds.image_id,
        "width": ds.image_width,
        "height": ds.image_height,
        "detections": [
            {
                "class_id": d.class_id,
                "class_name": d.class_name,
                "confidence": d.confidence,
                "bbox": [d.bbox.x0, d.bbox.y0, d.bbox.x1, d.bbox.y1],
            }
            for d in ds.detections
        ],
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection-over-union of two boxes; 0 when disjoint."""
    ix = min(a.x1, b.x1) - max(a.x0, b.x0)
    iy = min(a.y1, b.y1) - max(a.y0, b.y0)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def filter_confidence(ds: DetectionSet, min_conf: float) -> DetectionSet:
    """Keep detections with confidence >= min_conf, order preserved."""
    if not 0.0 <= min_conf <= 1.0:
        raise DataError(f"min_conf {min_conf} outside [0, 1]")
    kept = tuple(d for d in ds.detections if d.confidence >= min_conf)
    return replace(ds, detections=kept)


def nms(ds: DetectionSet, iou_threshold: float = DEFAULT_IOU_THRESHOLD) -> DetectionSet:
    """Greedy per-class non-maximum suppression.

    Boxes of different classes never suppress each other. Output is sorted by
    descending confidence; ties broken by original input index.
    """
    if not 0.0 < iou_threshold < 1.0:
        raise DataError(f"iou_threshold {iou_threshold} outside (0, 1)")
    order = sorted(
        range(len(ds.detections)), key=lambda i: (-ds.detections[i].confidence, i)
    )
    kept: list[int] = []
    for i in order:
        d = ds.detections[i]
        suppressed = any(
            ds.detections[k].class_id == d.class_id
            and iou(ds.detections[k].bbox, d.bbox) > iou_threshold
            for k in kept
        )
        if not suppressed:
            kept.append(i)
    return replace(ds, detections=tuple(ds.detections[i] for i in kept))
