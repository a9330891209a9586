"""Prediction/ground-truth matching and the distance metrics (RMSE, threshold accuracy)."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .detect import BoundingBox, iou
from .errors import DataError, DetectionFormatError
from .roi import ObjectDistance

MATCH_IOU_THRESHOLD = 0.5
DEFAULT_ACCURACY_THRESHOLD_M = 0.2


@dataclass(frozen=True)
class GroundTruthObject:
    class_name: str
    abs_distance: float
    bbox: BoundingBox | None = None

    def __post_init__(self):
        object.__setattr__(self, "abs_distance", float(self.abs_distance))
        if not (self.abs_distance > 0 and math.isfinite(self.abs_distance)):
            raise DataError(f"ground-truth distance must be positive, got {self.abs_distance}")


@dataclass(frozen=True)
class MatchedPair:
    class_name: str
    predicted: float
    truth: float

    def __post_init__(self):
        object.__setattr__(self, "predicted", float(self.predicted))
        object.__setattr__(self, "truth", float(self.truth))

    @property
    def error(self) -> float:
        return abs(self.predicted - self.truth)


@dataclass(frozen=True)
class MetricsReport:
    pairs: tuple[MatchedPair, ...]
    rmse: float
    accuracy: float
    threshold: float
    unmatched_predictions: int
    unmatched_truths: int


def predicted_distance(od: ObjectDistance) -> float:
    """The distance a prediction is scored on: calibrated ABS when present, else REV."""
    return od.abs if od.abs is not None else od.rev


def match_objects(
    preds: list[ObjectDistance], gts: list[GroundTruthObject]
) -> tuple[list[MatchedPair], int, int]:
    """Pair predictions with ground truth per class.

    With GT boxes: greedy max-IoU matching, pairs above 0.5 IoU taken in
    descending order. Without GT boxes: predictions sorted by box center-x
    are paired against the GT list order (ground truth listed left to
    right). Returns (pairs, unmatched predictions, unmatched truths);
    classes never cross and no pair is fabricated.
    """
    pairs: list[MatchedPair] = []
    used_preds: set[int] = set()
    used_gts: set[int] = set()

    classes = sorted(
        {od.detection.class_name for od in preds} | {gt.class_name for gt in gts}
    )
    for cls in classes:
        p_idx = [i for i, od in enumerate(preds) if od.detection.class_name == cls]
        g_idx = [j for j, gt in enumerate(gts) if gt.class_name == cls]
        if not p_idx or not g_idx:
            continue
        have_boxes = all(gts[j].bbox is not None for j in g_idx)
        if have_boxes:
            candidates = sorted(
                (
                    (iou(preds[i].detection.bbox, gts[j].bbox), i, j)
                    for i in p_idx
                    for j in g_idx
                ),
                key=lambda t: (-t[0], t[1], t[2]),
            )
            for overlap, i, j in candidates:
                if overlap <= MATCH_IOU_THRESHOLD:
                    break
                if i in used_preds or j in used_gts:
                    continue
                used_preds.add(i)
                used_gts.add(j)
                pairs.append(
                    MatchedPair(cls, predicted_distance(preds[i]), gts[j].abs_distance)
                )
        else:
            p_sorted = sorted(p_idx, key=lambda i: preds[i].detection.bbox.center_x)
            for i, j in zip(p_sorted, g_idx):
                used_preds.add(i)
                used_gts.add(j)
                pairs.append(
                    MatchedPair(cls, predicted_distance(preds[i]), gts[j].abs_distance)
                )

    unmatched_preds = len(preds) - len(used_preds)
    unmatched_gts = len(gts) - len(used_gts)
    return pairs, unmatched_preds, unmatched_gts


def rmse(pairs: list[MatchedPair]) -> float:
    if not pairs:
        raise DataError("rmse of an empty pair list is undefined")
    return math.sqrt(sum(p.error**2 for p in pairs) / len(pairs))


def threshold_accuracy(pairs: list[MatchedPair], t: float) -> float:
    """Fraction of pairs with error strictly below t."""
    if not pairs:
        raise DataError("accuracy of an empty pair list is undefined")
    if t <= 0:
        raise DataError(f"threshold must be positive, got {t}")
    return sum(1 for p in pairs if p.error < t) / len(pairs)


def build_report(
    pairs: list[MatchedPair],
    unmatched_predictions: int,
    unmatched_truths: int,
    t: float = DEFAULT_ACCURACY_THRESHOLD_M,
) -> MetricsReport:
    return MetricsReport(
        pairs=tuple(pairs),
        rmse=rmse(pairs),
        accuracy=threshold_accuracy(pairs, t),
        threshold=t,
        unmatched_predictions=unmatched_predictions,
        unmatched_truths=unmatched_truths,
    )


def parse_ground_truth(data: bytes | str) -> tuple[str, list[GroundTruthObject]]:
    """Parse the `.gt.json` format; bbox is optional per object."""
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise DetectionFormatError(f"malformed ground-truth JSON: {e}") from None
    try:
        image = str(doc["image"])
        objects = []
        for o in doc["objects"]:
            bbox = None
            if o.get("bbox") is not None:
                bbox = BoundingBox(*(float(v) for v in o["bbox"]))
            objects.append(
                GroundTruthObject(
                    class_name=str(o["class_name"]),
                    abs_distance=float(o["abs_m"]),
                    bbox=bbox,
                )
            )
    except (KeyError, TypeError, ValueError) as e:
        raise DetectionFormatError(f"missing or malformed field: {e}") from None
    except DataError as e:
        raise DetectionFormatError(str(e)) from None
    return image, objects


def serialize_ground_truth(image_id: str, gts: list[GroundTruthObject]) -> bytes:
    doc = {
        "image": image_id,
        "objects": [
            {
                "class_name": gt.class_name,
                "abs_m": gt.abs_distance,
                **(
                    {"bbox": [gt.bbox.x0, gt.bbox.y0, gt.bbox.x1, gt.bbox.y1]}
                    if gt.bbox is not None
                    else {}
                ),
            }
            for gt in gts
        ],
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def serialize_report(report: MetricsReport) -> bytes:
    doc = {
        "rmse_m": report.rmse,
        "accuracy": report.accuracy,
        "threshold_m": report.threshold,
        "unmatched_predictions": report.unmatched_predictions,
        "unmatched_truths": report.unmatched_truths,
        "pairs": [
            {
                "class_name": p.class_name,
                "truth_m": p.truth,
                "predicted_m": p.predicted,
                "error_m": p.error,
            }
            for p in report.pairs
        ],
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def render_table(report: MetricsReport) -> str:
    """Plain-text per-object table; values rounded to 2 decimals here only."""
    headers = ("Object", "Absolute distance (m)", "Predicted distance (m)", "Error (m)")
    rows = [
        (p.class_name, f"{p.truth:.2f}", f"{p.predicted:.2f}", f"{p.error:.2f}")
        for p in report.pairs
    ]
    widths = [
        max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
        for i, h in enumerate(headers)
    ]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for r in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    lines.append("")
    lines.append(
        f"RMSE: {report.rmse:.4f} m   accuracy(T={report.threshold:g} m): {report.accuracy:.4f}   "
        f"unmatched preds: {report.unmatched_predictions}   unmatched GT: {report.unmatched_truths}"
    )
    return "\n".join(lines) + "\n"
