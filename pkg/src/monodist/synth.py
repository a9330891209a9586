"""Synthetic scene generator: ideal disparity maps with known detections and ground truth.

Objects are fronto-parallel constant-depth rectangles, so the median depth
inside each box is exactly the object depth and the whole pipeline can be
checked analytically.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .detect import BoundingBox, Detection, DetectionSet
from .errors import SceneError
from .evaluate import GroundTruthObject
from .maps import DepthRange, MapKind, ScalarMap


@dataclass(frozen=True)
class SceneObject:
    class_name: str
    depth: float
    bbox: BoundingBox

    def __post_init__(self):
        object.__setattr__(self, "depth", float(self.depth))


@dataclass(frozen=True)
class SceneSpec:
    map_width: int
    map_height: int
    background_depth: float
    objects: tuple[SceneObject, ...] = ()
    depth_range: DepthRange = field(default_factory=DepthRange)
    noise_amplitude: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "background_depth", float(self.background_depth))
        object.__setattr__(self, "noise_amplitude", float(self.noise_amplitude))
        if self.map_width <= 0 or self.map_height <= 0:
            raise SceneError(f"map dimensions must be positive, got {self.map_width}x{self.map_height}")
        rng = self.depth_range
        if not rng.min_depth <= self.background_depth <= rng.max_depth:
            raise SceneError(f"background depth {self.background_depth} outside range")
        for obj in self.objects:
            if not rng.min_depth <= obj.depth <= rng.max_depth:
                raise SceneError(f"object depth {obj.depth} outside range")
            if obj.bbox.x1 > self.map_width or obj.bbox.y1 > self.map_height:
                raise SceneError(f"object box {obj.bbox} outside {self.map_width}x{self.map_height} map")
        if self.noise_amplitude < 0:
            raise SceneError(f"noise amplitude must be non-negative, got {self.noise_amplitude}")
        object.__setattr__(self, "objects", tuple(self.objects))


def render_scene(
    spec: SceneSpec,
) -> tuple[ScalarMap, DetectionSet, list[GroundTruthObject]]:
    """Render the scene's ideal disparity map, detections and ground truth.

    Each pixel's disparity is the exact algebraic inverse of the
    disparity->depth transform for that pixel's depth; where boxes overlap
    the nearer object wins. Disparity is quantized to float32 to match the
    PFM interchange precision. Detections carry confidence 1.0.
    """
    depth = np.full((spec.map_height, spec.map_width), spec.background_depth, dtype=np.float64)
    # nearer objects painted last so they overwrite farther ones
    for obj in sorted(spec.objects, key=lambda o: -o.depth):
        c0 = int(math.floor(obj.bbox.x0))
        r0 = int(math.floor(obj.bbox.y0))
        c1 = int(math.ceil(obj.bbox.x1))
        r1 = int(math.ceil(obj.bbox.y1))
        depth[r0:r1, c0:c1] = obj.depth

    disparity = _depth_grid_to_disparity(depth, spec.depth_range)
    if spec.noise_amplitude > 0:
        rng = np.random.default_rng(spec.seed)
        disparity = disparity + rng.uniform(
            -spec.noise_amplitude, spec.noise_amplitude, size=disparity.shape
        )
    disparity = np.clip(disparity, 0.0, 1.0).astype(np.float32).astype(np.float64)

    disp_map = ScalarMap(
        width=spec.map_width, height=spec.map_height, kind=MapKind.DISPARITY, values=disparity
    )
    detections = DetectionSet(
        image_id="synthetic",
        image_width=spec.map_width,
        image_height=spec.map_height,
        detections=tuple(
            Detection(class_id=i, class_name=o.class_name, confidence=1.0, bbox=o.bbox)
            for i, o in enumerate(spec.objects)
        ),
    )
    gts = [
        GroundTruthObject(class_name=o.class_name, abs_distance=o.depth, bbox=o.bbox)
        for o in spec.objects
    ]
    return disp_map, detections, gts


def _depth_grid_to_disparity(depth: np.ndarray, rng: DepthRange) -> np.ndarray:
    min_disp = 1.0 / rng.max_depth
    max_disp = 1.0 / rng.min_depth
    return (1.0 / depth - min_disp) / (max_disp - min_disp)


def parse_scene(data: bytes | str) -> SceneSpec:
    """Parse the `.scene.json` format."""
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise SceneError(f"malformed scene JSON: {e}") from None
    try:
        rng_doc = doc.get("depth_range", {})
        depth_range = DepthRange(
            min_depth=float(rng_doc.get("min_m", 0.1)),
            max_depth=float(rng_doc.get("max_m", 100.0)),
        )
        objects = tuple(
            SceneObject(
                class_name=str(o["class_name"]),
                depth=float(o["depth_m"]),
                bbox=BoundingBox(*(float(v) for v in o["bbox"])),
            )
            for o in doc.get("objects", [])
        )
        return SceneSpec(
            map_width=int(doc["map_width"]),
            map_height=int(doc["map_height"]),
            background_depth=float(doc["background_depth_m"]),
            objects=objects,
            depth_range=depth_range,
            noise_amplitude=float(doc.get("noise_amplitude", 0.0)),
            seed=int(doc.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SceneError(f"missing or malformed field: {e}") from None


def serialize_scene(spec: SceneSpec) -> bytes:
    doc = {
        "map_width": spec.map_width,
        "map_height": spec.map_height,
        "background_depth_m": spec.background_depth,
        "depth_range": {"min_m": spec.depth_range.min_depth, "max_m": spec.depth_range.max_depth},
        "objects": [
            {
                "class_name": o.class_name,
                "depth_m": o.depth,
                "bbox": [o.bbox.x0, o.bbox.y0, o.bbox.x1, o.bbox.y1],
            }
            for o in spec.objects
        ],
        "noise_amplitude": spec.noise_amplitude,
        "seed": spec.seed,
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")
