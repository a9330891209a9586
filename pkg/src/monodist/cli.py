"""Command-line pipeline: calibrate, predict, evaluate, synth, annotate.

Depth and detection models stay outside the process: a backend is either a
directory of precomputed files or a command template that emits the same
bytes on stdout.
"""
from __future__ import annotations

import argparse
import enum
import json
import os
import subprocess
import sys
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

from . import calib, detect, evaluate, maps, roi, synth
from .errors import BackendError, DataError, MonodistError

CONFIG_ENV_VAR = "MONODIST_CONFIG"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class BackendMode(enum.Enum):
    FILES = "files"
    PROCESS = "process"


@dataclass(frozen=True)
class BackendConfig:
    mode: BackendMode
    depth_dir: Path | None = None
    det_dir: Path | None = None
    depth_command: str | None = None
    det_command: str | None = None
    depth_kind: maps.MapKind = maps.MapKind.DISPARITY

    def validate(self):
        if self.mode is BackendMode.FILES:
            for name, d in (("depth_dir", self.depth_dir), ("det_dir", self.det_dir)):
                if d is None:
                    raise DataError(f"files backend requires {name}")
                if not d.is_dir():
                    raise DataError(f"{name} {d} is not a directory")
        else:
            if not self.depth_command or not self.det_command:
                raise DataError("process backend requires depth_command and det_command")

    def fetch_depth_bytes(self, image_id: str) -> bytes:
        if self.mode is BackendMode.FILES:
            path = self.depth_dir / f"{image_id}.pfm"
            if not path.is_file():
                raise BackendError(f"missing depth map {path}")
            return path.read_bytes()
        return _run_backend_command(self.depth_command, image_id)

    def fetch_detection_bytes(self, image_id: str) -> bytes:
        if self.mode is BackendMode.FILES:
            path = self.det_dir / f"{image_id}.det.json"
            if not path.is_file():
                raise BackendError(f"missing detections {path}")
            return path.read_bytes()
        return _run_backend_command(self.det_command, image_id)


def _run_backend_command(template: str, image_id: str) -> bytes:
    cmd = template.format(image_id=image_id)
    proc = subprocess.run(cmd, shell=True, capture_output=True)
    if proc.returncode != 0:
        raise BackendError(
            f"backend command {cmd!r} exited {proc.returncode}: "
            f"{proc.stderr.decode(errors='replace').strip()}"
        )
    return proc.stdout


@dataclass(frozen=True)
class PipelineConfig:
    backend: BackendConfig
    depth_range: maps.DepthRange = field(default_factory=maps.DepthRange)
    min_conf: float = detect.DEFAULT_MIN_CONFIDENCE
    iou_threshold: float = detect.DEFAULT_IOU_THRESHOLD
    calibration_model: calib.CalibrationModel | None = None
    eval_threshold: float = evaluate.DEFAULT_ACCURACY_THRESHOLD_M

    def __post_init__(self):
        if not 0.0 <= self.min_conf <= 1.0:
            raise DataError(f"min_conf {self.min_conf} outside [0, 1]")
        if not 0.0 < self.iou_threshold < 1.0:
            raise DataError(f"iou_threshold {self.iou_threshold} outside (0, 1)")
        if self.eval_threshold <= 0:
            raise DataError(f"eval_threshold must be positive, got {self.eval_threshold}")


def load_config(path: Path, overrides: dict | None = None) -> PipelineConfig:
    """Build a PipelineConfig from a JSON file; override values win over file values."""
    try:
        doc = json.loads(path.read_text())
    except OSError as e:
        raise DataError(f"cannot read config {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise DataError(f"malformed config JSON: {e}") from None
    if overrides:
        doc.update({k: v for k, v in overrides.items() if v is not None})

    try:
        b = doc["backend"]
        base = path.parent
        backend = BackendConfig(
            mode=BackendMode(b["mode"]),
            depth_dir=base / b["depth_dir"] if b.get("depth_dir") else None,
            det_dir=base / b["det_dir"] if b.get("det_dir") else None,
            depth_command=b.get("depth_command"),
            det_command=b.get("det_command"),
            depth_kind=maps.MapKind(b.get("depth_kind", "disparity")),
        )
        backend.validate()
        rng_doc = doc.get("depth_range", {})
        depth_range = maps.DepthRange(
            min_depth=float(rng_doc.get("min_m", 0.1)),
            max_depth=float(rng_doc.get("max_m", 100.0)),
        )
        model = None
        model_path = doc.get("calibration_model_path")
        if model_path:
            model = calib.deserialize_model((base / model_path).read_bytes())
        return PipelineConfig(
            backend=backend,
            depth_range=depth_range,
            min_conf=float(doc.get("min_conf", detect.DEFAULT_MIN_CONFIDENCE)),
            iou_threshold=float(doc.get("iou_threshold", detect.DEFAULT_IOU_THRESHOLD)),
            calibration_model=model,
            eval_threshold=float(
                doc.get("eval_threshold_m", evaluate.DEFAULT_ACCURACY_THRESHOLD_M)
            ),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"bad config field: {e}") from None
    except OSError as e:
        raise DataError(f"cannot read referenced file: {e}") from None


def predict_image(
    cfg: PipelineConfig, image_id: str
) -> tuple[list[roi.ObjectDistance], list[roi.RoiFailure]]:
    """Run the full fusion pipeline for one image.

    confidence filter -> NMS -> disparity->depth (unless the backend already
    emits metric depth) -> median pooling per box -> calibration when a
    model is configured.
    """
    depth_map = maps.read_pfm(
        cfg.backend.fetch_depth_bytes(image_id), kind=cfg.backend.depth_kind
    )
    dets = detect.parse_detections(cfg.backend.fetch_detection_bytes(image_id))
    dets = detect.nms(detect.filter_confidence(dets, cfg.min_conf), cfg.iou_threshold)
    if depth_map.kind is maps.MapKind.DISPARITY:
        depth_map = maps.disparity_to_depth(depth_map, cfg.depth_range)
    objects, failures = roi.measure_objects(depth_map, dets)
    if cfg.calibration_model is not None:
        objects = [
            roi.ObjectDistance(
                detection=od.detection,
                rev=od.rev,
                abs=calib.apply(cfg.calibration_model, od.rev),
            )
            for od in objects
        ]
    return objects, failures


def render_svg(
    image_id: str,
    objects: list[roi.ObjectDistance],
    image_size: tuple[int, int],
) -> str:
    """SVG overlay: one rect + one label per object, image pixel coordinates."""
    w, h = image_size
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f"  <!-- {escape(image_id)} -->",
    ]
    for od in objects:
        b = od.detection.bbox
        dist = od.abs if od.abs is not None else od.rev
        label = f"{od.detection.class_name} {dist:.2f} m"
        lines.append(
            f'  <rect x="{b.x0:g}" y="{b.y0:g}" width="{b.x1 - b.x0:g}" '
            f'height="{b.y1 - b.y0:g}" fill="none" stroke="lime" stroke-width="2"/>'
        )
        lines.append(
            f'  <text x="{b.x0:g}" y="{max(b.y0 - 4, 10):g}" fill="lime" '
            f'font-family="monospace" font-size="14">{escape(label)}</text>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _cmd_calibrate(args) -> int:
    samples = calib.read_samples_csv(Path(args.samples).read_bytes())
    model = calib.fit_quadratic(samples, h=args.camera_height)
    Path(args.out).write_bytes(calib.serialize_model(model))
    print(
        f"fitted c0={model.c0:.6g} c1={model.c1:.6g} c2={model.c2:.6g} "
        f"(h={model.h:g} m, rmse={model.fit_rmse:.6g} m, n={model.n_samples})"
    )
    return EXIT_OK


def _cmd_predict(args) -> int:
    config_path = args.config or os.environ.get(CONFIG_ENV_VAR)
    if not config_path:
        print(
            f"predict: no config given and {CONFIG_ENV_VAR} is unset", file=sys.stderr
        )
        return EXIT_USAGE
    overrides = {
        "min_conf": args.min_conf,
        "iou_threshold": args.iou_threshold,
        "calibration_model_path": args.calibration,
    }
    cfg = load_config(Path(config_path), overrides)
    objects, failures = predict_image(cfg, args.image_id)
    for od in objects:
        if od.abs is not None and od.abs < 0:
            print(
                f"warning: negative calibrated distance {od.abs:.3f} m for "
                f"{od.detection.class_name} (rev {od.rev:.3f} m)",
                file=sys.stderr,
            )
    for f in failures:
        print(f"warning: skipped {f.detection.class_name}: {f.reason}", file=sys.stderr)
    Path(args.out).write_bytes(roi.serialize_distances(args.image_id, objects, failures))
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    preds_by_image: dict[str, list[roi.ObjectDistance]] = {}
    gts_by_image: dict[str, list[evaluate.GroundTruthObject]] = {}
    for p in args.pred:
        image_id, objects = roi.parse_distances(Path(p).read_bytes())
        preds_by_image.setdefault(image_id, []).extend(objects)
    for g in args.gt:
        image_id, gts = evaluate.parse_ground_truth(Path(g).read_bytes())
        gts_by_image.setdefault(image_id, []).extend(gts)

    all_pairs: list[evaluate.MatchedPair] = []
    unmatched_preds = 0
    unmatched_gts = 0
    for image_id in sorted(preds_by_image.keys() | gts_by_image.keys()):
        pairs, up, ug = evaluate.match_objects(
            preds_by_image.get(image_id, []), gts_by_image.get(image_id, [])
        )
        all_pairs.extend(pairs)
        unmatched_preds += up
        unmatched_gts += ug
    if not all_pairs:
        print("evaluate: no matched prediction/ground-truth pairs", file=sys.stderr)
        return EXIT_DATA

    report = evaluate.build_report(all_pairs, unmatched_preds, unmatched_gts, args.threshold)
    Path(args.out).write_bytes(evaluate.serialize_report(report))
    print(evaluate.render_table(report), end="")
    return EXIT_OK


def _cmd_synth(args) -> int:
    spec = synth.parse_scene(Path(args.scene).read_bytes())
    disp_map, dets, gts = synth.render_scene(spec)
    prefix = Path(args.out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    image_id = prefix.name
    dets = detect.DetectionSet(
        image_id=image_id,
        image_width=dets.image_width,
        image_height=dets.image_height,
        detections=dets.detections,
    )
    Path(f"{prefix}.pfm").write_bytes(maps.write_pfm(disp_map))
    Path(f"{prefix}.det.json").write_bytes(detect.serialize_detections(dets))
    Path(f"{prefix}.gt.json").write_bytes(evaluate.serialize_ground_truth(image_id, gts))
    return EXIT_OK


def _cmd_annotate(args) -> int:
    try:
        w, h = (int(v) for v in args.image_size.lower().split("x"))
        if w <= 0 or h <= 0:
            raise ValueError
    except ValueError:
        print(f"annotate: bad --image-size {args.image_size!r}, expected WxH", file=sys.stderr)
        return EXIT_USAGE
    image_id, objects = roi.parse_distances(Path(args.distances).read_bytes())
    Path(args.out).write_text(render_svg(image_id, objects, (w, h)))
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="monodist",
        description="Fuse monocular depth maps with object detections into per-object distances.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="fit the quadratic REV->ABS model from samples")
    p.add_argument("--samples", required=True, help="CSV with header x_m,y_abs_m")
    p.add_argument("--camera-height", type=float, required=True, metavar="M")
    p.add_argument("--out", required=True, help="output .calib.json path")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("predict", help="run the fusion pipeline for one image")
    p.add_argument("--config", help=f"pipeline config JSON (default: ${CONFIG_ENV_VAR})")
    p.add_argument("--image-id", required=True)
    p.add_argument("--out", required=True, help="output .dist.json path")
    p.add_argument("--min-conf", type=float, help="override config min_conf")
    p.add_argument("--iou-threshold", type=float, help="override config iou_threshold")
    p.add_argument("--calibration", help="override config calibration model path")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions against ground truth")
    p.add_argument("--pred", nargs="+", required=True, help=".dist.json files")
    p.add_argument("--gt", nargs="+", required=True, help=".gt.json files")
    p.add_argument(
        "--threshold",
        type=float,
        default=evaluate.DEFAULT_ACCURACY_THRESHOLD_M,
        metavar="M",
    )
    p.add_argument("--out", required=True, help="output report JSON path")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("synth", help="render a synthetic scene to pipeline inputs")
    p.add_argument("--scene", required=True, help=".scene.json path")
    p.add_argument(
        "--out-prefix", required=True, help="writes <prefix>.pfm, .det.json, .gt.json"
    )
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("annotate", help="emit an SVG overlay of measured objects")
    p.add_argument("--distances", required=True, help=".dist.json path")
    p.add_argument("--image-size", required=True, metavar="WxH")
    p.add_argument("--out", required=True, help="output .svg path")
    p.set_defaults(func=_cmd_annotate)
    return parser


def dispatch(argv: list[str]) -> int:
    """Run one subcommand. Exit 0 on success, 1 on usage error, 2 on data error."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except MonodistError as e:
        print(f"monodist {args.command}: {e}", file=sys.stderr)
        return EXIT_DATA
    except OSError as e:
        print(f"monodist {args.command}: {e}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
