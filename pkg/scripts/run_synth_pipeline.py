#!/usr/bin/env python3
"""End-to-end demo on a synthetic scene.

Renders a scene, runs predict with an identity calibration, evaluates
against the scene's own ground truth, and writes an SVG overlay. All
artifacts land in the output directory (default ./demo_out).
"""
import argparse
import json
import sys
from pathlib import Path

from monodist import cli
from monodist.calib import CalibrationModel, serialize_model
from monodist.detect import BoundingBox
from monodist.synth import SceneObject, SceneSpec, serialize_scene


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="demo_out", type=Path)
    args = ap.parse_args()

    out = args.out_dir
    data = out / "data"
    data.mkdir(parents=True, exist_ok=True)

    spec = SceneSpec(
        map_width=1024,
        map_height=320,
        background_depth=100.0,
        objects=(
            SceneObject("car", 12.5, BoundingBox(100, 120, 320, 300)),
            SceneObject("person", 7.0, BoundingBox(420, 80, 500, 310)),
            SceneObject("chair", 3.25, BoundingBox(700, 200, 820, 310)),
        ),
    )
    (out / "scene.json").write_bytes(serialize_scene(spec))
    (out / "ident.calib.json").write_bytes(
        serialize_model(CalibrationModel(c0=0, c1=1, c2=0, h=1))
    )
    (out / "config.json").write_text(
        json.dumps(
            {
                "backend": {
                    "mode": "files",
                    "depth_dir": "data",
                    "det_dir": "data",
                    "depth_kind": "disparity",
                },
                "calibration_model_path": "ident.calib.json",
            },
            indent=2,
        )
    )

    steps = [
        ["synth", "--scene", str(out / "scene.json"), "--out-prefix", str(data / "demo")],
        ["predict", "--config", str(out / "config.json"), "--image-id", "demo",
         "--out", str(out / "demo.dist.json")],
        ["evaluate", "--pred", str(out / "demo.dist.json"),
         "--gt", str(data / "demo.gt.json"), "--threshold", "0.2",
         "--out", str(out / "report.json")],
        ["annotate", "--distances", str(out / "demo.dist.json"),
         "--image-size", "1024x320", "--out", str(out / "overlay.svg")],
    ]
    for argv in steps:
        print(f"$ monodist {' '.join(argv)}")
        rc = cli.dispatch(argv)
        if rc != 0:
            sys.exit(rc)
    print(f"\nartifacts in {out}/")


if __name__ == "__main__":
    main()
