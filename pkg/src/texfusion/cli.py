"""Command-line interface: reconstruct, eval, synth, timings.

All outputs land under ``--out``. On failure a machine-readable error line
(`error: {...}` JSON) goes to stderr and the exit code is nonzero.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import TexfusionError
from .imageops import load_image_u8, to_float
from .matcher import InstanceHypothesis
from .pipeline import (
    PipelineConfig,
    format_timing_table,
    report_timings,
    run_detection_eval,
    run_reconstruction,
    summarize_timings,
)
from .scene_io import PinholeCamera
from .synth import SceneSpec, generate_synthetic_scene, parse_instance_spec


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse a simple ``key = value`` config file ('#' starts a comment)."""
    values: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise TexfusionError(f"config line not in key=value form: {raw!r}")
        key, val = line.split("=", 1)
        values[key.strip().replace("-", "_")] = val.strip()
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="texfusion",
        description="Incremental texture reconstruction and hue-template instance detection",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    rec = sub.add_parser("reconstruct", help="reconstruct a texture from a posed sequence")
    rec.add_argument("--config", type=Path, help="key=value config file; flags override")
    rec.add_argument("--mesh", type=Path, help="mesh.obj with UV atlas")
    rec.add_argument("--sequence", type=Path, help="directory with frames/poses/camera")
    rec.add_argument("--out", type=Path, help="output directory")
    rec.add_argument("--texture-size", type=int, default=None)
    rec.add_argument("--merge", choices=("mean", "argmax"), default=None)
    rec.add_argument("--exposure", choices=("first-frame", "off"), default=None)
    rec.add_argument("--dump-debug", type=Path, default=None, metavar="DIR",
                     help="write per-frame depth/mask/uv PNG dumps")
    rec.add_argument("--dump-merge-maps", action="store_true")

    ev = sub.add_parser("eval", help="evaluate instance detection on a scene")
    ev.add_argument("--scene", type=Path, required=True,
                    help="scene directory (frames, camera.txt, gt_instances.jsonl)")
    ev.add_argument("--out", type=Path, required=True)
    ev.add_argument("--hypothesis", action="append", required=True, metavar="ID=TEXTURE.PNG",
                    help="instance hypothesis texture; repeatable")
    ev.add_argument("--candidates", type=Path, default=None,
                    help="candidates JSONL (default: scene/candidates.jsonl)")
    ev.add_argument("--mesh", type=Path, default=None)
    ev.add_argument("--templates", type=Path, default=None,
                    help="template store directory (default: scene/templates)")
    ev.add_argument("--radius", type=float, default=0.11, help="TP radius in scene units")
    ev.add_argument("--threshold", type=float, default=None,
                    help="inlier fraction threshold (default 0.70)")
    ev.add_argument("--max-candidates", type=int, default=30)

    sy = sub.add_parser("synth", help="generate a synthetic scene")
    sy.add_argument("--out", type=Path, required=True)
    sy.add_argument("--primitive", default="cube",
                    choices=("quad", "cube", "icosphere", "torus"))
    sy.add_argument("--size", type=float, default=None,
                    help="primitive scale (cube/quad size, sphere radius, torus major radius)")
    sy.add_argument("--texture", default="checkerboard:4",
                    help="texture spec: checkerboard[:n], noise, a named color, or a PNG path")
    sy.add_argument("--texture-px", type=int, default=256)
    sy.add_argument("--frames", type=int, default=12)
    sy.add_argument("--distance", type=float, default=0.75)
    sy.add_argument("--elevation", type=float, default=25.0)
    sy.add_argument("--camera", default=None, metavar="'fx fy cx cy W H'")
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--instance", action="append", default=None,
                    metavar="ID=TEXTURE[@dx,dy,dz]",
                    help="explicit instance; repeatable (default: one at the origin)")
    sy.add_argument("--spurious", type=float, default=0.0,
                    help="fraction of spurious candidates to inject")
    sy.add_argument("--no-candidates", action="store_true")

    tm = sub.add_parser("timings", help="summarize timings of a completed run")
    tm.add_argument("--run", type=Path, required=True, help="run output directory")
    tm.add_argument("--out", type=Path, default=None,
                    help="optional directory for the timing figure")
    return parser


def _cmd_reconstruct(args) -> int:
    values: dict[str, str] = {}
    if args.config:
        values = read_config_file(args.config)

    def pick(flag_value, key, cast, default=None):
        if flag_value is not None:
            return flag_value
        if key in values:
            return cast(values[key])
        return default

    mesh = pick(args.mesh, "mesh", Path)
    sequence = pick(args.sequence, "sequence", Path)
    out = pick(args.out, "out", Path)
    if mesh is None or sequence is None or out is None:
        raise TexfusionError("reconstruct needs --mesh, --sequence and --out (or a config file)")
    cfg = PipelineConfig(
        mesh_path=mesh,
        sequence_dir=sequence,
        out_dir=out,
        texture_size=pick(args.texture_size, "texture_size", int, 1024),
        merge_mode=pick(args.merge, "merge", str, "argmax"),
        exposure_mode=pick(args.exposure, "exposure", str, "first-frame"),
        dump_debug=pick(args.dump_debug, "dump_debug", Path),
        dump_merge_maps=args.dump_merge_maps or values.get("dump_merge_maps") == "true",
    )
    result = run_reconstruction(cfg)
    row = summarize_timings("accumulate", result.accumulate_ms)
    print(f"reconstructed {result.frames_processed} frames "
          f"({len(result.frames_skipped)} skipped) -> {out}")
    if row:
        print(format_timing_table([row]), end="")
    return 0


def _cmd_eval(args) -> int:
    hypotheses = []
    for spec in args.hypothesis:
        if "=" not in spec:
            raise TexfusionError(f"--hypothesis {spec!r} must be ID=TEXTURE.PNG")
        tid, path = spec.split("=", 1)
        hypotheses.append(InstanceHypothesis(tid.strip(), to_float(load_image_u8(path.strip()))))
    report = run_detection_eval(
        scene_dir=args.scene,
        hypotheses=hypotheses,
        candidates_path=args.candidates,
        mesh_path=args.mesh,
        templates_dir=args.templates,
        out_dir=args.out,
        radius_m=args.radius,
        threshold=args.threshold,
        max_candidates=args.max_candidates,
    )
    print(f"TPR {report.true_positive_rate:.3f}  "
          f"({report.correct_assignments}/{report.gt_instances} instances, "
          f"{report.assignments} assignments, {report.candidates} candidates)")
    return 0


def _cmd_synth(args) -> int:
    camera_kwargs = {}
    if args.camera:
        parts = args.camera.split()
        if len(parts) != 6:
            raise TexfusionError("--camera needs 'fx fy cx cy width height'")
        camera_kwargs["camera"] = PinholeCamera(
            fx=float(parts[0]), fy=float(parts[1]), cx=float(parts[2]), cy=float(parts[3]),
            width=int(parts[4]), height=int(parts[5]),
        )
    prim_kwargs = {}
    if args.size is not None:
        prim_kwargs = {
            "quad": {"size": args.size},
            "cube": {"size": args.size},
            "icosphere": {"radius": args.size},
            "torus": {"major_radius": args.size},
        }[args.primitive]
    instances = [parse_instance_spec(s) for s in args.instance] if args.instance else None
    spec = SceneSpec(
        out_dir=args.out,
        primitive=args.primitive,
        primitive_kwargs=prim_kwargs,
        frames=args.frames,
        texture=args.texture,
        texture_px=args.texture_px,
        distance=args.distance,
        elevation_deg=args.elevation,
        seed=args.seed,
        instances=instances,
        spurious_fraction=args.spurious,
        emit_candidates=not args.no_candidates,
        **camera_kwargs,
    )
    paths = generate_synthetic_scene(spec)
    print(f"scene written to {paths.root}")
    return 0


def _cmd_timings(args) -> int:
    rows = report_timings(args.run)
    print(format_timing_table(rows), end="")
    if args.out and rows:
        from . import report as report_mod

        args.out.mkdir(parents=True, exist_ok=True)
        acc = [r for r in rows if r.name == "accumulate"]
        lookup = [r for r in rows if r.name == "lookup"]
        report_mod.timings_figure(
            args.out / "timings.png",
            accumulate_ms=report_mod.read_timings_csv(args.run / "timings.csv")
            if acc else None,
            lookup_ms=report_mod.read_timings_csv(args.run / "lookup_ms.csv")
            if lookup else None,
        )
    return 0


_COMMANDS = {
    "reconstruct": _cmd_reconstruct,
    "eval": _cmd_eval,
    "synth": _cmd_synth,
    "timings": _cmd_timings,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except (TexfusionError, OSError, ValueError) as exc:
        print(
            "error: " + json.dumps({"type": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
