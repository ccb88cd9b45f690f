"""Synthetic scene generation: frames, poses, ground truth, and candidates.

Stands in for a camera plus pose tracker. Scenes are rendered with the
forward renderer, so they exercise exactly the image formation the pipeline
assumes; everything is deterministic given the seed.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SceneSpecError
from .imageops import save_image_u8, to_uint8
from .matcher import (
    DEFAULT_DISTANCES_M,
    HueTemplate,
    TemplatePose,
    load_template,
    make_template,
    sample_template_poses,
    save_template,
    stored_template_ids,
    template_view_direction,
)
from .primitives import make_primitive, orbit_poses, resolve_texture
from .raster import ColorRender, render_color
from .scene_io import (
    FRAME_PATTERN,
    Mesh,
    PinholeCamera,
    RigidPose,
    write_camera,
    write_mesh,
    write_poses,
)

logger = logging.getLogger(__name__)

DEFAULT_CAMERA = PinholeCamera(fx=525.0, fy=525.0, cx=319.5, cy=239.5, width=640, height=480)
DEFAULT_BACKGROUND = (0.5, 0.5, 0.5)  # mid gray: carries no reliable hue


@dataclass(frozen=True)
class InstanceSpec:
    """One object instance: its surface texture and world placement."""

    texture_id: str
    texture_spec: str
    offset: tuple[float, float, float] = (0.0, 0.0, 0.0)


@dataclass
class SceneSpec:
    """Description of a synthetic capture."""

    out_dir: Path
    primitive: str = "cube"
    primitive_kwargs: dict = field(default_factory=dict)
    frames: int = 12
    texture: str = "checkerboard:4"
    texture_px: int = 256
    camera: PinholeCamera = DEFAULT_CAMERA
    distance: float = 0.75
    elevation_deg: float = 25.0
    start_azimuth_deg: float = 0.0
    seed: int = 0
    instances: list[InstanceSpec] | None = None
    spurious_fraction: float = 0.0
    background: tuple[float, float, float] = DEFAULT_BACKGROUND
    emit_candidates: bool = True


@dataclass(frozen=True)
class ScenePaths:
    root: Path
    mesh: Path
    camera: Path
    poses: Path
    candidates: Path
    gt_instances: Path
    templates: Path
    gt_textures: dict[str, Path]


def instance_pose(camera_pose: RigidPose, offset) -> RigidPose:
    """World-to-camera pose of an object translated by ``offset`` in world."""
    off = np.asarray(offset, dtype=np.float64)
    return RigidPose(
        rotation=camera_pose.rotation,
        translation=camera_pose.rotation @ off + camera_pose.translation,
    )


def composite_renders(renders: list[ColorRender], background) -> np.ndarray:
    """Depth-composite several renders over a constant background."""
    if not renders:
        raise ValueError("nothing to composite")
    h, w = renders[0].image.shape[:2]
    out = np.empty((h, w, 3), dtype=np.float32)
    out[:] = np.asarray(background, dtype=np.float32)
    depth = np.stack([r.depth.denormalized() for r in renders])
    best = depth.argmin(axis=0)
    finite = np.isfinite(depth.min(axis=0))
    for k, render in enumerate(renders):
        pick = finite & (best == k) & render.coverage
        out[pick] = render.image[pick]
    return out


class TemplateBank:
    """Templates rendered on demand and cached on disk (the store format)."""

    def __init__(self, mesh: Mesh, camera: PinholeCamera, directory: Path,
                 poses: list[TemplatePose] | None = None):
        self.mesh = mesh
        self.camera = camera
        self.directory = Path(directory)
        self.poses = poses if poses is not None else sample_template_poses()
        self._cache: dict[int, HueTemplate] = {}
        self._on_disk = set(stored_template_ids(self.directory))
        # direction/distance lookup tables for nearest-template queries
        self.n_rolls = 7
        self.distances = np.array(DEFAULT_DISTANCES_M)
        n_dirs = len(self.poses) // (self.n_rolls * len(self.distances))
        self.dirs = np.stack(
            [
                template_view_direction(self.poses[i * self.n_rolls * len(self.distances)].pose)
                for i in range(n_dirs)
            ]
        )

    def get(self, template_id: int) -> HueTemplate:
        tpl = self._cache.get(template_id)
        if tpl is None:
            if template_id in self._on_disk:
                tpl = load_template(self.directory, template_id)
            else:
                tpl = make_template(self.mesh, self.camera, self.poses[template_id].pose)
                save_template(self.directory, template_id, tpl)
                self._on_disk.add(template_id)
            self._cache[template_id] = tpl
        return tpl

    def nearest_template_id(self, object_pose: RigidPose) -> int:
        """Template whose view direction, distance and roll best match a pose."""
        center = object_pose.camera_center()
        dist = float(np.linalg.norm(center))
        vdir = center / dist
        di = int(np.argmax(self.dirs @ vdir))
        ki = int(np.argmin(np.abs(self.distances - dist)))
        best_id, best_trace = -1, -np.inf
        for ri in range(self.n_rolls):
            tid = (di * self.n_rolls + ri) * len(self.distances) + ki
            tr = float(np.trace(self.poses[tid].pose.rotation @ object_pose.rotation.T))
            if tr > best_trace:
                best_trace, best_id = tr, tid
        return best_id

    def depth_bin(self, template_id: int) -> int:
        return template_id % len(self.distances)


def generate_synthetic_scene(spec: SceneSpec) -> ScenePaths:
    """Write a full synthetic capture to disk.

    Produces ``mesh.obj``, ``camera.txt``, ``poses.txt`` (the camera
    trajectory, doubling as the object pose of the instance at the origin),
    frames, per-instance ground-truth textures, ground-truth instance records
    and a detector-style candidate stream (real candidates first in score
    order, then any injected spurious ones). Byte-identical across runs for a
    fixed spec.
    """
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)

    mesh = make_primitive(spec.primitive, **spec.primitive_kwargs)
    write_mesh(mesh, out / "mesh.obj")
    write_camera(spec.camera, out / "camera.txt")

    instances = spec.instances
    if not instances:
        instances = [InstanceSpec(texture_id="main", texture_spec=spec.texture)]
    textures = {
        inst.texture_id: resolve_texture(inst.texture_spec, spec.texture_px, spec.seed)
        for inst in instances
    }
    gt_tex_paths: dict[str, Path] = {}
    for tid, tex in textures.items():
        name = "gt_texture.png" if len(instances) == 1 else f"gt_texture_{tid}.png"
        path = out / name
        save_image_u8(to_uint8(tex), path)
        gt_tex_paths[tid] = path

    cam_poses = orbit_poses(
        spec.frames,
        spec.distance,
        spec.elevation_deg,
        start_azimuth_deg=spec.start_azimuth_deg,
    )
    write_poses(np.stack([p.matrix() for p in cam_poses]) if cam_poses else np.zeros((0, 4, 4)),
                out / "poses.txt")

    bank = None
    if spec.emit_candidates and cam_poses:
        bank = TemplateBank(mesh, spec.camera, out / "templates")

    candidate_lines: list[str] = []
    gt_lines: list[str] = []
    object_center = mesh.bbox.mean(axis=0)  # origin for the builtin primitives
    for i, cam_pose in enumerate(cam_poses):
        renders = []
        frame_cands = []
        for inst in instances:
            pose_i = instance_pose(cam_pose, inst.offset)
            renders.append(render_color(mesh, textures[inst.texture_id], spec.camera, pose_i))
            center_cam = pose_i.transform(object_center)
            gt_lines.append(json.dumps({
                "frame": i,
                "texture_id": inst.texture_id,
                "pose": [float(v) for v in pose_i.matrix().ravel()],
                "center_cam": [float(v) for v in center_cam],
            }))
            if bank is not None:
                tid = bank.nearest_template_id(pose_i)
                tpl = bank.get(tid)
                cx = spec.camera.fx * center_cam[0] / center_cam[2] + spec.camera.cx
                cy = spec.camera.fy * center_cam[1] / center_cam[2] + spec.camera.cy
                frame_cands.append({
                    "frame": i,
                    "template_id": tid,
                    "x": float(cx - (tpl.width - 1) / 2.0),
                    "y": float(cy - (tpl.height - 1) / 2.0),
                    "score": float(rng.uniform(0.8, 1.0)),
                    "depth_bin": bank.depth_bin(tid),
                })
        frame = composite_renders(renders, spec.background)
        save_image_u8(to_uint8(frame), out / FRAME_PATTERN.format(i))

        if bank is not None and spec.spurious_fraction > 0.0:
            f = min(spec.spurious_fraction, 0.9)
            n_spurious = int(round(f / (1.0 - f) * len(frame_cands)))
            for _ in range(n_spurious):
                tid = int(rng.integers(0, len(bank.poses)))
                tpl = bank.get(tid)
                frame_cands.append({
                    "frame": i,
                    "template_id": tid,
                    "x": float(rng.uniform(0, spec.camera.width - 1)),
                    "y": float(rng.uniform(0, spec.camera.height - 1)),
                    "score": float(rng.uniform(0.1, 0.7)),
                    "depth_bin": bank.depth_bin(tid),
                })
        frame_cands.sort(key=lambda c: -c["score"])
        candidate_lines += [json.dumps(c) for c in frame_cands]
        logger.debug("synth frame %d: %d candidates", i, len(frame_cands))

    (out / "candidates.jsonl").write_text("\n".join(candidate_lines) + ("\n" if candidate_lines else ""))
    (out / "gt_instances.jsonl").write_text("\n".join(gt_lines) + ("\n" if gt_lines else ""))
    (out / "scene.json").write_text(json.dumps({
        "primitive": spec.primitive,
        "frames": spec.frames,
        "seed": spec.seed,
        "distance": spec.distance,
        "elevation_deg": spec.elevation_deg,
        "instances": [
            {"texture_id": inst.texture_id, "texture": inst.texture_spec,
             "offset": list(inst.offset)}
            for inst in instances
        ],
        "spurious_fraction": spec.spurious_fraction,
    }, indent=2) + "\n")

    return ScenePaths(
        root=out,
        mesh=out / "mesh.obj",
        camera=out / "camera.txt",
        poses=out / "poses.txt",
        candidates=out / "candidates.jsonl",
        gt_instances=out / "gt_instances.jsonl",
        templates=out / "templates",
        gt_textures=gt_tex_paths,
    )


def parse_instance_spec(text: str) -> InstanceSpec:
    """Parse ``texture_id=texture_spec@dx,dy,dz`` (offset optional)."""
    if "=" not in text:
        raise SceneSpecError(f"instance spec {text!r} must look like id=texture[@dx,dy,dz]")
    tid, rest = text.split("=", 1)
    offset = (0.0, 0.0, 0.0)
    if "@" in rest:
        rest, off_text = rest.rsplit("@", 1)
        parts = off_text.split(",")
        if len(parts) != 3:
            raise SceneSpecError(f"offset in {text!r} must be dx,dy,dz")
        offset = tuple(float(v) for v in parts)
    return InstanceSpec(texture_id=tid.strip(), texture_spec=rest.strip(), offset=offset)
