"""Pipeline orchestration: reconstruction runs, detection evaluation, timings.

Frames are processed strictly in order (the accumulator is stateful); the
stages inside a frame are pure and could parallelize internally. Identical
config + assets + seed produce bit-identical textures and detection outputs
(wall-clock timing values naturally vary).
"""

from __future__ import annotations

import json
import logging
import statistics
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import SequenceError, TexfusionError
from .exposure import luma_stats, normalize_luma
from .fusion import (
    IncrementPatch,
    TextureAccumulator,
    blend_boundaries,
    extract_increment,
)
from .imageops import load_image_u8, save_image_u8, to_float, to_uint8
from .matcher import (
    Candidate,
    HueConfig,
    InstanceHypothesis,
    classify_instances,
    expected_hue,
    hue_descriptor,
)
from .raster import (
    RasterConfig,
    discontinuity_mask,
    focus_camera,
    rasterize_texture_space,
    render_biased_depth,
)
from .scene_io import (
    Mesh,
    PinholeCamera,
    list_frame_paths,
    load_mesh,
    load_sequence,
    read_camera,
)
from .synth import TemplateBank

logger = logging.getLogger(__name__)

MAX_CANDIDATES_PER_FRAME = 30
TPR_RADIUS_M = 0.11


def _power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass
class PipelineConfig:
    """Everything a reconstruction run needs."""

    mesh_path: Path
    sequence_dir: Path
    out_dir: Path | None = None
    texture_size: int = 1024
    merge_mode: str = "argmax"
    exposure_mode: str = "first-frame"  # or "off"
    raster: RasterConfig = field(default_factory=RasterConfig)
    hue: HueConfig = field(default_factory=HueConfig)
    dump_debug: Path | None = None
    dump_merge_maps: bool = False

    def __post_init__(self):
        if not (_power_of_two(self.texture_size) and 64 <= self.texture_size <= 4096):
            raise ValueError("texture_size must be a power of two in [64, 4096]")
        if self.merge_mode not in ("mean", "argmax"):
            raise ValueError("merge_mode must be 'mean' or 'argmax'")
        if self.exposure_mode not in ("first-frame", "off"):
            raise ValueError("exposure_mode must be 'first-frame' or 'off'")
        if self.raster.texture_size != self.texture_size:
            self.raster = replace(self.raster, texture_size=self.texture_size)


@dataclass
class ReconstructionResult:
    texture: np.ndarray        # (N, N, 3) float64
    score_map: np.ndarray      # (N, N) float64 (score sum or best score)
    merge_mode: str
    frames_processed: int
    frames_skipped: list[int]
    flat_exposure_frames: list[int]
    accumulate_ms: list[float]

    @property
    def observed(self) -> np.ndarray:
        return self.score_map > 0.0


@dataclass
class EvalReport:
    """Detection evaluation summary."""

    true_positive_rate: float
    frames: int
    candidates: int
    assignments: int
    correct_assignments: int
    gt_instances: int
    accumulate_ms: list[float] = field(default_factory=list)
    lookup_ms: list[float] = field(default_factory=list)

    def __post_init__(self):
        if not (0.0 <= self.true_positive_rate <= 1.0):
            raise ValueError("true_positive_rate must lie in [0, 1]")
        if any(t < 0 for t in self.accumulate_ms) or any(t < 0 for t in self.lookup_ms):
            raise ValueError("timings must be non-negative")


@dataclass
class FrameScratch:
    """Reusable per-frame buffers; avoids re-faulting tens of MB per frame."""

    samples: object = None
    patch: IncrementPatch | None = None


def accumulate_frame(
    mesh: Mesh,
    acc: TextureAccumulator,
    image_f32: np.ndarray,
    camera: PinholeCamera,
    pose,
    rcfg: RasterConfig,
    scratch: FrameScratch | None = None,
) -> IncrementPatch:
    """One frame's accumulate step: visibility, extraction, blending, merge."""
    fcam = focus_camera(camera, mesh, pose)
    depth = render_biased_depth(mesh, fcam, pose, rcfg)
    mask = discontinuity_mask(depth, mesh.diameter, rcfg)
    samples = rasterize_texture_space(
        mesh, camera, pose, depth, mask, rcfg,
        reuse=scratch.samples if scratch else None,
    )
    patch = extract_increment(
        image_f32, samples, reuse=scratch.patch if scratch else None
    )
    patch = blend_boundaries(patch)
    acc.merge(patch)
    if scratch is not None:
        scratch.samples = samples
        scratch.patch = patch
    return patch


def run_reconstruction(cfg: PipelineConfig) -> ReconstructionResult:
    """Reconstruct the surface texture from a posed frame sequence.

    Per frame: exposure normalization, camera focusing, biased depth render,
    discontinuity masking, texture-space sampling, increment extraction,
    boundary blending, merge. Frames that fail a raster-stage precondition
    are logged and skipped; loader errors propagate.
    """
    mesh = load_mesh(cfg.mesh_path)
    acc = TextureAccumulator(size=cfg.texture_size, mode=cfg.merge_mode)
    scratch = FrameScratch()
    ref_stats = None
    timings: list[float] = []
    skipped: list[int] = []
    flat_frames: list[int] = []
    processed = 0

    for frame in load_sequence(cfg.sequence_dir):
        t0 = time.perf_counter()
        image = to_float(frame.image)
        if cfg.exposure_mode == "first-frame":
            if ref_stats is None:
                ref_stats = luma_stats(image)
            else:
                image, flat = normalize_luma(image, ref_stats)
                if flat:
                    flat_frames.append(frame.index)
        try:
            patch = accumulate_frame(
                mesh, acc, image, frame.camera, frame.pose, cfg.raster, scratch
            )
        except TexfusionError as exc:
            logger.warning("frame %d skipped: %s", frame.index, exc)
            skipped.append(frame.index)
            continue
        timings.append((time.perf_counter() - t0) * 1000.0)
        processed += 1

        if cfg.dump_debug is not None:
            _dump_frame_debug(cfg.dump_debug, frame.index, mesh, frame.camera, frame.pose, cfg.raster)
        if cfg.dump_merge_maps and cfg.out_dir is not None:
            _dump_merge_map(Path(cfg.out_dir), frame.index, acc, patch)

    result = ReconstructionResult(
        texture=acc.color,
        score_map=acc.scalar,
        merge_mode=cfg.merge_mode,
        frames_processed=processed,
        frames_skipped=skipped,
        flat_exposure_frames=flat_frames,
        accumulate_ms=timings,
    )
    if cfg.out_dir is not None:
        write_reconstruction_outputs(Path(cfg.out_dir), result)
    return result


def write_reconstruction_outputs(out_dir: Path, result: ReconstructionResult) -> None:
    from . import report

    out_dir.mkdir(parents=True, exist_ok=True)
    save_image_u8(to_uint8(result.texture), out_dir / "texture.png")
    smax = float(result.score_map.max())
    score_vis = result.score_map / smax if smax > 0 else result.score_map
    save_image_u8(to_uint8(score_vis), out_dir / "score_map.png")
    report.write_timings_csv(out_dir / "timings.csv", "accumulate_ms", result.accumulate_ms)
    report.reconstruction_figure(out_dir / "reconstruction.png", result.texture, score_vis)
    report.timings_figure(out_dir / "timings.png", accumulate_ms=result.accumulate_ms)
    summary = {
        "merge_mode": result.merge_mode,
        "frames_processed": result.frames_processed,
        "frames_skipped": result.frames_skipped,
        "flat_exposure_frames": result.flat_exposure_frames,
        "observed_texels": int(result.observed.sum()),
        "score_map_scale": smax,
    }
    (out_dir / "run.json").write_text(json.dumps(summary, indent=2) + "\n")


def _dump_frame_debug(dump_dir, index, mesh, camera, pose, rcfg) -> None:
    """Depth, mask and UV rasters for one frame (recomputed; debug only)."""
    from .raster import render_color
    from .primitives import constant_texture

    dump_dir = Path(dump_dir)
    dump_dir.mkdir(parents=True, exist_ok=True)
    fcam = focus_camera(camera, mesh, pose)
    depth = render_biased_depth(mesh, fcam, pose, rcfg)
    mask = discontinuity_mask(depth, mesh.diameter, rcfg)
    vals = depth.values.copy()
    fin = np.isfinite(vals)
    vis = np.zeros_like(vals)
    if fin.any():
        lo, hi = vals[fin].min(), vals[fin].max()
        vis[fin] = 1.0 - (vals[fin] - lo) / max(hi - lo, 1e-12)
    save_image_u8(to_uint8(vis), dump_dir / f"depth_{index:06d}.png")
    save_image_u8(mask.valid.astype(np.uint8) * 255, dump_dir / f"mask_{index:06d}.png")
    render = render_color(mesh, constant_texture(16, (0.5, 0.5, 0.5)), camera, pose)
    uv_vis = np.zeros((*render.uv.shape[:2], 3), dtype=np.float32)
    uv_vis[..., 0] = render.uv[..., 0] * render.coverage
    uv_vis[..., 1] = render.uv[..., 1] * render.coverage
    save_image_u8(to_uint8(uv_vis), dump_dir / f"uv_{index:06d}.png")


def _dump_merge_map(out_dir: Path, index: int, acc: TextureAccumulator, patch: IncrementPatch) -> None:
    """Texture-space merge map: this frame's contributing texels tinted blue."""
    maps_dir = out_dir / "merge_maps"
    maps_dir.mkdir(parents=True, exist_ok=True)
    base = np.repeat(acc.color.mean(axis=2, keepdims=True), 3, axis=2).astype(np.float32)
    base[patch.present] = (0.15, 0.3, 1.0)
    save_image_u8(to_uint8(base), maps_dir / f"merge_{index:06d}.png")


# ---------------------------------------------------------------------------
# Detection evaluation
# ---------------------------------------------------------------------------


def load_candidates(path: str | Path) -> dict[int, list[Candidate]]:
    """Read a candidates JSONL file grouped by frame, in file order."""
    grouped: dict[int, list[Candidate]] = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        cand = Candidate(
            template_id=int(rec["template_id"]),
            x=float(rec["x"]),
            y=float(rec["y"]),
            score=float(rec.get("score", 0.0)),
            depth_bin=rec.get("depth_bin"),
        )
        grouped.setdefault(int(rec["frame"]), []).append(cand)
    return grouped


def load_ground_truth(path: str | Path) -> dict[int, list[dict]]:
    grouped: dict[int, list[dict]] = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        grouped.setdefault(int(rec["frame"]), []).append(rec)
    return grouped


def estimate_position(
    cand: Candidate, template_bank: TemplateBank, camera: PinholeCamera
) -> np.ndarray:
    """Camera-space object center implied by a candidate.

    The pixel ray through the pasted template's bbox center, walked out to
    the training distance of the candidate's depth bin (falling back to the
    template's own distance).
    """
    tpl = template_bank.get(cand.template_id)
    u = cand.x + (tpl.width - 1) / 2.0
    v = cand.y + (tpl.height - 1) / 2.0
    ray = np.array([(u - camera.cx) / camera.fx, (v - camera.cy) / camera.fy, 1.0])
    ray /= np.linalg.norm(ray)
    if cand.depth_bin is not None and 0 <= cand.depth_bin < len(template_bank.distances):
        dist = float(template_bank.distances[cand.depth_bin])
    else:
        dist = template_bank.poses[cand.template_id].distance
    return ray * dist


def run_detection_eval(
    scene_dir: str | Path,
    hypotheses: list[InstanceHypothesis],
    candidates_path: str | Path | None = None,
    mesh_path: str | Path | None = None,
    templates_dir: str | Path | None = None,
    out_dir: str | Path | None = None,
    radius_m: float = TPR_RADIUS_M,
    threshold: float | None = None,
    hue_cfg: HueConfig = HueConfig(),
    max_candidates: int = MAX_CANDIDATES_PER_FRAME,
) -> EvalReport:
    """Classify instances on every frame and score against ground truth.

    A detection is a true positive when its estimated 3D position lies within
    ``radius_m`` of the ground-truth instance center AND the assigned texture
    matches that instance. At most ``max_candidates`` detector candidates are
    consumed per frame. Ground truth and candidates must cover the same
    frames.
    """
    scene = Path(scene_dir)
    camera = read_camera(scene / "camera.txt")
    mesh = load_mesh(mesh_path or scene / "mesh.obj")
    candidates = load_candidates(candidates_path or scene / "candidates.jsonl")
    ground_truth = load_ground_truth(scene / "gt_instances.jsonl")
    frame_paths = list_frame_paths(scene)

    frame_ids = set(range(len(frame_paths)))
    if set(ground_truth) - frame_ids or set(candidates) - frame_ids:
        raise SequenceError("candidates/ground truth reference frames not on disk")

    bank = TemplateBank(mesh, camera, Path(templates_dir or scene / "templates"))
    lookup_ms: list[float] = []
    assignment_rows: list[dict] = []
    n_candidates = 0
    n_tp = 0  # an assignment is correct iff it is a true positive
    n_assign = 0
    n_gt = sum(len(v) for v in ground_truth.values())

    for frame_idx, frame_path in enumerate(frame_paths):
        cands = candidates.get(frame_idx, [])[:max_candidates]
        n_candidates += len(cands)
        if not cands:
            continue
        image = to_float(load_image_u8(frame_path))
        frame_hue = hue_descriptor(image, hue_cfg)
        templates = {c.template_id: bank.get(c.template_id) for c in cands}

        # warm the expected-hue cache, timing each template-texture lookup
        cache = {}
        for c in cands:
            for hyp in hypotheses:
                key = (c.template_id, hyp.texture_id)
                if key not in cache:
                    t0 = time.perf_counter()
                    cache[key] = expected_hue(templates[c.template_id], hyp, hue_cfg)
                    lookup_ms.append((time.perf_counter() - t0) * 1000.0)

        assignments = classify_instances(
            frame_hue, cands, templates, hypotheses,
            threshold=threshold, cfg=hue_cfg, expected_cache=cache,
        )

        gt_frame = ground_truth.get(frame_idx, [])
        claimed: set[int] = set()
        for assignment in assignments:
            n_assign += 1
            est = estimate_position(assignment.candidate, bank, camera)
            matched = False
            for g_idx, gt in enumerate(gt_frame):
                if g_idx in claimed or gt["texture_id"] != assignment.texture_id:
                    continue
                err = float(np.linalg.norm(est - np.asarray(gt["center_cam"])))
                if err <= radius_m:
                    claimed.add(g_idx)
                    matched = True
                    break
            n_tp += matched
            assignment_rows.append({
                "frame": frame_idx,
                "template_id": assignment.candidate.template_id,
                "x": assignment.candidate.x,
                "y": assignment.candidate.y,
                "texture_id": assignment.texture_id,
                "fraction": assignment.fraction,
                "position_cam": [float(v) for v in est],
                "true_positive": matched,
            })

    report_obj = EvalReport(
        true_positive_rate=(n_tp / n_gt) if n_gt else 0.0,
        frames=len(frame_paths),
        candidates=n_candidates,
        assignments=n_assign,
        correct_assignments=n_tp,
        gt_instances=n_gt,
        lookup_ms=lookup_ms,
    )
    if out_dir is not None:
        from . import report

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "assignments.jsonl", "w", encoding="utf-8") as fh:
            for row in assignment_rows:
                fh.write(json.dumps(row) + "\n")
        (out / "report.json").write_text(json.dumps(report_obj.__dict__, indent=2) + "\n")
        report.write_timings_csv(out / "lookup_ms.csv", "lookup_ms", lookup_ms)
        report.eval_figure(out / "report.png", report_obj)
    return report_obj


# ---------------------------------------------------------------------------
# Timing reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimingRow:
    name: str
    count: int
    mean_ms: float
    median_ms: float
    max_ms: float


def summarize_timings(name: str, values: list[float]) -> TimingRow | None:
    if not values:
        return None
    return TimingRow(
        name=name,
        count=len(values),
        mean_ms=statistics.fmean(values),
        median_ms=statistics.median(values),
        max_ms=max(values),
    )


def report_timings(run_dir: str | Path) -> list[TimingRow]:
    """Timing table of a completed run directory (accumulate and lookup)."""
    from . import report

    run_dir = Path(run_dir)
    rows = []
    for name, filename in (("accumulate", "timings.csv"), ("lookup", "lookup_ms.csv")):
        path = run_dir / filename
        if path.exists():
            row = summarize_timings(name, report.read_timings_csv(path))
            if row:
                rows.append(row)
    return rows


def format_timing_table(rows: list[TimingRow]) -> str:
    if not rows:
        return "no timing data\n"
    lines = [f"{'step':<12} {'count':>6} {'mean ms':>10} {'median ms':>10} {'max ms':>10}"]
    for r in rows:
        lines.append(
            f"{r.name:<12} {r.count:>6} {r.mean_ms:>10.2f} {r.median_ms:>10.2f} {r.max_ms:>10.2f}"
        )
    return "\n".join(lines) + "\n"
