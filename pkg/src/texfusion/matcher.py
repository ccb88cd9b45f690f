"""Hue-template object instance recognition.

A detection template stores per-pixel texture coordinates of the object
projection instead of colors, so the expected appearance is produced by a
texture lookup at match time. Swapping the surface texture swaps the
expected colors without touching template geometry, which is what makes
multi-instance classification cheap: one template set, one texture per
instance hypothesis.

Hue alone cannot represent black or white, so those are remapped to blue
(240 deg) and yellow (60 deg) before comparison. The template store is
immutable once built; classifying independent frames may run in parallel,
but a single classification pass is sequential (hypothesis removal is
order-defined).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import cv2
import numpy as np

from .errors import ObjectNotVisibleError
from .imageops import sample_bilinear
from .primitives import constant_texture, subdivided_sphere
from .raster import render_color, uv_to_texel
from .scene_io import Mesh, PinholeCamera, RigidPose, look_at_pose

DEFAULT_DISTANCES_M = (0.65, 0.75, 0.85, 0.95, 1.05, 1.15)
DEFAULT_ROLLS_DEG = (-45.0, -30.0, -15.0, 0.0, 15.0, 30.0, 45.0)


@dataclass(frozen=True)
class HueConfig:
    """Thresholds of the hue descriptor and the inlier test.

    The black/white remap points are exact only at V=0 and (V=1, S=0), which
    real pixels never hit; these cutoffs widen them into usable bands.
    """

    v_black: float = 0.12
    v_white: float = 0.70
    s_white: float = 0.10
    s_min: float = 0.10
    inlier_deg: float = 54.0
    inlier_fraction: float = 0.70

    hue_black: float = 240.0  # blue
    hue_white: float = 60.0   # yellow


@dataclass(frozen=True)
class HueImage:
    """Per-pixel hue in [0, 360) plus a reliability flag."""

    hue: np.ndarray      # (H, W) float32, degrees
    defined: np.ndarray  # (H, W) bool

    @property
    def shape(self) -> tuple[int, int]:
        return self.hue.shape


def rgb_to_hsv(image: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized RGB [0,1] -> (H degrees in [0,360), S, V)."""
    img = np.asarray(image, dtype=np.float64)
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    v = np.maximum(np.maximum(r, g), b)
    c = v - np.minimum(np.minimum(r, g), b)
    s = np.divide(c, v, out=np.zeros_like(v), where=v > 0)

    with np.errstate(divide="ignore", invalid="ignore"):
        hr = np.mod((g - b) / c, 6.0)
        hg = (b - r) / c + 2.0
        hb = (r - g) / c + 4.0
    h = np.zeros_like(v)
    np.copyto(h, hr, where=(c > 0) & (v == r))
    np.copyto(h, hg, where=(c > 0) & (v == g) & (v != r))
    np.copyto(h, hb, where=(c > 0) & (v == b) & (v != r) & (v != g))
    return np.mod(h * 60.0, 360.0), s, v


def hue_descriptor(image: np.ndarray, cfg: HueConfig = HueConfig()) -> HueImage:
    """Hue image with black/white remapping.

    Dark pixels become blue, bright unsaturated pixels yellow; remaining
    pixels keep their HSV hue if saturated enough, otherwise they carry no
    reliable hue and are flagged undefined.
    """
    h, s, v = rgb_to_hsv(image)
    hue = np.zeros(h.shape, dtype=np.float32)
    defined = np.zeros(h.shape, dtype=bool)

    black = v < cfg.v_black
    white = ~black & (s < cfg.s_white) & (v > cfg.v_white)
    chroma = ~black & ~white & (s >= cfg.s_min)
    hue[black] = cfg.hue_black
    hue[white] = cfg.hue_white
    hue[chroma] = h[chroma]
    defined = black | white | chroma
    return HueImage(hue=hue, defined=defined)


def circular_hue_distance(a, b):
    """Shortest angular distance between hues in degrees, in [0, 180]."""
    d = np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)) % 360.0
    return np.minimum(d, 360.0 - d)


@dataclass(frozen=True)
class HueTemplate:
    """Texture-coordinate template cropped to the object's bounding box."""

    bbox: tuple[int, int, int, int]  # x0, y0, w, h in the training view
    uv_map: np.ndarray               # (h, w, 2) float32
    mask: np.ndarray                 # (h, w) bool
    pose: RigidPose
    camera: PinholeCamera

    @property
    def width(self) -> int:
        return self.mask.shape[1]

    @property
    def height(self) -> int:
        return self.mask.shape[0]


@dataclass(frozen=True)
class InstanceHypothesis:
    """A candidate surface appearance: an identifier plus its texture."""

    texture_id: str
    texture: np.ndarray  # (N, N, 3) float32

    def __post_init__(self):
        if min(self.texture.shape[:2]) < 16:
            raise ValueError("hypothesis texture must be at least 16 texels per side")


class Candidate(NamedTuple):
    """A detector hit: template and image position, in detector-score order."""

    template_id: int
    x: float
    y: float
    score: float = 0.0
    depth_bin: int | None = None


class InlierStats(NamedTuple):
    fraction: float
    counted: int
    inliers: int

    @property
    def degenerate(self) -> bool:
        return self.counted == 0


class Assignment(NamedTuple):
    candidate: Candidate
    texture_id: str
    fraction: float


def make_template(
    mesh: Mesh, camera: PinholeCamera, pose: RigidPose
) -> HueTemplate:
    """Render the view and keep its UV raster and coverage, cropped tight."""
    render = render_color(mesh, constant_texture(16, (0.5, 0.5, 0.5)), camera, pose)
    mask = render.coverage
    if not mask.any():
        raise ObjectNotVisibleError("object projects to zero pixels in this view")
    ys, xs = np.nonzero(mask)
    x0, x1 = int(xs.min()), int(xs.max()) + 1
    y0, y1 = int(ys.min()), int(ys.max()) + 1
    return HueTemplate(
        bbox=(x0, y0, x1 - x0, y1 - y0),
        uv_map=np.ascontiguousarray(render.uv[y0:y1, x0:x1]),
        mask=np.ascontiguousarray(mask[y0:y1, x0:x1]),
        pose=pose,
        camera=camera,
    )


def expected_hue(
    template: HueTemplate,
    hypothesis: InstanceHypothesis,
    cfg: HueConfig = HueConfig(),
) -> HueImage:
    """Expected hue of the object under a hypothesis texture.

    Bilinear lookups at the template's texture coordinates produce expected
    colors, which then run through the same descriptor rules as the camera
    frame. Template geometry is untouched, so hypotheses can be swapped
    freely.
    """
    h, w = template.mask.shape
    hue = np.zeros((h, w), dtype=np.float32)
    defined = np.zeros((h, w), dtype=bool)
    if template.mask.any():
        uv = template.uv_map[template.mask]
        n = hypothesis.texture.shape[0]
        grid = uv_to_texel(uv, n)
        colors = sample_bilinear(hypothesis.texture, grid[:, 0], grid[:, 1])
        sub = hue_descriptor(colors.reshape(-1, 1, 3), cfg)
        hue[template.mask] = sub.hue[:, 0]
        defined[template.mask] = sub.defined[:, 0]
    return HueImage(hue=hue, defined=defined)


def color_inlier_fraction(
    observed: HueImage,
    expected: HueImage,
    mask: np.ndarray,
    cfg: HueConfig = HueConfig(),
) -> InlierStats:
    """Fraction of masked pixels whose hues agree within the threshold.

    Pixels undefined on either side are excluded from numerator and
    denominator. Zero counted pixels yield fraction 0 (degenerate).
    """
    if observed.shape != expected.shape or observed.shape != mask.shape:
        raise ValueError("observed, expected and mask must share dimensions")
    counted = mask & observed.defined & expected.defined
    n = int(counted.sum())
    if n == 0:
        return InlierStats(fraction=0.0, counted=0, inliers=0)
    dist = circular_hue_distance(observed.hue[counted], expected.hue[counted])
    inl = int((dist <= cfg.inlier_deg).sum())
    return InlierStats(fraction=inl / n, counted=n, inliers=inl)


def crop_hue(frame_hue: HueImage, x0: int, y0: int, w: int, h: int) -> HueImage:
    """Crop with clipping; pixels outside the frame come back undefined."""
    fh, fw = frame_hue.shape
    hue = np.zeros((h, w), dtype=np.float32)
    defined = np.zeros((h, w), dtype=bool)
    sx0, sy0 = max(x0, 0), max(y0, 0)
    sx1, sy1 = min(x0 + w, fw), min(y0 + h, fh)
    if sx1 > sx0 and sy1 > sy0:
        dx, dy = sx0 - x0, sy0 - y0
        hue[dy : dy + (sy1 - sy0), dx : dx + (sx1 - sx0)] = frame_hue.hue[sy0:sy1, sx0:sx1]
        defined[dy : dy + (sy1 - sy0), dx : dx + (sx1 - sx0)] = frame_hue.defined[
            sy0:sy1, sx0:sx1
        ]
    return HueImage(hue=hue, defined=defined)


def classify_instances(
    frame_hue: HueImage,
    candidates: Sequence[Candidate],
    templates: dict[int, HueTemplate],
    hypotheses: Sequence[InstanceHypothesis],
    threshold: float | None = None,
    cfg: HueConfig = HueConfig(),
    expected_cache: dict | None = None,
) -> list[Assignment]:
    """Assign instance hypotheses to detector candidates without repetition.

    Candidates are scanned in the given (detector-score) order. Each is
    tested against every still-unassigned hypothesis; the best inlier
    fraction at or above the threshold (default ``cfg.inlier_fraction``)
    wins and that hypothesis is removed. Scanning stops once every
    hypothesis is assigned. Deterministic given input order; each candidate
    and each hypothesis is used at most once.

    ``expected_cache`` (keyed by (template_id, texture_id)) carries expected
    hue images across calls; templates and hypotheses are immutable, so
    sharing it is safe.
    """
    if threshold is None:
        threshold = cfg.inlier_fraction
    remaining = list(hypotheses)
    if expected_cache is None:
        expected_cache = {}
    assignments: list[Assignment] = []

    for cand in candidates:
        if not remaining:
            break
        template = templates[cand.template_id]
        x0, y0 = int(round(cand.x)), int(round(cand.y))
        observed = crop_hue(frame_hue, x0, y0, template.width, template.height)

        best_idx = -1
        best_fraction = -1.0
        for idx, hyp in enumerate(remaining):
            key = (cand.template_id, hyp.texture_id)
            exp = expected_cache.get(key)
            if exp is None:
                exp = expected_hue(template, hyp, cfg)
                expected_cache[key] = exp
            stats = color_inlier_fraction(observed, exp, template.mask, cfg)
            if stats.fraction > best_fraction:
                best_fraction = stats.fraction
                best_idx = idx
        if best_idx >= 0 and best_fraction >= threshold:
            hyp = remaining.pop(best_idx)
            assignments.append(Assignment(cand, hyp.texture_id, best_fraction))
    return assignments


class TemplatePose(NamedTuple):
    pose: RigidPose
    distance: float


def _roll_about_view_axis(pose: RigidPose, roll_deg: float) -> RigidPose:
    c, s = math.cos(math.radians(roll_deg)), math.sin(math.radians(roll_deg))
    rz = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return RigidPose(rotation=rz @ pose.rotation, translation=rz @ pose.translation)


def sample_template_poses(
    upper_hemisphere: bool = True,
    distances: Iterable[float] = DEFAULT_DISTANCES_M,
    rolls_deg: Iterable[float] = DEFAULT_ROLLS_DEG,
    subdivisions: int = 2,
) -> list[TemplatePose]:
    """Training viewpoints: icosahedron vertices x in-plane rolls x distances.

    View directions are the vertices of a twice-subdivided icosahedron,
    optionally restricted to the closed upper hemisphere (89 directions);
    each is crossed with 7 rolls spanning [-45, 45] degrees and 6 camera
    distances. The default grid yields 3738 poses. Distances are in scene
    units (meters at desk scale).
    """
    verts, _ = subdivided_sphere(subdivisions)
    if upper_hemisphere:
        verts = verts[verts[:, 2] >= -1e-9]
    order = np.lexsort((verts[:, 0], verts[:, 1], verts[:, 2]))
    verts = verts[order]

    out: list[TemplatePose] = []
    for direction in verts:
        # Look-at rotation is independent of distance; with the object at the
        # origin the translation reduces to (0, 0, distance).
        base = look_at_pose(direction, (0.0, 0.0, 0.0))
        for roll in rolls_deg:
            rolled = _roll_about_view_axis(base, roll)
            for dist in distances:
                pose = RigidPose(
                    rotation=rolled.rotation, translation=np.array([0.0, 0.0, dist])
                )
                out.append(TemplatePose(pose=pose, distance=float(dist)))
    return out


def template_view_direction(pose: RigidPose) -> np.ndarray:
    """Unit direction from the object (origin) toward the camera."""
    c = pose.camera_center()
    return c / np.linalg.norm(c)


# ---------------------------------------------------------------------------
# Template store serialization: per template a 16-bit uv PNG (R=u, G=v),
# an 8-bit mask PNG, and a small metadata text file.
# ---------------------------------------------------------------------------

_UV_SCALE = 65535.0


def _template_paths(directory: Path, template_id: int) -> tuple[Path, Path, Path]:
    stem = f"template_{template_id:05d}"
    return (
        directory / f"{stem}_uv.png",
        directory / f"{stem}_mask.png",
        directory / f"{stem}_meta.txt",
    )


def save_template(directory: str | Path, template_id: int, template: HueTemplate) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    uv_path, mask_path, meta_path = _template_paths(directory, template_id)

    uv16 = np.clip(template.uv_map * _UV_SCALE + 0.5, 0, _UV_SCALE).astype(np.uint16)
    bgr = np.zeros((*template.mask.shape, 3), dtype=np.uint16)
    bgr[..., 2] = uv16[..., 0]  # R = u
    bgr[..., 1] = uv16[..., 1]  # G = v
    if not cv2.imwrite(str(uv_path), bgr):
        raise IOError(f"failed to write {uv_path}")
    cv2.imwrite(str(mask_path), template.mask.astype(np.uint8) * 255)

    x0, y0, w, h = template.bbox
    cam = template.camera
    lines = [
        f"bbox {x0} {y0} {w} {h}",
        "pose " + " ".join(f"{v:.17g}" for v in template.pose.matrix().ravel()),
        f"camera {cam.fx:.10g} {cam.fy:.10g} {cam.cx:.10g} {cam.cy:.10g} {cam.width} {cam.height}",
    ]
    meta_path.write_text("\n".join(lines) + "\n")


def load_template(directory: str | Path, template_id: int) -> HueTemplate:
    directory = Path(directory)
    uv_path, mask_path, meta_path = _template_paths(directory, template_id)
    if not meta_path.exists():
        raise KeyError(f"template {template_id} not found in {directory}")

    bgr = cv2.imread(str(uv_path), cv2.IMREAD_UNCHANGED)
    if bgr is None or bgr.dtype != np.uint16:
        raise IOError(f"bad uv map {uv_path}")
    uv = np.stack([bgr[..., 2], bgr[..., 1]], axis=-1).astype(np.float32) / _UV_SCALE
    mask = cv2.imread(str(mask_path), cv2.IMREAD_GRAYSCALE) > 127

    meta: dict[str, list[str]] = {}
    for line in meta_path.read_text().splitlines():
        parts = line.split()
        if parts:
            meta[parts[0]] = parts[1:]
    x0, y0, w, h = (int(v) for v in meta["bbox"])
    pose = RigidPose.from_matrix(np.array([float(v) for v in meta["pose"]]).reshape(4, 4))
    cf = meta["camera"]
    camera = PinholeCamera(
        fx=float(cf[0]), fy=float(cf[1]), cx=float(cf[2]), cy=float(cf[3]),
        width=int(cf[4]), height=int(cf[5]),
    )
    return HueTemplate(bbox=(x0, y0, w, h), uv_map=uv, mask=mask, pose=pose, camera=camera)


def stored_template_ids(directory: str | Path) -> list[int]:
    directory = Path(directory)
    if not directory.is_dir():
        return []
    ids = []
    for p in directory.glob("template_*_meta.txt"):
        ids.append(int(p.stem.split("_")[1]))
    return sorted(ids)
