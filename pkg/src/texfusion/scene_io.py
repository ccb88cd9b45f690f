"""Scene assets: meshes with UV atlases, cameras, poses, frame sequences.

All on-disk formats are defined here:

* ``mesh.obj``   -- Wavefront OBJ with ``v``/``vt``/``vn``/``f`` records, UVs mandatory.
* ``poses.txt``  -- one 4x4 row-major world-to-camera matrix per line (16 floats).
* ``camera.txt`` -- single line ``fx fy cx cy width height``.
* frames        -- ``frame_%06d.png`` 8-bit RGB.

Loaded objects are immutable after construction and safe to share across
threads for read-only access.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

from .errors import (
    DegenerateMeshError,
    MeshFormatError,
    MissingUVError,
    SequenceError,
)
from .imageops import load_image_u8

logger = logging.getLogger(__name__)

FRAME_PATTERN = "frame_{:06d}.png"
_FRAME_RE = re.compile(r"frame_(\d{6})\.png$")


class Vertex(NamedTuple):
    """One mesh vertex: position, unit normal, and texture-atlas coordinate."""

    position: np.ndarray
    normal: np.ndarray
    uv: np.ndarray


@dataclass(frozen=True)
class PinholeCamera:
    """Pinhole intrinsics; pixel coordinates have integer pixel centers."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if self.width < 1 or self.height < 1:
            raise ValueError("image size must be at least 1x1")


@dataclass(frozen=True)
class RigidPose:
    """World-to-camera transform; camera looks down +Z, image origin top-left."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)
        err = np.abs(r @ r.T - np.eye(3)).max()
        if err > 1e-6 or abs(np.linalg.det(r) - 1.0) > 1e-6:
            raise ValueError(
                f"rotation not orthonormal (err={err:.2e}); "
                "use orthonormalize_rotation() first"
            )

    def transform(self, points: np.ndarray) -> np.ndarray:
        """Map world-space points (..., 3) into camera space."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation.T + self.translation

    def camera_center(self) -> np.ndarray:
        """Camera origin expressed in world coordinates."""
        return -self.rotation.T @ self.translation

    def matrix(self) -> np.ndarray:
        """4x4 homogeneous world-to-camera matrix."""
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "RigidPose":
        m = np.asarray(m, dtype=np.float64).reshape(4, 4)
        return cls(rotation=m[:3, :3], translation=m[:3, 3])


def orthonormalize_rotation(r: np.ndarray) -> np.ndarray:
    """Project a near-rotation matrix onto SO(3) (nearest rotation, via SVD)."""
    u, _, vt = np.linalg.svd(np.asarray(r, dtype=np.float64).reshape(3, 3))
    d = np.sign(np.linalg.det(u @ vt))
    return u @ np.diag([1.0, 1.0, d]) @ vt


def look_at_pose(eye, target, up=(0.0, 0.0, 1.0)) -> RigidPose:
    """World-to-camera pose with the camera at ``eye`` looking at ``target``.

    Camera convention: +Z forward, +Y down (image origin top-left), so the
    world ``up`` direction maps to image-up. Falls back to (0, 1, 0) as up
    when the view direction is (anti)parallel to ``up``.
    """
    eye = np.asarray(eye, dtype=np.float64)
    fwd = np.asarray(target, dtype=np.float64) - eye
    norm = np.linalg.norm(fwd)
    if norm < 1e-12:
        raise ValueError("eye and target coincide")
    z = fwd / norm
    upv = np.asarray(up, dtype=np.float64)
    if abs(np.dot(z, upv)) > 0.999 * np.linalg.norm(upv):
        upv = np.array([0.0, 1.0, 0.0])
    x = np.cross(z, upv)
    x /= np.linalg.norm(x)
    y = np.cross(z, x)
    r = np.stack([x, y, z])
    return RigidPose(rotation=r, translation=-r @ eye)


@dataclass(frozen=True)
class Mesh:
    """Triangle mesh with per-vertex positions, unit normals, and UVs in [0,1]^2.

    ``diameter`` is the length of the axis-aligned bounding-box diagonal; this
    is the object-size scale used by the depth-discontinuity threshold.
    """

    positions: np.ndarray  # (V, 3) float64
    normals: np.ndarray    # (V, 3) float64, unit length
    uvs: np.ndarray        # (V, 2) float64 in [0, 1]
    triangles: np.ndarray  # (T, 3) int32
    bbox: np.ndarray = field(init=False)      # (2, 3): min, max corners
    diameter: float = field(init=False)

    def __post_init__(self):
        pos = np.ascontiguousarray(self.positions, dtype=np.float64).reshape(-1, 3)
        nrm = np.ascontiguousarray(self.normals, dtype=np.float64).reshape(-1, 3)
        uv = np.ascontiguousarray(self.uvs, dtype=np.float64).reshape(-1, 2)
        tri = np.ascontiguousarray(self.triangles, dtype=np.int32).reshape(-1, 3)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "normals", nrm)
        object.__setattr__(self, "uvs", uv)
        object.__setattr__(self, "triangles", tri)

        nv = len(pos)
        if len(nrm) != nv or len(uv) != nv:
            raise ValueError("positions, normals and uvs must have equal length")
        if nv == 0 or len(tri) == 0:
            raise DegenerateMeshError("mesh has no vertices or no triangles")
        if tri.min() < 0 or tri.max() >= nv:
            raise ValueError("triangle index out of range")
        if uv.min() < -1e-9 or uv.max() > 1.0 + 1e-9:
            raise ValueError("UV coordinates must lie in [0, 1]^2")
        lens = np.linalg.norm(nrm, axis=1)
        if np.abs(lens - 1.0).max() > 1e-4:
            raise ValueError("vertex normals must be unit length within 1e-4")

        lo = pos.min(axis=0)
        hi = pos.max(axis=0)
        diam = float(np.linalg.norm(hi - lo))
        if diam <= 0.0 and nv >= 2:
            raise DegenerateMeshError("all vertices coincide")
        object.__setattr__(self, "bbox", np.stack([lo, hi]))
        object.__setattr__(self, "diameter", diam)

    @property
    def num_vertices(self) -> int:
        return len(self.positions)

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)

    def vertex(self, i: int) -> Vertex:
        return Vertex(self.positions[i], self.normals[i], self.uvs[i])

    def bbox_corners(self) -> np.ndarray:
        """The 8 corners of the axis-aligned bounding box, shape (8, 3)."""
        lo, hi = self.bbox
        return np.array(
            [[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1]) for z in (lo[2], hi[2])]
        )


@dataclass(frozen=True)
class FrameRecord:
    """One posed RGB frame of a capture sequence."""

    image: np.ndarray  # (H, W, 3) uint8
    pose: RigidPose
    camera: PinholeCamera
    index: int

    def __post_init__(self):
        h, w = self.image.shape[:2]
        if (w, h) != (self.camera.width, self.camera.height):
            raise SequenceError(
                f"frame {self.index}: image is {w}x{h}, camera says "
                f"{self.camera.width}x{self.camera.height}"
            )


def compute_vertex_normals(positions: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Area-weighted per-vertex normals from face geometry, normalized."""
    pos = np.asarray(positions, dtype=np.float64)
    tri = np.asarray(triangles)
    a, b, c = pos[tri[:, 0]], pos[tri[:, 1]], pos[tri[:, 2]]
    face = np.cross(b - a, c - a)  # magnitude = 2 * area, so already area-weighted
    out = np.zeros_like(pos)
    for k in range(3):
        np.add.at(out, tri[:, k], face)
    lens = np.linalg.norm(out, axis=1, keepdims=True)
    ok = lens[:, 0] > 1e-20
    out[ok] /= lens[ok]
    out[~ok] = (0.0, 0.0, 1.0)  # isolated or fully degenerate vertex
    return out


def _parse_face_corner(token: str, line_no: int) -> tuple[int, int | None, int | None]:
    parts = token.split("/")
    try:
        vi = int(parts[0])
        ti = int(parts[1]) if len(parts) > 1 and parts[1] else None
        ni = int(parts[2]) if len(parts) > 2 and parts[2] else None
    except ValueError as exc:
        raise MeshFormatError(f"bad face corner {token!r}", line=line_no) from exc
    return vi, ti, ni


def load_mesh(path: str | Path) -> Mesh:
    """Load a Wavefront OBJ mesh; UVs are mandatory.

    Vertices reused with different ``vt``/``vn`` records are split into
    distinct vertex records so each vertex carries exactly one UV and one
    normal. Normals are computed from faces (area-weighted) when absent.
    Deterministic: identical bytes yield an identical Mesh.
    """
    path = Path(path)
    positions: list[tuple[float, float, float]] = []
    uvs: list[tuple[float, float]] = []
    normals: list[tuple[float, float, float]] = []
    corners: list[tuple[int, int | None, int | None]] = []
    faces: list[tuple[int, int, int]] = []  # indices into corners
    corner_index: dict[tuple[int, int | None, int | None], int] = {}

    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            cmd = parts[0]
            try:
                if cmd == "v" and len(parts) >= 4:
                    positions.append((float(parts[1]), float(parts[2]), float(parts[3])))
                elif cmd == "vt" and len(parts) >= 3:
                    uvs.append((float(parts[1]), float(parts[2])))
                elif cmd == "vn" and len(parts) >= 4:
                    normals.append((float(parts[1]), float(parts[2]), float(parts[3])))
                elif cmd == "f":
                    if len(parts) < 4:
                        raise MeshFormatError("face needs at least 3 corners", line=line_no)
                    face = [_parse_face_corner(tok, line_no) for tok in parts[1:]]
                    ids = []
                    for vi, ti, ni in face:
                        # OBJ indices are 1-based; negatives are relative.
                        vi = vi - 1 if vi > 0 else len(positions) + vi
                        ti = None if ti is None else (ti - 1 if ti > 0 else len(uvs) + ti)
                        ni = None if ni is None else (ni - 1 if ni > 0 else len(normals) + ni)
                        if ti is None:
                            raise MissingUVError(
                                "face corner has no texture coordinate; "
                                "meshes must arrive with a UV atlas",
                                line=line_no,
                            )
                        if not (0 <= vi < len(positions)):
                            raise MeshFormatError(f"vertex index {vi + 1} out of range", line=line_no)
                        if not (0 <= ti < len(uvs)):
                            raise MeshFormatError(f"uv index {ti + 1} out of range", line=line_no)
                        if ni is not None and not (0 <= ni < len(normals)):
                            raise MeshFormatError(f"normal index {ni + 1} out of range", line=line_no)
                        key = (vi, ti, ni)
                        idx = corner_index.get(key)
                        if idx is None:
                            idx = len(corners)
                            corner_index[key] = idx
                            corners.append(key)
                        ids.append(idx)
                    for k in range(1, len(ids) - 1):  # fan triangulation
                        faces.append((ids[0], ids[k], ids[k + 1]))
            except MeshFormatError:
                raise
            except ValueError as exc:
                raise MeshFormatError(str(exc), line=line_no) from exc

    if not faces:
        raise MeshFormatError(f"{path}: no faces found")
    if not uvs:
        raise MissingUVError(f"{path}: no 'vt' records; meshes must arrive with a UV atlas")

    pos = np.array([positions[vi] for vi, _, _ in corners], dtype=np.float64)
    uv = np.array([uvs[ti] for _, ti, _ in corners], dtype=np.float64)
    tri = np.array(faces, dtype=np.int32)

    if all(ni is not None for _, _, ni in corners) and normals:
        nrm = np.array([normals[ni] for _, _, ni in corners], dtype=np.float64)
        lens = np.linalg.norm(nrm, axis=1, keepdims=True)
        bad = lens[:, 0] <= 1e-20
        if bad.any():
            raise MeshFormatError("zero-length vertex normal in file")
        nrm = nrm / lens
    else:
        nrm = compute_vertex_normals(pos, tri)

    if np.linalg.norm(pos.max(axis=0) - pos.min(axis=0)) <= 0.0:
        raise DegenerateMeshError(f"{path}: all vertices coincide")
    return Mesh(positions=pos, normals=nrm, uvs=uv, triangles=tri)


def write_mesh(mesh: Mesh, path: str | Path) -> None:
    """Write a Mesh as OBJ (v/vt/vn records aligned 1:1, faces as v/vt/vn)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for p in mesh.positions:
            fh.write(f"v {p[0]:.10g} {p[1]:.10g} {p[2]:.10g}\n")
        for t in mesh.uvs:
            fh.write(f"vt {t[0]:.10g} {t[1]:.10g}\n")
        for n in mesh.normals:
            fh.write(f"vn {n[0]:.10g} {n[1]:.10g} {n[2]:.10g}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"f {a+1}/{a+1}/{a+1} {b+1}/{b+1}/{b+1} {c+1}/{c+1}/{c+1}\n")


def read_camera(path: str | Path) -> PinholeCamera:
    """Read ``camera.txt``: one line of ``fx fy cx cy width height``."""
    text = Path(path).read_text().split()
    if len(text) != 6:
        raise SequenceError(f"{path}: expected 6 values (fx fy cx cy width height)")
    fx, fy, cx, cy = (float(v) for v in text[:4])
    w, h = int(float(text[4])), int(float(text[5]))
    return PinholeCamera(fx=fx, fy=fy, cx=cx, cy=cy, width=w, height=h)


def write_camera(camera: PinholeCamera, path: str | Path) -> None:
    Path(path).write_text(
        f"{camera.fx:.10g} {camera.fy:.10g} {camera.cx:.10g} {camera.cy:.10g} "
        f"{camera.width} {camera.height}\n"
    )


def read_poses(path: str | Path) -> np.ndarray:
    """Read ``poses.txt`` into an (N, 4, 4) array of world-to-camera matrices."""
    if not Path(path).read_text().strip():
        return np.zeros((0, 4, 4))
    data = np.loadtxt(path, dtype=np.float64, ndmin=2)
    if data.shape[1] != 16:
        raise SequenceError(f"{path}: each line must hold 16 floats (row-major 4x4)")
    return data.reshape(-1, 4, 4)


def write_poses(matrices: np.ndarray, path: str | Path) -> None:
    arr = np.asarray(matrices, dtype=np.float64).reshape(-1, 16)
    with open(path, "w", encoding="utf-8") as fh:
        for row in arr:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def pose_from_row(matrix: np.ndarray, index: int = -1) -> RigidPose:
    """Build a RigidPose from a 4x4 matrix, fixing mild non-orthonormality.

    Rotations off by more than 1e-3 (max-abs of R R^T - I) are rejected;
    smaller deviations are projected to the nearest rotation. The projection
    is idempotent up to floating-point noise.
    """
    m = np.asarray(matrix, dtype=np.float64).reshape(4, 4)
    r = m[:3, :3]
    err = np.abs(r @ r.T - np.eye(3)).max()
    if err > 1e-3:
        raise SequenceError(f"pose {index}: rotation off-orthonormal by {err:.2e} (> 1e-3)")
    if err > 1e-6:
        logger.warning("pose %d: re-orthonormalizing rotation (err=%.2e)", index, err)
    r = orthonormalize_rotation(r)
    return RigidPose(rotation=r, translation=m[:3, 3])


def list_frame_paths(directory: str | Path) -> list[Path]:
    directory = Path(directory)
    found = {}
    for p in directory.iterdir():
        m = _FRAME_RE.match(p.name)
        if m:
            found[int(m.group(1))] = p
    return [found[k] for k in sorted(found)]


def load_sequence(directory: str | Path) -> Iterator[FrameRecord]:
    """Yield FrameRecords (in index order) from a sequence directory.

    The directory must contain ``camera.txt``, ``poses.txt`` and frames named
    ``frame_%06d.png``. Image count and pose count must match.
    """
    directory = Path(directory)
    camera = read_camera(directory / "camera.txt")
    matrices = read_poses(directory / "poses.txt")
    frame_paths = list_frame_paths(directory)
    if len(frame_paths) != len(matrices):
        raise SequenceError(
            f"{directory}: {len(frame_paths)} frames but {len(matrices)} poses"
        )
    for i, fp in enumerate(frame_paths):
        image = load_image_u8(fp)
        pose = pose_from_row(matrices[i], index=i)
        yield FrameRecord(image=image, pose=pose, camera=camera, index=i)
