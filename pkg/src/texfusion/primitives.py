"""Analytic test geometry and procedural textures.

Every primitive arrives with a usable UV atlas, which is what the rest of
the pipeline requires of real assets. The parameterizations are analytic so
tests can compare against closed forms.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import SceneSpecError
from .scene_io import Mesh, RigidPose, compute_vertex_normals, look_at_pose


def make_quad(size: float = 1.0, z: float = 0.0) -> Mesh:
    """Unit-style quad in the XY plane with the identity UV map.

    Spans [0, size]^2, normal -Z (faces a camera at smaller z looking +Z);
    uv = position / size.
    """
    s = float(size)
    pos = np.array([[0, 0, z], [s, 0, z], [s, s, z], [0, s, z]], dtype=np.float64)
    uv = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=np.float64)
    nrm = np.tile([0.0, 0.0, -1.0], (4, 1))
    tri = np.array([[0, 1, 2], [0, 2, 3]], dtype=np.int32)
    return Mesh(positions=pos, normals=nrm, uvs=uv, triangles=tri)


_CUBE_FACES = (
    # (axis, sign): +X, -X, +Y, -Y, +Z, -Z
    (0, 1.0), (0, -1.0), (1, 1.0), (1, -1.0), (2, 1.0), (2, -1.0),
)


def make_cube(size: float = 1.0, atlas_margin: float = 0.01) -> Mesh:
    """Axis-aligned cube centered at the origin, 24 vertices, 12 triangles.

    Each face owns one tile of a 3x2 UV atlas, inset by ``atlas_margin`` so
    bilinear lookups never bleed across faces.
    """
    h = 0.5 * float(size)
    positions = []
    normals = []
    uvs = []
    triangles = []
    for f, (axis, sign) in enumerate(_CUBE_FACES):
        u_axis = (axis + 1) % 3
        v_axis = (axis + 2) % 3
        normal = np.zeros(3)
        normal[axis] = sign
        col, row = f % 3, f // 3
        u0 = col / 3.0 + atlas_margin
        u1 = (col + 1) / 3.0 - atlas_margin
        v0 = row / 2.0 + atlas_margin
        v1 = (row + 1) / 2.0 - atlas_margin
        base = len(positions)
        for du, dv, uu, vv in ((-1, -1, u0, v0), (1, -1, u1, v0), (1, 1, u1, v1), (-1, 1, u0, v1)):
            p = np.zeros(3)
            p[axis] = sign * h
            p[u_axis] = du * h
            p[v_axis] = dv * h
            positions.append(p)
            normals.append(normal)
            uvs.append((uu, vv))
        triangles.append((base, base + 1, base + 2))
        triangles.append((base, base + 2, base + 3))
    return Mesh(
        positions=np.array(positions),
        normals=np.array(normals, dtype=np.float64),
        uvs=np.array(uvs),
        triangles=np.array(triangles, dtype=np.int32),
    )


def _icosahedron() -> tuple[np.ndarray, np.ndarray]:
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
            (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
            (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
        ],
        dtype=np.float64,
    )
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = np.array(
        [
            (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
            (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
            (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
            (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
        ],
        dtype=np.int64,
    )
    return verts, faces


def subdivided_sphere(subdivisions: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit icosphere: vertices (V, 3) on the sphere and faces (T, 3).

    Each subdivision splits every triangle in four, reprojecting edge
    midpoints to the sphere. Two subdivisions give 162 vertices / 320 faces.
    """
    verts, faces = _icosahedron()
    verts = list(verts)
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            idx = cache.get(key)
            if idx is None:
                m = verts[a] + verts[b]
                m /= np.linalg.norm(m)
                idx = len(verts)
                verts.append(m)
                cache[key] = idx
            return idx

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = np.array(new_faces, dtype=np.int64)
    return np.array(verts), faces


def make_icosphere(subdivisions: int = 2, radius: float = 1.0) -> Mesh:
    """Icosphere with an analytic spherical (longitude/latitude) atlas.

    Seam-crossing triangles get duplicated vertices shifted by one period and
    the whole u range is compressed back into [0, 1]; pole vertices are
    duplicated per triangle with the mean longitude of the opposite edge.
    Normals are exact (radial).
    """
    sverts, faces = subdivided_sphere(subdivisions)
    pole_eps = 1e-9

    corner_uv = np.empty((len(faces), 3, 2))
    for t, face in enumerate(faces):
        p = sverts[face]
        u = (np.arctan2(p[:, 1], p[:, 0]) / (2.0 * math.pi)) % 1.0
        v = np.arccos(np.clip(p[:, 2], -1.0, 1.0)) / math.pi
        at_pole = np.abs(np.abs(p[:, 2]) - 1.0) < pole_eps
        # unwrap the longitude seam within this triangle
        ref = u[~at_pole]
        if len(ref) and ref.max() - ref.min() > 0.5:
            u = np.where((u < 0.5) & ~at_pole, u + 1.0, u)
        if at_pole.any():
            others = u[~at_pole]
            u[at_pole] = others.mean() if len(others) else 0.0
        corner_uv[t, :, 0] = u
        corner_uv[t, :, 1] = v

    u_max = corner_uv[:, :, 0].max()
    if u_max > 1.0:
        corner_uv[:, :, 0] /= u_max

    # merge identical (vertex, uv) corners into shared vertex records
    records: dict[tuple[int, float, float], int] = {}
    positions: list[np.ndarray] = []
    uvs: list[tuple[float, float]] = []
    tris = np.empty_like(faces, dtype=np.int32)
    for t, face in enumerate(faces):
        for k in range(3):
            u, v = corner_uv[t, k]
            key = (int(face[k]), round(float(u), 12), round(float(v), 12))
            idx = records.get(key)
            if idx is None:
                idx = len(positions)
                records[key] = idx
                positions.append(sverts[face[k]] * radius)
                uvs.append((u, v))
            tris[t, k] = idx
    pos = np.array(positions)
    nrm = pos / np.linalg.norm(pos, axis=1, keepdims=True)
    return Mesh(positions=pos, normals=nrm, uvs=np.array(uvs), triangles=tris)


def make_torus(
    major_radius: float = 0.1,
    minor_radius: float = 0.04,
    major_segments: int = 20,
    minor_segments: int = 20,
) -> Mesh:
    """Torus around the Z axis with the natural toroidal atlas.

    The seam rows/columns are duplicated at u=1 / v=1, so UVs cover [0,1]^2
    exactly and bijectively. 2 * major_segments * minor_segments triangles.
    """
    nm, nn = major_segments, minor_segments
    i = np.arange(nm + 1)
    j = np.arange(nn + 1)
    uu, vv = np.meshgrid(i / nm, j / nn, indexing="ij")
    theta = 2.0 * math.pi * uu
    psi = 2.0 * math.pi * vv
    ring = major_radius + minor_radius * np.cos(psi)
    pos = np.stack(
        [ring * np.cos(theta), ring * np.sin(theta), minor_radius * np.sin(psi)], axis=-1
    ).reshape(-1, 3)
    nrm = np.stack(
        [np.cos(psi) * np.cos(theta), np.cos(psi) * np.sin(theta), np.sin(psi)], axis=-1
    ).reshape(-1, 3)
    uv = np.stack([uu, vv], axis=-1).reshape(-1, 2)

    tris = []
    stride = nn + 1
    for a in range(nm):
        for b in range(nn):
            i00 = a * stride + b
            i10 = (a + 1) * stride + b
            tris.append((i00, i10, i10 + 1))
            tris.append((i00, i10 + 1, i00 + 1))
    return Mesh(positions=pos, normals=nrm, uvs=uv, triangles=np.array(tris, dtype=np.int32))


PRIMITIVES = {
    "quad": make_quad,
    "cube": make_cube,
    "icosphere": make_icosphere,
    "torus": make_torus,
}


def make_primitive(name: str, **kwargs) -> Mesh:
    try:
        factory = PRIMITIVES[name]
    except KeyError:
        raise SceneSpecError(
            f"unknown primitive {name!r}; choose from {sorted(PRIMITIVES)}"
        ) from None
    return factory(**kwargs)


NAMED_COLORS = {
    "red": (1.0, 0.0, 0.0),
    "green": (0.0, 1.0, 0.0),
    "blue": (0.0, 0.0, 1.0),
    "white": (1.0, 1.0, 1.0),
    "black": (0.0, 0.0, 0.0),
    "gray": (0.5, 0.5, 0.5),
}


def checkerboard_texture(
    size: int = 256,
    squares: int = 4,
    color_a=(0.0, 0.0, 0.0),
    color_b=(1.0, 1.0, 1.0),
) -> np.ndarray:
    """(size, size, 3) float32 checkerboard with ``squares`` cells per side."""
    idx = np.arange(size)
    cell = (idx * squares) // size
    parity = (cell[:, None] + cell[None, :]) % 2
    tex = np.where(parity[..., None] == 0, color_a, color_b)
    return tex.astype(np.float32)


def noise_texture(size: int = 256, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.random((size, size, 3), dtype=np.float32)


def constant_texture(size: int, color) -> np.ndarray:
    tex = np.empty((size, size, 3), dtype=np.float32)
    tex[:] = np.asarray(color, dtype=np.float32)
    return tex


def resolve_texture(spec: str, size: int = 256, seed: int = 0) -> np.ndarray:
    """Turn a texture spec string into a float32 texture.

    Accepts ``checkerboard[:squares]``, ``noise``, a named color, or a path
    to an image file.
    """
    from .imageops import load_image_u8, to_float

    name, _, arg = spec.partition(":")
    if name == "checkerboard":
        squares = int(arg) if arg else 4
        return checkerboard_texture(size, squares=squares)
    if name == "noise":
        return noise_texture(size, seed=int(arg) if arg else seed)
    if name in NAMED_COLORS:
        return constant_texture(size, NAMED_COLORS[name])
    try:
        return to_float(load_image_u8(spec))
    except FileNotFoundError:
        raise SceneSpecError(
            f"unknown texture spec {spec!r} (not a builtin and not a readable file)"
        ) from None


def orbit_poses(
    count: int,
    distance: float,
    elevation_deg: float = 25.0,
    target=(0.0, 0.0, 0.0),
    start_azimuth_deg: float = 0.0,
) -> list[RigidPose]:
    """Camera ring around ``target`` at constant distance and elevation."""
    poses = []
    el = math.radians(elevation_deg)
    tgt = np.asarray(target, dtype=np.float64)
    for k in range(count):
        az = math.radians(start_azimuth_deg) + 2.0 * math.pi * k / max(count, 1)
        eye = tgt + distance * np.array(
            [math.cos(az) * math.cos(el), math.sin(az) * math.cos(el), math.sin(el)]
        )
        poses.append(look_at_pose(eye, tgt))
    return poses


__all__ = [
    "NAMED_COLORS",
    "PRIMITIVES",
    "checkerboard_texture",
    "constant_texture",
    "make_cube",
    "make_icosphere",
    "make_primitive",
    "make_quad",
    "make_torus",
    "noise_texture",
    "orbit_poses",
    "resolve_texture",
    "subdivided_sphere",
    "compute_vertex_normals",
]
