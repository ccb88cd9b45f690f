"""Independent reference implementations used as test oracles.

Everything here is written the slow, obvious way (homogeneous matrices,
per-pixel loops, brute-force searches) and stays independent of the library
code paths it checks.
"""

import numpy as np


def project_homogeneous(points, camera, pose):
    """Projection via an explicit 3x4 matrix and homogeneous divide."""
    k = np.array(
        [[camera.fx, 0.0, camera.cx], [0.0, camera.fy, camera.cy], [0.0, 0.0, 1.0]]
    )
    rt = np.hstack([pose.rotation, pose.translation.reshape(3, 1)])
    p = k @ rt  # 3x4
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    homo = np.hstack([pts, np.ones((len(pts), 1))])
    proj = homo @ p.T
    z = proj[:, 2]
    return proj[:, :2] / z[:, None], z


def ray_triangle_t(origin, direction, v0, v1, v2, eps=1e-12):
    """Moeller-Trumbore; returns hit parameter t or None."""
    e1 = v1 - v0
    e2 = v2 - v0
    h = np.cross(direction, e2)
    a = float(np.dot(e1, h))
    if abs(a) < eps:
        return None
    f = 1.0 / a
    s = origin - v0
    u = f * float(np.dot(s, h))
    if u < -1e-12 or u > 1.0 + 1e-12:
        return None
    q = np.cross(s, e1)
    v = f * float(np.dot(direction, q))
    if v < -1e-12 or u + v > 1.0 + 1e-12:
        return None
    t = f * float(np.dot(e2, q))
    return t


def ray_occluded(origin, target, mesh, skip_margin=1e-6):
    """True when any mesh triangle blocks the segment origin -> target."""
    direction = target - origin
    seg_len = float(np.linalg.norm(direction))
    direction = direction / seg_len
    tri = mesh.triangles
    pos = mesh.positions
    for a, b, c in tri:
        t = ray_triangle_t(origin, direction, pos[a], pos[b], pos[c])
        if t is not None and skip_margin < t < seg_len - skip_margin:
            return True
    return False


def segment_hits_batch(origins, target, positions, triangles, skip_margin=1e-6):
    """Vectorized occlusion test for many segment origins to one target.

    Returns a boolean array: True where the segment to ``target`` crosses any
    triangle at parameter t in (skip_margin, len - skip_margin).
    """
    origins = np.asarray(origins, dtype=np.float64)
    dirs = target[None, :] - origins
    seg_len = np.linalg.norm(dirs, axis=1)
    dirs = dirs / seg_len[:, None]
    occluded = np.zeros(len(origins), dtype=bool)

    v0 = positions[triangles[:, 0]]
    e1 = positions[triangles[:, 1]] - v0
    e2 = positions[triangles[:, 2]] - v0
    for t_idx in range(len(triangles)):
        todo = ~occluded
        if not todo.any():
            break
        d = dirs[todo]
        o = origins[todo]
        h = np.cross(d, e2[t_idx])
        a = h @ e1[t_idx]
        ok = np.abs(a) > 1e-12
        f = np.where(ok, 1.0 / np.where(ok, a, 1.0), 0.0)
        s = o - v0[t_idx]
        u = f * np.einsum("ij,ij->i", s, h)
        q = np.cross(s, e1[t_idx])
        v = f * np.einsum("ij,ij->i", d, q)
        t = f * (q @ e2[t_idx])
        lens = seg_len[todo]
        hit = (
            ok
            & (u >= -1e-12)
            & (u <= 1.0 + 1e-12)
            & (v >= -1e-12)
            & (u + v <= 1.0 + 1e-12)
            & (t > skip_margin)
            & (t < lens - skip_margin)
        )
        idx = np.flatnonzero(todo)
        occluded[idx[hit]] = True
    return occluded


def naive_exact_distance_to_absent(present):
    """Exact Euclidean distance from each present texel to the nearest absent
    texel (quadratic search; small grids only). Absent texels get 0."""
    present = np.asarray(present, dtype=bool)
    h, w = present.shape
    absent = np.argwhere(~present)
    out = np.zeros((h, w))
    if len(absent) == 0:
        out[present] = np.inf
        return out
    for y in range(h):
        for x in range(w):
            if present[y, x]:
                d2 = (absent[:, 0] - y) ** 2 + (absent[:, 1] - x) ** 2
                out[y, x] = np.sqrt(d2.min())
    return out


def naive_disc_dilation(edge, radius):
    """Per-pixel check: within strict Euclidean ``radius`` of an edge pixel."""
    edge = np.asarray(edge, dtype=bool)
    h, w = edge.shape
    pts = np.argwhere(edge)
    invalid = np.zeros((h, w), dtype=bool)
    r2 = radius * radius
    for y in range(h):
        for x in range(w):
            if len(pts):
                d2 = (pts[:, 0] - y) ** 2 + (pts[:, 1] - x) ** 2
                invalid[y, x] = bool((d2 < r2).any())
    return invalid


def naive_luma_stats(image):
    """Scalar-loop luma mean/std (population), float64 accumulation."""
    img = np.asarray(image, dtype=np.float64)
    total = 0.0
    count = 0
    for row in img.reshape(-1, 3):
        total += 0.299 * row[0] + 0.587 * row[1] + 0.114 * row[2]
        count += 1
    mean = total / count
    sq = 0.0
    for row in img.reshape(-1, 3):
        y = 0.299 * row[0] + 0.587 * row[1] + 0.114 * row[2]
        sq += (y - mean) ** 2
    return mean, np.sqrt(sq / count)


def bilinear_reference(img, x, y):
    """Scalar clamp-to-edge bilinear lookup."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[:2]
    x = min(max(float(x), 0.0), w - 1.0)
    y = min(max(float(y), 0.0), h - 1.0)
    x0, y0 = int(np.floor(x)), int(np.floor(y))
    x1, y1 = min(x0 + 1, w - 1), min(y0 + 1, h - 1)
    ax, ay = x - x0, y - y0
    top = img[y0, x0] * (1 - ax) + img[y0, x1] * ax
    bot = img[y1, x0] * (1 - ax) + img[y1, x1] * ax
    return top * (1 - ay) + bot * ay


def resample_texture_reference(texture, uv):
    """Independent bilinear texture resampler over an array of UVs.

    ``uv`` has shape (..., 2); texel centers live at (i + 0.5) / n.
    """
    tex = np.asarray(texture, dtype=np.float64)
    n = tex.shape[0]
    uv = np.asarray(uv, dtype=np.float64)
    flat = uv.reshape(-1, 2)
    out = np.empty((len(flat), tex.shape[2]))
    for i, (u, v) in enumerate(flat):
        out[i] = bilinear_reference(tex, u * n - 0.5, v * n - 0.5)
    return out.reshape(uv.shape[:-1] + (tex.shape[2],))


def visibility_reference(mesh, camera, pose, depth_buffer, mask, texture_size):
    """Ray-cast validity oracle mirroring the texel rasterizer's gates.

    Same coverage rule and the same mask/frontface/in-frame gates, but the
    biased depth test is replaced by brute-force ray-triangle occlusion
    (segment from each texel's surface point to the camera center). Returns
    (oracle_valid, oracle_covered) boolean maps.
    """
    n = texture_size
    owner, bary = uv_coverage_reference(mesh, n)
    covered = owner >= 0
    oracle_valid = np.zeros((n, n), dtype=bool)
    if not covered.any():
        return oracle_valid, covered

    idx = np.argwhere(covered)
    tris = mesh.triangles[owner[covered]]
    w = bary[covered]
    pts = np.einsum("tk,tkc->tc", w, mesh.positions[tris])
    nrm = np.einsum("tk,tkc->tc", w, mesh.normals[tris])
    nrm /= np.maximum(np.linalg.norm(nrm, axis=1, keepdims=True), 1e-30)

    cam_center = pose.camera_center()
    view = cam_center[None, :] - pts
    view /= np.maximum(np.linalg.norm(view, axis=1, keepdims=True), 1e-30)
    front = np.einsum("tc,tc->t", nrm, view) > 0.0

    xy, z = project_homogeneous(pts, camera, pose)
    in_front = z > 1e-9
    in_frame = (
        in_front
        & (xy[:, 0] >= 0.0)
        & (xy[:, 0] <= camera.width - 1.0)
        & (xy[:, 1] >= 0.0)
        & (xy[:, 1] <= camera.height - 1.0)
    )

    fcam = depth_buffer.camera
    fxy, _ = project_homogeneous(pts, fcam, pose)
    px = np.floor(fxy[:, 0] + 0.5).astype(int)
    py = np.floor(fxy[:, 1] + 0.5).astype(int)
    in_buf = (px >= 0) & (px < fcam.width) & (py >= 0) & (py < fcam.height)
    mask_ok = np.zeros(len(pts), dtype=bool)
    mask_ok[in_buf] = mask.valid[py[in_buf], px[in_buf]]

    occluded = segment_hits_batch(pts, cam_center, mesh.positions, mesh.triangles,
                                  skip_margin=1e-6)
    ok = front & in_frame & in_buf & mask_ok & ~occluded
    oracle_valid[idx[:, 0], idx[:, 1]] = ok
    return oracle_valid, covered


def uv_coverage_reference(mesh, texture_size):
    """Clean-room texel->triangle assignment in UV space.

    Same conventions as the rasterizer (texel centers at integers after the
    uv * n - 0.5 scaling, positive-area rewind, canonically ordered edge
    coefficients, top-left rule, later triangles overwrite) but implemented
    as vectorized numpy per triangle. Returns an (n, n) int array of triangle
    indices, -1 where uncovered, plus barycentric weights (n, n, 3).
    """
    n = texture_size
    owner = np.full((n, n), -1, dtype=np.int64)
    bary = np.zeros((n, n, 3))
    grid = mesh.uvs * n - 0.5

    def edge_coeffs(a, b):
        (ax, ay), (bx, by) = a, b
        if (bx < ax) or (bx == ax and by < ay):
            (ax, ay), (bx, by), sgn = (bx, by), (ax, ay), -1.0
        else:
            sgn = 1.0
        return -(by - ay), (bx - ax), (by - ay) * ax - (bx - ax) * ay, sgn

    def top_left(d):
        return (d[1] == 0.0 and d[0] > 0.0) or d[1] < 0.0

    for t, tri in enumerate(mesh.triangles):
        p = [grid[i] for i in tri]
        area2 = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (
            p[2][0] - p[0][0]
        )
        if area2 == 0.0:
            continue
        order = (0, 1, 2) if area2 > 0 else (0, 2, 1)
        q = [p[i] for i in order]
        xmin = max(0, int(np.ceil(min(v[0] for v in q))))
        xmax = min(n - 1, int(np.floor(max(v[0] for v in q))))
        ymin = max(0, int(np.ceil(min(v[1] for v in q))))
        ymax = min(n - 1, int(np.floor(max(v[1] for v in q))))
        if xmin > xmax or ymin > ymax:
            continue
        xs, ys = np.meshgrid(
            np.arange(xmin, xmax + 1, dtype=np.float64),
            np.arange(ymin, ymax + 1, dtype=np.float64),
        )
        inside = np.ones(xs.shape, dtype=bool)
        evals = []
        for a, b in ((q[1], q[2]), (q[2], q[0]), (q[0], q[1])):
            ca, cb, cc, sgn = edge_coeffs(a, b)
            e = sgn * (ca * xs + (cb * ys + cc))
            tl = top_left((b[0] - a[0], b[1] - a[1]))
            inside &= (e > 0.0) | ((e == 0.0) & tl)
            evals.append(e)
        esum = evals[0] + evals[1] + evals[2]
        inside &= esum > 0
        yy, xx = np.nonzero(inside)
        owner[ymin + yy, xmin + xx] = t
        wsum = esum[inside]
        w = np.stack([ev[inside] / wsum for ev in evals], axis=-1)
        if area2 < 0:  # weights refer to the original vertex order
            w = w[:, [0, 2, 1]]
        bary[ymin + yy, xmin + xx] = w
    return owner, bary
