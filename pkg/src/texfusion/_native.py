"""Numba inner loops: rasterizers, patch extraction, merges, chamfer, masks.

Coordinate conventions shared by every kernel:

* pixel/texel centers sit at integer coordinates, y (row) grows downward;
* triangles are rewound so edge functions are non-negative inside;
* edge coefficients are computed from lexicographically ordered endpoints
  and evaluated with one fixed expression shape, so the two triangles
  sharing an edge see bit-identical magnitudes and a pixel exactly on the
  edge is claimed by exactly one of them (top-left rule).

These functions are deliberately free of Python objects; everything above
them stays in numpy. No fastmath: results must be IEEE-reproducible.
"""

import math

import numpy as np
from numba import njit

_EPS_Z = 1e-9


@njit(cache=True, inline="always")
def _edge_coeffs(ax, ay, bx, by):
    """Coefficients (A, B, C, s) with E(p) = s * (A*px + (B*py + C)).

    Computed on canonically ordered endpoints so shared edges evaluate
    bit-identically in both adjacent triangles.
    """
    if (bx < ax) or (bx == ax and by < ay):
        ax, ay, bx, by = bx, by, ax, ay
        s = -1.0
    else:
        s = 1.0
    a = -(by - ay)
    b = bx - ax
    c = (by - ay) * ax - (bx - ax) * ay
    return a, b, c, s


@njit(cache=True, inline="always")
def _top_left(dx, dy):
    # For triangles rewound to positive area in y-down coordinates: top edges
    # run left-to-right, left edges run upward.
    return (dy == 0.0 and dx > 0.0) or dy < 0.0


@njit(cache=True, inline="always")
def _row_span(fy, x0, y0, x1, y1, x2, y2):
    """Conservative [lo, hi] x-interval of the triangle on row ``fy``.

    Intersections of the row with the three edges, padded one pixel; the
    exact edge-function test still decides coverage per pixel.
    """
    lo = np.inf
    hi = -np.inf
    ax, ay, bx, by = x0, y0, x1, y1
    for k in range(3):
        if k == 1:
            ax, ay, bx, by = x1, y1, x2, y2
        elif k == 2:
            ax, ay, bx, by = x2, y2, x0, y0
        if (ay <= fy and fy <= by) or (by <= fy and fy <= ay):
            dy = by - ay
            if abs(dy) < 1e-12:
                lo = min(lo, ax, bx)
                hi = max(hi, ax, bx)
            else:
                x = ax + (fy - ay) * (bx - ax) / dy
                lo = min(lo, x)
                hi = max(hi, x)
    return lo - 1.0, hi + 1.0


@njit(cache=True)
def raster_depth(
    tris, px, py, vz, tri_ok, near, inv_range, r_bias, out_unbiased, out_biased
):
    """Z-buffered depth pass storing slope-scale biased normalized depth.

    The depth test runs on the unbiased perspective-correct depth; the stored
    value adds the per-triangle bias max(|dd/dx|, |dd/dy|) + r.
    """
    h, w = out_unbiased.shape
    for t in range(tris.shape[0]):
        if not tri_ok[t]:
            continue
        i0, i1, i2 = tris[t, 0], tris[t, 1], tris[t, 2]
        x0, y0 = px[i0], py[i0]
        x1, y1 = px[i1], py[i1]
        x2, y2 = px[i2], py[i2]
        area2 = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        if area2 == 0.0:
            continue
        if area2 < 0.0:
            i1, i2 = i2, i1
            x1, y1, x2, y2 = x2, y2, x1, y1
            area2 = -area2
        z0, z1, z2 = vz[i0], vz[i1], vz[i2]
        d0 = (z0 - near) * inv_range
        d1 = (z1 - near) * inv_range
        d2 = (z2 - near) * inv_range

        # per-triangle screen-space depth slope (plane through the vertices)
        ddx = ((d1 - d0) * (y2 - y0) - (d2 - d0) * (y1 - y0)) / area2
        ddy = ((d2 - d0) * (x1 - x0) - (d1 - d0) * (x2 - x0)) / area2
        bias = max(abs(ddx), abs(ddy)) + r_bias

        a0, b0, c0, s0 = _edge_coeffs(x1, y1, x2, y2)  # opposite vertex 0
        a1, b1, c1, s1 = _edge_coeffs(x2, y2, x0, y0)
        a2, b2, c2, s2 = _edge_coeffs(x0, y0, x1, y1)
        tl0 = _top_left(x2 - x1, y2 - y1)
        tl1 = _top_left(x0 - x2, y0 - y2)
        tl2 = _top_left(x1 - x0, y1 - y0)

        xmin = max(0, int(math.ceil(min(x0, x1, x2))))
        xmax = min(w - 1, int(math.floor(max(x0, x1, x2))))
        ymin = max(0, int(math.ceil(min(y0, y1, y2))))
        ymax = min(h - 1, int(math.floor(max(y0, y1, y2))))
        iz0, iz1, iz2 = 1.0 / z0, 1.0 / z1, 1.0 / z2

        for yy in range(ymin, ymax + 1):
            fy = float(yy)
            lo, hi = _row_span(fy, x0, y0, x1, y1, x2, y2)
            if not (lo <= hi):
                continue
            xa = max(xmin, int(math.ceil(lo)))
            xb = min(xmax, int(math.floor(hi)))
            r0 = b0 * fy + c0
            r1 = b1 * fy + c1
            r2 = b2 * fy + c2
            for xx in range(xa, xb + 1):
                fx = float(xx)
                e0 = s0 * (a0 * fx + r0)
                if e0 < 0.0 or (e0 == 0.0 and not tl0):
                    continue
                e1 = s1 * (a1 * fx + r1)
                if e1 < 0.0 or (e1 == 0.0 and not tl1):
                    continue
                e2 = s2 * (a2 * fx + r2)
                if e2 < 0.0 or (e2 == 0.0 and not tl2):
                    continue
                esum = e0 + e1 + e2
                if esum <= 0.0:
                    continue
                invz = (e0 * iz0 + e1 * iz1 + e2 * iz2) / esum
                z = 1.0 / invz
                d = (z - near) * inv_range
                if d < out_unbiased[yy, xx]:
                    out_unbiased[yy, xx] = d
                    out_biased[yy, xx] = d + bias


@njit(cache=True)
def raster_texels(
    tris,
    su,
    sv,
    xc,
    nc,
    tri_ok,
    fx,
    fy,
    cx,
    cy,
    img_w,
    img_h,
    ffx,
    ffy,
    fcx,
    fcy,
    gate,
    near,
    inv_range,
    out_xy,
    out_d,
    out_cos,
    out_valid,
):
    """Texture-space rasterization: iterate texels of each UV triangle.

    ``su``/``sv`` are UVs scaled to texel-center grid coordinates, ``xc``
    camera-space vertex positions, ``nc`` camera-space vertex normals.
    ``gate`` fuses the biased depth buffer with the discontinuity mask
    (-inf where masked out). For every texel that passes all gates (depth
    test at the nearest focused-camera pixel, frontface check, real-frame
    bounds) the record holds the continuous real-camera image coordinate,
    normalized depth, and incidence cosine.

    Returns (degenerate_uv_triangles, skipped_behind_camera).
    """
    n = out_d.shape[0]
    fh, fw = gate.shape
    degenerate = 0
    behind = 0
    wlim = img_w - 1.0
    hlim = img_h - 1.0
    for t in range(tris.shape[0]):
        if not tri_ok[t]:
            behind += 1
            continue
        i0, i1, i2 = tris[t, 0], tris[t, 1], tris[t, 2]
        nx0, ny0, nz0 = nc[i0, 0], nc[i0, 1], nc[i0, 2]
        nx1, ny1, nz1 = nc[i1, 0], nc[i1, 1], nc[i1, 2]
        nx2, ny2, nz2 = nc[i2, 0], nc[i2, 1], nc[i2, 2]
        px0, py0, pz0 = xc[i0, 0], xc[i0, 1], xc[i0, 2]
        px1, py1, pz1 = xc[i1, 0], xc[i1, 1], xc[i1, 2]
        px2, py2, pz2 = xc[i2, 0], xc[i2, 1], xc[i2, 2]

        # flat triangles (bitwise-equal normals) facing away at every vertex
        # face away everywhere: skip without visiting texels
        if nx0 == nx1 and nx0 == nx2 and ny0 == ny1 and ny0 == ny2 and nz0 == nz1 and nz0 == nz2:
            if (
                nx0 * px0 + ny0 * py0 + nz0 * pz0 >= 0.0
                and nx0 * px1 + ny0 * py1 + nz0 * pz1 >= 0.0
                and nx0 * px2 + ny0 * py2 + nz0 * pz2 >= 0.0
            ):
                continue

        x0, y0 = su[i0], sv[i0]
        x1, y1 = su[i1], sv[i1]
        x2, y2 = su[i2], sv[i2]
        area2 = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        if area2 == 0.0:
            degenerate += 1
            continue
        if area2 < 0.0:
            x1, y1, x2, y2 = x2, y2, x1, y1
            nx1, ny1, nz1, nx2, ny2, nz2 = nx2, ny2, nz2, nx1, ny1, nz1
            px1, py1, pz1, px2, py2, pz2 = px2, py2, pz2, px1, py1, pz1

        a0, b0, c0, s0 = _edge_coeffs(x1, y1, x2, y2)
        a1, b1, c1, s1 = _edge_coeffs(x2, y2, x0, y0)
        a2, b2, c2, s2 = _edge_coeffs(x0, y0, x1, y1)
        tl0 = _top_left(x2 - x1, y2 - y1)
        tl1 = _top_left(x0 - x2, y0 - y2)
        tl2 = _top_left(x1 - x0, y1 - y0)

        xmin = max(0, int(math.ceil(min(x0, x1, x2))))
        xmax = min(n - 1, int(math.floor(max(x0, x1, x2))))
        ymin = max(0, int(math.ceil(min(y0, y1, y2))))
        ymax = min(n - 1, int(math.floor(max(y0, y1, y2))))

        for tv in range(ymin, ymax + 1):
            fyy = float(tv)
            lo, hi = _row_span(fyy, x0, y0, x1, y1, x2, y2)
            if not (lo <= hi):
                continue
            xa = max(xmin, int(math.ceil(lo)))
            xb = min(xmax, int(math.floor(hi)))
            r0 = b0 * fyy + c0
            r1 = b1 * fyy + c1
            r2 = b2 * fyy + c2
            for tu in range(xa, xb + 1):
                fxx = float(tu)
                e0 = s0 * (a0 * fxx + r0)
                if e0 < 0.0 or (e0 == 0.0 and not tl0):
                    continue
                e1 = s1 * (a1 * fxx + r1)
                if e1 < 0.0 or (e1 == 0.0 and not tl1):
                    continue
                e2 = s2 * (a2 * fxx + r2)
                if e2 < 0.0 or (e2 == 0.0 and not tl2):
                    continue
                esum = e0 + e1 + e2
                if esum <= 0.0:
                    continue
                w0 = e0 / esum
                w1 = e1 / esum
                w2 = e2 / esum

                # camera-space surface point: UV barycentrics are affine on
                # the 3D triangle, so this is exact (and projecting it is the
                # perspective-correct image coordinate)
                pxc = w0 * px0 + w1 * px1 + w2 * px2
                pyc = w0 * py0 + w1 * py1 + w2 * py2
                pzc = w0 * pz0 + w1 * pz1 + w2 * pz2
                if pzc <= _EPS_Z:
                    out_valid[tv, tu] = 0
                    continue

                nx = w0 * nx0 + w1 * nx1 + w2 * nx2
                ny = w0 * ny0 + w1 * ny1 + w2 * ny2
                nz = w0 * nz0 + w1 * nz1 + w2 * nz2
                ndot = nx * pxc + ny * pyc + nz * pzc
                if ndot >= 0.0:  # backfacing: cos(alpha) <= 0
                    out_valid[tv, tu] = 0
                    continue

                invz = 1.0 / pzc
                d = (pzc - near) * inv_range
                xf = ffx * pxc * invz + fcx
                yf = ffy * pyc * invz + fcy
                pxi = int(math.floor(xf + 0.5))
                pyi = int(math.floor(yf + 0.5))
                if pxi < 0 or pxi >= fw or pyi < 0 or pyi >= fh:
                    out_valid[tv, tu] = 0
                    continue
                if not (d <= gate[pyi, pxi]):
                    out_valid[tv, tu] = 0
                    continue
                xr = fx * pxc * invz + cx
                yr = fy * pyc * invz + cy
                if xr < 0.0 or xr > wlim or yr < 0.0 or yr > hlim:
                    out_valid[tv, tu] = 0
                    continue
                nlen2 = nx * nx + ny * ny + nz * nz
                plen2 = pxc * pxc + pyc * pyc + pzc * pzc
                if nlen2 <= 0.0:
                    out_valid[tv, tu] = 0
                    continue
                out_xy[tv, tu, 0] = xr
                out_xy[tv, tu, 1] = yr
                out_d[tv, tu] = d
                out_cos[tv, tu] = -ndot / math.sqrt(nlen2 * plen2)
                out_valid[tv, tu] = 1
    return degenerate, behind


@njit(cache=True)
def raster_forward(
    tris, px, py, vz, vu, vv, tri_ok, near, inv_range, out_depth, out_uv, out_cover
):
    """Forward z-buffered render interpolating UV perspective-correctly."""
    h, w = out_depth.shape
    for t in range(tris.shape[0]):
        if not tri_ok[t]:
            continue
        i0, i1, i2 = tris[t, 0], tris[t, 1], tris[t, 2]
        x0, y0 = px[i0], py[i0]
        x1, y1 = px[i1], py[i1]
        x2, y2 = px[i2], py[i2]
        area2 = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        if area2 == 0.0:
            continue
        if area2 < 0.0:
            i1, i2 = i2, i1
            x1, y1, x2, y2 = x2, y2, x1, y1
            area2 = -area2

        a0, b0, c0, s0 = _edge_coeffs(x1, y1, x2, y2)
        a1, b1, c1, s1 = _edge_coeffs(x2, y2, x0, y0)
        a2, b2, c2, s2 = _edge_coeffs(x0, y0, x1, y1)
        tl0 = _top_left(x2 - x1, y2 - y1)
        tl1 = _top_left(x0 - x2, y0 - y2)
        tl2 = _top_left(x1 - x0, y1 - y0)

        xmin = max(0, int(math.ceil(min(x0, x1, x2))))
        xmax = min(w - 1, int(math.floor(max(x0, x1, x2))))
        ymin = max(0, int(math.ceil(min(y0, y1, y2))))
        ymax = min(h - 1, int(math.floor(max(y0, y1, y2))))

        iz0, iz1, iz2 = 1.0 / vz[i0], 1.0 / vz[i1], 1.0 / vz[i2]
        u0, u1, u2 = vu[i0] * iz0, vu[i1] * iz1, vu[i2] * iz2
        v0, v1, v2 = vv[i0] * iz0, vv[i1] * iz1, vv[i2] * iz2

        for yy in range(ymin, ymax + 1):
            fy = float(yy)
            lo, hi = _row_span(fy, x0, y0, x1, y1, x2, y2)
            if not (lo <= hi):
                continue
            xa = max(xmin, int(math.ceil(lo)))
            xb = min(xmax, int(math.floor(hi)))
            r0 = b0 * fy + c0
            r1 = b1 * fy + c1
            r2 = b2 * fy + c2
            for xx in range(xa, xb + 1):
                fx = float(xx)
                e0 = s0 * (a0 * fx + r0)
                if e0 < 0.0 or (e0 == 0.0 and not tl0):
                    continue
                e1 = s1 * (a1 * fx + r1)
                if e1 < 0.0 or (e1 == 0.0 and not tl1):
                    continue
                e2 = s2 * (a2 * fx + r2)
                if e2 < 0.0 or (e2 == 0.0 and not tl2):
                    continue
                esum = e0 + e1 + e2
                if esum <= 0.0:
                    continue
                w0 = e0 / esum
                w1 = e1 / esum
                w2 = e2 / esum
                invz = w0 * iz0 + w1 * iz1 + w2 * iz2
                z = 1.0 / invz
                d = (z - near) * inv_range
                if d < out_depth[yy, xx]:
                    out_depth[yy, xx] = d
                    out_uv[yy, xx, 0] = (w0 * u0 + w1 * u1 + w2 * u2) * z
                    out_uv[yy, xx, 1] = (w0 * v0 + w1 * v1 + w2 * v2) * z
                    out_cover[yy, xx] = 1


@njit(cache=True)
def luma_normalize(img, wr, wg, wb, ref_mean, ref_std, flat_sigma, out):
    """Fused luma statistics transfer on an RGB float32 image.

    Because the YUV transform is linear and only Y changes, the transfer
    reduces to adding the clamped luma delta to all three channels; chroma
    is untouched by construction. RGB output is clamped to [0, 1].
    Returns (mu, sigma, flat) of the input luma (float64 accumulation).
    """
    h, w = img.shape[:2]
    n = h * w
    acc = 0.0
    for y in range(h):
        for x in range(w):
            acc += wr * img[y, x, 0] + wg * img[y, x, 1] + wb * img[y, x, 2]
    mu = acc / n
    acc2 = 0.0
    for y in range(h):
        for x in range(w):
            yv = wr * img[y, x, 0] + wg * img[y, x, 1] + wb * img[y, x, 2]
            dv = yv - mu
            acc2 += dv * dv
    sigma = math.sqrt(acc2 / n)
    flat = sigma < flat_sigma
    scale = 1.0 if flat else ref_std / sigma
    for y in range(h):
        for x in range(w):
            yv = wr * img[y, x, 0] + wg * img[y, x, 1] + wb * img[y, x, 2]
            yn = scale * (yv - mu) + ref_mean
            if yn < 0.0:
                yn = 0.0
            elif yn > 1.0:
                yn = 1.0
            delta = yn - yv
            for c in range(3):
                v = img[y, x, c] + delta
                if v < 0.0:
                    v = 0.0
                elif v > 1.0:
                    v = 1.0
                out[y, x, c] = v
    return mu, sigma, flat


@njit(cache=True)
def extract_patch(frame, xy, depth_ndc, cos_inc, valid, out_color, out_score):
    """Fused increment extraction: bilinear frame lookup + score per texel.

    Clamp-to-edge bilinear sampling at the sub-pixel coordinates of each
    valid texel; score = max(cos, 0) * (1 - d).
    """
    h, w = frame.shape[:2]
    n0, n1 = valid.shape
    xmax = w - 1.0
    ymax = h - 1.0
    for ty in range(n0):
        for tx in range(n1):
            if valid[ty, tx] == 0:
                continue
            x = float(xy[ty, tx, 0])
            y = float(xy[ty, tx, 1])
            if x < 0.0:
                x = 0.0
            elif x > xmax:
                x = xmax
            if y < 0.0:
                y = 0.0
            elif y > ymax:
                y = ymax
            x0 = int(x)
            y0 = int(y)
            x1 = min(x0 + 1, w - 1)
            y1 = min(y0 + 1, h - 1)
            ax = x - x0
            ay = y - y0
            w00 = (1.0 - ax) * (1.0 - ay)
            w10 = ax * (1.0 - ay)
            w01 = (1.0 - ax) * ay
            w11 = ax * ay
            for c in range(3):
                out_color[ty, tx, c] = (
                    w00 * frame[y0, x0, c]
                    + w10 * frame[y0, x1, c]
                    + w01 * frame[y1, x0, c]
                    + w11 * frame[y1, x1, c]
                )
            cos = float(cos_inc[ty, tx])
            if cos < 0.0:
                cos = 0.0
            out_score[ty, tx] = cos * (1.0 - float(depth_ndc[ty, tx]))


@njit(cache=True)
def bilinear_rgb_points(img, xs, ys, out):
    """Clamp-to-edge bilinear lookup of N points in an (H, W, 3) image."""
    h, w = img.shape[:2]
    xmax = w - 1.0
    ymax = h - 1.0
    for i in range(xs.shape[0]):
        x = xs[i]
        y = ys[i]
        if x < 0.0:
            x = 0.0
        elif x > xmax:
            x = xmax
        if y < 0.0:
            y = 0.0
        elif y > ymax:
            y = ymax
        x0 = int(x)
        y0 = int(y)
        x1 = min(x0 + 1, w - 1)
        y1 = min(y0 + 1, h - 1)
        ax = x - x0
        ay = y - y0
        w00 = (1.0 - ax) * (1.0 - ay)
        w10 = ax * (1.0 - ay)
        w01 = (1.0 - ax) * ay
        w11 = ax * ay
        for c in range(3):
            out[i, c] = (
                w00 * img[y0, x0, c]
                + w10 * img[y0, x1, c]
                + w01 * img[y1, x0, c]
                + w11 * img[y1, x1, c]
            )


@njit(cache=True)
def merge_mean_kernel(acc_color, acc_scalar, color, score, weight, present):
    """Streaming weighted mean update over present texels (s' = s * w > 0)."""
    n0, n1 = present.shape
    for ty in range(n0):
        for tx in range(n1):
            if present[ty, tx] == 0:
                continue
            s = float(score[ty, tx]) * float(weight[ty, tx])
            if s <= 0.0:
                continue
            a = acc_scalar[ty, tx]
            total = a + s
            inv = 1.0 / total
            for c in range(3):
                acc_color[ty, tx, c] = (a * acc_color[ty, tx, c] + s * color[ty, tx, c]) * inv
            acc_scalar[ty, tx] = total


@njit(cache=True)
def merge_argmax_kernel(acc_color, acc_scalar, color, score, weight, present):
    """Best-view update with boundary blending; ties keep the old value."""
    n0, n1 = present.shape
    for ty in range(n0):
        for tx in range(n1):
            if present[ty, tx] == 0:
                continue
            s = float(score[ty, tx])
            if s <= 0.0:
                continue
            a = acc_scalar[ty, tx]
            if a == 0.0:
                # first observation: take it outright regardless of blending
                for c in range(3):
                    acc_color[ty, tx, c] = color[ty, tx, c]
                acc_scalar[ty, tx] = s
            elif s > a:
                w = float(weight[ty, tx])
                for c in range(3):
                    acc_color[ty, tx, c] = (1.0 - w) * acc_color[ty, tx, c] + w * color[ty, tx, c]
                acc_scalar[ty, tx] = (1.0 - w) * a + w * s


@njit(cache=True)
def edge_dilate_mask(denorm, finite, threshold, radius, out_valid):
    """Depth-discontinuity mask: edge detection plus Euclidean disc dilation.

    A pixel is an edge when a 4-neighbor differs by more than ``threshold``
    (same units as the depth raster) or sits across the foreground/background
    boundary. Pixels strictly closer than ``radius`` to an edge pixel come
    back 0.
    """
    h, w = denorm.shape
    edge = np.zeros((h, w), dtype=np.uint8)
    for y in range(h):
        for x in range(w):
            fin = finite[y, x]
            val = denorm[y, x]
            is_edge = False
            if x + 1 < w:
                if finite[y, x + 1] != fin:
                    is_edge = True
                elif fin == 1 and abs(val - denorm[y, x + 1]) > threshold:
                    is_edge = True
            if not is_edge and x >= 1:
                if finite[y, x - 1] != fin:
                    is_edge = True
                elif fin == 1 and abs(val - denorm[y, x - 1]) > threshold:
                    is_edge = True
            if not is_edge and y + 1 < h:
                if finite[y + 1, x] != fin:
                    is_edge = True
                elif fin == 1 and abs(val - denorm[y + 1, x]) > threshold:
                    is_edge = True
            if not is_edge and y >= 1:
                if finite[y - 1, x] != fin:
                    is_edge = True
                elif fin == 1 and abs(val - denorm[y - 1, x]) > threshold:
                    is_edge = True
            edge[y, x] = 1 if is_edge else 0

    out_valid[:] = 1
    r2 = radius * radius
    for y in range(h):
        for x in range(w):
            if edge[y, x] == 0:
                continue
            y_lo = max(0, y - radius + 1)
            y_hi = min(h - 1, y + radius - 1)
            x_lo = max(0, x - radius + 1)
            x_hi = min(w - 1, x + radius - 1)
            for yy in range(y_lo, y_hi + 1):
                dy2 = (yy - y) * (yy - y)
                for xx in range(x_lo, x_hi + 1):
                    dx = xx - x
                    if dy2 + dx * dx < r2:
                        out_valid[yy, xx] = 0


@njit(cache=True)
def chamfer_5x5(dist):
    """In-place two-pass chamfer distance with 5x5 L2 neighborhood masks.

    ``dist`` holds 0 at source cells and a large sentinel elsewhere. Step
    weights are the exact Euclidean offsets 1, sqrt(2), sqrt(5); the result
    is the mask-constrained shortest-path distance (max relative error vs.
    true L2 about 2.4%).
    """
    h, w = dist.shape
    wa = dist.dtype.type(1.0)
    wb = dist.dtype.type(math.sqrt(2.0))
    wc = dist.dtype.type(math.sqrt(5.0))
    zero = dist.dtype.type(0.0)
    # forward pass: propagate from above and from the left
    for y in range(h):
        for x in range(w):
            d = dist[y, x]
            if d == zero:
                continue
            if x >= 1 and dist[y, x - 1] + wa < d:
                d = dist[y, x - 1] + wa
            if y >= 1:
                if dist[y - 1, x] + wa < d:
                    d = dist[y - 1, x] + wa
                if x >= 1 and dist[y - 1, x - 1] + wb < d:
                    d = dist[y - 1, x - 1] + wb
                if x + 1 < w and dist[y - 1, x + 1] + wb < d:
                    d = dist[y - 1, x + 1] + wb
                if x >= 2 and dist[y - 1, x - 2] + wc < d:
                    d = dist[y - 1, x - 2] + wc
                if x + 2 < w and dist[y - 1, x + 2] + wc < d:
                    d = dist[y - 1, x + 2] + wc
            if y >= 2:
                if x >= 1 and dist[y - 2, x - 1] + wc < d:
                    d = dist[y - 2, x - 1] + wc
                if x + 1 < w and dist[y - 2, x + 1] + wc < d:
                    d = dist[y - 2, x + 1] + wc
            dist[y, x] = d
    # backward pass: mirrored neighborhood
    for y in range(h - 1, -1, -1):
        for x in range(w - 1, -1, -1):
            d = dist[y, x]
            if d == zero:
                continue
            if x + 1 < w and dist[y, x + 1] + wa < d:
                d = dist[y, x + 1] + wa
            if y + 1 < h:
                if dist[y + 1, x] + wa < d:
                    d = dist[y + 1, x] + wa
                if x + 1 < w and dist[y + 1, x + 1] + wb < d:
                    d = dist[y + 1, x + 1] + wb
                if x >= 1 and dist[y + 1, x - 1] + wb < d:
                    d = dist[y + 1, x - 1] + wb
                if x + 2 < w and dist[y + 1, x + 2] + wc < d:
                    d = dist[y + 1, x + 2] + wc
                if x >= 2 and dist[y + 1, x - 2] + wc < d:
                    d = dist[y + 1, x - 2] + wc
            if y + 2 < h:
                if x + 1 < w and dist[y + 2, x + 1] + wc < d:
                    d = dist[y + 2, x + 1] + wc
                if x >= 1 and dist[y + 2, x - 1] + wc < d:
                    d = dist[y + 2, x - 1] + wc
            dist[y, x] = d
