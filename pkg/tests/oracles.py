"""Independent oracles the implementation is checked against.

Each oracle deliberately uses a different formulation (and, where possible,
exact arithmetic) from the code under test:

- triangle-triangle intersection in exact rational arithmetic,
- per-point visibility by scalar ray casting in pure Python,
- minimum-cost assignment by exhaustive permutation enumeration.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


# --- exact triangle-triangle intersection ---------------------------------


def _f3(p):
    # Fraction(float) is exact (floats are dyadic rationals), so the oracle
    # runs on precisely the same triangles as the code under test.
    return tuple(Fraction(float(x)) for x in p)


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _scale(a, s):
    return tuple(x * s for x in a)


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _plane_cross_exact(tri, dists):
    on = [k for k in range(3) if dists[k] == 0]
    pos = [k for k in range(3) if dists[k] > 0]
    neg = [k for k in range(3) if dists[k] < 0]
    pts = []
    if len(on) == 2:
        pts = [tri[on[0]], tri[on[1]]]
    elif len(on) == 1 and pos and neg:
        i, j = pos[0], neg[0]
        t = dists[i] / (dists[i] - dists[j])
        pts = [tri[on[0]], _add(tri[i], _scale(_sub(tri[j], tri[i]), t))]
    elif not on and pos and neg:
        lone = pos[0] if len(pos) == 1 else neg[0]
        for other in range(3):
            if other == lone:
                continue
            t = dists[lone] / (dists[lone] - dists[other])
            pts.append(_add(tri[lone], _scale(_sub(tri[other], tri[lone]), t)))
    if len(pts) != 2 or pts[0] == pts[1]:
        return None
    return pts


def _clip_exact(subject, clip_tri, axes):
    """Exact Sutherland-Hodgman clip of a coplanar polygon by a triangle."""
    ax, ay = axes
    c2 = [(p[ax], p[ay]) for p in clip_tri]
    area2 = (c2[1][0] - c2[0][0]) * (c2[2][1] - c2[0][1]) - (c2[1][1] - c2[0][1]) * (
        c2[2][0] - c2[0][0]
    )
    if area2 == 0:
        return []
    order = (0, 1, 2) if area2 > 0 else (0, 2, 1)
    poly = list(subject)
    for k in range(3):
        a = c2[order[k]]
        b = c2[order[(k + 1) % 3]]
        ex, ey = b[0] - a[0], b[1] - a[1]

        def side(p):
            return ex * (p[ay] - a[1]) - ey * (p[ax] - a[0])

        out = []
        for i in range(len(poly)):
            cur, nxt = poly[i], poly[(i + 1) % len(poly)]
            s_cur, s_nxt = side(cur), side(nxt)
            if s_cur <= 0:
                out.append(cur)
            if (s_cur <= 0) != (s_nxt <= 0):
                t = s_cur / (s_cur - s_nxt)
                out.append(_add(cur, _scale(_sub(nxt, cur), t)))
        poly = out
        if not poly:
            break
    return poly


def tri_tri_intersection_exact(t1, t2):
    """Intersection of two triangles as a list of exact segments.

    Coplanar overlap contributes the boundary edges of the overlap polygon,
    matching the renderer's convention.
    """
    t1 = [_f3(p) for p in t1]
    t2 = [_f3(p) for p in t2]
    n2 = _cross(_sub(t2[1], t2[0]), _sub(t2[2], t2[0]))
    if n2 == (0, 0, 0):
        return []
    d1 = [_dot(_sub(p, t2[0]), n2) for p in t1]
    if all(d > 0 for d in d1) or all(d < 0 for d in d1):
        return []
    n1 = _cross(_sub(t1[1], t1[0]), _sub(t1[2], t1[0]))
    if n1 == (0, 0, 0):
        return []
    if all(d == 0 for d in d1):
        drop = max(range(3), key=lambda k: abs(n2[k]))
        axes = tuple(k for k in range(3) if k != drop)
        poly = _clip_exact(t1, t2, axes)
        segs = []
        for i in range(len(poly)):
            a, b = poly[i], poly[(i + 1) % len(poly)]
            if a != b:
                segs.append((a, b))
        return segs
    d2 = [_dot(_sub(p, t1[0]), n1) for p in t2]
    if all(d > 0 for d in d2) or all(d < 0 for d in d2):
        return []
    seg1 = _plane_cross_exact(t1, d1)
    seg2 = _plane_cross_exact(t2, d2)
    if seg1 is None or seg2 is None:
        return []
    direction = _cross(n1, n2)
    if direction == (0, 0, 0):
        return []
    pts = seg1 + seg2
    params = [_dot(p, direction) for p in pts]
    lo1, hi1 = sorted(params[:2])
    lo2, hi2 = sorted(params[2:])
    lo, hi = max(lo1, lo2), min(hi1, hi2)
    if lo >= hi:
        return []
    by_param = {params[k]: pts[k] for k in range(4)}
    if lo in by_param and hi in by_param:
        return [(by_param[lo], by_param[hi])]
    # Interpolate along seg1 for parameters interior to it.
    p0, p1 = seg1
    t0, t1p = params[0], params[1]
    span = t1p - t0

    def at(param):
        return _add(p0, _scale(_sub(p1, p0), (param - t0) / span))

    return [(at(lo), at(hi))]


def mesh_intersection_exact(mesh_a, mesh_b):
    """All triangle-pair intersection segments between two meshes (floats)."""
    segs = []
    ta = mesh_a.triangle_points
    tb = mesh_b.triangle_points
    for i in range(len(ta)):
        for j in range(len(tb)):
            for a, b in tri_tri_intersection_exact(ta[i], tb[j]):
                segs.append(
                    (
                        tuple(float(x) for x in a),
                        tuple(float(x) for x in b),
                    )
                )
    return segs


def point_to_segment_distance(p, a, b) -> float:
    ab = [b[k] - a[k] for k in range(3)]
    ap = [p[k] - a[k] for k in range(3)]
    denom = sum(x * x for x in ab)
    if denom == 0:
        return math.dist(p, a)
    t = max(0.0, min(1.0, sum(x * y for x, y in zip(ab, ap)) / denom))
    proj = [a[k] + t * ab[k] for k in range(3)]
    return math.dist(p, proj)


def segments_cover(covered, covering, tol: float, samples: int = 9) -> bool:
    """Every sampled point of `covered` lies on some segment of `covering`."""
    for a, b in covered:
        for k in range(samples + 1):
            t = k / samples
            p = tuple(a[i] + t * (b[i] - a[i]) for i in range(3))
            if all(
                point_to_segment_distance(p, c, d) > tol for c, d in covering
            ):
                return False
    return True


# --- per-point visibility ray casting -------------------------------------


def oracle_occluders(meshes):
    """Flatten meshes to per-triangle tuples once; reuse across many points."""
    tris = []
    for mesh in meshes:
        for tri in mesh.triangle_points:
            a = tuple(float(x) for x in tri[0])
            e1 = tuple(float(tri[1][k] - tri[0][k]) for k in range(3))
            e2 = tuple(float(tri[2][k] - tri[0][k]) for k in range(3))
            n1 = math.sqrt(sum(x * x for x in e1))
            n2 = math.sqrt(sum(x * x for x in e2))
            tris.append((a, e1, e2, n1 * n2))
    return tris


def point_hidden_oracle(point, eye, occluder_tris, eps_world: float) -> bool:
    """Scalar Moller-Trumbore ray cast from the point toward the eye.

    Same visibility rule as the renderer (open segment, incident triangles
    within eps_world excluded, near-parallel rays miss) in a deliberately
    plain per-triangle loop. `occluder_tris` comes from oracle_occluders.
    """
    px, py, pz = (float(point[k]) for k in range(3))
    dx, dy, dz = eye[0] - px, eye[1] - py, eye[2] - pz
    ray_len = math.sqrt(dx * dx + dy * dy + dz * dz)
    t_min = eps_world / ray_len
    bary_eps = 1e-9
    for a, e1, e2, edge_scale in occluder_tris:
        hx = dy * e2[2] - dz * e2[1]
        hy = dz * e2[0] - dx * e2[2]
        hz = dx * e2[1] - dy * e2[0]
        det = e1[0] * hx + e1[1] * hy + e1[2] * hz
        if abs(det) <= 1e-12 * ray_len * edge_scale:
            continue
        inv = 1.0 / det
        sx, sy, sz = px - a[0], py - a[1], pz - a[2]
        u = (sx * hx + sy * hy + sz * hz) * inv
        if u < -bary_eps or u > 1.0 + bary_eps:
            continue
        qx = sy * e1[2] - sz * e1[1]
        qy = sz * e1[0] - sx * e1[2]
        qz = sx * e1[1] - sy * e1[0]
        v = (dx * qx + dy * qy + dz * qz) * inv
        if v < -bary_eps or u + v > 1.0 + bary_eps:
            continue
        t = (e2[0] * qx + e2[1] * qy + e2[2] * qz) * inv
        if t_min < t < 1.0:
            return True
    return False


# --- exhaustive assignment -------------------------------------------------


def brute_force_min_cost(cost) -> float:
    """Minimum total cost over all maximal partial assignments."""
    n_pred, n_gt = len(cost), len(cost[0]) if len(cost) else 0
    if n_pred == 0 or n_gt == 0:
        return 0.0
    best = math.inf
    if n_pred <= n_gt:
        for perm in itertools.permutations(range(n_gt), n_pred):
            best = min(best, sum(cost[i][perm[i]] for i in range(n_pred)))
    else:
        for perm in itertools.permutations(range(n_pred), n_gt):
            best = min(best, sum(cost[perm[j]][j] for j in range(n_gt)))
    return best
