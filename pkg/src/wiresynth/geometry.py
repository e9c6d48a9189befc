"""Canonical primitive meshes, rigid placement, and intersection curves.

Each primitive lives in the unit box [-0.5, 0.5]^3 with +z up and is stored as
a watertight triangle mesh plus an explicit edge list. Edges are tagged sharp
(always drawn) or smooth (drawn only as view-dependent silhouettes; only the
cylinder has smooth edges). All seven primitives are convex, which the
construction uses to orient triangle winding outward.

Placement applies scale, then yaw about +z, then pitch about +x, then the
translation to the object center. Right-angle rotations use exact integer
matrices so axis-aligned geometry stays axis-aligned bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .scene import ObjectSpec, ShapeType

SHARP = "sharp"
SMOOTH = "smooth"

CYLINDER_SIDES = 24


@dataclass(frozen=True)
class CanonicalShape:
    """Reference mesh of one primitive in the canonical unit box."""

    shape: ShapeType
    vertices: np.ndarray  # (V, 3) float64
    edges: tuple[tuple[int, int, str], ...]  # (i, j, kind)
    triangles: np.ndarray  # (T, 3) int64, outward winding
    edge_triangles: tuple[tuple[int, ...], ...] = field(default=())

    @property
    def sharp_edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, j, kind in self.edges if kind == SHARP]

    @property
    def smooth_edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, j, kind in self.edges if kind == SMOOTH]


def _triangulate_outward(
    vertices: np.ndarray, faces: list[list[int]]
) -> np.ndarray:
    """Fan-triangulate polygonal faces and orient windings outward.

    Valid for convex solids only: a triangle faces outward iff its normal
    points away from the body centroid.
    """
    centroid = vertices.mean(axis=0)
    tris = []
    for face in faces:
        for k in range(1, len(face) - 1):
            tri = [face[0], face[k], face[k + 1]]
            a, b, c = (vertices[i] for i in tri)
            normal = np.cross(b - a, c - a)
            if np.dot(normal, (a + b + c) / 3.0 - centroid) < 0:
                tri = [tri[0], tri[2], tri[1]]
            tris.append(tri)
    return np.asarray(tris, dtype=np.int64)


def _ring_edges(start: int, n: int, kind: str) -> list[tuple[int, int, str]]:
    return [(start + k, start + (k + 1) % n, kind) for k in range(n)]


def _prism(section_xz: list[tuple[float, float]]) -> tuple[np.ndarray, list, list]:
    """Extrude an x-z polygon along y over [-0.5, 0.5]."""
    n = len(section_xz)
    verts = [(x, -0.5, z) for x, z in section_xz] + [(x, 0.5, z) for x, z in section_xz]
    faces = [list(range(n))[::-1], [n + k for k in range(n)]]
    faces += [[k, (k + 1) % n, n + (k + 1) % n, n + k] for k in range(n)]
    edges = _ring_edges(0, n, SHARP) + _ring_edges(n, n, SHARP)
    edges += [(k, n + k, SHARP) for k in range(n)]
    return np.asarray(verts, dtype=np.float64), faces, edges


def _build_cube():
    verts = np.array(
        [
            [-0.5, -0.5, -0.5],
            [0.5, -0.5, -0.5],
            [0.5, 0.5, -0.5],
            [-0.5, 0.5, -0.5],
            [-0.5, -0.5, 0.5],
            [0.5, -0.5, 0.5],
            [0.5, 0.5, 0.5],
            [-0.5, 0.5, 0.5],
        ]
    )
    faces = [
        [0, 1, 2, 3],
        [4, 5, 6, 7],
        [0, 1, 5, 4],
        [1, 2, 6, 5],
        [2, 3, 7, 6],
        [3, 0, 4, 7],
    ]
    edges = _ring_edges(0, 4, SHARP) + _ring_edges(4, 4, SHARP)
    edges += [(k, 4 + k, SHARP) for k in range(4)]
    return verts, faces, edges


def _build_cylinder():
    n = CYLINDER_SIDES
    angles = [2.0 * math.pi * k / n for k in range(n)]
    bottom = [(0.5 * math.cos(a), 0.5 * math.sin(a), -0.5) for a in angles]
    top = [(x, y, 0.5) for x, y, _ in bottom]
    verts = np.asarray(bottom + top, dtype=np.float64)
    faces = [list(range(n))[::-1], [n + k for k in range(n)]]
    faces += [[k, (k + 1) % n, n + (k + 1) % n, n + k] for k in range(n)]
    edges = _ring_edges(0, n, SHARP) + _ring_edges(n, n, SHARP)
    edges += [(k, n + k, SMOOTH) for k in range(n)]
    return verts, faces, edges


def _build_pyramid():
    verts = np.array(
        [
            [-0.5, -0.5, -0.5],
            [0.5, -0.5, -0.5],
            [0.5, 0.5, -0.5],
            [-0.5, 0.5, -0.5],
            [0.0, 0.0, 0.5],
        ]
    )
    faces = [[0, 1, 2, 3], [0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]]
    edges = _ring_edges(0, 4, SHARP) + [(k, 4, SHARP) for k in range(4)]
    return verts, faces, edges


def _build_aframe():
    return _prism([(-0.5, -0.5), (0.5, -0.5), (0.0, 0.5)])


def _build_shed():
    return _prism([(-0.5, -0.5), (0.5, -0.5), (0.5, 0.0), (-0.5, 0.5)])


def _build_hip():
    verts = np.array(
        [
            [-0.5, -0.5, -0.5],
            [0.5, -0.5, -0.5],
            [0.5, 0.5, -0.5],
            [-0.5, 0.5, -0.5],
            [0.0, -0.25, 0.5],
            [0.0, 0.25, 0.5],
        ]
    )
    faces = [[0, 1, 2, 3], [1, 2, 5, 4], [0, 4, 5, 3], [0, 1, 4], [2, 3, 5]]
    edges = _ring_edges(0, 4, SHARP)
    edges += [(4, 5, SHARP), (0, 4, SHARP), (1, 4, SHARP), (2, 5, SHARP), (3, 5, SHARP)]
    return verts, faces, edges


def _build_mansard():
    base = [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]
    verts = np.array(
        [[x, y, -0.5] for x, y in base] + [[0.5 * x, 0.5 * y, 0.5] for x, y in base]
    )
    faces = [[0, 1, 2, 3], [4, 5, 6, 7]]
    faces += [[k, (k + 1) % 4, 4 + (k + 1) % 4, 4 + k] for k in range(4)]
    edges = _ring_edges(0, 4, SHARP) + _ring_edges(4, 4, SHARP)
    edges += [(k, 4 + k, SHARP) for k in range(4)]
    return verts, faces, edges


_BUILDERS = {
    ShapeType.CUBE: _build_cube,
    ShapeType.CYLINDER: _build_cylinder,
    ShapeType.PYRAMID: _build_pyramid,
    ShapeType.SHED: _build_shed,
    ShapeType.HIP: _build_hip,
    ShapeType.AFRAME: _build_aframe,
    ShapeType.MANSARD: _build_mansard,
}

_CANONICAL_CACHE: dict[ShapeType, CanonicalShape] = {}


def _edge_triangle_map(
    edges: tuple[tuple[int, int, str], ...], triangles: np.ndarray
) -> tuple[tuple[int, ...], ...]:
    by_pair: dict[tuple[int, int], list[int]] = {}
    for t, (a, b, c) in enumerate(triangles):
        for i, j in ((a, b), (b, c), (c, a)):
            by_pair.setdefault((min(i, j), max(i, j)), []).append(t)
    return tuple(tuple(by_pair.get((min(i, j), max(i, j)), ())) for i, j, _ in edges)


def canonical(shape: ShapeType) -> CanonicalShape:
    """The fixed canonical mesh of a primitive (cached, immutable)."""
    if shape not in _CANONICAL_CACHE:
        verts, faces, edges = _BUILDERS[shape]()
        tris = _triangulate_outward(verts, faces)
        mesh = CanonicalShape(
            shape=shape,
            vertices=verts,
            edges=tuple(edges),
            triangles=tris,
            edge_triangles=_edge_triangle_map(tuple(edges), tris),
        )
        mesh.vertices.setflags(write=False)
        mesh.triangles.setflags(write=False)
        _CANONICAL_CACHE[shape] = mesh
    return _CANONICAL_CACHE[shape]


_COS = {0: 1, 90: 0, 180: -1, 270: 0}
_SIN = {0: 0, 90: 1, 180: 0, 270: -1}


def rotation_matrix(yaw: int, pitch: int) -> np.ndarray:
    """Exact integer rotation: pitch about +x composed after yaw about +z."""
    cy, sy = _COS[yaw % 360], _SIN[yaw % 360]
    cp, sp = _COS[pitch % 360], _SIN[pitch % 360]
    r_yaw = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]], dtype=np.int64)
    r_pitch = np.array([[1, 0, 0], [0, cp, -sp], [0, sp, cp]], dtype=np.int64)
    return r_pitch @ r_yaw


@dataclass(frozen=True)
class PosedMesh:
    """A canonical shape scaled, rotated, and translated into the world."""

    object_index: int
    shape: ShapeType
    vertices: np.ndarray  # (V, 3) float64, world units
    edges: tuple[tuple[int, int, str], ...]
    triangles: np.ndarray
    edge_triangles: tuple[tuple[int, ...], ...]

    @property
    def triangle_points(self) -> np.ndarray:
        return self.vertices[self.triangles]

    def aabb(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


def instantiate(obj: ObjectSpec, object_index: int = 0) -> PosedMesh:
    """Place a canonical shape: scale, yaw, pitch, then translate to center."""
    base = canonical(obj.shape)
    rot = rotation_matrix(*obj.rotation).astype(np.float64)
    verts = base.vertices * np.asarray(obj.size, dtype=np.float64)
    verts = verts @ rot.T + np.asarray(obj.position, dtype=np.float64)
    verts.setflags(write=False)
    return PosedMesh(
        object_index=object_index,
        shape=obj.shape,
        vertices=verts,
        edges=base.edges,
        triangles=base.triangles,
        edge_triangles=base.edge_triangles,
    )


@dataclass(frozen=True)
class Segment3:
    """A 3D line segment with a provenance tag."""

    a: np.ndarray
    b: np.ndarray
    tag: str  # shape-edge | intersection-curve | axis

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.b - self.a))


def mesh_edge_segments(mesh: PosedMesh, kind: str = SHARP) -> list[Segment3]:
    """World-space segments of the mesh's edges of one kind."""
    out = []
    for i, j, k in mesh.edges:
        if k == kind:
            out.append(Segment3(mesh.vertices[i].copy(), mesh.vertices[j].copy(), "shape-edge"))
    return out


def signed_volume(vertices: np.ndarray, triangles: np.ndarray) -> float:
    """Positive iff windings are consistently outward."""
    pts = vertices[triangles]
    return float(np.einsum("ij,ij->i", pts[:, 0], np.cross(pts[:, 1], pts[:, 2])).sum() / 6.0)


def is_watertight(triangles: np.ndarray) -> bool:
    """Every undirected triangle edge must be shared by exactly two triangles."""
    counts: dict[tuple[int, int], int] = {}
    for a, b, c in triangles:
        for i, j in ((a, b), (b, c), (c, a)):
            key = (min(i, j), max(i, j))
            counts[key] = counts.get(key, 0) + 1
    return all(v == 2 for v in counts.values())


def _plane_cross_points(tri: np.ndarray, dists: np.ndarray, eps: float):
    """Points where a triangle meets the plane its `dists` were taken against.

    Returns None for no/degenerate crossing, else a pair of 3D points.
    """
    on = [k for k in range(3) if abs(dists[k]) <= eps]
    pos = [k for k in range(3) if dists[k] > eps]
    neg = [k for k in range(3) if dists[k] < -eps]
    pts: list[np.ndarray] = []
    if len(on) == 2:
        pts = [tri[on[0]], tri[on[1]]]
    elif len(on) == 1 and pos and neg:
        i, j = pos[0], neg[0]
        t = dists[i] / (dists[i] - dists[j])
        pts = [tri[on[0]], tri[i] + t * (tri[j] - tri[i])]
    elif not on and pos and neg:
        lone = pos[0] if len(pos) == 1 else neg[0]
        for other in range(3):
            if other == lone:
                continue
            t = dists[lone] / (dists[lone] - dists[other])
            pts.append(tri[lone] + t * (tri[other] - tri[lone]))
    if len(pts) != 2 or np.linalg.norm(pts[1] - pts[0]) <= eps:
        return None
    return pts[0], pts[1]


def _dominant_axes(normal: np.ndarray) -> tuple[int, int]:
    drop = int(np.argmax(np.abs(normal)))
    return tuple(k for k in range(3) if k != drop)  # type: ignore[return-value]


def _clip_polygon_2d(subject: list[np.ndarray], clip2d: np.ndarray, axes) -> list[np.ndarray]:
    """Sutherland-Hodgman clip of a 3D polygon against a 2D triangle.

    The clip triangle is given by its 2D projection; the subject keeps full 3D
    coordinates so the output stays on the shared plane.
    """
    cx, cy = axes
    c = clip2d
    # Ensure counter-clockwise clip polygon.
    area2 = (c[1][0] - c[0][0]) * (c[2][1] - c[0][1]) - (c[1][1] - c[0][1]) * (c[2][0] - c[0][0])
    order = [0, 1, 2] if area2 > 0 else [0, 2, 1]
    poly = subject
    for k in range(3):
        a = c[order[k]]
        b = c[order[(k + 1) % 3]]
        ex, ey = b[0] - a[0], b[1] - a[1]
        inside = lambda p: ex * (p[cy] - a[1]) - ey * (p[cx] - a[0]) <= 0  # noqa: E731
        new_poly: list[np.ndarray] = []
        for i in range(len(poly)):
            cur, nxt = poly[i], poly[(i + 1) % len(poly)]
            cur_in, nxt_in = inside(cur), inside(nxt)
            if cur_in:
                new_poly.append(cur)
            if cur_in != nxt_in:
                f_cur = ex * (cur[cy] - a[1]) - ey * (cur[cx] - a[0])
                f_nxt = ex * (nxt[cy] - a[1]) - ey * (nxt[cx] - a[0])
                denom = f_cur - f_nxt
                if abs(denom) > 1e-30:
                    t = f_cur / denom
                    new_poly.append(cur + t * (nxt - cur))
        poly = new_poly
        if not poly:
            break
    return poly


def _coplanar_overlap_segments(t1: np.ndarray, t2: np.ndarray, normal: np.ndarray, eps: float):
    axes = _dominant_axes(normal)
    clip2d = t2[:, axes]
    poly = _clip_polygon_2d([t1[0], t1[1], t1[2]], clip2d, axes)
    segs = []
    for i in range(len(poly)):
        a, b = poly[i], poly[(i + 1) % len(poly)]
        if np.linalg.norm(b - a) > eps:
            segs.append((a, b))
    return segs


def _triangle_pair_segments(t1: np.ndarray, t2: np.ndarray, eps: float):
    """Intersection segment(s) of two triangles, or [] when disjoint."""
    n2 = np.cross(t2[1] - t2[0], t2[2] - t2[0])
    l2 = np.linalg.norm(n2)
    if l2 < 1e-30:
        return []
    n2 = n2 / l2
    d1 = (t1 - t2[0]) @ n2
    if np.all(d1 > eps) or np.all(d1 < -eps):
        return []
    n1 = np.cross(t1[1] - t1[0], t1[2] - t1[0])
    l1 = np.linalg.norm(n1)
    if l1 < 1e-30:
        return []
    n1 = n1 / l1
    if np.all(np.abs(d1) <= eps):
        return _coplanar_overlap_segments(t1, t2, n2, eps)
    d2 = (t2 - t1[0]) @ n1
    if np.all(d2 > eps) or np.all(d2 < -eps):
        return []
    seg1 = _plane_cross_points(t1, d1, eps)
    seg2 = _plane_cross_points(t2, d2, eps)
    if seg1 is None or seg2 is None:
        return []
    direction = np.cross(n1, n2)
    norm = np.linalg.norm(direction)
    if norm < 1e-12:
        return []
    direction = direction / norm
    p0 = seg1[0]
    i1 = sorted((0.0, float((seg1[1] - p0) @ direction)))
    i2 = sorted((float((seg2[0] - p0) @ direction), float((seg2[1] - p0) @ direction)))
    lo, hi = max(i1[0], i2[0]), min(i1[1], i2[1])
    if hi - lo <= eps:
        return []
    return [(p0 + lo * direction, p0 + hi * direction)]


def _merge_collinear(raw: list[tuple[np.ndarray, np.ndarray]], eps: float):
    """Chain raw segments: group by supporting line, merge interval unions."""
    groups: dict[tuple, list[tuple[float, float]]] = {}
    frames: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}
    quantum = 4.0 * eps
    for a, b in raw:
        u = b - a
        length = np.linalg.norm(u)
        if length <= eps:
            continue
        u = u / length
        # Canonical direction sign: first component larger than eps is positive.
        for comp in u:
            if abs(comp) > 1e-9:
                if comp < 0:
                    u = -u
                break
        anchor = a - (a @ u) * u  # closest point of the line to the origin
        key = tuple(np.round(np.concatenate([u, anchor]) / quantum).astype(np.int64))
        lo, hi = sorted((float(a @ u), float(b @ u)))
        groups.setdefault(key, []).append((lo, hi))
        frames.setdefault(key, (u, anchor))
    out = []
    for key in sorted(groups):
        u, anchor = frames[key]
        intervals = sorted(groups[key])
        merged = [list(intervals[0])]
        for lo, hi in intervals[1:]:
            if lo <= merged[-1][1] + eps:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        for lo, hi in merged:
            out.append(Segment3(anchor + lo * u, anchor + hi * u, "intersection-curve"))
    return out


def intersection_curves(a: PosedMesh, b: PosedMesh, eps: float | None = None) -> list[Segment3]:
    """Triangle-triangle intersection segments between two watertight meshes.

    Segments are chained (collinear runs merged) and deduplicated within eps.
    Coplanar overlapping triangles contribute the overlap polygon's boundary.
    """
    if eps is None:
        scale = max(
            1.0,
            float(np.abs(a.vertices).max(initial=0.0)),
            float(np.abs(b.vertices).max(initial=0.0)),
        )
        eps = 1e-6 * scale
    amin, amax = a.aabb()
    bmin, bmax = b.aabb()
    if np.any(amin > bmax + eps) or np.any(bmin > amax + eps):
        return []
    ta = a.triangle_points
    tb = b.triangle_points
    ta_min, ta_max = ta.min(axis=1), ta.max(axis=1)
    tb_min, tb_max = tb.min(axis=1), tb.max(axis=1)
    hit = np.all(
        (ta_min[:, None, :] <= tb_max[None, :, :] + eps)
        & (tb_min[None, :, :] <= ta_max[:, None, :] + eps),
        axis=2,
    )
    raw: list[tuple[np.ndarray, np.ndarray]] = []
    for i, j in zip(*np.nonzero(hit)):
        raw.extend(_triangle_pair_segments(ta[i], tb[j], eps))
    return _merge_collinear(raw, eps)
