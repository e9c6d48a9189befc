"""Perspective wireframe rendering with hidden-line removal.

The camera orbits the world center on a sphere of radius r_mult * world_size,
addressed by (azimuth, elevation) in the horizontal coordinate system with +z
up. Visibility is decided per point: a point is hidden iff the open segment
from it to the eye crosses any occluder triangle not incident to the point.
Edges are partitioned into maximal visible/hidden runs by sampling at the
configured step and refining each transition by bisection.

Two output styles share one stroke list: "normal" keeps only visible solid
strokes; "informative" adds dotted hidden strokes and the three world axes
colored red/green/blue. SVG is the canonical output; PNG rasterizes the same
strokes with Pillow. Both are byte-deterministic for identical inputs.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, replace

import numpy as np
from PIL import Image, ImageDraw

from .geometry import (
    PosedMesh,
    Segment3,
    instantiate,
    intersection_curves,
    mesh_edge_segments,
)
from .scene import CameraPose, SceneDescriptor

MODES = ("informative", "normal")

VISIBLE = "visible"
HIDDEN = "hidden"

STYLE_COLORS = {
    "visible-solid": "#000000",
    "hidden-dotted": "#000000",
    "axis-x": "#ff0000",
    "axis-y": "#00ff00",
    "axis-z": "#0000ff",
}


@dataclass(frozen=True)
class RenderConfig:
    width: int = 224
    height: int = 224
    fov_deg: float = 45.0
    r_mult: float = 2.5
    mode: str = "informative"
    stroke_width: float = 1.0
    hlr_step: float | None = None  # defaults to world_size / 500
    dash: tuple[int, int] = (4, 4)

    def __post_init__(self):
        if not 10.0 < self.fov_deg < 120.0:
            raise ValueError(f"fov {self.fov_deg} outside (10, 120)")
        if self.mode not in MODES:
            raise ValueError(f"mode {self.mode!r} not in {MODES}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image size must be positive")

    def step_for(self, world_size: float) -> float:
        return self.hlr_step if self.hlr_step is not None else world_size / 500.0


@dataclass(frozen=True)
class Camera:
    """Eye position plus orthonormal view basis and projection parameters."""

    eye: np.ndarray
    target: np.ndarray
    right: np.ndarray
    up: np.ndarray
    forward: np.ndarray
    tan_half_fov: float
    width: int
    height: int

    def project(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """World points (N, 3) to pixel coordinates (N, 2) plus view depth."""
        rel = np.atleast_2d(points) - self.eye
        z = rel @ self.forward
        x = rel @ self.right
        y = rel @ self.up
        aspect = self.width / self.height
        with np.errstate(divide="ignore", invalid="ignore"):
            x_ndc = x / (z * self.tan_half_fov * aspect)
            y_ndc = y / (z * self.tan_half_fov)
        px = (x_ndc + 1.0) * 0.5 * self.width
        py = (1.0 - y_ndc) * 0.5 * self.height
        return np.stack([px, py], axis=-1), z


def place_camera(pose: CameraPose, world_size: float, config: RenderConfig) -> Camera:
    """Eye at target + R * (cos el cos az, cos el sin az, sin el), up +z."""
    radius = config.r_mult * world_size
    bounding = world_size * math.sqrt(3.0) / 2.0
    if radius <= bounding * 1.05:
        raise ValueError(
            f"r_mult {config.r_mult} leaves the world sphere behind the camera"
        )
    az = math.radians(pose.azimuth)
    el = math.radians(pose.elevation)
    target = np.full(3, world_size / 2.0)
    eye = target + radius * np.array(
        [math.cos(el) * math.cos(az), math.cos(el) * math.sin(az), math.sin(el)]
    )
    forward = target - eye
    forward = forward / np.linalg.norm(forward)
    world_up = np.array([0.0, 0.0, 1.0])
    right = np.cross(forward, world_up)
    right = right / np.linalg.norm(right)
    up = np.cross(right, forward)
    return Camera(
        eye=eye,
        target=target,
        right=right,
        up=up,
        forward=forward,
        tan_half_fov=math.tan(math.radians(config.fov_deg) / 2.0),
        width=config.width,
        height=config.height,
    )


def silhouette_edges(mesh: PosedMesh, camera: Camera) -> list[Segment3]:
    """Smooth edges whose two adjacent faces face opposite ways from the eye.

    Sharp edges are always drawn elsewhere and never returned here.
    """
    out = []
    verts = mesh.vertices
    tri_pts = mesh.triangle_points
    normals = np.cross(
        tri_pts[:, 1] - tri_pts[:, 0], tri_pts[:, 2] - tri_pts[:, 0]
    )
    centroids = tri_pts.mean(axis=1)
    facing = np.einsum("ij,ij->i", normals, centroids - camera.eye)
    for (i, j, kind), tris in zip(mesh.edges, mesh.edge_triangles):
        if kind != "smooth" or len(tris) != 2:
            continue
        if facing[tris[0]] * facing[tris[1]] < 0.0:
            out.append(Segment3(verts[i].copy(), verts[j].copy(), "shape-edge"))
    return out


@dataclass(frozen=True)
class _Occluder:
    """Per-mesh arrays precomputed for the ray-triangle visibility test."""

    a: np.ndarray  # (T, 3) first vertices
    e1: np.ndarray  # (T, 3)
    e2: np.ndarray  # (T, 3)
    edge_scale: np.ndarray  # (T,) |e1| * |e2|
    box_min: np.ndarray
    box_max: np.ndarray


def _occluder_arrays(mesh: PosedMesh) -> _Occluder:
    tri = mesh.triangle_points
    a = np.ascontiguousarray(tri[:, 0])
    e1 = np.ascontiguousarray(tri[:, 1] - tri[:, 0])
    e2 = np.ascontiguousarray(tri[:, 2] - tri[:, 0])
    lo, hi = mesh.aabb()
    return _Occluder(
        a=a,
        e1=e1,
        e2=e2,
        edge_scale=np.linalg.norm(e1, axis=1) * np.linalg.norm(e2, axis=1),
        box_min=lo,
        box_max=hi,
    )


def _cross(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    # Explicit component form; np.cross spends most of its time in moveaxis.
    out = np.empty(np.broadcast_shapes(u.shape, v.shape))
    out[..., 0] = u[..., 1] * v[..., 2] - u[..., 2] * v[..., 1]
    out[..., 1] = u[..., 2] * v[..., 0] - u[..., 0] * v[..., 2]
    out[..., 2] = u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    return out


def _classify_hidden(
    points: np.ndarray,
    occ: _Occluder,
    eye: np.ndarray,
    eps_world: float,
    chunk: int = 4096,
) -> np.ndarray:
    """True where the open segment point->eye crosses some occluder triangle.

    Hits within eps_world of the query point (along the ray) do not count:
    they are triangles incident to the point itself. Near-parallel rays are
    misses, so an edge never occludes itself through its own faces.
    """
    points = np.atleast_2d(points)
    n = len(points)
    if len(occ.a) == 0:
        return np.zeros(n, dtype=bool)
    bary_eps = 1e-9
    hidden = np.zeros(n, dtype=bool)
    for lo in range(0, n, chunk):
        p = points[lo : lo + chunk]  # (P, 3)
        d = eye - p  # ray directions, t=1 at the eye
        ray_len = np.sqrt(np.einsum("pj,pj->p", d, d))
        h = _cross(d[:, None, :], occ.e2[None, :, :])  # (P, T, 3)
        det = np.einsum("tj,ptj->pt", occ.e1, h)
        scale = ray_len[:, None] * occ.edge_scale[None, :] + 1e-300
        ok = np.abs(det) > 1e-12 * scale
        inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
        s = p[:, None, :] - occ.a[None, :, :]
        u = inv * np.einsum("ptj,ptj->pt", s, h)
        q = _cross(s, occ.e1[None, :, :])
        v = inv * np.einsum("ptj,ptj->pt", d[:, None, :], q)
        t = inv * np.einsum("tj,ptj->pt", occ.e2, q)
        t_min = (eps_world / ray_len)[:, None]
        hit = (
            ok
            & (u >= -bary_eps)
            & (v >= -bary_eps)
            & (u + v <= 1.0 + bary_eps)
            & (t > t_min)
            & (t < 1.0)
        )
        hidden[lo : lo + chunk] = hit.any(axis=1)
    return hidden


def hidden_line_split(
    segments: list[Segment3],
    occluders: list[PosedMesh],
    camera: Camera,
    step: float,
    eps_world: float,
    refine_iters: int = 12,
    occluder_arrays: list[_Occluder] | None = None,
) -> list[list[tuple[Segment3, str]]]:
    """Partition each segment into maximal runs of uniform visibility.

    Returns one list per input segment, in order along the segment; the runs
    tile the segment exactly. Transition points are refined by bisection to
    well below `step`.
    """
    occ_arrays = occluder_arrays or [_occluder_arrays(m) for m in occluders]
    eye = camera.eye

    # Sample every segment, then classify all samples in one batch per
    # occluder whose box can shadow the segment (per-call overhead dwarfs
    # the arithmetic otherwise).
    sample_ts: list[np.ndarray] = []
    bounds = []
    offsets = [0]
    for seg in segments:
        n = max(2, int(math.ceil(seg.length / step)) + 1)
        sample_ts.append(np.linspace(0.0, 1.0, n))
        pts = np.stack([seg.a, seg.b, eye])
        bounds.append((pts.min(axis=0) - eps_world, pts.max(axis=0) + eps_world))
        offsets.append(offsets[-1] + n)
    if segments:
        all_pts = np.concatenate(
            [
                seg.a + ts[:, None] * (seg.b - seg.a)
                for seg, ts in zip(segments, sample_ts)
            ]
        )
    else:
        all_pts = np.zeros((0, 3))
    hidden_all = np.zeros(len(all_pts), dtype=bool)
    for occ in occ_arrays:
        if len(occ.a) == 0:
            continue
        pick = [
            si
            for si, (lo_b, hi_b) in enumerate(bounds)
            if np.all(lo_b <= occ.box_max) and np.all(occ.box_min <= hi_b)
        ]
        if not pick:
            continue
        idx = np.concatenate([np.arange(offsets[si], offsets[si + 1]) for si in pick])
        idx = idx[~hidden_all[idx]]  # already-hidden points need no retest
        if len(idx):
            hidden_all[idx] |= _classify_hidden(all_pts[idx], occ, eye, eps_world)
    flags = [hidden_all[offsets[si] : offsets[si + 1]] for si in range(len(segments))]

    # Global bisection: refine every transition of every segment in lockstep.
    trans_seg: list[int] = []
    trans_lo: list[float] = []
    trans_hi: list[float] = []
    trans_lo_hidden: list[bool] = []
    for si, (ts, fl) in enumerate(zip(sample_ts, flags)):
        for k in np.nonzero(fl[1:] != fl[:-1])[0]:
            trans_seg.append(si)
            trans_lo.append(ts[k])
            trans_hi.append(ts[k + 1])
            trans_lo_hidden.append(bool(fl[k]))
    lo = np.array(trans_lo)
    hi = np.array(trans_hi)
    if len(lo):
        combined = _Occluder(
            a=np.concatenate([o.a for o in occ_arrays]) if occ_arrays else np.zeros((0, 3)),
            e1=np.concatenate([o.e1 for o in occ_arrays]) if occ_arrays else np.zeros((0, 3)),
            e2=np.concatenate([o.e2 for o in occ_arrays]) if occ_arrays else np.zeros((0, 3)),
            edge_scale=np.concatenate([o.edge_scale for o in occ_arrays])
            if occ_arrays
            else np.zeros(0),
            box_min=np.zeros(3),
            box_max=np.zeros(3),
        )
        seg_a = np.array([segments[s].a for s in trans_seg])
        seg_d = np.array([segments[s].b - segments[s].a for s in trans_seg])
        lo_hidden = np.array(trans_lo_hidden)
        for _ in range(refine_iters):
            mid = 0.5 * (lo + hi)
            pts = seg_a + mid[:, None] * seg_d
            mid_hidden = _classify_hidden(pts, combined, camera.eye, eps_world)
            same = mid_hidden == lo_hidden
            lo = np.where(same, mid, lo)
            hi = np.where(same, hi, mid)
    boundary = 0.5 * (lo + hi)

    cuts: dict[int, list[float]] = {}
    for si, t_cut in zip(trans_seg, boundary):
        cuts.setdefault(si, []).append(float(t_cut))

    out: list[list[tuple[Segment3, str]]] = []
    for si, seg in enumerate(segments):
        raw_cuts = sorted(cuts.get(si, []))
        length = seg.length
        fl = flags[si]
        # Sub-eps slivers merge into their neighbour by dropping the cut, so
        # the runs always tile the segment exactly.
        ts = [0.0]
        for t in raw_cuts:
            if (t - ts[-1]) * length > eps_world:
                ts.append(t)
        while len(ts) > 1 and (1.0 - ts[-1]) * length <= eps_world:
            ts.pop()
        ts.append(1.0)
        # Detected transitions are strict class changes in sample order, so
        # classes alternate across raw_cuts starting from the first sample's.
        runs: list[tuple[Segment3, str]] = []
        first_hidden = bool(fl[0])
        for t0, t1 in zip(ts[:-1], ts[1:]):
            mid = 0.5 * (t0 + t1)
            parity = int(np.searchsorted(raw_cuts, mid)) % 2
            is_hidden = first_hidden ^ (parity == 1)
            a = seg.a + t0 * (seg.b - seg.a)
            b = seg.a + t1 * (seg.b - seg.a)
            runs.append((Segment3(a, b, seg.tag), HIDDEN if is_hidden else VISIBLE))
        # Merge accidental same-class neighbours so runs are maximal.
        merged: list[tuple[Segment3, str]] = []
        for run in runs:
            if merged and merged[-1][1] == run[1]:
                merged[-1] = (
                    Segment3(merged[-1][0].a, run[0].b, seg.tag),
                    run[1],
                )
            else:
                merged.append(run)
        out.append(merged)
    return out


@dataclass(frozen=True)
class Stroke2:
    """A projected, clipped 2-point polyline in pixel coordinates."""

    points: tuple[tuple[float, float], ...]
    style: str  # visible-solid | hidden-dotted | axis-x | axis-y | axis-z


def _clip_to_viewport(p0, p1, width, height):
    """Liang-Barsky clip of a pixel-space segment to [0,w]x[0,h]."""
    x0, y0 = p0
    x1, y1 = p1
    dx, dy = x1 - x0, y1 - y0
    t0, t1 = 0.0, 1.0
    for p, q in (
        (-dx, x0 - 0.0),
        (dx, width - x0),
        (-dy, y0 - 0.0),
        (dy, height - y0),
    ):
        if p == 0.0:
            if q < 0.0:
                return None
            continue
        r = q / p
        if p < 0.0:
            if r > t1:
                return None
            t0 = max(t0, r)
        else:
            if r < t0:
                return None
            t1 = min(t1, r)
    if t0 > t1:
        return None
    return (
        (x0 + t0 * dx, y0 + t0 * dy),
        (x0 + t1 * dx, y0 + t1 * dy),
    )


def _project_segment(camera: Camera, seg: Segment3):
    pix, z = camera.project(np.stack([seg.a, seg.b]))
    if np.any(z <= 0.0) or not np.all(np.isfinite(pix)):
        return None
    return _clip_to_viewport(tuple(pix[0]), tuple(pix[1]), camera.width, camera.height)


def scene_segments(
    meshes: list[PosedMesh], camera: Camera, eps: float
) -> list[Segment3]:
    """All drawable segments in deterministic (object, edge) order.

    Per object: sharp edges, then view-dependent silhouettes, then the
    intersection curves against every later object.
    """
    segments: list[Segment3] = []
    for i, mesh in enumerate(meshes):
        segments.extend(mesh_edge_segments(mesh))
        segments.extend(silhouette_edges(mesh, camera))
        for other in meshes[i + 1 :]:
            segments.extend(intersection_curves(mesh, other, eps))
    return segments


@dataclass(frozen=True)
class ScenePrep:
    """Pose-independent render state, shared by all 60 poses of a scene."""

    scene: SceneDescriptor
    meshes: list[PosedMesh]
    occluders: list[_Occluder]
    sharp: list[list[Segment3]]  # per object
    intersections: list[list[Segment3]]  # per object, against later objects
    eps: float


def prepare_scene(scene: SceneDescriptor) -> ScenePrep:
    eps = 1e-6 * scene.world_size
    meshes = [instantiate(obj, i) for i, obj in enumerate(scene.objects)]
    sharp = [mesh_edge_segments(m) for m in meshes]
    inter: list[list[Segment3]] = []
    for i, mesh in enumerate(meshes):
        curves: list[Segment3] = []
        for other in meshes[i + 1 :]:
            curves.extend(intersection_curves(mesh, other, eps))
        inter.append(curves)
    return ScenePrep(
        scene=scene,
        meshes=meshes,
        occluders=[_occluder_arrays(m) for m in meshes],
        sharp=sharp,
        intersections=inter,
        eps=eps,
    )


def strokes_for_pose(
    prep: ScenePrep, pose: CameraPose, config: RenderConfig
) -> list[Stroke2]:
    """The full stroke list for one camera pose; modes filter at emission."""
    world = prep.scene.world_size
    camera = place_camera(pose, world, config)
    segments: list[Segment3] = []
    for i, mesh in enumerate(prep.meshes):
        segments.extend(prep.sharp[i])
        segments.extend(silhouette_edges(mesh, camera))
        segments.extend(prep.intersections[i])
    split = hidden_line_split(
        segments,
        prep.meshes,
        camera,
        config.step_for(world),
        prep.eps,
        occluder_arrays=prep.occluders,
    )
    strokes: list[Stroke2] = []
    for runs in split:
        for sub, state in runs:
            clipped = _project_segment(camera, sub)
            if clipped is None:
                continue
            style = "visible-solid" if state == VISIBLE else "hidden-dotted"
            strokes.append(Stroke2(clipped, style))
    origin = np.zeros(3)
    for axis, style in ((0, "axis-x"), (1, "axis-y"), (2, "axis-z")):
        end = np.zeros(3)
        end[axis] = world
        clipped = _project_segment(camera, Segment3(origin, end, "axis"))
        if clipped is not None:
            strokes.append(Stroke2(clipped, style))
    return strokes


def compute_strokes(
    scene: SceneDescriptor, pose: CameraPose, config: RenderConfig
) -> list[Stroke2]:
    return strokes_for_pose(prepare_scene(scene), pose, config)


def strokes_for_mode(strokes: list[Stroke2], mode: str) -> list[Stroke2]:
    if mode == "normal":
        return [s for s in strokes if s.style == "visible-solid"]
    return strokes


def emit_svg(strokes: list[Stroke2], config: RenderConfig, mode: str) -> bytes:
    w, h = config.width, config.height
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="#ffffff"/>',
    ]
    dash = f"{config.dash[0]} {config.dash[1]}"
    for s in strokes_for_mode(strokes, mode):
        pts = " ".join(f"{x:.3f},{y:.3f}" for x, y in s.points)
        attrs = (
            f'points="{pts}" fill="none" stroke="{STYLE_COLORS[s.style]}" '
            f'stroke-width="{config.stroke_width:g}"'
        )
        if s.style == "hidden-dotted":
            attrs += f' stroke-dasharray="{dash}"'
        lines.append(f"<polyline {attrs}/>")
    lines.append("</svg>")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _draw_dashed(draw, p0, p1, color, width, dash):
    on, off = dash
    x0, y0 = p0
    x1, y1 = p1
    total = math.hypot(x1 - x0, y1 - y0)
    if total <= 1e-9:
        return
    ux, uy = (x1 - x0) / total, (y1 - y0) / total
    pos = 0.0
    pen = True
    while pos < total:
        run = min(on if pen else off, total - pos)
        if pen:
            draw.line(
                [(x0 + ux * pos, y0 + uy * pos), (x0 + ux * (pos + run), y0 + uy * (pos + run))],
                fill=color,
                width=width,
            )
        pos += run
        pen = not pen


def emit_png(strokes: list[Stroke2], config: RenderConfig, mode: str) -> bytes:
    img = Image.new("RGB", (config.width, config.height), "white")
    draw = ImageDraw.Draw(img)
    width = max(1, int(round(config.stroke_width)))
    for s in strokes_for_mode(strokes, mode):
        color = STYLE_COLORS[s.style]
        if s.style == "hidden-dotted":
            _draw_dashed(draw, s.points[0], s.points[1], color, width, config.dash)
        else:
            draw.line([s.points[0], s.points[1]], fill=color, width=width)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def render_scene(
    scene: SceneDescriptor, pose: CameraPose, config: RenderConfig
) -> tuple[bytes, bytes]:
    """Render one (scene, pose) pair to (SVG bytes, PNG bytes)."""
    strokes = compute_strokes(scene, pose, config)
    return emit_svg(strokes, config, config.mode), emit_png(strokes, config, config.mode)


def render_all_modes(
    scene: SceneDescriptor,
    pose: CameraPose,
    config: RenderConfig,
    modes: list[str],
    prep: ScenePrep | None = None,
) -> dict[str, tuple[bytes, bytes]]:
    """Render every requested mode from one shared hidden-line pass."""
    strokes = strokes_for_pose(prep or prepare_scene(scene), pose, config)
    out = {}
    for mode in modes:
        cfg = replace(config, mode=mode)
        out[mode] = (emit_svg(strokes, cfg, mode), emit_png(strokes, cfg, mode))
    return out
