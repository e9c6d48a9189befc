"""Canonical scene types, validation, and the scene-descriptor JSON codec.

World conventions used throughout the toolkit: +z is up, positions are object
centers in world units, rotations are (yaw, pitch) in degrees restricted to
multiples of 90, and sizes are full axis-aligned extents in the object's
canonical frame.

The JSON form emitted by :func:`write_scene_json` is canonical: fixed key
order, 2-space indent, inline numeric arrays, lowercase shape names. Datasets
and renders are byte-reproducible because this form is deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence


class ShapeType(Enum):
    """The seven primitive shapes. Ordinals are stable codec ids."""

    CUBE = 0
    CYLINDER = 1
    PYRAMID = 2
    SHED = 3
    HIP = 4
    AFRAME = 5
    MANSARD = 6

    @property
    def json_name(self) -> str:
        return self.name.lower()

    @classmethod
    def from_json_name(cls, name: str) -> "ShapeType":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(
                f"unknown shape {name!r}; expected one of "
                f"{[s.json_name for s in cls]}"
            ) from None


# Camera pose grid: 5 elevations x 12 azimuths, degrees.
ELEVATIONS = (-15, 0, 15, 30, 45)
AZIMUTHS = tuple(range(-180, 180, 30))
N_POSES = len(ELEVATIONS) * len(AZIMUTHS)


@dataclass(frozen=True)
class CameraPose:
    """One entry of the fixed 60-pose camera table.

    pose_id = elevation_index * 12 + azimuth_index, both indices ascending.
    """

    azimuth: int
    elevation: int
    pose_id: int

    def __post_init__(self):
        if self.azimuth not in AZIMUTHS:
            raise ValueError(f"azimuth {self.azimuth} not in the pose grid")
        if self.elevation not in ELEVATIONS:
            raise ValueError(f"elevation {self.elevation} not in the pose grid")
        expected = ELEVATIONS.index(self.elevation) * len(AZIMUTHS) + AZIMUTHS.index(
            self.azimuth
        )
        if self.pose_id != expected:
            raise ValueError(
                f"pose_id {self.pose_id} inconsistent with "
                f"(azimuth={self.azimuth}, elevation={self.elevation}); "
                f"expected {expected}"
            )

    @classmethod
    def from_id(cls, pose_id: int) -> "CameraPose":
        if not 0 <= pose_id < N_POSES:
            raise ValueError(f"pose_id {pose_id} outside [0, {N_POSES})")
        elev_idx, az_idx = divmod(pose_id, len(AZIMUTHS))
        return cls(AZIMUTHS[az_idx], ELEVATIONS[elev_idx], pose_id)

    @classmethod
    def from_angles(cls, azimuth: int, elevation: int) -> "CameraPose":
        # +180 wraps to -180; both name the same eye position.
        if azimuth == 180:
            azimuth = -180
        if azimuth not in AZIMUTHS or elevation not in ELEVATIONS:
            raise ValueError(
                f"(azimuth={azimuth}, elevation={elevation}) not in the pose grid"
            )
        pose_id = ELEVATIONS.index(elevation) * len(AZIMUTHS) + AZIMUTHS.index(azimuth)
        return cls(azimuth, elevation, pose_id)


def pose_table() -> tuple[CameraPose, ...]:
    """All 60 camera poses, sorted by pose_id."""
    return tuple(CameraPose.from_id(i) for i in range(N_POSES))


ROTATION_VALUES = (0, 90, 180, 270)


@dataclass(frozen=True)
class ObjectSpec:
    """One object: shape, center position, (yaw, pitch) rotation, extents."""

    shape: ShapeType
    position: tuple[float, float, float]
    rotation: tuple[int, int]
    size: tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))
        object.__setattr__(self, "rotation", tuple(int(v) for v in self.rotation))
        object.__setattr__(self, "size", tuple(float(v) for v in self.size))
        if len(self.position) != 3 or len(self.rotation) != 2 or len(self.size) != 3:
            raise ValueError("position/size need 3 components, rotation needs 2")


@dataclass(frozen=True)
class SceneDescriptor:
    """World size, profile name, and an ordered list of objects."""

    world_size: float
    profile: str
    objects: tuple[ObjectSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "world_size", float(self.world_size))
        object.__setattr__(self, "objects", tuple(self.objects))


@dataclass(frozen=True)
class QuantizationSpec:
    """Bin counts and value ranges for the three continuous token families.

    Positions quantize over [0, world_size], rotations over [0, 270] (always
    4 bins, one per right angle), sizes over [0, size_max].
    """

    n_bins_pos: int
    n_bins_rot: int
    n_bins_size: int
    world_size: float
    size_max: float
    rot_max: float = 270.0

    def __post_init__(self):
        for name in ("n_bins_pos", "n_bins_rot", "n_bins_size"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be >= 2")
        if self.world_size <= 0 or self.size_max <= 0:
            raise ValueError("world_size and size_max must be positive")

    @classmethod
    def for_profile(cls, profile: str) -> "QuantizationSpec":
        if profile == "simple":
            return cls(20, 4, 20, world_size=20.0, size_max=20.0)
        if profile == "complex":
            return cls(200, 4, 60, world_size=200.0, size_max=60.0)
        raise ValueError(f"unknown profile {profile!r}")


PROFILE_NAMES = ("simple", "complex")


@dataclass(frozen=True)
class Violation:
    """One invariant failure; object_index is None for scene-level issues."""

    object_index: int | None
    field: str
    message: str

    def __str__(self) -> str:
        where = "scene" if self.object_index is None else f"objects[{self.object_index}]"
        return f"{where}.{self.field}: {self.message}"


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_scene(scene: SceneDescriptor, rules) -> ValidationResult:
    """Check every scene and object invariant against a profile's rules.

    `rules` needs: name, world_size, min_objects, max_objects, allowed_shapes,
    rotation_values, size_max (see ProfileParams). Violations are data, not
    faults; nothing raises.
    """
    out: list[Violation] = []
    if scene.profile != rules.name:
        out.append(Violation(None, "profile", f"profile {scene.profile!r} does not match rules {rules.name!r}"))
    if scene.world_size != rules.world_size:
        out.append(Violation(None, "world_size", f"expected {rules.world_size}, got {scene.world_size}"))
    n = len(scene.objects)
    if not rules.min_objects <= n <= rules.max_objects:
        out.append(
            Violation(
                None,
                "objects",
                f"object count {n} outside [{rules.min_objects}, {rules.max_objects}]",
            )
        )
    for i, obj in enumerate(scene.objects):
        if obj.shape not in rules.allowed_shapes:
            out.append(
                Violation(i, "shape", f"shape {obj.shape.json_name!r} not allowed in {rules.name} profile")
            )
        for axis, p in zip("xyz", obj.position):
            if not 0.0 <= p <= scene.world_size:
                out.append(
                    Violation(i, f"position.{axis}", f"{p} outside [0, {scene.world_size}]")
                )
        for name, r in zip(("yaw", "pitch"), obj.rotation):
            if r not in ROTATION_VALUES:
                out.append(Violation(i, f"rotation.{name}", f"{r} not a multiple of 90 in [0, 270]"))
            elif r not in rules.rotation_values:
                out.append(
                    Violation(i, f"rotation.{name}", f"{r} not allowed in {rules.name} profile")
                )
        for axis, s in zip("xyz", obj.size):
            if not 0.0 < s <= rules.size_max:
                out.append(Violation(i, f"size.{axis}", f"{s} outside (0, {rules.size_max}]"))
    return ValidationResult(tuple(out))


class SceneJsonError(ValueError):
    """Raised on malformed scene JSON; carries the field path or byte offset."""

    def __init__(self, message: str, path: str = "", offset: int | None = None):
        at = f" at {path}" if path else ""
        off = f" (byte offset {offset})" if offset is not None else ""
        super().__init__(f"{message}{at}{off}")
        self.path = path
        self.offset = offset


def _fnum(x: float) -> str:
    # repr gives the shortest round-trip form; keeps files byte-stable.
    return repr(float(x))


def write_scene_json(scene: SceneDescriptor, rules=None) -> bytes:
    """Serialize a scene to canonical JSON bytes.

    When `rules` is given, the scene must validate against it first; pass
    None to serialize unvalidated scenes (lenient-decode output).
    """
    if rules is not None:
        result = validate_scene(scene, rules)
        if not result.ok:
            raise SceneJsonError(
                "scene fails validation: " + "; ".join(str(v) for v in result.violations)
            )
    lines = ["{"]
    lines.append(f'  "world_size": {_fnum(scene.world_size)},')
    lines.append(f'  "profile": {json.dumps(scene.profile)},')
    if not scene.objects:
        lines.append('  "objects": []')
    else:
        lines.append('  "objects": [')
        for i, obj in enumerate(scene.objects):
            pos = ", ".join(_fnum(v) for v in obj.position)
            rot = ", ".join(str(v) for v in obj.rotation)
            size = ", ".join(_fnum(v) for v in obj.size)
            tail = "," if i + 1 < len(scene.objects) else ""
            lines.append("    {")
            lines.append(f'      "shape": "{obj.shape.json_name}",')
            lines.append(f'      "position": [{pos}],')
            lines.append(f'      "rotation": [{rot}],')
            lines.append(f'      "size": [{size}]')
            lines.append(f"    }}{tail}")
        lines.append("  ]")
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _require(mapping: dict, key: str, path: str):
    if key not in mapping:
        raise SceneJsonError(f"missing field {key!r}", path=path or "$")
    return mapping[key]


def _as_floats(value, n: int, path: str) -> tuple[float, ...]:
    if not isinstance(value, list) or len(value) != n:
        raise SceneJsonError(f"expected a list of {n} numbers", path=path)
    out = []
    for k, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SceneJsonError("expected a number", path=f"{path}[{k}]")
        out.append(float(v))
    return tuple(out)


def read_scene_json(data: bytes | str) -> SceneDescriptor:
    """Parse scene JSON, rejecting unknown shapes, keys, and missing fields."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as e:
        raise SceneJsonError(f"invalid JSON: {e.msg}", offset=e.pos) from None
    if not isinstance(raw, dict):
        raise SceneJsonError("top level must be an object", path="$")
    extra = set(raw) - {"world_size", "profile", "objects"}
    if extra:
        raise SceneJsonError(f"unknown fields {sorted(extra)}", path="$")
    world_size = _require(raw, "world_size", "")
    if isinstance(world_size, bool) or not isinstance(world_size, (int, float)):
        raise SceneJsonError("expected a number", path="world_size")
    profile = _require(raw, "profile", "")
    if profile not in PROFILE_NAMES:
        raise SceneJsonError(f"unknown profile {profile!r}", path="profile")
    objs_raw = _require(raw, "objects", "")
    if not isinstance(objs_raw, list):
        raise SceneJsonError("expected a list", path="objects")
    objects = []
    for i, o in enumerate(objs_raw):
        path = f"objects[{i}]"
        if not isinstance(o, dict):
            raise SceneJsonError("expected an object", path=path)
        extra = set(o) - {"shape", "position", "rotation", "size"}
        if extra:
            raise SceneJsonError(f"unknown fields {sorted(extra)}", path=path)
        shape_name = _require(o, "shape", path)
        if not isinstance(shape_name, str):
            raise SceneJsonError("expected a string", path=f"{path}.shape")
        try:
            shape = ShapeType.from_json_name(shape_name)
        except ValueError as e:
            raise SceneJsonError(str(e), path=f"{path}.shape") from None
        position = _as_floats(_require(o, "position", path), 3, f"{path}.position")
        rot_f = _as_floats(_require(o, "rotation", path), 2, f"{path}.rotation")
        if any(r != int(r) for r in rot_f):
            raise SceneJsonError("rotation must be integral degrees", path=f"{path}.rotation")
        size = _as_floats(_require(o, "size", path), 3, f"{path}.size")
        objects.append(
            ObjectSpec(shape, position, (int(rot_f[0]), int(rot_f[1])), size)
        )
    return SceneDescriptor(float(world_size), profile, tuple(objects))


def scenes_equal(a: SceneDescriptor, b: SceneDescriptor) -> bool:
    """Exact equality on the canonical form (float-for-float)."""
    return write_scene_json(a) == write_scene_json(b)
