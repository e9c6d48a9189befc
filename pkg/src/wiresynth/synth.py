"""Deterministic random scene and dataset generation.

Every scene is a pure function of (profile, seed). Dataset generation derives
one independent 64-bit seed per scene from the master seed, so scenes can be
produced in any order (or in parallel) and the output tree is byte-identical
across runs.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np

from .scene import (
    ObjectSpec,
    SceneDescriptor,
    ShapeType,
    validate_scene,
    write_scene_json,
)


@dataclass(frozen=True)
class ProfileParams:
    """Generation rules for one dataset profile."""

    name: str
    world_size: float
    min_objects: int
    max_objects: int
    allowed_shapes: tuple[ShapeType, ...]
    rotation_values: tuple[int, ...]
    size_min: float
    size_max: float


SIMPLE = ProfileParams(
    name="simple",
    world_size=20.0,
    min_objects=1,
    max_objects=5,
    allowed_shapes=(ShapeType.CUBE, ShapeType.CYLINDER),
    rotation_values=(0,),
    size_min=2.0,
    size_max=20.0,
)

COMPLEX = ProfileParams(
    name="complex",
    world_size=200.0,
    min_objects=1,
    max_objects=10,
    allowed_shapes=tuple(ShapeType),
    rotation_values=(0, 90, 180, 270),
    size_min=2.0,
    size_max=60.0,
)

PROFILES = {"simple": SIMPLE, "complex": COMPLEX}


def synth_scene(profile: ProfileParams, seed: int) -> SceneDescriptor:
    """Draw one scene; identical (profile, seed) yields an identical scene.

    Object count is uniform over the profile's range; every object parameter
    is drawn independently and uniformly over its family's range.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(profile.min_objects, profile.max_objects + 1))
    objects = []
    for _ in range(n):
        shape = profile.allowed_shapes[int(rng.integers(len(profile.allowed_shapes)))]
        position = tuple(float(v) for v in rng.uniform(0.0, profile.world_size, 3))
        yaw = profile.rotation_values[int(rng.integers(len(profile.rotation_values)))]
        pitch = profile.rotation_values[int(rng.integers(len(profile.rotation_values)))]
        size = tuple(float(v) for v in rng.uniform(profile.size_min, profile.size_max, 3))
        objects.append(ObjectSpec(shape, position, (yaw, pitch), size))
    return SceneDescriptor(profile.world_size, profile.name, tuple(objects))


def scene_seed(master_seed: int, scene_id: int) -> int:
    """Stable 64-bit per-scene seed derived from (master_seed, scene_id)."""
    h = hashlib.sha256()
    h.update(b"wiresynth.scene")
    h.update(int(master_seed).to_bytes(8, "little", signed=True))
    h.update(int(scene_id).to_bytes(8, "little", signed=True))
    return int.from_bytes(h.digest()[:8], "little")


def sequence_seed(master_seed: int, scene_id: int, pose_id: int) -> int:
    """Stable per-(scene, pose) seed for token sequence object ordering."""
    h = hashlib.sha256()
    h.update(b"wiresynth.sequence")
    h.update(int(master_seed).to_bytes(8, "little", signed=True))
    h.update(int(scene_id).to_bytes(8, "little", signed=True))
    h.update(int(pose_id).to_bytes(8, "little", signed=True))
    return int.from_bytes(h.digest()[:8], "little")


@dataclass(frozen=True)
class DatasetManifest:
    """Index of a generated dataset directory."""

    profile: str
    count: int
    master_seed: int
    scenes: tuple[str, ...]
    render_modes: tuple[str, ...] = ()

    def to_json(self) -> bytes:
        doc = {
            "profile": self.profile,
            "count": self.count,
            "master_seed": self.master_seed,
            "scenes": list(self.scenes),
            "render_modes": list(self.render_modes),
        }
        return (json.dumps(doc, indent=2) + "\n").encode("utf-8")

    @classmethod
    def from_json(cls, data: bytes | str) -> "DatasetManifest":
        raw = json.loads(data)
        return cls(
            profile=raw["profile"],
            count=int(raw["count"]),
            master_seed=int(raw["master_seed"]),
            scenes=tuple(raw["scenes"]),
            render_modes=tuple(raw.get("render_modes", [])),
        )


def atomic_write(path: str, data: bytes) -> None:
    """Write via temp file + rename so partial files never land."""
    tmp = path + ".tmp"
    try:
        with open(tmp, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except OSError as e:
        raise OSError(f"failed writing {path}: {e}") from e


def load_manifest(dataset_dir: str) -> DatasetManifest:
    path = os.path.join(dataset_dir, "manifest.json")
    try:
        with open(path, "rb") as f:
            return DatasetManifest.from_json(f.read())
    except OSError as e:
        raise OSError(f"failed reading manifest {path}: {e}") from e


def save_manifest(dataset_dir: str, manifest: DatasetManifest) -> None:
    atomic_write(os.path.join(dataset_dir, "manifest.json"), manifest.to_json())


def synth_dataset(
    profile: ProfileParams, n_scenes: int, master_seed: int, output_dir: str
) -> DatasetManifest:
    """Generate n_scenes scene JSONs plus manifest.json under output_dir."""
    scenes_dir = os.path.join(output_dir, "scenes")
    os.makedirs(scenes_dir, exist_ok=True)
    paths = []
    for i in range(n_scenes):
        scene = synth_scene(profile, scene_seed(master_seed, i))
        result = validate_scene(scene, profile)
        if not result.ok:
            # Cannot happen for well-formed profiles; guards future edits.
            raise AssertionError(f"generated scene {i} invalid: {result.violations}")
        rel = f"scenes/{i}.json"
        atomic_write(os.path.join(output_dir, rel), write_scene_json(scene))
        paths.append(rel)
    manifest = DatasetManifest(
        profile=profile.name,
        count=n_scenes,
        master_seed=int(master_seed),
        scenes=tuple(paths),
    )
    save_manifest(output_dir, manifest)
    return manifest
