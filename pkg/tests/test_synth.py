import hashlib
import os

import pytest

from wiresynth.scene import ShapeType, validate_scene
from wiresynth.synth import (
    COMPLEX,
    PROFILES,
    SIMPLE,
    DatasetManifest,
    load_manifest,
    scene_seed,
    sequence_seed,
    synth_dataset,
    synth_scene,
)


def tree_digest(root: str) -> str:
    h = hashlib.sha256()
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in sorted(filenames):
            path = os.path.join(dirpath, name)
            h.update(os.path.relpath(path, root).encode())
            with open(path, "rb") as f:
                h.update(f.read())
    return h.hexdigest()


class TestSynthScene:
    def test_deterministic(self):
        a = synth_scene(SIMPLE, 1234)
        b = synth_scene(SIMPLE, 1234)
        assert a == b

    def test_different_seeds_differ(self):
        assert synth_scene(SIMPLE, 1) != synth_scene(SIMPLE, 2)

    @pytest.mark.parametrize("profile", [SIMPLE, COMPLEX])
    def test_generated_scenes_validate(self, profile):
        for seed in range(300):
            scene = synth_scene(profile, seed)
            assert validate_scene(scene, profile).ok, seed

    def test_simple_scenes_conform(self):
        for seed in range(300):
            scene = synth_scene(SIMPLE, seed)
            assert 1 <= len(scene.objects) <= 5
            for obj in scene.objects:
                assert obj.shape in (ShapeType.CUBE, ShapeType.CYLINDER)
                assert obj.rotation == (0, 0)

    def test_complex_rotation_marginals(self):
        # Every (yaw, pitch) combination within +-20% of uniform 1/16.
        counts = {}
        total = 0
        for seed in range(10_000):
            for obj in synth_scene(COMPLEX, seed).objects:
                counts[obj.rotation] = counts.get(obj.rotation, 0) + 1
                total += 1
        assert len(counts) == 16
        for combo, n in counts.items():
            assert abs(n / total - 1 / 16) <= 0.2 / 16, (combo, n / total)


class TestSeedDerivation:
    def test_scene_seed_is_stable(self):
        # Frozen expected values: SHA-256 is platform-independent, so these
        # must never change or datasets stop being reproducible.
        assert scene_seed(0, 0) == 14547469816147080637
        assert scene_seed(7, 2) == 15520073585263711325
        assert sequence_seed(7, 2, 18) == 8196161940625269406

    def test_scene_seeds_distinct(self):
        seeds = {scene_seed(0, i) for i in range(1000)}
        assert len(seeds) == 1000


class TestSynthDataset:
    def test_files_and_manifest(self, tmp_path):
        out = tmp_path / "d"
        manifest = synth_dataset(SIMPLE, 3, 7, str(out))
        assert manifest.count == 3
        assert manifest.scenes == ("scenes/0.json", "scenes/1.json", "scenes/2.json")
        for rel in manifest.scenes:
            assert (out / rel).is_file()
        loaded = load_manifest(str(out))
        assert loaded == manifest

    def test_rerun_byte_identical(self, tmp_path):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        synth_dataset(SIMPLE, 4, 99, str(out_a))
        synth_dataset(SIMPLE, 4, 99, str(out_b))
        assert tree_digest(str(out_a)) == tree_digest(str(out_b))

    def test_manifest_round_trip(self):
        m = DatasetManifest("simple", 2, 5, ("scenes/0.json", "scenes/1.json"), ("normal",))
        assert DatasetManifest.from_json(m.to_json()) == m

    def test_profiles_registry(self):
        assert set(PROFILES) == {"simple", "complex"}
        assert PROFILES["simple"].max_objects == 5
        assert PROFILES["complex"].max_objects == 10
        assert PROFILES["complex"].world_size == 200.0
        assert PROFILES["complex"].size_max == 60.0
