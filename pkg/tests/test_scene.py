import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wiresynth.scene import (
    AZIMUTHS,
    CameraPose,
    ELEVATIONS,
    ObjectSpec,
    QuantizationSpec,
    SceneDescriptor,
    SceneJsonError,
    ShapeType,
    pose_table,
    read_scene_json,
    validate_scene,
    write_scene_json,
)
from wiresynth.synth import COMPLEX, SIMPLE


def make_scene(objects, world=20.0, profile="simple"):
    return SceneDescriptor(world, profile, tuple(objects))


def cube(pos=(10, 10, 10), rot=(0, 0), size=(2, 2, 2), shape=ShapeType.CUBE):
    return ObjectSpec(shape, pos, rot, size)


class TestShapeType:
    def test_seven_shapes_with_stable_ordinals(self):
        assert [s.value for s in ShapeType] == list(range(7))
        assert ShapeType.CUBE.value == 0
        assert ShapeType.MANSARD.value == 6

    def test_json_names_round_trip(self):
        for s in ShapeType:
            assert ShapeType.from_json_name(s.json_name) is s

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError, match="unknown shape"):
            ShapeType.from_json_name("sphere")


class TestPoseTable:
    def test_sixty_poses(self):
        assert len(pose_table()) == 60

    def test_pose_id_zero(self):
        p = pose_table()[0]
        assert (p.azimuth, p.elevation) == (-180, -15)

    def test_pose_id_eighteen(self):
        p = pose_table()[18]
        assert (p.azimuth, p.elevation) == (0, 0)

    def test_bijection_with_grid(self):
        table = pose_table()
        assert [p.pose_id for p in table] == list(range(60))
        seen = {(p.azimuth, p.elevation) for p in table}
        grid = {(az, el) for el in ELEVATIONS for az in AZIMUTHS}
        assert seen == grid

    def test_pose_id_formula(self):
        for p in pose_table():
            assert p.pose_id == ELEVATIONS.index(p.elevation) * 12 + AZIMUTHS.index(
                p.azimuth
            )

    def test_azimuth_180_wraps(self):
        assert CameraPose.from_angles(180, 0) == CameraPose.from_angles(-180, 0)

    def test_off_grid_rejected(self):
        with pytest.raises(ValueError):
            CameraPose.from_angles(0, 90)
        with pytest.raises(ValueError):
            CameraPose.from_id(60)
        with pytest.raises(ValueError):
            CameraPose(azimuth=0, elevation=0, pose_id=3)


class TestValidateScene:
    def test_three_cubes_ok(self):
        scene = make_scene([cube(), cube(pos=(1, 2, 3)), cube(pos=(19, 19, 19))])
        assert validate_scene(scene, SIMPLE).ok

    def test_pyramid_not_allowed_in_simple(self):
        scene = make_scene([cube(shape=ShapeType.PYRAMID)])
        result = validate_scene(scene, SIMPLE)
        assert not result.ok
        assert any("not allowed" in v.message for v in result.violations)
        assert result.violations[0].object_index == 0

    def test_yaw_45_flagged(self):
        scene = make_scene([cube(rot=(45, 0))])
        result = validate_scene(scene, SIMPLE)
        assert any("multiple of 90" in v.message for v in result.violations)

    def test_rotation_90_rejected_in_simple_allowed_in_complex(self):
        simple_scene = make_scene([cube(rot=(90, 0))])
        assert not validate_scene(simple_scene, SIMPLE).ok
        complex_scene = make_scene(
            [cube(pos=(100, 100, 100), rot=(90, 0))], world=200.0, profile="complex"
        )
        assert validate_scene(complex_scene, COMPLEX).ok

    def test_position_out_of_world(self):
        scene = make_scene([cube(pos=(21, 10, 10))])
        result = validate_scene(scene, SIMPLE)
        assert any(v.field == "position.x" for v in result.violations)

    def test_size_bounds(self):
        result = validate_scene(make_scene([cube(size=(0, 2, 2))]), SIMPLE)
        assert any(v.field == "size.x" for v in result.violations)
        result = validate_scene(make_scene([cube(size=(2, 25, 2))]), SIMPLE)
        assert any(v.field == "size.y" for v in result.violations)

    def test_object_count_cap(self):
        scene = make_scene([cube()] * 6)
        result = validate_scene(scene, SIMPLE)
        assert any(v.field == "objects" for v in result.violations)

    def test_empty_scene_flagged(self):
        result = validate_scene(make_scene([]), SIMPLE)
        assert any(v.field == "objects" for v in result.violations)


CANONICAL_ONE_CUBE = b"""{
  "world_size": 20.0,
  "profile": "simple",
  "objects": [
    {
      "shape": "cube",
      "position": [10.0, 10.0, 10.0],
      "rotation": [0, 0],
      "size": [2.0, 2.0, 2.0]
    }
  ]
}
"""


class TestSceneJson:
    def test_minimal_cube_canonical_bytes(self):
        scene = make_scene([cube()])
        assert write_scene_json(scene) == CANONICAL_ONE_CUBE

    def test_round_trip(self):
        scene = make_scene([cube(), cube(pos=(1.5, 2.25, 3.125), size=(4.5, 5, 6))])
        assert read_scene_json(write_scene_json(scene)) == scene

    def test_unknown_shape_rejected(self):
        data = CANONICAL_ONE_CUBE.replace(b'"cube"', b'"sphere"')
        with pytest.raises(SceneJsonError, match="unknown shape"):
            read_scene_json(data)

    def test_missing_field_has_path(self):
        raw = json.loads(CANONICAL_ONE_CUBE)
        del raw["objects"][0]["size"]
        with pytest.raises(SceneJsonError, match=r"objects\[0\]"):
            read_scene_json(json.dumps(raw))

    def test_malformed_json_reports_offset(self):
        with pytest.raises(SceneJsonError, match="byte offset"):
            read_scene_json(b'{"world_size": 20.0,,}')

    def test_unknown_key_rejected(self):
        raw = json.loads(CANONICAL_ONE_CUBE)
        raw["extra"] = 1
        with pytest.raises(SceneJsonError, match="unknown fields"):
            read_scene_json(json.dumps(raw))

    def test_write_validates_when_rules_given(self):
        bad = make_scene([cube(pos=(50, 0, 0))])
        with pytest.raises(SceneJsonError, match="fails validation"):
            write_scene_json(bad, rules=SIMPLE)


@st.composite
def valid_scenes(draw):
    profile = draw(st.sampled_from([SIMPLE, COMPLEX]))
    n = draw(st.integers(profile.min_objects, profile.max_objects))
    objects = []
    for _ in range(n):
        shape = draw(st.sampled_from(profile.allowed_shapes))
        pos = tuple(
            draw(st.floats(0, profile.world_size, allow_nan=False)) for _ in range(3)
        )
        rot = tuple(draw(st.sampled_from(profile.rotation_values)) for _ in range(2))
        size = tuple(
            draw(
                st.floats(
                    profile.size_min,
                    profile.size_max,
                    allow_nan=False,
                    exclude_min=False,
                )
            )
            for _ in range(3)
        )
        objects.append(ObjectSpec(shape, pos, rot, size))
    return SceneDescriptor(profile.world_size, profile.name, tuple(objects))


class TestJsonRoundTripProperty:
    @settings(max_examples=200, deadline=None)
    @given(valid_scenes())
    def test_read_write_identity(self, scene):
        assert read_scene_json(write_scene_json(scene)) == scene


class TestQuantizationSpec:
    def test_profiles(self):
        q = QuantizationSpec.for_profile("simple")
        assert (q.n_bins_pos, q.n_bins_rot, q.n_bins_size) == (20, 4, 20)
        assert (q.world_size, q.size_max) == (20.0, 20.0)
        q = QuantizationSpec.for_profile("complex")
        assert (q.n_bins_pos, q.n_bins_rot, q.n_bins_size) == (200, 4, 60)

    def test_bin_minimum(self):
        with pytest.raises(ValueError):
            QuantizationSpec(1, 4, 20, world_size=20.0, size_max=20.0)
