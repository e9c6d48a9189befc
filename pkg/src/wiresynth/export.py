"""Scene reconstruction as geometry files.

OBJ output carries one named group per object with watertight triangulated
solids in world units; the CAD interchange JSON is byte-identical to the
canonical scene-descriptor form, which downstream CAD scripting consumes.
"""

from __future__ import annotations

from .geometry import instantiate
from .scene import SceneDescriptor, write_scene_json


def export_obj(scene: SceneDescriptor) -> bytes:
    """ASCII OBJ: v/g/f records, one group per object named {index}_{shape}."""
    lines = ["# wiresynth scene export"]
    offset = 1  # OBJ face indices are 1-based
    for i, obj in enumerate(scene.objects):
        mesh = instantiate(obj, i)
        lines.append(f"g {i}_{obj.shape.json_name}")
        for v in mesh.vertices:
            lines.append(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}")
        for a, b, c in mesh.triangles:
            lines.append(f"f {a + offset} {b + offset} {c + offset}")
        offset += len(mesh.vertices)
    return ("\n".join(lines) + "\n").encode("utf-8")


def export_cad_json(scene: SceneDescriptor) -> bytes:
    """The CAD-facing scene JSON; identical to the canonical descriptor form."""
    return write_scene_json(scene)
