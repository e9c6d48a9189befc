"""Detection-style scoring of predicted scenes against ground truth.

Predicted and ground-truth objects are associated per record by a
minimum-total-cost assignment on Euclidean distance between object centers
(shape-agnostic). Classification quality is micro-averaged F1 where a matched
pair only counts as a true positive when the shapes agree; parameter errors
are mean absolute differences per axis over all matched pairs, so geometry
and classification errors stay decoupled.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .codec import decode_sequence
from .scene import QuantizationSpec, SceneDescriptor, read_scene_json
from .synth import DatasetManifest, load_manifest


class EvalInputError(ValueError):
    pass


@dataclass(frozen=True)
class Matching:
    """A partial bijection between predicted and ground-truth object indices."""

    pairs: tuple[tuple[int, int], ...]
    unmatched_pred: tuple[int, ...]
    unmatched_gt: tuple[int, ...]
    total_cost: float


def _lsa_total(cost: np.ndarray) -> float:
    if cost.size == 0:
        return 0.0
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum())


def match_objects(pred: SceneDescriptor, gt: SceneDescriptor) -> Matching:
    """Minimum-cost assignment on center distance, |pairs| = min(#pred, #gt).

    Among all minimum-cost assignments the lexicographically smallest pair
    list (by pred index, then gt index) is returned, so ties are stable.
    """
    n_pred, n_gt = len(pred.objects), len(gt.objects)
    if n_pred == 0 or n_gt == 0:
        return Matching((), tuple(range(n_pred)), tuple(range(n_gt)), 0.0)
    pp = np.array([o.position for o in pred.objects])
    gp = np.array([o.position for o in gt.objects])
    cost = np.linalg.norm(pp[:, None, :] - gp[None, :, :], axis=2)
    remaining = _lsa_total(cost)
    tol = 1e-9 * (1.0 + abs(remaining))
    avail = list(range(n_gt))
    pairs: list[tuple[int, int]] = []
    for i in range(n_pred):
        rows_after = list(range(i + 1, n_pred))
        chosen = None
        for j in avail:
            cols_rest = [c for c in avail if c != j]
            rest = _lsa_total(cost[np.ix_(rows_after, cols_rest)])
            if abs(cost[i, j] + rest - remaining) <= tol:
                chosen = j
                break
        if chosen is not None:
            pairs.append((i, chosen))
            avail.remove(chosen)
            remaining -= cost[i, chosen]
    matched_pred = {i for i, _ in pairs}
    matched_gt = {j for _, j in pairs}
    return Matching(
        pairs=tuple(pairs),
        unmatched_pred=tuple(i for i in range(n_pred) if i not in matched_pred),
        unmatched_gt=tuple(j for j in range(n_gt) if j not in matched_gt),
        total_cost=float(sum(cost[i, j] for i, j in pairs)),
    )


def _angle_diff(a: float, b: float) -> float:
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


@dataclass
class PairScore:
    """Additive per-record metric contributions."""

    tp: int = 0
    fp: int = 0
    fn: int = 0
    n_matched: int = 0
    pos_abs: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rot_abs: np.ndarray = field(default_factory=lambda: np.zeros(2))
    size_abs: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def add(self, other: "PairScore") -> None:
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn
        self.n_matched += other.n_matched
        self.pos_abs += other.pos_abs
        self.rot_abs += other.rot_abs
        self.size_abs += other.size_abs


def score_pair(
    pred: SceneDescriptor, gt: SceneDescriptor, matching: Matching
) -> PairScore:
    """TP/FP/FN plus per-axis absolute error sums over matched pairs."""
    s = PairScore()
    for i, j in matching.pairs:
        po, go = pred.objects[i], gt.objects[j]
        if po.shape == go.shape:
            s.tp += 1
        else:
            s.fp += 1
            s.fn += 1
        s.n_matched += 1
        s.pos_abs += np.abs(np.array(po.position) - np.array(go.position))
        s.rot_abs += np.array(
            [_angle_diff(po.rotation[k], go.rotation[k]) for k in range(2)]
        )
        s.size_abs += np.abs(np.array(po.size) - np.array(go.size))
    s.fp += len(matching.unmatched_pred)
    s.fn += len(matching.unmatched_gt)
    return s


@dataclass(frozen=True)
class EvalReport:
    pose_accuracy: float
    f1: float
    position_error: tuple[float, float, float]
    rotation_error: tuple[float, float]
    size_error: tuple[float, float, float]
    counts: dict
    world_size: float
    size_max: float

    def to_json(self) -> bytes:
        doc = {
            "pose_accuracy": self.pose_accuracy,
            "f1": self.f1,
            "position_error": list(self.position_error),
            "rotation_error": list(self.rotation_error),
            "size_error": list(self.size_error),
            "counts": self.counts,
        }
        return (json.dumps(doc, indent=2) + "\n").encode("utf-8")

    def to_table(self) -> str:
        def tup(vals):
            return "(" + ", ".join(f"{v:.2f}" for v in vals) + ")"

        rows = [
            ("Camera Pose Estimation (Acc)", f"{self.pose_accuracy:.2f}"),
            ("Object Classification (F1-score)", f"{self.f1:.2f}"),
            (f"Position error (world size = {self.world_size:g})", tup(self.position_error)),
            ("Rotation error (360°)", tup(self.rotation_error)),
            (f"Size error (max = {self.size_max:g})", tup(self.size_error)),
        ]
        label_w = max(len(r[0]) for r in rows)
        value_w = max(len(r[1]) for r in rows)
        sep = "+" + "-" * (label_w + 2) + "+" + "-" * (value_w + 2) + "+"
        lines = [sep]
        for label, value in rows:
            lines.append(f"| {label:<{label_w}} | {value:>{value_w}} |")
            lines.append(sep)
        return "\n".join(lines)


def _mean(sums: np.ndarray, n: int) -> tuple:
    if n == 0:
        return tuple(0.0 for _ in sums)
    return tuple(float(v) / n for v in sums)


def read_predictions_jsonl(path: str) -> list[dict]:
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as e:
                raise EvalInputError(f"record {line_no}: invalid JSON: {e.msg}") from None
            for key in ("scene_id", "pose_id", "tokens"):
                if key not in raw:
                    raise EvalInputError(f"record {line_no}: missing {key!r}")
            records.append(
                {
                    "line": line_no,
                    "scene_id": int(raw["scene_id"]),
                    "pose_id": int(raw["pose_id"]),
                    "tokens": [int(t) for t in raw["tokens"]],
                }
            )
    if not records:
        raise EvalInputError(f"no prediction records in {path}")
    return records


def evaluate_dataset(
    predictions_path: str,
    dataset_dir: str,
    quant: QuantizationSpec | None = None,
    manifest: DatasetManifest | None = None,
) -> EvalReport:
    """Score a predictions JSONL file against a generated dataset.

    Predictions are decoded leniently; malformed object blocks are skipped
    and counted, never fatal. A record referencing a scene absent from the
    manifest is an error naming that record.
    """
    if manifest is None:
        manifest = load_manifest(dataset_dir)
    if quant is None:
        quant = QuantizationSpec.for_profile(manifest.profile)
    records = read_predictions_jsonl(predictions_path)

    gt_cache: dict[int, SceneDescriptor] = {}

    def gt_scene(scene_id: int, line: int) -> SceneDescriptor:
        if scene_id not in gt_cache:
            if not 0 <= scene_id < manifest.count:
                raise EvalInputError(
                    f"record {line}: scene {scene_id} not in dataset "
                    f"(manifest has {manifest.count} scenes)"
                )
            path = os.path.join(dataset_dir, manifest.scenes[scene_id])
            with open(path, "rb") as f:
                gt_cache[scene_id] = read_scene_json(f.read())
        return gt_cache[scene_id]

    total = PairScore()
    pose_hits = 0
    skipped_malformed = 0
    gt_objects = 0
    pred_objects = 0
    scenes_seen = set()
    for rec in records:
        gt = gt_scene(rec["scene_id"], rec["line"])
        if not 0 <= rec["pose_id"] < 60:
            raise EvalInputError(f"record {rec['line']}: pose_id {rec['pose_id']} outside [0, 60)")
        scenes_seen.add(rec["scene_id"])
        pose, pred, diags = decode_sequence(
            rec["tokens"], quant, mode="lenient", profile=manifest.profile
        )
        if pose is not None and pose.pose_id == rec["pose_id"]:
            pose_hits += 1
        skipped_malformed += sum(1 for d in diags if d.startswith("block "))
        matching = match_objects(pred, gt)
        total.add(score_pair(pred, gt, matching))
        gt_objects += len(gt.objects)
        pred_objects += len(pred.objects)

    denom = 2 * total.tp + total.fp + total.fn
    f1 = 1.0 if denom == 0 else 2.0 * total.tp / denom
    return EvalReport(
        pose_accuracy=pose_hits / len(records),
        f1=f1,
        position_error=_mean(total.pos_abs, total.n_matched),
        rotation_error=_mean(total.rot_abs, total.n_matched),
        size_error=_mean(total.size_abs, total.n_matched),
        counts={
            "records": len(records),
            "scenes": len(scenes_seen),
            "objects": gt_objects,
            "predicted_objects": pred_objects,
            "matched": total.n_matched,
            "skipped_malformed": skipped_malformed,
        },
        world_size=quant.world_size,
        size_max=quant.size_max,
    )
