"""Command-line entry point.

Subcommands: gen, render, tokenize, detokenize, export, eval. Exit codes:
0 success, 1 usage error, 2 data error. Work fans out over (scene, pose)
pairs; every file is written atomically and its content depends only on the
inputs, so output trees are byte-identical at any parallelism degree. The
WIRESYNTH_THREADS environment variable overrides --jobs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from . import codec, evaluation, export, render, synth
from .scene import (
    CameraPose,
    QuantizationSpec,
    SceneJsonError,
    pose_table,
    read_scene_json,
    write_scene_json,
)

DATA_ERRORS = (
    OSError,
    SceneJsonError,
    ValueError,
    KeyError,
    json.JSONDecodeError,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage problems; the contract wants 1.
    def error(self, message):
        raise UsageError(message)


def _jobs(args) -> int:
    env = os.environ.get("WIRESYNTH_THREADS")
    if env is not None:
        return max(1, int(env))
    return max(1, args.jobs)


def _quant_for(profile: str, args) -> QuantizationSpec:
    quant = QuantizationSpec.for_profile(profile)
    if getattr(args, "bins_pos", None):
        quant = replace(quant, n_bins_pos=args.bins_pos)
    if getattr(args, "bins_size", None):
        quant = replace(quant, n_bins_size=args.bins_size)
    return quant


def _add_quant_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bins-pos", type=int, default=None, help="override position bin count")
    p.add_argument("--bins-size", type=int, default=None, help="override size bin count")


def cmd_gen(args) -> int:
    profile = synth.PROFILES[args.profile]
    manifest = synth.synth_dataset(profile, args.count, args.seed, args.out)
    print(f"gen: wrote {manifest.count} scenes to {args.out}")
    return 0


def cmd_render(args) -> int:
    manifest = synth.load_manifest(args.dataset)
    modes = args.mode or ["informative"]
    for m in modes:
        if m not in render.MODES:
            raise UsageError(f"unknown mode {m!r}")
    modes = sorted(set(modes))
    config = render.RenderConfig()
    poses = pose_table()

    def one(task):
        scene_id, rel = task
        with open(os.path.join(args.dataset, rel), "rb") as f:
            scene = read_scene_json(f.read())
        prep = render.prepare_scene(scene)
        out_dir = os.path.join(args.dataset, "renders", str(scene_id))
        os.makedirs(out_dir, exist_ok=True)
        for pose in poses:
            rendered = render.render_all_modes(scene, pose, config, modes, prep=prep)
            for mode, (svg, png) in rendered.items():
                base = os.path.join(out_dir, f"{pose.pose_id}_{mode}")
                synth.atomic_write(base + ".svg", svg)
                synth.atomic_write(base + ".png", png)

    tasks = list(enumerate(manifest.scenes))
    jobs = _jobs(args)
    if jobs == 1:
        for t in tasks:
            one(t)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(one, tasks))
    merged = tuple(sorted(set(manifest.render_modes) | set(modes)))
    synth.save_manifest(args.dataset, replace(manifest, render_modes=merged))
    print(f"render: {manifest.count} scenes x {len(poses)} poses x {modes}")
    return 0


def cmd_tokenize(args) -> int:
    manifest = synth.load_manifest(args.dataset)
    quant = _quant_for(manifest.profile, args)
    poses = pose_table()

    def one(task):
        scene_id, rel = task
        with open(os.path.join(args.dataset, rel), "rb") as f:
            scene = read_scene_json(f.read())
        out_dir = os.path.join(args.dataset, "sequences", str(scene_id))
        os.makedirs(out_dir, exist_ok=True)
        for pose in poses:
            seed = synth.sequence_seed(manifest.master_seed, scene_id, pose.pose_id)
            seq = codec.encode_scene(scene, pose, quant, seed)
            synth.atomic_write(
                os.path.join(out_dir, f"{pose.pose_id}.json"),
                codec.write_sequence_json(seq, quant, seed),
            )

    tasks = list(enumerate(manifest.scenes))
    jobs = _jobs(args)
    if jobs == 1:
        for t in tasks:
            one(t)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(one, tasks))
    print(f"tokenize: {manifest.count} scenes x {len(poses)} poses")
    return 0


def cmd_detokenize(args) -> int:
    with open(args.input, "rb") as f:
        seq, quant, _seed = codec.read_sequence_json(f.read())
    mode = "lenient" if args.lenient else "strict"
    pose, scene, diags = codec.decode_sequence(seq.tokens, quant, mode=mode)
    for d in diags:
        print(f"detokenize: {d}", file=sys.stderr)
    data = write_scene_json(scene)
    if args.out:
        synth.atomic_write(args.out, data)
    else:
        sys.stdout.write(data.decode("utf-8"))
    if pose is not None and args.verbose:
        print(
            f"detokenize: pose {pose.pose_id} (azimuth {pose.azimuth}, "
            f"elevation {pose.elevation})",
            file=sys.stderr,
        )
    return 0


def cmd_export(args) -> int:
    with open(args.input, "rb") as f:
        scene = read_scene_json(f.read())
    os.makedirs(args.out, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.input))[0]
    obj_path = os.path.join(args.out, f"{stem}.obj")
    json_path = os.path.join(args.out, f"{stem}.cad.json")
    synth.atomic_write(obj_path, export.export_obj(scene))
    synth.atomic_write(json_path, export.export_cad_json(scene))
    print(f"export: {obj_path} {json_path}")
    return 0


def cmd_eval(args) -> int:
    manifest = synth.load_manifest(args.dataset)
    quant = _quant_for(manifest.profile, args)
    report = evaluation.evaluate_dataset(args.pred, args.dataset, quant, manifest)
    print(report.to_table())
    if args.out:
        synth.atomic_write(args.out, report.to_json())
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="wiresynth", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a scene dataset")
    p.add_argument("--profile", choices=sorted(synth.PROFILES), required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("render", help="render wireframes for every scene and pose")
    p.add_argument("--in", dest="dataset", required=True)
    p.add_argument("--mode", action="append", choices=render.MODES)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("tokenize", help="encode scenes to token sequence files")
    p.add_argument("--in", dest="dataset", required=True)
    p.add_argument("--jobs", type=int, default=1)
    _add_quant_flags(p)
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("detokenize", help="decode a sequence file back to scene JSON")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--lenient", action="store_true")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_detokenize)

    p = sub.add_parser("export", help="export a scene to OBJ and CAD JSON")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("eval", help="score a predictions JSONL against a dataset")
    p.add_argument("--pred", required=True)
    p.add_argument("--in", dest="dataset", required=True)
    p.add_argument("--out", default=None)
    _add_quant_flags(p)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"wiresynth: {e}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as e:
        print(f"{args.command}: {e}", file=sys.stderr)
        return 1
    except DATA_ERRORS as e:
        print(f"{args.command}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
