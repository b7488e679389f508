"""Command-line experiment runner.

Verbs: simulate, detect, calibrate, amplify, cluster, enhance, evaluate,
run (full chain), sweep. Stage verbs execute the chain up to that stage and
emit the artifacts produced so far. Output root defaults to $VIBELAB_OUT or
./out.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import VibeLabError
from .pipeline import ExperimentConfig, run_pipeline, run_sweep

VERB_TO_STAGE = {
    "simulate": "simulate",
    "detect": "detect",
    "calibrate": "calibrate",
    "amplify": "amplify",
    "cluster": "cluster",
    "enhance": "enhance",
    "evaluate": None,
    "run": None,
}


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--scene", help="scene YAML file (explicit or generator form)")
    parser.add_argument("--generator", help="inline generator, e.g. "
                        "'meeting:n_speakers=3,arrangement=natural,n_objects=3'")
    parser.add_argument("--out", default=None, help="output directory "
                        "(default $VIBELAB_OUT or ./out)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--m", type=int, default=3, dest="m_targets",
                        help="number of targets to select")
    parser.add_argument("--gamma", type=float, default=0.1,
                        help="radius tolerance of the constrained circle fit")
    parser.add_argument("--alpha", type=float, default=2.0,
                        help="spectral over-subtraction factor")
    parser.add_argument("--beta", type=float, default=0.01, help="spectral floor")
    parser.add_argument("--noise-frames", type=int, default=20)
    parser.add_argument("--envelope-dim", type=int, default=64)
    parser.add_argument("--n-max", type=int, default=5)
    parser.add_argument("--band", type=float, nargs=2, default=(50.0, 1000.0),
                        metavar=("LO", "HI"))
    parser.add_argument("--window", type=int, default=256)
    parser.add_argument("--hop", type=int, default=64)
    parser.add_argument("--mask-mode", choices=("oracle", "spectral-gate"),
                        default="oracle")
    parser.add_argument("--no-plots", action="store_true")
    parser.add_argument("--save-cube", action="store_true")


def _parse_generator(text: str) -> dict:
    name, _, args = text.partition(":")
    gen: dict = {"name": name}
    if args:
        for pair in args.split(","):
            key, _, value = pair.partition("=")
            key = key.strip()
            value = value.strip()
            try:
                gen[key] = int(value)
            except ValueError:
                try:
                    gen[key] = float(value)
                except ValueError:
                    gen[key] = value
    return gen


def _build_config(args) -> ExperimentConfig:
    out = args.out or os.environ.get("VIBELAB_OUT", "out")
    generator = _parse_generator(args.generator) if args.generator else None
    return ExperimentConfig(
        scene_path=args.scene,
        scene_generator=generator,
        m_targets=args.m_targets,
        gamma=args.gamma,
        over_subtraction_alpha=args.alpha,
        spectral_floor_beta=args.beta,
        noise_frames=args.noise_frames,
        envelope_dim=args.envelope_dim,
        n_max=args.n_max,
        sad_band=tuple(args.band),
        amp_band=tuple(args.band),
        stft_window=args.window,
        stft_hop=args.hop,
        mask_mode=args.mask_mode,
        seed=args.seed,
        output_dir=out,
        write_plots=not args.no_plots,
        save_cube=args.save_cube,
        distances_m=getattr(args, "distances", None),
        speaker_counts=getattr(args, "speakers", None),
        arrangements=getattr(args, "arrangements", None),
        object_counts=getattr(args, "objects", None),
        seeds_per_cell=getattr(args, "seeds_per_cell", 1),
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vibelab",
        description="Desk-scale radar lab: simulate speech-induced object "
                    "vibrations and run the who-speaks-what pipeline.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in VERB_TO_STAGE:
        p = sub.add_parser(verb, help=f"run the chain through '{verb}'")
        _add_common(p)
    p = sub.add_parser("sweep", help="Cartesian sweep over scene axes")
    _add_common(p)
    p.add_argument("--distances", type=float, nargs="+", default=None,
                   help="mean radar-object distances in meters")
    p.add_argument("--speakers", type=int, nargs="+", default=None)
    p.add_argument("--arrangements", nargs="+", default=None)
    p.add_argument("--objects", type=int, nargs="+", default=None)
    p.add_argument("--seeds-per-cell", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = _build_config(args)
    try:
        if args.verb == "sweep":
            aggregate = run_sweep(config)
            print(f"sweep complete: {aggregate}")
        else:
            result = run_pipeline(config, stop_after=VERB_TO_STAGE[args.verb])
            if result.report is not None:
                r = result.report
                print(
                    f"success_rate={r.success_rate:.4f} snr_db={r.snr_db:.2f} "
                    f"psnr_db={r.psnr_db:.2f} baseline_snr_db={r.baseline_snr_db:.2f}"
                )
            print(f"artifacts written to {result.output_dir}")
    except VibeLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
