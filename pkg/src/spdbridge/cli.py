"""Command line interface: ``spdbridge <subcommand> [options]``.

Every subcommand accepts ``--config FILE`` with ``key = value`` lines (keys are
the long option names with dashes or underscores); flags given on the command
line override the file.
"""
from __future__ import annotations

import argparse
import glob
import logging
import math
import sys
from pathlib import Path

from . import experiments as ex
from .linkage import RADIAL_KINDS
from .nystrom import CROSS_MODES, NystromConfig

log = logging.getLogger("spdbridge")


def _expand(patterns: list[str]) -> list[str]:
    out: list[str] = []
    for p in patterns:
        hits = sorted(glob.glob(p))
        out.extend(hits if hits else ([p] if Path(p).exists() else []))
    return out


def _config_argv(path: str) -> list[str]:
    argv: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise SystemExit(f"{path}:{lineno}: expected key = value")
            flag = "--" + key.strip().replace("_", "-")
            vals = val.replace(",", " ").split()
            if vals in (["true"], ["True"]):
                argv.append(flag)
            elif vals not in (["false"], ["False"]):
                argv.extend([flag, *vals])
    return argv


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spdbridge", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key = value file; flags override it")
        sp.add_argument("--root-seed", type=int, default=0)
        sp.add_argument("--jobs", type=int, default=1, help="worker processes")

    sp = sub.add_parser("rrg-validate", help="linkage / Frobenius gap / trilateration "
                        "study on random regular graphs")
    common(sp)
    sp.add_argument("--n", type=int, nargs="+", default=list(ex.DEFAULT_NS))
    sp.add_argument("--seeds", type=int, default=3)
    sp.add_argument("--r", type=int, default=6)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--m", type=int, default=8)
    sp.add_argument("--R", type=int, default=None, help="fixed radius (default ceil(log n))")
    sp.add_argument("--log-base", type=float, default=math.e)
    sp.add_argument("--scope", choices=["all_pairs", "node_anchor"], default="all_pairs")
    sp.add_argument("--out", required=True, help="per-cell CSV")
    sp.add_argument("--summary", help="per-n summary CSV")

    sp = sub.add_parser("diffusion-approx", help="Nystrom diagnostics over edge-list files")
    common(sp)
    sp.add_argument("--inputs", nargs="+", required=True, help="edge-list files or globs")
    sp.add_argument("--k", type=int, default=32)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--m", type=int, default=8)
    sp.add_argument("--lam", type=float, default=None, help="Tikhonov term (default scale-aware)")
    sp.add_argument("--mode", choices=CROSS_MODES, default="distance_driven")
    sp.add_argument("--R", type=int, default=None)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("emit-features", help="write DE / LapPE / RWSE / HKS tables")
    common(sp)
    sp.add_argument("--inputs", nargs="+", required=True)
    sp.add_argument("--kind", choices=ex.FEATURE_KINDS, required=True)
    sp.add_argument("--outdir", required=True)
    sp.add_argument("--k", type=int, default=16)
    sp.add_argument("--psi", choices=RADIAL_KINDS, default="exp_neg")
    sp.add_argument("--anchor-strategy", choices=["uniform", "fps"], default="uniform")
    sp.add_argument("--stats-from", nargs="+", help="training files for DE standardization")
    sp.add_argument("--m", type=int, default=8)
    sp.add_argument("--steps", type=int, nargs="+", default=list(ex.RWSE_STEPS))
    sp.add_argument("--times", type=float, nargs="+", default=list(ex.HKS_TIMES))
    sp.add_argument("--trunc-k", type=int, default=ex.HKS_TRUNC)

    sp = sub.add_parser("ablation-sweep", help="diagnostics over radial maps and anchor counts")
    common(sp)
    sp.add_argument("--inputs", nargs="+", required=True)
    sp.add_argument("--psi", nargs="*", choices=RADIAL_KINDS, default=list(RADIAL_KINDS))
    sp.add_argument("--ks", type=int, nargs="*", default=[4, 8, 16, 32])
    sp.add_argument("--fixed-k", type=int, default=16)
    sp.add_argument("--fixed-psi", choices=RADIAL_KINDS, default="exp_neg")
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--m", type=int, default=8)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("synth-corpus", help="write molecule-like edge lists")
    common(sp)
    sp.add_argument("--outdir", required=True)
    sp.add_argument("--count", type=int, default=20)
    sp.add_argument("--n-min", type=int, default=50)
    sp.add_argument("--n-max", type=int, default=200)
    return p


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if "--config" in argv:
        i = argv.index("--config")
        cfg_path = argv[i + 1]
        cmd_pos = next(j for j, a in enumerate(argv) if not a.startswith("-"))
        argv = argv[:cmd_pos + 1] + _config_argv(cfg_path) + argv[cmd_pos + 1:]
    return parser.parse_args(argv)


def _sidecar_path(out: str) -> str:
    return out + ".json"


def main(argv: list[str] | None = None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    config = {k: v for k, v in vars(args).items() if k != "config"}

    try:
        if args.command == "rrg-validate":
            rows = ex.rrg_validate(args.n, args.seeds, args.root_seed, args.r, args.t, args.m,
                                   args.R, args.log_base, args.scope, args.jobs)
            ex.write_csv(args.out, rows, ex.RRG_COLUMNS)
            summary = ex.summarize_rrg(rows)
            if args.summary:
                ex.write_csv(args.summary, summary, list(summary[0]) if summary else ["n"])
            ex.write_sidecar(_sidecar_path(args.out), config,
                             failed_cells=sum(1 for r in rows if r["error"]))
            for s in summary:
                print(f"n={s['n']:5d} R={s['R']} delta_hat={s['delta_hat_mean']:.4f}"
                      f"±{s['delta_hat_std']:.4f} frob={s['frob_gap_mean']:.4f}"
                      f"±{s['frob_gap_std']:.4f} tri_med={s['tri_error_median']:.4g}"
                      f" condA_med={s['cond_A_median']:.4g}")

        elif args.command == "diffusion-approx":
            paths = _expand(args.inputs)
            cfg = NystromConfig(k=args.k, t=args.t, m=args.m, lambda_reg=args.lam,
                                cross_mode=args.mode)
            rows, skipped = ex.diffusion_approx(paths, cfg, args.R, args.jobs)
            ex.write_csv(args.out, rows, ex.APPROX_COLUMNS)
            ex.write_sidecar(_sidecar_path(args.out), config, skipped=skipped)
            print(f"{len(rows)} graph(s) processed, {len(skipped)} skipped")

        elif args.command == "emit-features":
            paths = _expand(args.inputs)
            written = ex.emit_features(
                paths, args.kind, args.outdir, k=args.k, psi=args.psi,
                anchor_strategy=args.anchor_strategy,
                stats_paths=_expand(args.stats_from) if args.stats_from else None,
                m=args.m, steps=args.steps, times=args.times, trunc_k=args.trunc_k,
                root_seed=args.root_seed)
            print(f"wrote {len(written)} feature table(s) to {args.outdir}")

        elif args.command == "ablation-sweep":
            rows = ex.ablation_sweep(_expand(args.inputs), args.psi, args.ks, args.fixed_k,
                                     args.fixed_psi, args.t, args.m, args.root_seed)
            ex.write_csv(args.out, rows, ex.ABLATION_COLUMNS)
            ex.write_sidecar(_sidecar_path(args.out), config)
            print(f"{len(rows)} ablation row(s)")

        elif args.command == "synth-corpus":
            out = ex.synth_corpus(args.outdir, args.count, args.n_min, args.n_max, args.root_seed)
            print(f"wrote {len(out)} graph(s) to {args.outdir}")
    except (ValueError, OSError) as exc:
        print(f"spdbridge {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
