"""Trace both branches leaving a spectral point and write (omega, a11, a21) rows per branch."""

import argparse
from pathlib import Path

from vstates.continuation import branch_from_eigenvalue, branch_transcritical, emit_diagram
from vstates.io import DIAGRAM_HEAD, dump_branch, write_csv


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--b", type=float, default=0.4)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--transcritical", action="store_true", help="m = 2 crossing at lam_2 instead of pitchforks")
    p.add_argument("--outdir", default="diagram")
    args = p.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for which in ("plus", "minus"):
        if args.transcritical:
            br = branch_transcritical(args.b, which, steps=args.steps)
            tag = f"m2_b{args.b}_transcritical_{which}"
        else:
            br = branch_from_eigenvalue(args.m, args.b, which, steps=args.steps)
            tag = f"m{args.m}_b{args.b}_{which}"
        (out / f"{tag}.json").write_text(dump_branch(br, "json"), encoding="utf-8")
        (out / f"{tag}_diagram.csv").write_text(write_csv(DIAGRAM_HEAD, emit_diagram(br)), encoding="utf-8")
        print(f"{tag}: {len(br)} points, termination: {br.termination.value}")


if __name__ == "__main__":
    main()
