"""Search CNOT sequences for every architecture and store them as bundled data.

    python3 scripts/regenerate_sequences.py --architecture SingleHybridA SingleHybridB
    python3 scripts/regenerate_sequences.py --config configs/regenerate_st.json \\
        --architecture SingletTripletHybridA SingletTripletHybridB

Seeds are tried in order per architecture until one reaches the goal.  With
``--time-penalties`` every listed duration penalty is tried and the shortest
sequence (total duration) that reaches the goal is kept; otherwise the
penalty comes from the config.  The result is written to
``src/spincnot/data/regenerated`` with its settings in the provenance field.
"""

import argparse
import json
from dataclasses import replace
from pathlib import Path

from spincnot.optimizer import optimize, settings_for
from spincnot.sequence import BUNDLED, SimConfig, evaluator, save_sequence
from spincnot.spinmodel import Kind

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "src" / "spincnot" / "data" / "regenerated"


def search(kind, doc, seeds, goal, workers, **overrides):
    best = None
    for seed in seeds:
        s = settings_for(doc, kind, seed=seed, **overrides)
        r = optimize(kind, s, workers=workers)
        print(f"{kind.value} seed {seed} time_penalty {s.time_penalty}: objective {r.raw_objective:.3e}, "
              f"{len(r.best)} steps, duration {r.best.total_duration:.3f}, {r.generations} generations, "
              f"{r.wall_time:.0f} s", flush=True)
        if best is None or r.raw_objective < best[0].raw_objective:
            best = (r, s)
        if r.raw_objective <= goal:
            break
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=str(ROOT / "configs" / "regenerate.json"))
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3])
    ap.add_argument("--architecture", nargs="+", default=[k.value for k in Kind])
    ap.add_argument("--goal", type=float, default=1e-4, help="accept the first seed reaching this objective")
    ap.add_argument("--time-penalties", type=float, nargs="+",
                    help="scan these duration penalties and keep the shortest sequence reaching the goal")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    doc = json.loads(Path(args.config).read_text())
    OUT.mkdir(parents=True, exist_ok=True)
    summary_path = OUT / "summary.json"
    summary = json.loads(summary_path.read_text()) if summary_path.exists() else {}
    for name in args.architecture:
        kind = Kind(name)
        if args.time_penalties:
            found = [search(kind, doc, args.seeds, args.goal, args.workers, time_penalty=tp)
                     for tp in args.time_penalties]
            ok = [f for f in found if f[0].raw_objective <= args.goal]
            r, s = min(ok, key=lambda f: f[0].best.total_duration) if ok else min(
                found, key=lambda f: f[0].raw_objective)
        else:
            r, s = search(kind, doc, args.seeds, args.goal, args.workers)
        seq = r.best
        res = evaluator(kind, SimConfig(frame=s.frame, space=s.space)).evaluate(seq)
        seq = replace(seq, provenance=f"spincnot optimizer; settings {json.dumps(s.to_dict(), sort_keys=True)}")
        (OUT / BUNDLED[kind]).write_text(save_sequence(seq))
        summary[kind.value] = {
            "config": Path(args.config).name,
            "seed": s.seed,
            "time_penalty": s.time_penalty,
            "objective": r.raw_objective,
            "fidelity": res.fidelity,
            "steps": len(seq),
            "total_duration_h_over_jmax": seq.total_duration,
            "wall_time_s": r.wall_time,
        }
    summary_path.write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary, indent=2))


if __name__ == "__main__":
    main()
