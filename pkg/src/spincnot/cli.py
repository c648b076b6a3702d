"""``spincnot`` command line: evaluate, optimize, noise-sweep, combined, couplings, export-matrix.

Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import noise as noise_mod
from .algebra import NonHermitian
from .couplings import DegenerateDenominator, couplings_csv, example_params, exchange_couplings, load_params
from .optimizer import SearchSettings, optimize
from .sequence import (
    SimConfig,
    bundled_sequence,
    evaluator,
    matrix_csv,
    resolve_sequence,
    save_sequence,
    to_ns,
)
from .spinmodel import DEFAULT_EZ, DEFAULT_J_FIXED, Kind, architecture

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("spincnot")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    architecture: str | None = None
    frame: str = "rotating"
    space: str = "restricted"
    ez: float = DEFAULT_EZ
    j_fixed: float = DEFAULT_J_FIXED
    ez_tilde: float | None = None
    amplitude: float = 1.0
    jmax_microev: float = 1.0
    sequence: str | None = None
    out: str = "results"
    search: dict = field(default_factory=dict)
    noise: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.jmax_microev <= 0:
            raise ConfigError("jmax_microev must be positive")
        if self.amplitude <= 0:
            raise ConfigError("amplitude must be positive")
        if self.architecture is not None:
            try:
                Kind(self.architecture)
            except ValueError:
                raise ConfigError(f"unknown architecture {self.architecture!r}") from None

    @classmethod
    def load(cls, path) -> RunConfig:
        try:
            d = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
        return cls(**d)

    @property
    def sim(self) -> SimConfig:
        return SimConfig(frame=self.frame, space=self.space, ez=self.ez, ez_tilde=self.ez_tilde,
                         j_fixed=self.j_fixed, amplitude=self.amplitude)


def _kinds(value: str | None) -> list[Kind]:
    if value in (None, "all"):
        return list(Kind)
    try:
        return [Kind(v) for v in value.split(",")]
    except ValueError:
        raise ConfigError(f"--architecture: unknown value {value!r}; choose from {[k.value for k in Kind]}") from None


def _sequence_for(kind: Kind, source: str):
    return bundled_sequence(kind, regenerated=(source == "regenerated"))


def _outdir(cfg: RunConfig) -> Path:
    p = Path(cfg.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _write(path: Path, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    print(f"wrote {path}")


# ---------------------------------------------------------------- commands


def cmd_evaluate(args, cfg: RunConfig) -> int:
    ref = args.sequence or cfg.sequence
    if not ref:
        raise ConfigError("--sequence is required")
    seq = resolve_sequence(ref).validate()
    res = evaluator(seq.architecture, cfg.sim).evaluate(seq)
    total = seq.total_duration
    print(f"architecture: {seq.architecture.value}")
    print(f"steps: {len(seq)}")
    print(f"total_duration_h_over_jmax: {total:.6g}")
    print(f"total_duration_ns: {to_ns(total, cfg.jmax_microev):.6g} (J^max = {cfg.jmax_microev:g} ueV)")
    print(f"frame: {res.frame}  space: {res.space}")
    print(f"cnot_objective: {res.objective:.6e}")
    print(f"entanglement_fidelity: {res.fidelity:.9f}")
    print(f"leakage: {res.leakage:.3e}")
    return EXIT_OK


def cmd_optimize(args, cfg: RunConfig) -> int:
    kinds = _kinds(args.architecture or cfg.architecture)
    if len(kinds) != 1:
        raise ConfigError("optimize needs a single --architecture")
    kind = kinds[0]
    settings = dict(cfg.search)
    settings.update(frame=cfg.frame, space=cfg.space)
    if args.seed is not None:
        settings["seed"] = args.seed
    if args.generations is not None:
        settings["max_generations"] = args.generations
    s = SearchSettings.from_dict(settings)
    print(f"seed: {s.seed}")
    start = resolve_sequence(args.start).validate() if args.start else None
    r = optimize(kind, s, workers=args.workers, seed_sequence=start)
    out = _outdir(cfg)
    stem = f"optimized_{kind.value}_seed{s.seed}"
    _write(out / f"{stem}.json", save_sequence(r.best))
    _write(out / f"{stem}_history.csv", r.history_csv())
    print(f"raw_objective: {r.raw_objective:.6e}  steps: {len(r.best)}  generations: {r.generations}")
    if r.no_progress:
        print(f"no progress for {s.stall_generations} generations; search stopped early")
    return EXIT_OK


def _noise_spec(cfg: RunConfig, preset: dict | None, args) -> noise_mod.NoiseSpec:
    base = dict(preset.get("noise", {})) if preset else {}
    base.update(cfg.noise)
    if args.trials is not None:
        base["trials"] = args.trials
    if args.seed is not None:
        base["master_seed"] = args.seed
    return noise_mod.NoiseSpec.from_dict(base)


def cmd_noise_sweep(args, cfg: RunConfig) -> int:
    preset = noise_mod.load_preset(args.preset)
    spec = _noise_spec(cfg, preset, args)
    if args.alpha is not None:
        spec = noise_mod.NoiseSpec.from_dict({**spec.to_dict(), "rtn_alpha": args.alpha})
    channels = args.channels.split(",") if args.channels else list(spec.channels)
    for ch in channels:
        if ch not in noise_mod.CHANNELS:
            raise ConfigError(f"--channels: unknown channel {ch!r}")
    print(f"seed: {spec.master_seed}")
    out = _outdir(cfg)
    for kind in _kinds(args.architecture or cfg.architecture):
        seq = resolve_sequence(args.sequence) if args.sequence else _sequence_for(kind, args.sequences)
        if seq.architecture != kind:
            raise ConfigError(f"sequence is for {seq.architecture.value}, not {kind.value}")
        for ch in channels:
            values = noise_mod.sweep_values(preset, ch)
            if args.points is not None:
                values = values[:: max(1, len(values) // args.points)]
            rows = noise_mod.sweep(kind, seq, ch, values, spec, cfg.sim, args.workers)
            _write(out / f"sweep_{ch}_{kind.value}.csv", noise_mod.sweep_csv(ch, rows))
    return EXIT_OK


def cmd_combined(args, cfg: RunConfig) -> int:
    preset = noise_mod.load_preset(args.preset)
    spec = _noise_spec(cfg, preset, args)
    print(f"seed: {spec.master_seed}")
    lines = ["architecture,steps,total_duration_h_over_jmax,mean_infidelity,standard_error,mean_leakage,trials"]
    for kind in _kinds(args.architecture or cfg.architecture):
        seq = _sequence_for(kind, args.sequences)
        r = noise_mod.monte_carlo_fidelity(kind, seq, spec, cfg.sim, args.workers)
        lines.append(f"{kind.value},{len(seq)},{seq.total_duration!r},{r.mean_infidelity!r},"
                     f"{r.standard_error!r},{r.mean_leakage!r},{r.trials}")
        print(f"{kind.value}: 1-F = {r.mean_infidelity:.3e} +- {r.standard_error:.1e}")
    _write(_outdir(cfg) / f"combined_{Path(args.preset).stem}.csv", "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_couplings(args, cfg: RunConfig) -> int:
    kinds = _kinds(args.architecture or cfg.architecture)
    if args.params and len(kinds) != 1:
        raise ConfigError("--params needs a single --architecture")
    blocks = []
    for kind in kinds:
        p = load_params(args.params) if args.params else example_params(kind)
        j = exchange_couplings(architecture(kind), p)
        blocks.append((kind, couplings_csv(j, p.units)))
    if args.out or len(blocks) > 1:
        out = _outdir(cfg)
        for kind, text in blocks:
            _write(out / f"couplings_{kind.value}.csv", text)
    else:
        sys.stdout.write(blocks[0][1])
    return EXIT_OK


def cmd_export_matrix(args, cfg: RunConfig) -> int:
    ref = args.sequence or cfg.sequence
    if not ref:
        raise ConfigError("--sequence is required")
    seq = resolve_sequence(ref).validate()
    res = evaluator(seq.architecture, cfg.sim).evaluate(seq)
    u = {"logical": res.u_logical, "tracked": res.u6}[args.block]
    text = matrix_csv(u)
    if args.out:
        _write(_outdir(cfg) / f"matrix_{seq.architecture.value}_{args.block}.csv", text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="master seed for stochastic commands")
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1, help="worker processes")
    common.add_argument("--out", help="output directory")
    common.add_argument("--frame", choices=("rotating", "lab"))
    common.add_argument("--space", choices=("restricted", "full"))
    common.add_argument("--trials", type=int, help="Monte Carlo trials (overrides config)")
    common.add_argument("--jmax", type=float, dest="jmax_microev", help="J^max in ueV for ns conversion")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="spincnot", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("evaluate", parents=[common], help="noiseless fidelity of a sequence")
    e.add_argument("--sequence", help="sequence file or bundled name")

    o = sub.add_parser("optimize", parents=[common], help="search for a CNOT sequence")
    o.add_argument("--architecture")
    o.add_argument("--generations", type=int)
    o.add_argument("--start", help="sequence to seed the population with")

    src = dict(choices=("regenerated", "published"), default="regenerated",
               help="bundled sequences to use (default: regenerated)")
    n = sub.add_parser("noise-sweep", parents=[common], help="infidelity vs one noise parameter")
    n.add_argument("--preset", default="paper-si")
    n.add_argument("--architecture", help="one kind, comma list, or 'all'")
    n.add_argument("--sequence")
    n.add_argument("--sequences", **src)
    n.add_argument("--channels", help="comma list of tie,hyperfine,rtn")
    n.add_argument("--alpha", type=float, help="RTN coupling strength override")
    n.add_argument("--points", type=int, help="thin the sweep grid to about this many points")

    c = sub.add_parser("combined", parents=[common], help="all channels at a preset working point")
    c.add_argument("--preset", default="paper-si")
    c.add_argument("--architecture")
    c.add_argument("--sequences", **src)

    cp = sub.add_parser("couplings", parents=[common], help="exchange couplings from Hubbard parameters")
    cp.add_argument("--architecture")
    cp.add_argument("--params", help="HubbardParams JSON")

    x = sub.add_parser("export-matrix", parents=[common], help="modulus/phase CSV of a sequence propagator")
    x.add_argument("--sequence")
    x.add_argument("--block", choices=("logical", "tracked"), default="tracked")
    return p


COMMANDS = {
    "evaluate": cmd_evaluate,
    "optimize": cmd_optimize,
    "noise-sweep": cmd_noise_sweep,
    "combined": cmd_combined,
    "couplings": cmd_couplings,
    "export-matrix": cmd_export_matrix,
}


def _config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    for name in ("frame", "space", "jmax_microev", "out"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg, name, v)
    cfg.__post_init__()
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    return cfg


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except (NonHermitian, DegenerateDenominator, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError, FileNotFoundError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
