"""Monte Carlo gate fidelity under timing jitter, hyperfine fields and RTN.

Three channels, each drawing from its own random substream
``SeedSequence(master_seed, spawn_key=(channel_id, trial))``:

* TIE (timing jitter): an independent Gaussian offset added to every step
  duration, negative results clamped to zero.
* Hyperfine: one static Gaussian ``dEz`` per dot, held for the whole sequence.
* Charge noise: a single random-telegraph trajectory ``eta(t)`` spanning the
  sequence; step ``i`` has its exchange raised by ``alpha * <eta>_i``.  On
  ``Wait``/``EzStar`` steps the only exchange present is the fixed
  ``J_1R3R``, so that is what the noise perturbs there.

Trials are reduced in trial order, so a report depends only on the master
seed, never on the number of worker processes.
"""

from __future__ import annotations

import bisect
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources

import numpy as np

from .algebra import hermitian_eig
from .sequence import TWO_PI, Evaluator, GateSequence, SimConfig, Step
from .spinmodel import EZ_STAR, WAIT, Architecture, architecture

log = logging.getLogger(__name__)

CHANNELS = ("tie", "hyperfine", "rtn")
CHANNEL_ID = {"tie": 0, "hyperfine": 1, "rtn": 2}


@dataclass
class NoiseSpec:
    tie_sigma: float = 0.0
    hyperfine_rms: float = 0.0
    rtn_lambda: float = 0.0
    rtn_alpha: float = 0.0
    trials: int = 1000
    master_seed: int = 0
    channels: tuple[str, ...] = CHANNELS

    def __post_init__(self):
        for name in ("tie_sigma", "hyperfine_rms", "rtn_lambda", "rtn_alpha"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError(f"trials must be a positive integer, got {self.trials}")
        self.trials = int(self.trials)
        self.channels = tuple(self.channels)
        bad = set(self.channels) - set(CHANNELS)
        if bad:
            raise ValueError(f"unknown channels {sorted(bad)}; expected a subset of {CHANNELS}")

    def active(self, channel: str) -> bool:
        """Enabled and with non-zero strength; inactive channels draw nothing."""
        if channel not in self.channels:
            return False
        if channel == "tie":
            return self.tie_sigma > 0
        if channel == "hyperfine":
            return self.hyperfine_rms > 0
        return self.rtn_alpha > 0

    def only(self, channel: str) -> NoiseSpec:
        return replace(self, channels=(channel,))

    @classmethod
    def from_dict(cls, d: dict) -> NoiseSpec:
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown noise settings: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["channels"] = list(self.channels)
        return d


@dataclass
class FidelityReport:
    mean_fidelity: float
    mean_infidelity: float
    standard_error: float
    mean_leakage: float
    trials: int
    spec: NoiseSpec
    clamped_steps: int = 0
    fidelities: np.ndarray | None = field(default=None, repr=False)


# ---------------------------------------------------------------- channels


def channel_rng(master_seed: int, channel: str, trial: int) -> np.random.Generator:
    ss = np.random.SeedSequence(master_seed, spawn_key=(CHANNEL_ID[channel], trial))
    return np.random.default_rng(ss)


def apply_tie(seq: GateSequence, sigma: float, rng: np.random.Generator) -> tuple[GateSequence, int]:
    """Add ``N(0, sigma)`` to every step duration; returns the sequence and the clamp count."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return seq, 0
    d = seq.durations + rng.normal(0.0, sigma, size=len(seq))
    clamped = int(np.count_nonzero(d < 0))
    return seq.with_durations(np.maximum(d, 0.0)), clamped


def sample_hyperfine(arch, rms: float, rng: np.random.Generator) -> np.ndarray:
    """One static Gaussian ``dEz`` (J^max) per dot."""
    if rms < 0:
        raise ValueError("rms must be >= 0")
    a = arch if isinstance(arch, Architecture) else architecture(arch)
    return rng.normal(0.0, rms, size=a.n_dots) if rms > 0 else np.zeros(a.n_dots)


@dataclass(frozen=True)
class RTNTrajectory:
    """Telegraph signal starting at +1 and flipping at each ``jumps`` time."""

    jumps: tuple[float, ...]
    horizon: float

    def value(self, t: float) -> float:
        return -1.0 if bisect.bisect_right(self.jumps, t) % 2 else 1.0

    def jump_count(self, t0: float, t1: float) -> int:
        return bisect.bisect_right(self.jumps, t1) - bisect.bisect_right(self.jumps, t0)

    def integral(self, t: float) -> float:
        """``int_0^t eta`` from the jump times, exact."""
        acc, last, sign = 0.0, 0.0, 1.0
        for tau in self.jumps:
            if tau >= t:
                break
            acc += sign * (tau - last)
            last, sign = tau, -sign
        return acc + sign * (t - last)

    def average(self, t0: float, t1: float) -> float:
        """Mean of ``eta`` over ``[t0, t1]``; the instantaneous value when ``t0 == t1``."""
        if t1 < t0:
            raise ValueError("interval end precedes start")
        if t1 == t0:
            return self.value(t0)
        avg = (self.integral(t1) - self.integral(t0)) / (t1 - t0)
        return min(1.0, max(-1.0, avg))

    def step_averages(self, durations) -> np.ndarray:
        edges = np.concatenate(([0.0], np.cumsum(durations)))
        return np.array([self.average(a, b) for a, b in zip(edges[:-1], edges[1:])])


def rtn_trajectory(lam: float, horizon: float, rng: np.random.Generator) -> RTNTrajectory:
    """Jump times as cumulative sums of ``-ln(p)/lam`` with ``p`` uniform in (0, 1)."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    if not horizon > 0:
        raise ValueError("horizon must be > 0")
    jumps = []
    if lam > 0:
        t = 0.0
        while True:
            p = 1.0 - rng.random()  # in (0, 1]
            while p >= 1.0:
                p = 1.0 - rng.random()
            t += -math.log(p) / lam
            if t > horizon:
                break
            jumps.append(t)
    return RTNTrajectory(tuple(jumps), float(horizon))


def apply_charge_noise(seq: GateSequence, alpha: float, trajectory: RTNTrajectory,
                       j_fixed: float = 0.5, amplitude: float = 1.0):
    """Per-step ``(amplitudes, j_fixed)`` overrides with ``dJ_i = alpha * <eta>_i``.

    Pulsed steps get ``amplitude + dJ_i``; ``Wait``/``EzStar`` steps get
    ``j_fixed + dJ_i`` on the always-on ``J_1R3R`` instead.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    dj = alpha * trajectory.step_averages(seq.durations)
    amps, fixed = [], []
    for s, d in zip(seq.steps, dj):
        if s.interaction in (WAIT, EZ_STAR):
            amps.append(amplitude)
            fixed.append(j_fixed + d)
        else:
            amps.append(amplitude + d)
            fixed.append(j_fixed)
    return np.array(amps), np.array(fixed)


# ------------------------------------------------------------------ trials


def _propagate(ev: Evaluator, labels, durations, amps, fixed, per_dot):
    """Like :meth:`Evaluator.propagate` but reuses decompositions of repeated steps."""
    if amps is None and per_dot is None:
        return ev.propagate(labels, durations)
    cfg = ev.config
    cache = {}
    u = np.eye(ev.dim, dtype=complex)
    pd = () if per_dot is None else tuple(per_dot)
    for k, (label, t) in enumerate(zip(labels, durations)):
        a = cfg.amplitude if amps is None else float(amps[k])
        j = cfg.j_fixed if fixed is None else float(fixed[k])
        key = (label, a, j)
        hit = cache.get(key)
        if hit is None:
            w, v = hermitian_eig(ev.hamiltonian(label, a, j, pd))
            hit = cache[key] = (w, v, v.conj().T)
        w, v, vh = hit
        u = (v * np.exp(-1j * TWO_PI * t * w)) @ (vh @ u)
    return u


def run_trial(ev: Evaluator, seq: GateSequence, spec: NoiseSpec, trial: int):
    """One noisy realisation; returns ``(fidelity, leakage, clamped_steps)``."""
    clamped = 0
    s = seq
    if spec.active("tie"):
        s, clamped = apply_tie(seq, spec.tie_sigma, channel_rng(spec.master_seed, "tie", trial))
    per_dot = None
    if spec.active("hyperfine"):
        per_dot = sample_hyperfine(ev.arch, spec.hyperfine_rms, channel_rng(spec.master_seed, "hyperfine", trial))
    amps = fixed = None
    if spec.active("rtn"):
        horizon = max(s.total_duration, 1e-300)
        traj = rtn_trajectory(spec.rtn_lambda, horizon, channel_rng(spec.master_seed, "rtn", trial))
        amps, fixed = apply_charge_noise(s, spec.rtn_alpha, traj, ev.config.j_fixed, ev.config.amplitude)
    u = _propagate(ev, s.labels, s.durations, amps, fixed, per_dot)
    r = ev.result(u, s.total_duration)
    return r.fidelity, r.leakage, clamped


_WORKER: dict = {}


def _trial_chunk(args):
    kind, cfg, seq, spec, start, stop = args
    ev = _WORKER.get((kind, cfg))
    if ev is None:
        ev = _WORKER[(kind, cfg)] = Evaluator(architecture(kind), cfg)
    out = np.empty((stop - start, 3))
    for i, trial in enumerate(range(start, stop)):
        out[i] = run_trial(ev, seq, spec, trial)
    return out


def monte_carlo_fidelity(arch, seq: GateSequence, spec: NoiseSpec, config: SimConfig = SimConfig(),
                         workers: int = 1, keep_samples: bool = False) -> FidelityReport:
    """Mean entanglement fidelity vs CNOT over ``spec.trials`` noisy realisations."""
    kind = (arch if isinstance(arch, Architecture) else architecture(arch)).kind
    seq = seq.validate()
    if seq.architecture != kind:
        raise ValueError(f"sequence is for {seq.architecture.value}, not {kind.value}")
    n = spec.trials
    if workers > 1 and n > 1:
        bounds = np.linspace(0, n, min(n, 4 * workers) + 1).astype(int)
        jobs = [(kind, config, seq, spec, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ProcessPoolExecutor(workers) as pool:
            data = np.concatenate(list(pool.map(_trial_chunk, jobs)))
    else:
        data = _trial_chunk((kind, config, seq, spec, 0, n))
    fid, leak, clamp = data[:, 0], data[:, 1], data[:, 2]
    infid = 1.0 - fid
    se = float(np.std(infid, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    clamped = int(clamp.sum())
    if clamped:
        log.info("TIE clamped %d negative step durations over %d trials", clamped, n)
    return FidelityReport(
        mean_fidelity=float(min(1.0, max(0.0, fid.mean()))),
        mean_infidelity=float(infid.mean()),
        standard_error=se,
        mean_leakage=float(leak.mean()),
        trials=n,
        spec=spec,
        clamped_steps=clamped,
        fidelities=fid if keep_samples else None,
    )


# ------------------------------------------------------------------ sweeps

SWEEP_UNITS = {
    "tie": "tie_sigma_h_over_jmax",
    "hyperfine": "hyperfine_rms_jmax",
    "rtn": "rtn_correlation_time_h_over_jmax",
}


def log_grid(start: float, stop: float, points_per_decade: int = 20) -> np.ndarray:
    """Log-spaced grid from ``start`` to ``stop`` inclusive."""
    if not 0 < start < stop:
        raise ValueError("need 0 < start < stop")
    n = int(round(math.log10(stop / start) * points_per_decade)) + 1
    return np.logspace(math.log10(start), math.log10(stop), n)


def spec_for(channel: str, value: float, base: NoiseSpec) -> NoiseSpec:
    """Single-channel spec at one sweep point.  RTN sweeps run over ``1/lambda``."""
    if channel == "tie":
        return replace(base, channels=("tie",), tie_sigma=float(value))
    if channel == "hyperfine":
        return replace(base, channels=("hyperfine",), hyperfine_rms=float(value))
    if channel == "rtn":
        return replace(base, channels=("rtn",), rtn_lambda=1.0 / float(value))
    raise ValueError(f"unknown channel {channel!r}")


def sweep(arch, seq: GateSequence, channel: str, values, base: NoiseSpec,
          config: SimConfig = SimConfig(), workers: int = 1) -> list[tuple[float, FidelityReport]]:
    return [(float(v), monte_carlo_fidelity(arch, seq, spec_for(channel, v, base), config, workers))
            for v in values]


def sweep_csv(channel: str, rows) -> str:
    lines = [f"{SWEEP_UNITS[channel]},mean_infidelity,standard_error,mean_leakage,trials"]
    for v, r in rows:
        lines.append(f"{v!r},{r.mean_infidelity!r},{r.standard_error!r},{r.mean_leakage!r},{r.trials}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------- presets

PRESETS = ("paper-si", "paper-gaas")


def load_preset(name_or_path: str) -> dict:
    """A bundled preset by name (``paper-si``, ``paper-gaas``) or a JSON file path."""
    if name_or_path in PRESETS:
        text = resources.files("spincnot.data").joinpath("presets", f"{name_or_path}.json").read_text()
    else:
        with open(name_or_path) as fh:
            text = fh.read()
    return json.loads(text)


def preset_spec(preset: dict, **overrides) -> NoiseSpec:
    d = dict(preset.get("noise", {}))
    d.update({k: v for k, v in overrides.items() if v is not None})
    return NoiseSpec.from_dict(d)


def sweep_values(preset: dict, channel: str) -> np.ndarray:
    g = preset["sweeps"][channel]
    return log_grid(g["start"], g["stop"], g.get("points_per_decade", 20))


__all__ = [
    "CHANNELS",
    "FidelityReport",
    "NoiseSpec",
    "RTNTrajectory",
    "apply_charge_noise",
    "apply_tie",
    "channel_rng",
    "load_preset",
    "log_grid",
    "monte_carlo_fidelity",
    "preset_spec",
    "rtn_trajectory",
    "run_trial",
    "sample_hyperfine",
    "spec_for",
    "sweep",
    "sweep_csv",
    "sweep_values",
]
