"""Hybrid genetic / Nelder-Mead search for CNOT pulse sequences.

The genetic layer searches over the ordering of interactions (and, coarsely,
their durations); the simplex layer refines the durations of a fixed ordering.
Fitness is the CNOT objective plus a per-step gate penalty and, optionally,
a penalty on the total duration.

Reproducibility: every random decision draws from a stream derived from
``(seed, generation, slot)``, so a run is a pure function of its settings and
does not depend on how many worker processes evaluate fitness.
"""

from __future__ import annotations

import json
import logging
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .sequence import Evaluator, GateSequence, SimConfig, Step, evaluator
from .spinmodel import Kind, architecture

log = logging.getLogger(__name__)


class NoProgress(UserWarning):
    """The best penalized objective stalled; the search stopped early."""

@dataclass
class SearchSettings:
    population_size: int = 64
    max_generations: int = 2000
    rate_duration: float = 0.3
    rate_label: float = 0.1
    rate_insert: float = 0.05
    rate_delete: float = 0.05
    crossover_rate: float = 0.7
    gate_penalty: float = 1e-3
    time_penalty: float = 0.0
    refine_every: int = 25
    refine_top: int = 4
    refine_iterations: int = 400
    polish_iterations: int = 5000
    polish_restarts: int = 8
    duration_bounds: tuple[float, float] = (0.0, 5.0)
    duration_sigma: float = 0.05
    init_steps: tuple[int, int] = (8, 24)
    max_steps: int = 48
    tournament_size: int = 3
    elite_count: int = 2
    immigrants: int = 0
    stall_generations: int = 500
    target_objective: float = 1e-4
    time_limit: float | None = None
    seed: int = 0
    frame: str = "rotating"
    space: str = "restricted"

    def __post_init__(self):
        for name in ("rate_duration", "rate_label", "rate_insert", "rate_delete", "crossover_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} is not a probability")
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.gate_penalty < 0 or self.time_penalty < 0:
            raise ValueError("penalties must be >= 0")
        lo, hi = self.duration_bounds
        if not 0 <= lo < hi:
            raise ValueError(f"bad duration bounds {self.duration_bounds}")
        if not 1 <= self.init_steps[0] <= self.init_steps[1] <= self.max_steps:
            raise ValueError(f"bad init_steps {self.init_steps} for max_steps {self.max_steps}")
        self.duration_bounds = (float(lo), float(hi))
        self.init_steps = tuple(self.init_steps)

    @classmethod
    def from_dict(cls, d: dict) -> SearchSettings:
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown search settings: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def sim_config(self) -> SimConfig:
        return SimConfig(frame=self.frame, space=self.space)


@dataclass
class Individual:
    labels: tuple[str, ...]
    durations: np.ndarray
    created: int
    raw: float = math.nan
    penalized: float = math.nan

    def rank_key(self):
        return (self.penalized, len(self.labels), self.created)

    def to_sequence(self, kind, name="", provenance="") -> GateSequence:
        steps = tuple(Step(l, float(t)) for l, t in zip(self.labels, self.durations))
        return GateSequence(Kind(kind), steps, name, provenance)


@dataclass
class SearchResult:
    best: GateSequence
    raw_objective: float
    penalized_objective: float
    history: list[tuple[int, float, float, int]] = field(default_factory=list)
    evaluations: int = 0
    wall_time: float = 0.0
    generations: int = 0
    no_progress: bool = False
    seed: int = 0

    def history_csv(self) -> str:
        lines = ["generation,best_penalized_objective,mean_penalized_objective,best_steps"]
        lines += [f"{g},{b!r},{m!r},{n}" for g, b, m, n in self.history]
        return "\n".join(lines) + "\n"


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def penalized_objective(seq: GateSequence, gate_penalty: float = 1e-3,
                        config: SimConfig = SimConfig()) -> float:
    """CNOT objective plus ``gate_penalty`` per step (steps, not time, are charged)."""
    ev = evaluator(seq.validate().architecture, config)
    return ev.objective(seq.labels, seq.durations) + gate_penalty * len(seq)


# ----------------------------------------------------------------- operators


def mutate(seq: GateSequence, rng: np.random.Generator, settings: SearchSettings = SearchSettings()) -> GateSequence:
    """Random duration jitter, label swaps, insertions and deletions.

    Per-step probabilities for jitter and relabeling, per-sequence
    probabilities for one insertion and one deletion.  Durations are clamped
    to the bounds; the result is always a valid sequence.
    """
    allowed = architecture(seq.architecture).step_labels
    labels, durs = _mutate_genes(list(seq.labels), list(seq.durations), allowed, rng, settings)
    return replace(seq, steps=tuple(Step(l, float(t)) for l, t in zip(labels, durs)))


def _mutate_genes(labels, durs, allowed, rng, s: SearchSettings):
    lo, hi = s.duration_bounds
    if s.rate_duration or s.rate_label:
        for k in range(len(labels)):
            if s.rate_duration and rng.random() < s.rate_duration:
                durs[k] = min(hi, max(lo, durs[k] + rng.normal(0.0, s.duration_sigma)))
            if s.rate_label and len(allowed) > 1 and rng.random() < s.rate_label:
                choices = [a for a in allowed if a != labels[k]]
                labels[k] = choices[rng.integers(len(choices))]
    if s.rate_insert and len(labels) < s.max_steps and rng.random() < s.rate_insert:
        pos = int(rng.integers(len(labels) + 1))
        labels.insert(pos, allowed[rng.integers(len(allowed))])
        durs.insert(pos, float(rng.uniform(lo, min(hi, lo + 1.0))))
    if s.rate_delete and len(labels) > 1 and rng.random() < s.rate_delete:
        pos = int(rng.integers(len(labels)))
        del labels[pos]
        del durs[pos]
    return labels, durs


def crossover(a: GateSequence, b: GateSequence, rng: np.random.Generator,
              cut: int | None = None) -> tuple[GateSequence, GateSequence]:
    """Single-point crossover on the step lists.  ``cut=0`` swaps the parents."""
    if cut is None:
        cut = int(rng.integers(min(len(a), len(b)) + 1))
    c1 = replace(a, steps=a.steps[:cut] + b.steps[cut:])
    c2 = replace(b, steps=b.steps[:cut] + a.steps[cut:])
    return c1, c2


def compact(labels, durations, hi: float):
    """Drop zero-length steps and merge equal neighbours; the propagator is unchanged."""
    out_l, out_d = [], []
    for l, t in zip(labels, durations):
        if t <= 0.0:
            continue
        if out_l and out_l[-1] == l and out_d[-1] + t <= hi:
            out_d[-1] += t
        else:
            out_l.append(l)
            out_d.append(float(t))
    if not out_l:
        out_l, out_d = [labels[0]], [0.0]
    return out_l, out_d


# ------------------------------------------------------------------- simplex


def nelder_mead(f, x0, lo: float, hi: float, iterations: int, step: float = 0.05,
                ftol: float = 1e-14, xtol: float = 1e-12):
    """Bounded Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2).

    Trial points are clipped into ``[lo, hi]``.  Returns ``(x_best, f_best,
    evaluations)``; ``x0`` is a vertex, so the result is never worse than it.
    """
    x0 = np.clip(np.asarray(x0, dtype=float), lo, hi)
    n = x0.size
    simplex = np.empty((n + 1, n))
    simplex[0] = x0
    for i in range(n):
        v = x0.copy()
        v[i] = v[i] + step if v[i] + step <= hi else v[i] - step
        simplex[i + 1] = np.clip(v, lo, hi)
    fv = np.array([f(v) for v in simplex])
    nev = n + 1
    for _ in range(iterations):
        order = np.argsort(fv, kind="stable")
        simplex, fv = simplex[order], fv[order]
        if fv[-1] - fv[0] <= ftol and np.max(np.abs(simplex[1:] - simplex[0])) <= xtol:
            break
        centroid = simplex[:-1].mean(axis=0)
        xr = np.clip(centroid + (centroid - simplex[-1]), lo, hi)
        fr = f(xr)
        nev += 1
        if fr < fv[0]:
            xe = np.clip(centroid + 2.0 * (centroid - simplex[-1]), lo, hi)
            fe = f(xe)
            nev += 1
            if fe < fr:
                simplex[-1], fv[-1] = xe, fe
            else:
                simplex[-1], fv[-1] = xr, fr
        elif fr < fv[-2]:
            simplex[-1], fv[-1] = xr, fr
        else:
            if fr < fv[-1]:
                xc = np.clip(centroid + 0.5 * (xr - centroid), lo, hi)
            else:
                xc = np.clip(centroid + 0.5 * (simplex[-1] - centroid), lo, hi)
            fc = f(xc)
            nev += 1
            if fc < min(fr, fv[-1]):
                simplex[-1], fv[-1] = xc, fc
            else:
                simplex[1:] = simplex[0] + 0.5 * (simplex[1:] - simplex[0])
                fv[1:] = [f(v) for v in simplex[1:]]
                nev += n
    k = int(np.argmin(fv))
    return simplex[k].copy(), float(fv[k]), nev


def _refine_genes(ev: Evaluator, labels, durations, iterations, bounds, restarts=1, time_penalty=0.0):
    """Nelder-Mead on ``objective + time_penalty * total``; returns (x, raw objective, evaluations)."""
    lo, hi = bounds

    def g(d):
        return ev.objective(labels, d) + time_penalty * float(np.sum(d))

    x = np.asarray(durations, dtype=float)
    gx = g(x)
    nev = 1
    for _ in range(max(1, restarts)):
        # restarting from a fresh full-size simplex escapes the collapsed one
        xn, gn, k = nelder_mead(g, x, lo, hi, iterations)
        nev += k
        gain = gx - gn
        if gn < gx:
            x, gx = xn, gn
        # a restart that buys less than 10% is not worth another
        if gain <= 0.1 * gx or gx < 1e-9:
            break
    return x, ev.objective(labels, x), nev + 1


def simplex_refine(seq: GateSequence, iterations: int = 400, settings: SearchSettings = SearchSettings(),
                   restarts: int = 1) -> GateSequence:
    """Nelder-Mead over the step durations of ``seq`` with its ordering fixed."""
    if len(seq) < 1:
        raise ValueError("need at least one step")
    ev = evaluator(seq.validate().architecture, settings.sim_config)
    x, _, _ = _refine_genes(ev, seq.labels, seq.durations, iterations, settings.duration_bounds, restarts)
    return seq.with_durations(x)


# ---------------------------------------------------------------- worker side

_WORKER_EV: dict = {}


def _worker_eval(args):
    kind, cfg, labels, durs = args
    ev = _WORKER_EV.get((kind, cfg))
    if ev is None:
        ev = _WORKER_EV[(kind, cfg)] = Evaluator(architecture(kind), cfg)
    return ev.objective(labels, durs)


def _worker_refine(args):
    kind, cfg, labels, durs, iters, bounds, restarts, tp = args
    ev = _WORKER_EV.get((kind, cfg))
    if ev is None:
        ev = _WORKER_EV[(kind, cfg)] = Evaluator(architecture(kind), cfg)
    return _refine_genes(ev, labels, durs, iters, bounds, restarts, tp)


class _Runner:
    """Maps work either in-process or over a process pool, preserving order."""

    def __init__(self, kind, cfg, workers: int):
        self.kind, self.cfg = kind, cfg
        self.pool = ProcessPoolExecutor(workers) if workers > 1 else None
        self.ev = Evaluator(architecture(kind), cfg)
        self.workers = workers

    def evaluate(self, genes):
        if self.pool is None:
            return [self.ev.objective(l, d) for l, d in genes]
        args = [(self.kind, self.cfg, l, d) for l, d in genes]
        return list(self.pool.map(_worker_eval, args, chunksize=max(1, len(args) // (4 * self.workers))))

    def refine(self, genes, iters, bounds, restarts=1, time_penalty=0.0):
        if self.pool is None:
            return [_refine_genes(self.ev, l, d, iters, bounds, restarts, time_penalty) for l, d in genes]
        args = [(self.kind, self.cfg, l, d, iters, bounds, restarts, time_penalty) for l, d in genes]
        return list(self.pool.map(_worker_refine, args))

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()


# ------------------------------------------------------------------- search


def _tournament(pop, rng, size):
    picks = rng.integers(len(pop), size=min(size, len(pop)))
    return min((pop[i] for i in picks), key=Individual.rank_key)


def optimize(arch, settings: SearchSettings = SearchSettings(), workers: int = 1,
             seed_sequence: GateSequence | None = None, progress=None) -> SearchResult:
    """Genetic search with periodic simplex refinement of the best individuals.

    Stops when the best raw objective reaches ``target_objective``, after
    ``max_generations``, or when the best penalized value has not improved for
    ``stall_generations`` (reported as ``no_progress``).  The best individual
    is then polished with a longer simplex run.
    """
    kind = architecture(arch if not hasattr(arch, "kind") else arch.kind).kind
    s = settings
    allowed = architecture(kind).step_labels
    lo, hi = s.duration_bounds
    cfg = s.sim_config
    runner = _Runner(kind, cfg, workers)
    t0 = time.perf_counter()
    created = 0
    nev = 0

    def penalize(raw, labels, durs):
        return raw + s.gate_penalty * len(labels) + s.time_penalty * float(np.sum(durs))

    def score(inds):
        nonlocal nev
        todo = [ind for ind in inds if math.isnan(ind.raw)]
        vals = runner.evaluate([(ind.labels, ind.durations) for ind in todo])
        nev += len(todo)
        for ind, v in zip(todo, vals):
            ind.raw = v
            ind.penalized = penalize(v, ind.labels, ind.durations)

    def make(labels, durs):
        nonlocal created
        if len(labels) > 1:
            # drop zero-length steps only; merging equal neighbours here would
            # make the length drift downward generation after generation
            keep = [k for k, t in enumerate(durs) if t > 0.0] or [0]
            labels, durs = [labels[k] for k in keep], [durs[k] for k in keep]
        ind = Individual(tuple(labels), np.asarray(durs, dtype=float), created)
        created += 1
        return ind

    def fresh(rng):
        n = int(rng.integers(s.init_steps[0], s.init_steps[1] + 1))
        labels = [allowed[j] for j in rng.integers(len(allowed), size=n)]
        return make(labels, list(rng.uniform(lo, min(hi, lo + 1.0), size=n)))

    pop = []
    for i in range(s.population_size):
        if i == 0 and seed_sequence is not None:
            pop.append(make(list(seed_sequence.labels), list(seed_sequence.durations)))
        else:
            pop.append(fresh(_rng(s.seed, 0, i)))
    score(pop)
    pop.sort(key=Individual.rank_key)

    history = []
    best_val = pop[0].penalized
    last_improvement = 0
    no_progress = False
    gen = 0
    try:
        while True:
            history.append((gen, pop[0].penalized, float(np.mean([p.penalized for p in pop])), len(pop[0].labels)))
            if progress is not None:
                progress(gen, pop[0])
            if pop[0].raw <= s.target_objective or gen >= s.max_generations:
                break
            if s.time_limit is not None and time.perf_counter() - t0 > s.time_limit:
                log.warning("time limit of %.0f s reached at generation %d", s.time_limit, gen)
                break
            if gen - last_improvement >= s.stall_generations:
                no_progress = True
                warnings.warn(NoProgress(f"best unchanged for {s.stall_generations} generations; "
                                         f"stopping at generation {gen}"), stacklevel=2)
                break
            gen += 1
            elite = pop[: s.elite_count]
            children = []
            slot = 0
            for j in range(min(s.immigrants, s.population_size - len(elite))):
                children.append(fresh(_rng(s.seed, gen, 2**20 + j)))
            while len(elite) + len(children) < s.population_size:
                rng = _rng(s.seed, gen, slot)
                slot += 1
                a = _tournament(pop, rng, s.tournament_size)
                b = _tournament(pop, rng, s.tournament_size)
                la, da = list(a.labels), list(a.durations)
                lb, db = list(b.labels), list(b.durations)
                if rng.random() < s.crossover_rate:
                    cut = int(rng.integers(min(len(la), len(lb)) + 1))
                    la, lb = la[:cut] + lb[cut:], lb[:cut] + la[cut:]
                    da, db = da[:cut] + db[cut:], db[:cut] + da[cut:]
                for l, d in ((la, da), (lb, db)):
                    l, d = _mutate_genes(l, d, allowed, rng, s)
                    if len(l) > s.max_steps:
                        l, d = l[: s.max_steps], d[: s.max_steps]
                    children.append(make(l, d))
            children = children[: s.population_size - len(elite)]
            score(children)
            pop = sorted(elite + children, key=Individual.rank_key)

            if s.refine_every and gen % s.refine_every == 0:
                # distinct orderings only; clones of one ordering waste refinement
                top, seen = [], set()
                for ind in pop:
                    if ind.labels not in seen:
                        seen.add(ind.labels)
                        top.append(ind)
                        if len(top) == s.refine_top:
                            break
                outs = runner.refine([(t.labels, t.durations) for t in top], s.refine_iterations,
                                     s.duration_bounds, time_penalty=s.time_penalty)
                for t, (x, fx, k) in zip(top, outs):
                    nev += k
                    pen = penalize(fx, t.labels, x)
                    if pen < t.penalized:
                        t.durations, t.raw, t.penalized = x, fx, pen
                pop.sort(key=Individual.rank_key)

            if pop[0].penalized < best_val:
                best_val = pop[0].penalized
                last_improvement = gen

        best = pop[0]
        if s.polish_iterations:
            (x, fx, k), = runner.refine([(best.labels, best.durations)], s.polish_iterations,
                                        s.duration_bounds, restarts=s.polish_restarts, time_penalty=s.time_penalty)
            nev += k
            pen = penalize(fx, best.labels, x)
            if pen < best.penalized:
                best.durations, best.raw, best.penalized = x, fx, pen
                history.append((gen, best.penalized, history[-1][2], len(best.labels)))
    finally:
        runner.close()

    labels, durs = compact(best.labels, best.durations, hi)
    if len(labels) < len(best.labels):
        best.labels, best.durations = tuple(labels), np.asarray(durs)
        best.raw = evaluator(kind, cfg).objective(best.labels, best.durations)
        best.penalized = penalize(best.raw, labels, durs)
        history.append((gen, best.penalized, history[-1][2], len(labels)))
    seq = best.to_sequence(
        kind,
        name=f"regenerated CNOT, {kind.value}",
        provenance=f"spincnot optimizer, seed {s.seed}, frame {s.frame}, space {s.space}",
    )
    return SearchResult(
        best=seq,
        raw_objective=best.raw,
        penalized_objective=best.penalized,
        history=history,
        evaluations=nev,
        wall_time=time.perf_counter() - t0,
        generations=gen,
        no_progress=no_progress,
        seed=s.seed,
    )


def settings_for(doc: dict, kind=None, **overrides) -> SearchSettings:
    """Settings from a config dict, merging its ``per_architecture[kind]`` block if present."""
    d = dict(doc)
    per = d.pop("per_architecture", {})
    if kind is not None:
        d.update(per.get(Kind(kind).value, {}))
    d.update(overrides)
    return SearchSettings.from_dict(d)


def load_settings(path, kind=None) -> SearchSettings:
    with open(path) as fh:
        return settings_for(json.load(fh), kind)
