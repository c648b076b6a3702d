"""Gate sequences, their time evolution and CNOT scoring.

Units: Hamiltonians are in J^max, durations in h/J^max, so a step evolves as
``exp(-2*pi*i*H*t)``.

Two conventions are selectable through :class:`SimConfig`:

``frame``
    ``"rotating"`` drops the uniform Zeeman term (it commutes with every other
    term, so this is an exact change of frame); ``"lab"`` keeps it.
``space``
    ``"restricted"`` evolves under the Hamiltonian projected onto the tracked
    states b1..b6; ``"full"`` evolves in the full 2^n space and projects the
    propagator afterwards.  Pulsed inter-qubit exchange couples b1..b6 to the
    quadruplet states, so only the full space shows that leakage.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources

import numpy as np

from .algebra import expm_from_eig, hermitian_eig
from .spinmodel import (
    EZ_STAR,
    DEFAULT_EZ,
    DEFAULT_J_FIXED,
    WAIT,
    Architecture,
    ControlSettings,
    InvalidControl,
    Kind,
    LogicalBasis,
    architecture,
    combine_terms,
    hamiltonian_terms,
    logical_basis,
)

TWO_PI = 2 * math.pi
# h = 4.135667 ueV ns
PLANCK_UEV_NS = 4.135667

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)

FRAMES = ("rotating", "lab")
SPACES = ("restricted", "full")


def to_ns(duration: float, jmax_microev: float = 1.0) -> float:
    """Convert h/J^max to nanoseconds."""
    return duration * PLANCK_UEV_NS / jmax_microev


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.field = field


@dataclass(frozen=True)
class Step:
    interaction: str
    duration: float


@dataclass(frozen=True)
class GateSequence:
    architecture: Kind
    steps: tuple[Step, ...]
    name: str = ""
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "architecture", Kind(self.architecture))
        object.__setattr__(self, "steps", tuple(self.steps))

    def validate(self) -> GateSequence:
        allowed = architecture(self.architecture).step_labels
        for k, s in enumerate(self.steps):
            if s.interaction not in allowed:
                raise InvalidControl(
                    f"step {k + 1}: {s.interaction!r} is not available on "
                    f"{self.architecture.value}; expected one of {allowed}"
                )
            if not (math.isfinite(s.duration) and s.duration >= 0):
                raise InvalidControl(f"step {k + 1}: duration {s.duration!r} must be finite and >= 0")
        return self

    @property
    def labels(self) -> list[str]:
        return [s.interaction for s in self.steps]

    @property
    def durations(self) -> np.ndarray:
        return np.array([s.duration for s in self.steps], dtype=float)

    @property
    def total_duration(self) -> float:
        return float(sum(s.duration for s in self.steps))

    def __len__(self) -> int:
        return len(self.steps)

    def with_durations(self, durations) -> GateSequence:
        steps = tuple(Step(s.interaction, float(d)) for s, d in zip(self.steps, durations))
        return replace(self, steps=steps)

    @classmethod
    def from_pairs(cls, kind, pairs, name="", provenance="") -> GateSequence:
        return cls(Kind(kind), tuple(Step(l, float(t)) for l, t in pairs), name, provenance)


# ------------------------------------------------------------------- files


def _line_of(text: str, needle_index: int) -> int | None:
    """Line number of the ``needle_index``-th ``"interaction"`` key in ``text``."""
    pos = -1
    for _ in range(needle_index + 1):
        pos = text.find('"interaction"', pos + 1)
        if pos < 0:
            return None
    return text.count("\n", 0, pos) + 1


def load_sequence(text: str) -> GateSequence:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    for key in ("architecture", "steps"):
        if key not in doc:
            raise ParseError("missing required key", field=key)
    try:
        kind = Kind(doc["architecture"])
    except ValueError:
        raise ParseError(f"unknown architecture {doc['architecture']!r}", field="architecture") from None
    if not isinstance(doc["steps"], list):
        raise ParseError("steps must be a list", field="steps")
    allowed = architecture(kind).step_labels
    steps = []
    for k, s in enumerate(doc["steps"]):
        line = _line_of(text, k)
        if not isinstance(s, dict):
            raise ParseError("step must be an object", line=line, field=f"steps[{k}]")
        label = s.get("interaction")
        if label not in allowed:
            raise ParseError(
                f"interaction {label!r} is not valid for {kind.value} (allowed: {', '.join(allowed)})",
                line=line,
                field=f"steps[{k}].interaction",
            )
        dur = s.get("duration_h_over_jmax")
        if isinstance(dur, bool) or not isinstance(dur, (int, float)) or not math.isfinite(dur) or dur < 0:
            raise ParseError(
                f"duration must be a finite number >= 0, got {dur!r}",
                line=line,
                field=f"steps[{k}].duration_h_over_jmax",
            )
        steps.append(Step(label, float(dur)))
    return GateSequence(kind, tuple(steps), doc.get("name", ""), doc.get("provenance", ""))


def save_sequence(seq: GateSequence) -> str:
    doc = {
        "architecture": seq.architecture.value,
        "name": seq.name,
        "provenance": seq.provenance,
        "steps": [{"interaction": s.interaction, "duration_h_over_jmax": s.duration} for s in seq.steps],
    }
    return json.dumps(doc, indent=2) + "\n"


BUNDLED = {
    Kind.SingleHybridA: "cnot_single_hybrid_a.json",
    Kind.SingleHybridB: "cnot_single_hybrid_b.json",
    Kind.SingletTripletHybridA: "cnot_singlet_triplet_hybrid_a.json",
    Kind.SingletTripletHybridB: "cnot_singlet_triplet_hybrid_b.json",
}


def bundled_text(kind, regenerated: bool = False) -> str:
    folder = "regenerated" if regenerated else "sequences"
    return resources.files("spincnot.data").joinpath(folder, BUNDLED[Kind(kind)]).read_text()


def bundled_sequence(kind, regenerated: bool = False) -> GateSequence:
    """The published sequence for ``kind`` or, with ``regenerated``, the one
    produced by this package's optimizer."""
    return load_sequence(bundled_text(kind, regenerated))


def resolve_sequence(ref: str) -> GateSequence:
    """Load a sequence from a path, or from a bundled file name such as
    ``cnot_single_hybrid_a.json`` / ``regenerated/cnot_single_hybrid_a.json``."""
    from pathlib import Path

    p = Path(ref)
    if p.is_file():
        return load_sequence(p.read_text())
    data = resources.files("spincnot.data")
    for cand in (ref, f"sequences/{ref}"):
        node = data.joinpath(cand)
        if node.is_file():
            return load_sequence(node.read_text())
    raise FileNotFoundError(f"no sequence file or bundled sequence named {ref!r}")


# --------------------------------------------------------------- evolution


@dataclass(frozen=True)
class SimConfig:
    frame: str = "rotating"
    space: str = "restricted"
    ez: float = DEFAULT_EZ
    ez_tilde: float | None = None
    j_fixed: float = DEFAULT_J_FIXED
    amplitude: float = 1.0

    def __post_init__(self):
        if self.frame not in FRAMES:
            raise ValueError(f"frame must be one of {FRAMES}")
        if self.space not in SPACES:
            raise ValueError(f"space must be one of {SPACES}")


@dataclass
class EvaluationResult:
    u_full: np.ndarray | None
    u6: np.ndarray
    u_logical: np.ndarray
    objective: float
    fidelity: float
    leakage: float
    block_leakage: float
    frame: str
    space: str
    total_duration: float = 0.0


def cnot_objective(u6) -> float:
    """``sqrt(1 - |U11 + U22 + U34 + U43| / 4)`` on the tracked block."""
    u = np.asarray(u6)
    if u.shape[0] < 4 or u.shape[1] < 4:
        raise ValueError(f"need at least a 4x4 block, got {u.shape}")
    s = abs(u[0, 0] + u[1, 1] + u[2, 3] + u[3, 2])
    return math.sqrt(max(0.0, 1.0 - 0.25 * s))


def entanglement_fidelity(u_logical, target=CNOT) -> float:
    """``|tr(target^dag U)|^2 / d^2``.

    For unitary ``U`` this equals the maximally-entangled-state fidelity in the
    doubled space; a sub-unitary block (leakage) only lowers it.
    """
    u = np.asarray(u_logical)
    t = np.asarray(target)
    d = t.shape[0]
    return float(abs(np.trace(t.conj().T @ u)) ** 2 / d**2)


class Evaluator:
    """Propagates sequences of one architecture under one :class:`SimConfig`.

    Noiseless step eigendecompositions are cached per label.  The object is
    read-mostly; build one per worker process when running in parallel.
    """

    def __init__(self, arch, config: SimConfig = SimConfig()):
        self.arch: Architecture = arch if isinstance(arch, Architecture) else architecture(arch)
        self.config = config
        self.basis: LogicalBasis = logical_basis(self.arch)
        full = hamiltonian_terms(self.arch)
        if config.space == "restricted":
            b = self.basis.tracked
            self.terms = {k: b.conj().T @ m @ b for k, m in full.items()}
        else:
            self.terms = dict(full)
        self.dim = next(iter(self.terms.values())).shape[0]
        self._eig: dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    # -- hamiltonians

    def controls(self, label, amplitude=None, j_fixed=None, per_dot=()) -> ControlSettings:
        c = self.config
        return ControlSettings(
            ez=c.ez if c.frame == "lab" else 0.0,
            ez_tilde=c.ez_tilde,
            j_fixed_1r3r=c.j_fixed if j_fixed is None else j_fixed,
            active_interaction=label,
            active_amplitude=c.amplitude if amplitude is None else amplitude,
            per_dot_delta_ez=tuple(per_dot),
        )

    def hamiltonian(self, label, amplitude=None, j_fixed=None, per_dot=()) -> np.ndarray:
        """Step Hamiltonian in the working space (6x6 or 2^n)."""
        return combine_terms(self.arch, self.controls(label, amplitude, j_fixed, per_dot), self.terms)

    def eig(self, label):
        hit = self._eig.get(label)
        if hit is None:
            w, v = hermitian_eig(self.hamiltonian(label))
            hit = (w, v, v.conj().T)
            self._eig[label] = hit
        return hit

    def step_unitary(self, label, duration, amplitude=None, j_fixed=None, per_dot=()) -> np.ndarray:
        if amplitude is None and j_fixed is None and not len(per_dot):
            w, v, _ = self.eig(label)
        else:
            w, v = hermitian_eig(self.hamiltonian(label, amplitude, j_fixed, per_dot))
        return expm_from_eig(w, v, -TWO_PI * duration)

    def propagate(self, labels, durations, amplitudes=None, j_fixed=None, per_dot=None) -> np.ndarray:
        """Working-space propagator; step 1 acts first.

        ``amplitudes`` / ``j_fixed`` are optional per-step overrides and
        ``per_dot`` an optional static hyperfine offset per dot.
        """
        u = np.eye(self.dim, dtype=complex)
        perturbed = amplitudes is not None or j_fixed is not None or per_dot is not None
        pd = () if per_dot is None else tuple(per_dot)
        for k, (label, t) in enumerate(zip(labels, durations)):
            if not perturbed:
                w, v, vh = self.eig(label)
            else:
                a = None if amplitudes is None else amplitudes[k]
                j = None if j_fixed is None else j_fixed[k]
                w, v = hermitian_eig(self.hamiltonian(label, a, j, pd))
                vh = v.conj().T
            u = (v * np.exp(-1j * TWO_PI * t * w)) @ (vh @ u)
        return u

    def tracked_block(self, u: np.ndarray) -> np.ndarray:
        if self.config.space == "restricted":
            return u
        b = self.basis.tracked
        return b.conj().T @ u @ b

    def objective(self, labels, durations) -> float:
        return cnot_objective(self.tracked_block(self.propagate(labels, durations)))

    def result(self, u: np.ndarray, total_duration: float = 0.0) -> EvaluationResult:
        u6 = self.tracked_block(u)
        ul = u6[:4, :4]
        if self.config.space == "full":
            norms = np.linalg.norm(u6[:, :4], axis=0) ** 2
        else:
            # tracked states form the whole working space
            norms = np.linalg.norm(u[:, :4], axis=0) ** 2
        leakage = float(max(0.0, np.max(1.0 - norms)))
        block = float(max(0.0, np.max(1.0 - np.linalg.norm(ul, axis=0) ** 2)))
        return EvaluationResult(
            u_full=u if self.config.space == "full" else None,
            u6=u6,
            u_logical=ul,
            objective=cnot_objective(u6),
            fidelity=min(1.0, entanglement_fidelity(ul)),
            leakage=leakage,
            block_leakage=block,
            frame=self.config.frame,
            space=self.config.space,
            total_duration=total_duration,
        )

    def evaluate(self, seq: GateSequence, **perturbations) -> EvaluationResult:
        if seq.architecture != self.arch.kind:
            raise InvalidControl(f"sequence is for {seq.architecture.value}, evaluator for {self.arch.kind.value}")
        u = self.propagate(seq.labels, seq.durations, **perturbations)
        return self.result(u, seq.total_duration)


@lru_cache(maxsize=64)
def evaluator(kind, config: SimConfig = SimConfig()) -> Evaluator:
    return Evaluator(architecture(kind), config)


def step_unitary(arch: Architecture, step: Step, controls: ControlSettings | None = None,
                 config: SimConfig = SimConfig()) -> np.ndarray:
    """Propagator of one step in the working space of ``config``.

    ``controls`` (optional) overrides the step amplitudes; its
    ``active_interaction`` is ignored in favour of ``step.interaction``.
    """
    if step.interaction not in arch.step_labels:
        raise InvalidControl(f"{step.interaction!r} is not available on {arch.kind.value}")
    if not (math.isfinite(step.duration) and step.duration >= 0):
        raise InvalidControl(f"invalid duration {step.duration!r}")
    ev = evaluator(arch.kind, config)
    if controls is None:
        return ev.step_unitary(step.interaction, step.duration)
    c = replace(controls, active_interaction=step.interaction)
    w, v = hermitian_eig(combine_terms(arch, c, ev.terms))
    return expm_from_eig(w, v, -TWO_PI * step.duration)


def compose_sequence(arch: Architecture, seq: GateSequence, frame: str = "rotating",
                     space: str = "restricted") -> EvaluationResult:
    seq.validate()
    return evaluator(arch.kind, SimConfig(frame=frame, space=space)).evaluate(seq)


def matrix_csv(u: np.ndarray) -> str:
    """Modulus/phase listing of a matrix, one row per entry (1-based indices)."""
    lines = ["row,col,modulus,phase_radians"]
    for i in range(u.shape[0]):
        for j in range(u.shape[1]):
            z = complex(u[i, j])
            lines.append(f"{i + 1},{j + 1},{abs(z)!r},{math.atan2(z.imag, z.real)!r}")
    return "\n".join(lines) + "\n"


__all__ = [
    "BUNDLED",
    "CNOT",
    "EZ_STAR",
    "EvaluationResult",
    "Evaluator",
    "GateSequence",
    "ParseError",
    "SimConfig",
    "Step",
    "WAIT",
    "bundled_sequence",
    "cnot_objective",
    "compose_sequence",
    "entanglement_fidelity",
    "load_sequence",
    "matrix_csv",
    "save_sequence",
    "step_unitary",
    "to_ns",
]
