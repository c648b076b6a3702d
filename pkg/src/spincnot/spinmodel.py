"""Spin Hamiltonians and coded bases for the mixed single-spin / singlet-triplet /
hybrid qubit architectures.

Storage order of the spins (most significant tensor factor first):

* single spin + hybrid:     ``(1L, 1R, 3R, 2R)``
* singlet-triplet + hybrid: ``(1L, 2L, 1R, 3R, 2R)``

A product-basis index has bit ``n-1-k`` set when spin ``k`` points down.  The
hybrid qubit keeps ``1R`` and ``3R`` in the same (doubly occupied) dot; its
kets below are written in label order ``(1R, 2R, 3R)`` so that ``|0_R>`` is a
``1R``-``3R`` singlet times ``|up>`` on ``2R``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache, reduce

import numpy as np

from .algebra import HERMITIAN_TOL

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# Default working point, units of J^max.
DEFAULT_EZ = 10.0
DEFAULT_EZ_TILDE = 1.0
DEFAULT_J_FIXED = 0.5

EZ_STAR = "EzStar"
WAIT = "Wait"
FIXED_INTERACTION = "J_1R3R"


class InvalidControl(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class EqualIndices(ValueError):
    pass


class Kind(str, enum.Enum):
    SingleHybridA = "SingleHybridA"
    SingleHybridB = "SingleHybridB"
    SingletTripletHybridA = "SingletTripletHybridA"
    SingletTripletHybridB = "SingletTripletHybridB"

    @property
    def singlet_triplet(self) -> bool:
        return self.value.startswith("SingletTriplet")

    @property
    def config(self) -> str:
        return self.value[-1]


# pulsed (controllable) exchange couplings per architecture
_PULSED = {
    Kind.SingleHybridA: ("J_1R2R", "J_2R3R", "J_1L1R", "J_1L3R"),
    Kind.SingleHybridB: ("J_1R2R", "J_2R3R", "J_1L2R"),
    Kind.SingletTripletHybridA: ("J_1R2R", "J_2R3R", "J_1L2L", "J_2L1R", "J_2L3R"),
    Kind.SingletTripletHybridB: ("J_1R2R", "J_2R3R", "J_1L2L", "J_2L2R"),
}


def interaction_pair(label: str) -> tuple[str, str]:
    """``"J_1L3R"`` -> ``("1L", "3R")``."""
    if not (label.startswith("J_") and len(label) == 6):
        raise InvalidControl(f"not an exchange label: {label!r}")
    return label[2:4], label[4:6]


@dataclass(frozen=True)
class Architecture:
    kind: Kind
    spins: tuple[str, ...]
    dot_map: tuple[int, ...]

    @property
    def spin_count(self) -> int:
        return len(self.spins)

    @property
    def dim(self) -> int:
        return 2 ** len(self.spins)

    @property
    def n_dots(self) -> int:
        return max(self.dot_map) + 1

    @property
    def singlet_triplet(self) -> bool:
        return self.kind.singlet_triplet

    @property
    def pulsed_interactions(self) -> tuple[str, ...]:
        return _PULSED[self.kind]

    @property
    def step_labels(self) -> tuple[str, ...]:
        """Labels a sequence step may carry (the fixed 1R-3R coupling is never one)."""
        extra = () if self.singlet_triplet else (EZ_STAR,)
        return self.pulsed_interactions + extra + (WAIT,)

    def index(self, spin: str) -> int:
        try:
            return self.spins.index(spin)
        except ValueError:
            raise InvalidControl(f"spin {spin!r} not in {self.kind.value}") from None

    def spins_in_dot(self, dot: int) -> list[int]:
        return [k for k, d in enumerate(self.dot_map) if d == dot]


def architecture(kind) -> Architecture:
    kind = Kind(kind)
    if kind.singlet_triplet:
        return Architecture(kind, ("1L", "2L", "1R", "3R", "2R"), (0, 1, 2, 2, 3))
    return Architecture(kind, ("1L", "1R", "3R", "2R"), (0, 1, 1, 2))


@dataclass(frozen=True)
class ControlSettings:
    """Field and exchange amplitudes for one step, in units of J^max.

    ``ez_tilde=None`` means the default value for singlet-triplet systems and
    "absent" for single-spin systems.  An empty ``per_dot_delta_ez`` means no
    hyperfine offsets.
    """

    ez: float = DEFAULT_EZ
    ez_star: float = 0.0
    ez_tilde: float | None = None
    j_fixed_1r3r: float = DEFAULT_J_FIXED
    active_interaction: str | None = None
    active_amplitude: float = 1.0
    per_dot_delta_ez: tuple[float, ...] = field(default=())


# ---------------------------------------------------------------- operators


@lru_cache(maxsize=None)
def _embedded(axis: str, site: int, n: int) -> np.ndarray:
    ops = [PAULI[axis] if k == site else np.eye(2) for k in range(n)]
    out = reduce(np.kron, ops)
    out.setflags(write=False)
    return out


def pauli_embedded(axis: str, site: int, n: int) -> np.ndarray:
    if axis not in PAULI:
        raise ValueError(f"axis must be one of x, y, z; got {axis!r}")
    if not (0 <= site < n <= 5):
        raise IndexError(f"site {site} out of range for {n} spins (max 5)")
    return _embedded(axis, site, n).copy()


@lru_cache(maxsize=None)
def _heisenberg(i: int, j: int, n: int) -> np.ndarray:
    out = 0.25 * sum(_embedded(a, i, n) @ _embedded(a, j, n) for a in "xyz")
    out.setflags(write=False)
    return out


def heisenberg_coupling(i: int, j: int, n: int) -> np.ndarray:
    """``(1/4) sigma_i . sigma_j`` on ``n`` spins."""
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"spin indices ({i}, {j}) out of range for {n} spins")
    if i == j:
        raise EqualIndices("heisenberg coupling needs two distinct spins")
    return _heisenberg(min(i, j), max(i, j), n).copy()


def total_spin_ops(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Total ``S^2`` and ``S_z`` on ``n`` spin-1/2 particles."""
    if not 1 <= n <= 5:
        raise IndexError(f"spin count {n} outside 1..5")
    comps = [0.5 * sum(_embedded(a, k, n) for k in range(n)) for a in "xyz"]
    s2 = sum(c @ c for c in comps)
    return s2, comps[2].copy()


def zeeman_sum(sites, n: int) -> np.ndarray:
    """``(1/2) sum_k sigma^z_k`` over the given sites (diagonal)."""
    d = np.zeros(2**n)
    for k in sites:
        d += 0.5 * np.real(np.diag(_embedded("z", k, n)))
    return np.diag(d).astype(complex)


def _check_controls(arch: Architecture, c: ControlSettings) -> None:
    if arch.singlet_triplet and c.ez_star != 0.0:
        raise InvalidControl("ez_star applies to single-spin architectures only")
    if not arch.singlet_triplet and c.ez_tilde not in (None, 0.0):
        raise InvalidControl("ez_tilde applies to singlet-triplet architectures only")
    if c.active_interaction is not None and c.active_interaction not in arch.step_labels:
        raise InvalidControl(
            f"interaction {c.active_interaction!r} is not available on {arch.kind.value}; "
            f"expected one of {arch.step_labels}"
        )
    if c.per_dot_delta_ez and len(c.per_dot_delta_ez) != arch.n_dots:
        raise InvalidControl(
            f"per_dot_delta_ez has {len(c.per_dot_delta_ez)} entries, "
            f"{arch.kind.value} has {arch.n_dots} dots"
        )


def hamiltonian_terms(arch: Architecture) -> dict[str, np.ndarray]:
    """Named full-space operators from which every step Hamiltonian is assembled.

    Keys: ``"zeeman"`` (uniform, all spins), ``"left_zeeman"`` (the left-qubit
    spins carrying E_z* or E~_z), ``"dot<k>"`` (spins in dot k), the fixed
    coupling and every pulsed exchange label.
    """
    return _terms(arch.kind)


@lru_cache(maxsize=None)
def _terms(kind: Kind) -> dict[str, np.ndarray]:
    arch = architecture(kind)
    n = arch.spin_count
    terms = {"zeeman": zeeman_sum(range(n), n)}
    left = [arch.index("1L"), arch.index("2L")] if arch.singlet_triplet else [arch.index("1L")]
    terms["left_zeeman"] = zeeman_sum(left, n)
    for d in range(arch.n_dots):
        terms[f"dot{d}"] = zeeman_sum(arch.spins_in_dot(d), n)
    for label in (FIXED_INTERACTION,) + arch.pulsed_interactions:
        a, b = interaction_pair(label)
        terms[label] = heisenberg_coupling(arch.index(a), arch.index(b), n)
    for m in terms.values():
        m.setflags(write=False)
    return terms


def combine_terms(arch: Architecture, controls: ControlSettings, terms=None) -> np.ndarray:
    """Assemble a step Hamiltonian from ``terms`` (full-space or projected)."""
    _check_controls(arch, controls)
    t = hamiltonian_terms(arch) if terms is None else terms
    h = controls.ez * t["zeeman"]
    if arch.singlet_triplet:
        ez_tilde = DEFAULT_EZ_TILDE if controls.ez_tilde is None else controls.ez_tilde
        h = h + ez_tilde * t["left_zeeman"]
    elif controls.ez_star:
        h = h + controls.ez_star * t["left_zeeman"]
    h = h + controls.j_fixed_1r3r * t[FIXED_INTERACTION]
    act = controls.active_interaction
    if act == EZ_STAR:
        h = h + controls.active_amplitude * t["left_zeeman"]
    elif act not in (None, WAIT):
        h = h + controls.active_amplitude * t[act]
    for d, dez in enumerate(controls.per_dot_delta_ez):
        if dez:
            h = h + dez * t[f"dot{d}"]
    return h


def build_hamiltonian(arch: Architecture, controls: ControlSettings) -> np.ndarray:
    """Full-space step Hamiltonian in units of J^max."""
    return combine_terms(arch, controls)


# ------------------------------------------------------------------- bases

_R2, _R3, _R6 = 1 / np.sqrt(2), 1 / np.sqrt(3), 1 / np.sqrt(6)
_S23 = np.sqrt(2 / 3)

# three-spin hybrid states, kets in label order (1R, 2R, 3R)
_HYBRID = {
    "0": [(_R2, "uud"), (-_R2, "duu")],
    "1": [(_R6, "uud"), (_R6, "duu"), (-_S23, "udu")],
    "u": [(_R2, "udd"), (-_R2, "ddu")],
    "v": [(_R6, "udd"), (_R6, "ddu"), (-_S23, "dud")],
    "Q3/2": [(1.0, "uuu")],
    "Q1/2": [(_R3, "uud"), (_R3, "udu"), (_R3, "duu")],
    "Q-1/2": [(_R3, "ddu"), (_R3, "dud"), (_R3, "udd")],
    "Q-3/2": [(1.0, "ddd")],
}

# left-qubit states, kets over (1L,) or (1L, 2L)
_LEFT = {
    "up": [(1.0, "u")],
    "down": [(1.0, "d")],
    "S": [(_R2, "ud"), (-_R2, "du")],
    "T0": [(_R2, "ud"), (_R2, "du")],
    "T+": [(1.0, "uu")],
    "T-": [(1.0, "dd")],
}


def product_state(arch: Architecture, left: str, right: str) -> np.ndarray:
    """Full-space vector for ``|left>|right>`` built from the tables above."""
    lspins = ("1L", "2L") if arch.singlet_triplet else ("1L",)
    rspins = ("1R", "2R", "3R")
    n = arch.spin_count
    vec = np.zeros(arch.dim, dtype=complex)
    for cl, kl in _LEFT[left]:
        if len(kl) != len(lspins):
            raise InvalidControl(f"left state {left!r} does not fit {arch.kind.value}")
        for cr, kr in _HYBRID[right]:
            idx = 0
            for spin, s in zip(lspins + rspins, kl + kr):
                if s == "d":
                    idx |= 1 << (n - 1 - arch.index(spin))
            vec[idx] += cl * cr
    return vec


@dataclass(frozen=True)
class LogicalBasis:
    vectors: np.ndarray  # (dim, count) columns b1, b2, ...
    names: tuple[str, ...]
    logical_count: int = 4
    tracked_count: int = 6

    @property
    def tracked(self) -> np.ndarray:
        return self.vectors[:, : self.tracked_count]

    @property
    def logical(self) -> np.ndarray:
        return self.vectors[:, : self.logical_count]

    @property
    def leakage_vectors(self) -> np.ndarray:
        return self.vectors[:, self.tracked_count :]


def _combo(arch, parts):
    return sum(c * product_state(arch, l, r) for c, l, r in parts)


@lru_cache(maxsize=None)
def _basis(kind: Kind) -> LogicalBasis:
    arch = architecture(kind)
    P = lambda l, r: product_state(arch, l, r)  # noqa: E731
    if arch.singlet_triplet:
        cols = [
            P("S", "0"),
            P("S", "1"),
            P("T0", "0"),
            P("T0", "1"),
            P("T+", "u"),
            P("T+", "v"),
            _combo(arch, [(_R2, "T-", "Q3/2"), (-_R3, "T0", "Q1/2"), (_R6, "T+", "Q-1/2")]),
            _combo(
                arch,
                [
                    (np.sqrt(2 / 5), "T-", "Q3/2"),
                    (1 / np.sqrt(15), "T0", "Q1/2"),
                    (-np.sqrt(8 / 15), "T+", "Q-1/2"),
                ],
            ),
            P("S", "Q3/2"),
        ]
    else:
        cols = [
            P("up", "0"),
            P("up", "1"),
            P("down", "0"),
            P("down", "1"),
            P("up", "u"),
            P("up", "v"),
            _combo(arch, [(_R2, "up", "Q-1/2"), (-_R2, "down", "Q1/2")]),
            _combo(arch, [(np.sqrt(3) / 2, "down", "Q3/2"), (-0.5, "up", "Q1/2")]),
        ]
    vecs = np.array(cols).T
    vecs.setflags(write=False)
    names = tuple(f"b{k + 1}" for k in range(len(cols)))
    return LogicalBasis(vecs, names)


def logical_basis(arch: Architecture) -> LogicalBasis:
    """Coded states b1..b8 (b9 for five spins) with their standard coefficients."""
    return _basis(arch.kind)


def project_subspace(m, basis: LogicalBasis, count: int) -> np.ndarray:
    """``<b_i| M |b_j>`` for the first ``count`` basis vectors."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != basis.vectors.shape[0]:
        raise DimensionMismatch(f"operator shape {m.shape} vs basis dim {basis.vectors.shape[0]}")
    if not 0 < count <= basis.vectors.shape[1]:
        raise DimensionMismatch(f"count {count} outside 1..{basis.vectors.shape[1]}")
    b = basis.vectors[:, :count]
    return b.conj().T @ m @ b


def sz_values(arch: Architecture, count: int | None = None) -> np.ndarray:
    """Total S_z expectation of each basis vector (all are S_z eigenstates)."""
    basis = logical_basis(arch)
    _, sz = total_spin_ops(arch.spin_count)
    b = basis.vectors if count is None else basis.vectors[:, :count]
    return np.real(np.einsum("ik,ij,jk->k", b.conj(), sz, b))


__all__ = [
    "Architecture",
    "ControlSettings",
    "DimensionMismatch",
    "EZ_STAR",
    "EqualIndices",
    "HERMITIAN_TOL",
    "InvalidControl",
    "Kind",
    "LogicalBasis",
    "WAIT",
    "architecture",
    "build_hamiltonian",
    "heisenberg_coupling",
    "logical_basis",
    "pauli_embedded",
    "project_subspace",
    "total_spin_ops",
]
