import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spincnot.algebra import hermiticity_defect, hermitian_eig
from spincnot.spinmodel import (
    EZ_STAR,
    WAIT,
    ControlSettings,
    DimensionMismatch,
    EqualIndices,
    InvalidControl,
    Kind,
    architecture,
    build_hamiltonian,
    hamiltonian_terms,
    heisenberg_coupling,
    logical_basis,
    pauli_embedded,
    project_subspace,
    sz_values,
    total_spin_ops,
)

KINDS = list(Kind)


def comm(a, b):
    return a @ b - b @ a


def basis_ket(arch, spins_down):
    """Computational ket with the named spins down, others up."""
    idx = 0
    for s in spins_down:
        idx |= 1 << (arch.spin_count - 1 - arch.index(s))
    v = np.zeros(arch.dim)
    v[idx] = 1
    return v


# ------------------------------------------------------------ architecture


def test_architecture_layout():
    sa = architecture(Kind.SingleHybridA)
    assert sa.spins == ("1L", "1R", "3R", "2R")
    assert sa.dot_map == (0, 1, 1, 2)
    assert sa.n_dots == 3 and sa.dim == 16
    st_ = architecture(Kind.SingletTripletHybridB)
    assert st_.spins == ("1L", "2L", "1R", "3R", "2R")
    assert st_.dot_map == (0, 1, 2, 2, 3)
    assert st_.n_dots == 4 and st_.dim == 32


def test_step_labels():
    assert architecture(Kind.SingleHybridA).step_labels == ("J_1R2R", "J_2R3R", "J_1L1R", "J_1L3R", EZ_STAR, WAIT)
    assert architecture(Kind.SingleHybridB).step_labels == ("J_1R2R", "J_2R3R", "J_1L2R", EZ_STAR, WAIT)
    assert EZ_STAR not in architecture(Kind.SingletTripletHybridA).step_labels
    assert "J_2L2R" in architecture(Kind.SingletTripletHybridB).step_labels


# --------------------------------------------------------------- operators


def test_pauli_embedding():
    assert np.allclose(pauli_embedded("z", 0, 1), np.diag([1, -1]))
    assert np.allclose(pauli_embedded("z", 0, 2), np.diag([1, 1, -1, -1]))
    x = pauli_embedded("x", 1, 2)
    assert np.allclose(x @ x, np.eye(4))
    with pytest.raises(IndexError):
        pauli_embedded("z", 2, 2)
    with pytest.raises(IndexError):
        pauli_embedded("z", 0, 6)


def test_heisenberg_spectrum_and_errors():
    w, _ = hermitian_eig(heisenberg_coupling(0, 1, 2))
    assert np.allclose(w, [-0.75, 0.25, 0.25, 0.25])
    with pytest.raises(EqualIndices):
        heisenberg_coupling(1, 1, 3)
    with pytest.raises(IndexError):
        heisenberg_coupling(0, 4, 4)


def test_heisenberg_commutes_with_total_spin():
    s2, sz = total_spin_ops(4)
    for i in range(4):
        for j in range(i + 1, 4):
            h = heisenberg_coupling(i, j, 4)
            assert np.max(np.abs(comm(h, sz))) < 1e-12
            assert np.max(np.abs(comm(h, s2))) < 1e-12


def test_total_spin_ops():
    s2, sz = total_spin_ops(1)
    assert np.allclose(s2, 0.75 * np.eye(2))
    s2, sz = total_spin_ops(2)
    singlet = np.array([0, 1, -1, 0]) / math.sqrt(2)
    assert np.allclose(s2 @ singlet, 0)
    s2, sz = total_spin_ops(5)
    assert np.max(np.abs(comm(s2, sz))) < 1e-12


# ------------------------------------------------------------- hamiltonian


def test_zeeman_only_diagonal():
    arch = architecture(Kind.SingleHybridA)
    h = build_hamiltonian(arch, ControlSettings(ez=10, j_fixed_1r3r=0))
    assert np.allclose(h, np.diag(np.diag(h)))
    assert h[0, 0] == pytest.approx(20)


def test_wait_spectrum_single_hybrid():
    # 0.5 * Heisenberg(1R, 3R) on 16 states: singlet x 4 and triplet x 12
    arch = architecture(Kind.SingleHybridA)
    w, _ = hermitian_eig(build_hamiltonian(arch, ControlSettings(ez=0, active_interaction=WAIT)))
    assert np.allclose(w[:4], -0.375) and np.allclose(w[4:], 0.125)


def test_ez_star_adds_to_global_field():
    arch = architecture(Kind.SingleHybridA)
    h = build_hamiltonian(arch, ControlSettings(ez=10, ez_star=0.3, j_fixed_1r3r=0, active_interaction=EZ_STAR))
    # all up: 4 * 5 + (0.3 + 1) / 2 on 1L
    assert h[0, 0] == pytest.approx(20 + 0.65)
    down_1l = basis_ket(arch, ["1L"]).argmax()
    assert h[down_1l, down_1l] == pytest.approx(10 - 0.65)


def test_singlet_triplet_left_field_on_by_default():
    arch = architecture(Kind.SingletTripletHybridA)
    h = build_hamiltonian(arch, ControlSettings(ez=0, j_fixed_1r3r=0))
    assert h[0, 0] == pytest.approx(1.0)  # (1/2)(1 + 1) on 1L, 2L


def test_per_dot_noise_hits_both_spins_of_shared_dot():
    arch = architecture(Kind.SingleHybridB)
    h = build_hamiltonian(arch, ControlSettings(ez=0, j_fixed_1r3r=0, per_dot_delta_ez=(0, 0.2, 0)))
    assert h[0, 0] == pytest.approx(0.2)  # spins 1R and 3R, each +0.1
    k = basis_ket(arch, ["1R"]).argmax()
    assert h[k, k] == pytest.approx(0.0)


@pytest.mark.parametrize(
    "kind, controls",
    [
        (Kind.SingletTripletHybridA, ControlSettings(ez_star=0.5)),
        (Kind.SingleHybridA, ControlSettings(ez_tilde=1.0)),
        (Kind.SingletTripletHybridA, ControlSettings(active_interaction=EZ_STAR)),
        (Kind.SingleHybridB, ControlSettings(active_interaction="J_1L1R")),
        (Kind.SingleHybridA, ControlSettings(per_dot_delta_ez=(0.1, 0.2))),
    ],
)
def test_invalid_controls(kind, controls):
    with pytest.raises(InvalidControl):
        build_hamiltonian(architecture(kind), controls)


@given(
    st.sampled_from(KINDS),
    st.floats(-20, 20),
    st.floats(0, 1),
    st.floats(0, 2),
    st.integers(0, 10),
    st.floats(0, 2),
    st.lists(st.floats(-0.5, 0.5), min_size=4, max_size=4),
)
def test_hamiltonian_hermitian_for_random_controls(kind, ez, ez_x, jf, pick, amp, dez):
    arch = architecture(kind)
    label = arch.step_labels[pick % len(arch.step_labels)]
    c = ControlSettings(
        ez=ez,
        ez_star=0.0 if arch.singlet_triplet else ez_x,
        ez_tilde=ez_x if arch.singlet_triplet else None,
        j_fixed_1r3r=jf,
        active_interaction=label,
        active_amplitude=amp,
        per_dot_delta_ez=tuple(dez[: arch.n_dots]),
    )
    assert hermiticity_defect(build_hamiltonian(arch, c)) <= 1e-12


def test_uniform_zeeman_commutes_with_all_terms():
    for kind in KINDS:
        terms = hamiltonian_terms(architecture(kind))
        z = terms["zeeman"]
        for name, m in terms.items():
            assert np.max(np.abs(comm(z, m))) < 1e-12, name


# ------------------------------------------------------------------- basis


def test_single_hybrid_b1_reading():
    # |0_R> is the (1R, 3R) singlet times an up 2R spin; 1L is up
    arch = architecture(Kind.SingleHybridA)
    b1 = logical_basis(arch).vectors[:, 0]
    expect = (basis_ket(arch, ["3R"]) - basis_ket(arch, ["1R"])) / math.sqrt(2)
    assert np.allclose(b1, expect)


@pytest.mark.parametrize("kind", KINDS)
def test_basis_orthonormal(kind):
    v = logical_basis(architecture(kind)).vectors
    gram = v.conj().T @ v
    assert np.max(np.abs(gram - np.eye(v.shape[1]))) < 1e-12


@pytest.mark.parametrize("kind", KINDS)
def test_basis_sz_eigenstates(kind):
    arch = architecture(kind)
    b = logical_basis(arch)
    _, sz = total_spin_ops(arch.spin_count)
    vals = sz_values(arch)
    for k in range(b.vectors.shape[1]):
        v = b.vectors[:, k]
        assert np.linalg.norm(sz @ v - vals[k] * v) < 1e-10
    expect6 = [0.5] * 6 if arch.singlet_triplet else [1, 1, 0, 0, 0, 0]
    assert np.allclose(vals[:6], expect6)


@pytest.mark.parametrize("kind", KINDS)
def test_tracked_span_closed_under_total_spin(kind):
    # individual b3..b6 mix S, but their span with b1, b2 is S^2-invariant
    arch = architecture(kind)
    b = logical_basis(arch).tracked
    s2, _ = total_spin_ops(arch.spin_count)
    outside = (np.eye(arch.dim) - b @ b.conj().T) @ s2 @ b
    assert np.max(np.abs(outside)) < 1e-12
    # b3 is not itself an S^2 eigenstate
    v = b[:, 2]
    lam = np.vdot(v, s2 @ v).real
    assert np.linalg.norm(s2 @ v - lam * v) > 0.5


@pytest.mark.parametrize("kind", KINDS)
def test_leakage_vectors_are_total_spin_eigenstates(kind):
    arch = architecture(kind)
    b = logical_basis(arch)
    s2, _ = total_spin_ops(arch.spin_count)
    for v in b.leakage_vectors.T:
        lam = np.vdot(v, s2 @ v).real
        assert np.linalg.norm(s2 @ v - lam * v) < 1e-10


def test_b9_has_sz_three_halves():
    arch = architecture(Kind.SingletTripletHybridA)
    assert sz_values(arch)[8] == pytest.approx(1.5)


def test_projection():
    arch = architecture(Kind.SingleHybridA)
    b = logical_basis(arch)
    assert np.allclose(project_subspace(np.eye(16), b, 6), np.eye(6), atol=1e-12)
    _, sz = total_spin_ops(4)
    assert np.allclose(project_subspace(sz, b, 6), np.diag([1, 1, 0, 0, 0, 0]), atol=1e-12)
    with pytest.raises(DimensionMismatch):
        project_subspace(np.eye(8), b, 6)
    with pytest.raises(DimensionMismatch):
        project_subspace(np.eye(16), b, 9)
