import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spincnot.noise import (
    NoiseSpec,
    RTNTrajectory,
    apply_charge_noise,
    apply_tie,
    channel_rng,
    load_preset,
    log_grid,
    monte_carlo_fidelity,
    preset_spec,
    rtn_trajectory,
    run_trial,
    sample_hyperfine,
    spec_for,
    sweep,
    sweep_csv,
    sweep_values,
)
from spincnot.sequence import GateSequence, SimConfig, bundled_sequence, evaluator
from spincnot.spinmodel import Kind, architecture, sz_values

KINDS = list(Kind)


def seq_of(kind):
    return bundled_sequence(kind, regenerated=True)


# -------------------------------------------------------------------- spec


def test_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec(tie_sigma=-1)
    with pytest.raises(ValueError):
        NoiseSpec(trials=0)
    with pytest.raises(ValueError):
        NoiseSpec(channels=("tie", "flicker"))
    with pytest.raises(ValueError):
        NoiseSpec.from_dict({"sigma": 1})
    s = NoiseSpec(tie_sigma=0.1, rtn_alpha=0.0, channels=("tie", "rtn"))
    assert s.active("tie") and not s.active("rtn") and not s.active("hyperfine")


def test_presets():
    si, gaas = load_preset("paper-si"), load_preset("paper-gaas")
    s = preset_spec(si)
    assert (s.tie_sigma, s.hyperfine_rms, s.rtn_lambda, s.rtn_alpha, s.trials) == (0.25e-3, 0.003, 0.01, 0.01, 10000)
    assert preset_spec(gaas).hyperfine_rms == 0.1
    assert preset_spec(si, trials=5).trials == 5
    assert len(sweep_values(si, "tie")) == 6 * 20 + 1


def test_log_grid():
    g = log_grid(1e-3, 1.0, 20)
    assert len(g) == 61 and g[0] == pytest.approx(1e-3) and g[-1] == pytest.approx(1.0)
    assert np.allclose(np.diff(np.log10(g)), 0.05)
    with pytest.raises(ValueError):
        log_grid(1.0, 0.5)


# --------------------------------------------------------------------- TIE


def test_tie_zero_sigma_is_identity(rng):
    seq = seq_of(Kind.SingleHybridA)
    out, clamped = apply_tie(seq, 0.0, rng)
    assert out is seq and clamped == 0


def test_tie_clamps_negative_durations():
    seq = GateSequence.from_pairs(Kind.SingleHybridA, [("Wait", 1e-4)] * 200)
    out, clamped = apply_tie(seq, 1.0, np.random.default_rng(0))
    assert clamped > 50
    assert np.all(out.durations >= 0)
    assert np.count_nonzero(out.durations == 0) == clamped


def test_tie_is_unbiased_before_clamping():
    rng = np.random.default_rng(2)
    seq = GateSequence.from_pairs(Kind.SingleHybridB, [("J_1R2R", 0.8)])
    sigma = 0.01
    draws = np.array([apply_tie(seq, sigma, rng)[0].durations[0] for _ in range(100_000)])
    se = sigma / math.sqrt(len(draws))
    assert abs(draws.mean() - 0.8) < 3 * se


# --------------------------------------------------------------- hyperfine


@pytest.mark.parametrize("kind, dots", [(Kind.SingleHybridA, 3), (Kind.SingletTripletHybridB, 4)])
def test_hyperfine_one_draw_per_dot(kind, dots, rng):
    assert len(sample_hyperfine(kind, 0.1, rng)) == dots
    assert np.array_equal(sample_hyperfine(kind, 0.0, rng), np.zeros(dots))


@pytest.mark.parametrize("kind", KINDS)
def test_uniform_hyperfine_on_wait_sequence_is_an_sz_phase(kind):
    # equal dEz on every dot is dEz * S_z, which commutes with the wait Hamiltonian
    arch = architecture(kind)
    ev = evaluator(kind)
    durs = [0.3, 0.7, 1.1]
    labels = ["Wait"] * 3
    dez = 0.02
    u0 = ev.propagate(labels, durs)
    u = ev.propagate(labels, durs, per_dot=[dez] * arch.n_dots)
    phase = np.exp(-2j * np.pi * dez * sum(durs) * sz_values(arch, 6))
    assert np.allclose(u, np.diag(phase) @ u0, atol=1e-12)


# --------------------------------------------------------------------- RTN


def test_rtn_without_jumps():
    traj = rtn_trajectory(0.0, 10.0, np.random.default_rng(0))
    assert traj.jumps == ()
    assert traj.average(0.0, 10.0) == 1.0 and traj.average(3.0, 3.0) == 1.0


def test_rtn_jump_at_midpoint_averages_to_zero():
    traj = RTNTrajectory((1.0,), 4.0)
    assert traj.average(0.5, 1.5) == pytest.approx(0.0, abs=1e-15)
    assert traj.average(0.0, 1.0) == 1.0
    assert traj.average(1.0, 2.0) == -1.0
    assert traj.value(0.0) == 1.0 and traj.value(1.5) == -1.0


def test_rtn_jump_counts_are_poisson():
    lam, T, n = 0.7, 5.0, 10_000
    counts = np.array([len(rtn_trajectory(lam, T, channel_rng(9, "rtn", k)).jumps) for k in range(n)])
    mean = lam * T
    assert abs(counts.mean() - mean) < 3 * math.sqrt(mean / n)
    assert counts.var() == pytest.approx(mean, rel=0.1)


def test_rtn_argument_checks(rng):
    with pytest.raises(ValueError):
        rtn_trajectory(-1, 1, rng)
    with pytest.raises(ValueError):
        rtn_trajectory(1, 0, rng)
    with pytest.raises(ValueError):
        RTNTrajectory((), 1.0).average(1.0, 0.5)


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 50), st.lists(st.floats(0, 2), min_size=1, max_size=30))
def test_rtn_step_averages_bounded(seed, lam, durations):
    traj = rtn_trajectory(lam, max(sum(durations), 1e-9), np.random.default_rng(seed))
    avg = traj.step_averages(durations)
    assert np.all(np.abs(avg) <= 1.0)


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 5))
def test_rtn_integral_matches_fine_sampling(seed, lam):
    traj = rtn_trajectory(lam, 3.0, np.random.default_rng(seed))
    t = np.linspace(0.5, 2.5, 200_001)
    vals = np.array([traj.value(x) for x in t[::100]])
    # coarse oracle: midpoint sampling on 2001 points
    approx = vals.mean()
    assert traj.average(0.5, 2.5) == pytest.approx(approx, abs=0.01 + 2 * len(traj.jumps) / 2000)


def test_charge_noise_mapping():
    seq = GateSequence.from_pairs(Kind.SingleHybridA, [("J_1R2R", 0.5), ("Wait", 0.2), ("EzStar", 0.1)])
    flat = rtn_trajectory(0.0, 1.0, np.random.default_rng(0))
    amps, fixed = apply_charge_noise(seq, 0.0, flat)
    assert np.array_equal(amps, [1, 1, 1]) and np.array_equal(fixed, [0.5, 0.5, 0.5])
    amps, fixed = apply_charge_noise(seq, 0.03, flat)
    assert amps[0] == 1.03 and fixed[0] == 0.5
    assert amps[1] == 1.0 and fixed[1] == 0.53
    assert amps[2] == 1.0 and fixed[2] == 0.53


# ------------------------------------------------------------- Monte Carlo


@pytest.mark.parametrize("kind", KINDS)
def test_noiseless_report(kind):
    seq = seq_of(kind)
    clean = evaluator(kind).evaluate(seq).fidelity
    r = monte_carlo_fidelity(kind, seq, NoiseSpec(trials=5), keep_samples=True)
    assert np.all(r.fidelities == clean) and r.standard_error == 0.0
    assert r.mean_fidelity == pytest.approx(clean, abs=1e-15)
    # enabled channels at zero strength draw nothing
    spec = NoiseSpec(trials=5, rtn_lambda=0.3, hyperfine_rms=0.0, rtn_alpha=0.0)
    r = monte_carlo_fidelity(kind, seq, spec, keep_samples=True)
    assert np.all(r.fidelities == clean)


def test_single_enabled_channel_matches_single_channel_estimator():
    kind = Kind.SingletTripletHybridB
    seq = seq_of(kind)
    full = NoiseSpec(tie_sigma=0.01, hyperfine_rms=0.01, rtn_lambda=0.1, rtn_alpha=0.05, trials=20, master_seed=4)
    for ch in ("tie", "hyperfine", "rtn"):
        a = monte_carlo_fidelity(kind, seq, full.only(ch), keep_samples=True)
        b = monte_carlo_fidelity(kind, seq, spec_for(ch, {"tie": 0.01, "hyperfine": 0.01, "rtn": 10.0}[ch],
                                                     full), keep_samples=True)
        assert np.array_equal(a.fidelities, b.fidelities)


def test_results_independent_of_worker_count():
    kind = Kind.SingleHybridB
    spec = NoiseSpec(tie_sigma=0.01, hyperfine_rms=0.01, rtn_lambda=0.1, rtn_alpha=0.05, trials=23, master_seed=8)
    a = monte_carlo_fidelity(kind, seq_of(kind), spec, keep_samples=True)
    b = monte_carlo_fidelity(kind, seq_of(kind), spec, workers=3, keep_samples=True)
    assert np.array_equal(a.fidelities, b.fidelities)
    assert a.mean_infidelity == b.mean_infidelity and a.standard_error == b.standard_error


def test_report_statistics():
    kind = Kind.SingleHybridA
    spec = NoiseSpec(hyperfine_rms=0.05, trials=400, master_seed=1, channels=("hyperfine",))
    r = monte_carlo_fidelity(kind, seq_of(kind), spec, keep_samples=True)
    infid = 1 - r.fidelities
    assert r.mean_infidelity == pytest.approx(infid.mean())
    assert r.standard_error == pytest.approx(infid.std(ddof=1) / 20)
    assert 0 <= r.mean_fidelity <= 1
    assert r.mean_leakage <= 1e-10  # restricted evolution


def test_doubling_trials_halves_variance_of_the_mean():
    kind = Kind.SingleHybridA
    seq = seq_of(kind)
    means = {n: [] for n in (50, 100)}
    for rep in range(40):
        for n in means:
            spec = NoiseSpec(hyperfine_rms=0.03, trials=n, master_seed=1000 + rep, channels=("hyperfine",))
            means[n].append(monte_carlo_fidelity(kind, seq, spec).mean_infidelity)
    ratio = np.var(means[50], ddof=1) / np.var(means[100], ddof=1)
    assert 1.2 < ratio < 3.5


def test_full_space_noise_reports_leakage():
    kind = Kind.SingleHybridA
    spec = NoiseSpec(hyperfine_rms=0.05, trials=5, channels=("hyperfine",))
    r = monte_carlo_fidelity(kind, seq_of(kind), spec, SimConfig(space="full"))
    assert r.mean_leakage >= 0


def test_run_trial_rejects_nothing_and_counts_clamps():
    ev = evaluator(Kind.SingleHybridA)
    spec = NoiseSpec(tie_sigma=5.0, trials=1, channels=("tie",))
    f, leak, clamped = run_trial(ev, seq_of(Kind.SingleHybridA), spec, 0)
    assert 0 <= f <= 1 and clamped >= 1


def test_mismatched_sequence_rejected():
    with pytest.raises(ValueError):
        monte_carlo_fidelity(Kind.SingleHybridA, seq_of(Kind.SingleHybridB), NoiseSpec(trials=1))


def test_sweep_and_csv():
    kind = Kind.SingleHybridB
    base = NoiseSpec(trials=10, master_seed=3, rtn_alpha=0.01)
    rows = sweep(kind, seq_of(kind), "rtn", [1.0, 100.0], base)
    assert [v for v, _ in rows] == [1.0, 100.0]
    assert rows[1][1].spec.rtn_lambda == pytest.approx(0.01)
    text = sweep_csv("rtn", rows)
    head = text.splitlines()[0]
    assert head == "rtn_correlation_time_h_over_jmax,mean_infidelity,standard_error,mean_leakage,trials"
    assert text == sweep_csv("rtn", sweep(kind, seq_of(kind), "rtn", [1.0, 100.0], base))
    with pytest.raises(ValueError):
        spec_for("flicker", 1.0, base)
