"""Spiked GOE sampling, Monte Carlo estimators, spectral distances."""
import math

import numpy as np
import pytest

from pspinlab import (
    GOESpec,
    esd_distance,
    mc_lambda_max_tail,
    mc_log_abs_det,
    mc_restricted_det,
    sample_spectrum,
    spherical_integral_mc,
)


def test_sampling_deterministic():
    spec = GOESpec(n=50, gamma=(1.5,), shift=0.3, seed=42)
    a = sample_spectrum(spec)
    b = sample_spectrum(spec)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)


def test_estimator_thread_invariance():
    spec = GOESpec(n=40, seed=7)
    one = mc_log_abs_det(spec, 64, threads=1)
    four = mc_log_abs_det(spec, 64, threads=4)
    assert one.value == four.value
    assert one.std_error == four.std_error


def test_n1_variance_is_two():
    # the 1x1 entry is a diagonal element, variance 2/n = 2
    vals = [
        sample_spectrum(GOESpec(n=1, seed=5000 + t)).eigenvalues[0]
        for t in range(4000)
    ]
    v = float(np.var(vals))
    assert abs(v - 2.0) < 0.15


def test_second_moment_near_one():
    # bulk second moment of the semicircle on [-2, 2] is 1
    spec = GOESpec(n=300, seed=9)
    vals = sample_spectrum(spec).eigenvalues
    m2 = float(np.mean(vals**2))
    assert abs(m2 - 1.0) < 0.05


def test_spike_shifts_edge():
    spec = GOESpec(n=500, gamma=(2.0,), seed=3)
    vals = sample_spectrum(spec).eigenvalues
    assert abs(float(vals.max()) - 2.5) < 0.15
    unspiked = GOESpec(n=500, seed=3)
    base = sample_spectrum(unspiked).eigenvalues
    assert abs(float(base.max()) - 2.0) < 0.15


def test_mc_log_abs_det_n1_exact():
    # E|Z| with Z ~ N(0,2) gives (1/1) log E = 0.5 log(4/pi)
    spec = GOESpec(n=1, seed=11)
    est = mc_log_abs_det(spec, 40000)
    want = 0.5 * math.log(4.0 / math.pi)
    assert abs(est.value - want) < 4.0 * est.std_error + 0.01
    assert est.extras["underflow_trials"] == 0


def test_mc_log_abs_det_limit_trend():
    # discrepancy against the limit shrinks along n = 50, 100, 200
    from pspinlab import phi_star

    target = phi_star(0.0)
    errs = []
    for n in (50, 100, 200):
        est = mc_log_abs_det(GOESpec(n=n, seed=21), 80)
        errs.append(abs(est.value - target))
    assert errs[2] < errs[0]


def test_mc_restricted_det_rejects():
    # shift below the bulk edge makes the semidefinite gate reject every draw
    spec = GOESpec(n=80, seed=2, shift=-2.5)
    est = mc_restricted_det(spec, 50)
    assert est.extras["acceptance_fraction"] == 0.0
    assert est.value == float("-inf")
    assert est.extras["all_rejected"] is True


def test_mc_restricted_det_accepts_at_high_shift():
    spec = GOESpec(n=60, seed=4, shift=10.0)
    plain = mc_log_abs_det(spec, 120)
    gated = mc_restricted_det(spec, 120)
    assert gated.extras["acceptance_fraction"] == 1.0
    assert gated.value == pytest.approx(plain.value, abs=1e-12)


def test_mc_lambda_max_tail_basic():
    spec = GOESpec(n=100, gamma=(1.5,), seed=8)
    est = mc_lambda_max_tail(spec, 4000, 2.0)
    assert 0.0 < est.extras["tail_probability"] < 1.0
    assert est.value < 0.0
    # (1/n) log P is within finite-size bias of the rate prediction
    from pspinlab import big_l

    want = -big_l((1.5,), 2.0)
    assert abs(est.value - want) < 0.04


def test_mc_lambda_max_tail_empty():
    spec = GOESpec(n=30, seed=5)
    est = mc_lambda_max_tail(spec, 40, -3.0)
    assert est.extras["empty_tail"] is True
    assert est.value == float("-inf")


def test_esd_distance_small():
    spec = GOESpec(n=1000, seed=0)
    d = esd_distance(spec)
    assert d["w1"] < 0.05
    assert d["d_bl"] <= d["w1"] + 1e-12
    assert d["d_bl"] > 0.0


def test_esd_spiked_comparable():
    base = esd_distance(GOESpec(n=1000, seed=0))
    spiked = esd_distance(GOESpec(n=1000, gamma=(1.5, 0.5), seed=0))
    assert spiked["w1"] <= 2.0 * base["w1"]


def test_spherical_integral_rank_one_oracle():
    # rank one: <v, D v> with v uniform needs only the squared coordinates,
    # which are Dirichlet(1/2, ..., 1/2); an independent sampler must agree
    n = 24
    rng = np.random.default_rng(3)
    diag = np.sort(rng.uniform(-1.0, 1.0, size=n))
    gamma = (0.6,)
    est = spherical_integral_mc(n, gamma, diag, 20000, seed=12)

    r2 = np.random.default_rng(99)
    w = r2.normal(size=(200000, n)) ** 2
    w /= w.sum(axis=1, keepdims=True)
    want = float(np.mean(np.exp(0.5 * n * gamma[0] * (w @ diag))))

    rel = abs(est.value - want) / want
    assert rel < 0.05


def test_spherical_integral_deterministic():
    diag = np.linspace(-1.0, 1.0, 16)
    a = spherical_integral_mc(16, (0.5,), diag, 500, seed=5)
    b = spherical_integral_mc(16, (0.5,), diag, 500, seed=5)
    assert a.value == b.value


def test_underflow_flag_exposed():
    spec = GOESpec(n=2, seed=1)
    est = mc_log_abs_det(spec, 10)
    assert "underflow_trials" in est.extras
    assert "all_underflow" in est.extras
