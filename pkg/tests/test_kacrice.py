"""Finite-dimension landscapes: direct counting against the exact formula."""
import math

import numpy as np
import pytest

from pspinlab import (
    ModelParams,
    build_polynomial,
    c_constant,
    count_expected,
    find_critical_points,
    kac_rice_eval,
    sphere_surface,
)

P0 = ModelParams(p=3, r=1, k=(3,), lam=(0.0,))
P1 = ModelParams(p=3, r=1, k=(3,), lam=(1.0,))


def test_covariance_scaling():
    # Var f(e_1) = 1/(2n) for the unspiked homogeneous part
    n = 2
    vals = []
    for s in range(3000):
        poly = build_polynomial(P0, n, (10_000 + s, 3))
        e1 = np.zeros(n)
        e1[0] = 1.0
        vals.append(poly_value(poly, e1))
    assert abs(np.var(vals) - 1.0 / (2 * n)) < 0.02


def poly_value(poly, sigma):
    from pspinlab.kacrice import _value

    return _value(poly, np.asarray(sigma, float))


def test_build_deterministic():
    a = build_polynomial(P1, 4, (5, 1))
    b = build_polynomial(P1, 4, (5, 1))
    assert np.array_equal(a.tensor, b.tensor)


def test_circle_counts_even_and_morse():
    # on the circle every non-degenerate critical point is a max or a min,
    # and they alternate, so the two index counts are equal
    for t in range(25):
        poly = build_polynomial(P0, 2, (77, t))
        pts = find_critical_points(poly)
        assert len(pts) >= 2
        assert len(pts) % 2 == 0
        n_min = sum(1 for c in pts if c.index == 0 and not c.degenerate)
        n_max = sum(1 for c in pts if c.index == 1 and not c.degenerate)
        assert n_min == n_max


def test_antipodal_symmetry_unspiked_odd():
    # odd homogeneous f has f(-x) = -f(x): critical points come in +/- pairs
    poly = build_polynomial(P0, 2, (13, 4))
    pts = find_critical_points(poly)
    vecs = [np.asarray(c.position) for c in pts]
    for v in vecs:
        gaps = [
            math.acos(float(np.clip(np.dot(-v, q), -1.0, 1.0))) for q in vecs
        ]
        assert min(gaps) < 1e-6


def test_count_expected_unspiked_n2():
    # stationary-phase count for the unspiked 3-spin on the circle: 2 sqrt(7)
    est = count_expected(P0, 2, 600, seed=20)
    want = 2.0 * math.sqrt(7.0)
    assert est.extras["complete"] is True
    assert abs(est.value - want) < 4.0 * est.std_error


def test_count_windows_restrict():
    est_all = count_expected(P1, 2, 120, seed=3)
    est_win = count_expected(
        P1, 2, 120, seed=3, overlap_windows=[(0.5, 1.0)]
    )
    assert est_win.value <= est_all.value + 1e-12


def test_count_index_split():
    tot = count_expected(P0, 2, 150, seed=6)
    mins = count_expected(P0, 2, 150, seed=6, which=0)
    maxs = count_expected(P0, 2, 150, seed=6, which=1)
    assert mins.value + maxs.value == pytest.approx(
        tot.value - tot.extras["mean_degenerate"], abs=1e-12
    )


def test_c_constant_frozen():
    assert c_constant(2, 1, 3) == pytest.approx(
        math.sqrt(2.0) / (math.e * math.pi), abs=1e-12
    )
    assert sphere_surface(2) == pytest.approx(2.0 * math.pi, abs=1e-12)
    assert sphere_surface(3) == pytest.approx(4.0 * math.pi, abs=1e-12)


def test_kac_rice_eval_n2_unspiked():
    est = kac_rice_eval(P0, 2, inner_trials=2048, batches=6, seed=1)
    want = 2.0 * math.sqrt(7.0)
    assert abs(est.value - want) < 4.0 * est.std_error + 0.02


def test_kac_rice_identity_spiked_n2():
    counted = count_expected(P1, 2, 1500, seed=9)
    formula = kac_rice_eval(P1, 2, inner_trials=2048, batches=6, seed=2)
    se = math.hypot(counted.std_error, formula.std_error)
    assert abs(counted.value - formula.value) <= 4.0 * se + 0.02


def test_kac_rice_identity_n3():
    counted = count_expected(P0, 3, 60, seed=14, budget=160)
    formula = kac_rice_eval(P0, 3, inner_trials=1024, batches=4, seed=4)
    se = math.hypot(counted.std_error, formula.std_error)
    assert abs(counted.value - formula.value) <= 4.0 * se + 0.05 * formula.value


def test_kac_rice_eval_rejects_tight_rank():
    with pytest.raises(ValueError):
        kac_rice_eval(ModelParams(p=3, r=2, k=(3, 3), lam=(1.0, 0.5)), 2)


def test_value_window_restricts_formula():
    full = kac_rice_eval(P0, 2, inner_trials=512, batches=4, seed=7)
    low = kac_rice_eval(
        P0, 2, inner_trials=512, batches=4, seed=7, value_window=(-10.0, 0.0)
    )
    # odd symmetry: half of the critical values lie below zero
    assert low.value == pytest.approx(0.5 * full.value, rel=0.2)
