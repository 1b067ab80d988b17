import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from l1landscape.firstorder import NotStationaryError, critical_cone, directional_derivative
from l1landscape.secondorder import (
    GLOBAL_MIN,
    NOT_STATIONARY,
    SPURIOUS_STATIONARY,
    classify_point,
    escape_curvature,
    second_order_face,
    second_subderivative,
    second_subderivative_numeric,
)
from l1landscape.stationarity import (
    is_stationary_closed_form,
    is_stationary_lp,
    project_to_spurious_set,
)


def random_spurious(rng, n):
    ustar = rng.standard_normal(n)
    ustar[np.abs(ustar) < 0.05] = 0.25
    u, _ = project_to_spurious_set(rng.standard_normal(n) * 2.0, ustar)
    return u, ustar


def solve_face_member(face):
    """A feasible matrix in the face, via the kernel feasibility program."""
    from l1landscape.lpcore import feasibility_min_infinity_norm

    m = face.kernel_matrix
    cols = np.hstack([-face.kernel_rhs.reshape(-1, 1), m])
    lower = [1.0] + [-1.0] * m.shape[1]
    upper = [1.0] + [1.0] * m.shape[1]
    value, point = feasibility_min_infinity_norm(lower, upper, cols, return_point=True)
    assert value <= 1e-9
    return face.member(np.clip(point[1:], -1.0, 1.0))


def test_second_subderivative_examples():
    v = second_subderivative([-1.0, 1.0], [1.0, 1.0], [2.0, 0.0])
    assert v == pytest.approx(-4.0, abs=1e-9)
    v = second_subderivative([0.0, 0.0], [1.0, 0.0], [0.0, 1.0])
    assert v == pytest.approx(1.0, abs=1e-10)
    assert math.isinf(second_subderivative([-1.0, 1.0], [1.0, 1.0], [-1.0, 0.0]))


def test_second_subderivative_rejects_non_stationary_points():
    with pytest.raises(NotStationaryError):
        second_subderivative([0.5, 0.2], [1.0, 1.0], [1.0, 0.0])


def test_infinite_off_cone_at_ground_truth():
    ustar = np.array([1.0, -2.0])
    assert math.isinf(second_subderivative(ustar, ustar, [1.0, 0.0]))
    assert second_subderivative(ustar, ustar, [0.0, 0.0]) == pytest.approx(0.0, abs=1e-12)


def test_escape_curvature_examples():
    w, value = escape_curvature([-1.0, 1.0], [1.0, 1.0])
    np.testing.assert_allclose(w, [2.0, 0.0])
    assert value == pytest.approx(-4.0, abs=1e-9)

    w, value = escape_curvature([0.0, 0.0], [1.0, 1.0])
    np.testing.assert_allclose(w, [1.0, 1.0])
    assert value == pytest.approx(-4.0, abs=1e-9)

    w, value = escape_curvature([0.5, -0.5], [1.0, 1.0])
    np.testing.assert_allclose(w, [0.5, 1.5])
    assert value == pytest.approx(-4.0, abs=1e-9)


def test_escape_curvature_rejects_ground_truth():
    with pytest.raises(ValueError):
        escape_curvature([1.0, 1.0], [1.0, 1.0])


def test_face_is_singleton_at_full_support_spurious_point():
    face = second_order_face([-1.0, 1.0], [1.0, 1.0])
    q = solve_face_member(face)
    np.testing.assert_allclose(q, -np.ones((2, 2)), atol=1e-9)
    assert face.contains(q)
    assert not face.contains(np.zeros((2, 2)))


def test_face_members_satisfy_defining_constraints():
    rng = np.random.default_rng(21)
    for _ in range(50):
        n = int(rng.integers(2, 6))
        u, ustar = random_spurious(rng, n)
        face = second_order_face(u, ustar)
        q = solve_face_member(face)
        np.testing.assert_allclose(q, q.T, atol=1e-12)
        assert np.abs(q @ u).max() <= 1e-8
        assert np.abs(q).max() <= 1.0 + 1e-9


def test_spurious_curvature_law():
    """Escape value equals -||ustar||_1^2 on both signed escape directions."""
    rng = np.random.default_rng(6)
    for _ in range(1000):
        n = int(rng.integers(2, 7))
        u, ustar = random_spurious(rng, n)
        target = -float(np.abs(ustar).sum()) ** 2
        for sign in (1.0, -1.0):
            w = sign * ustar - u
            assert second_subderivative(u, ustar, w) == pytest.approx(target, abs=1e-8)


def test_escape_direction_lies_in_critical_cone():
    rng = np.random.default_rng(31)
    for _ in range(200):
        n = int(rng.integers(2, 6))
        u, ustar = random_spurious(rng, n)
        cone = critical_cone(u, ustar)
        for sign in (1.0, -1.0):
            w = sign * ustar - u
            assert directional_derivative(u, ustar, w) <= 1e-9
            assert cone.contains(w)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-2, 1e2), st.integers(0, 2**32 - 1))
def test_degree_two_homogeneity_on_cone_directions(lam, seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    u, ustar = random_spurious(rng, n)
    w = critical_cone(u, ustar).sample(rng)
    base = second_subderivative(u, ustar, w)
    scaled = second_subderivative(u, ustar, lam * w)
    assert scaled == pytest.approx(lam * lam * base, rel=1e-7, abs=1e-9)


def test_numeric_estimator_brackets_exact_values():
    est = second_subderivative_numeric(
        [-1.0, 1.0], [1.0, 1.0], [2.0, 0.0], t0=1e-2, rho=0.5, k_max=10,
        delta_w=1e-3, ball_samples=50,
    )
    assert -4.2 <= est <= -3.8
    est = second_subderivative_numeric(
        [0.0, 0.0], [1.0, 0.0], [0.0, 1.0], t0=1e-2, rho=0.5, k_max=10,
        delta_w=1e-3, ball_samples=50,
    )
    assert 0.95 <= est <= 1.05


def test_numeric_estimator_zero_direction_at_ground_truth():
    assert second_subderivative_numeric([1.0, 1.0], [1.0, 1.0], [0.0, 0.0]) == 0.0


def test_numeric_estimator_monotone_under_grid_refinement():
    # the sample cloud is keyed per t-level, so growing the grid only adds
    # quotients and the minimum cannot increase
    args = ([-1.0, 1.0], [1.0, 1.0], [2.0, 0.0])
    coarse = second_subderivative_numeric(*args, k_max=4, ball_samples=8)
    medium = second_subderivative_numeric(*args, k_max=8, ball_samples=32)
    fine = second_subderivative_numeric(*args, k_max=12, ball_samples=64)
    assert coarse >= medium >= fine
    assert fine == pytest.approx(-4.0, rel=0.05)


def test_numeric_matches_lp_on_escape_directions():
    rng = np.random.default_rng(14)
    for _ in range(6):
        n = int(rng.integers(2, 5))
        u, ustar = random_spurious(rng, n)
        w, exact = escape_curvature(u, ustar)
        est = second_subderivative_numeric(u, ustar, w)
        assert est == pytest.approx(exact, rel=0.05)


def test_classify_point_examples():
    ustar = np.array([1.0, 1.0])
    res = classify_point(ustar, ustar)
    assert res.kind == GLOBAL_MIN

    res = classify_point([-1.0, 1.0], ustar)
    assert res.kind == SPURIOUS_STATIONARY
    np.testing.assert_allclose(res.escape_direction, [2.0, 0.0])
    assert res.curvature == pytest.approx(-4.0, abs=1e-9)

    res = classify_point([0.5, 0.2], ustar)
    assert res.kind == NOT_STATIONARY
    d = res.descent_direction
    assert directional_derivative([0.5, 0.2], ustar, d) < 0.0


def test_classify_point_zero_ground_truth():
    assert classify_point([0.0, 0.0], [0.0, 0.0]).kind == GLOBAL_MIN
    assert classify_point([0.3, 0.0], [0.0, 0.0]).kind == NOT_STATIONARY


def test_classifier_soundness_on_random_points():
    from l1landscape.core import objective

    rng = np.random.default_rng(8)
    for _ in range(300):
        n = int(rng.integers(2, 6))
        ustar = rng.standard_normal(n)
        if rng.random() < 0.4:
            u, _ = project_to_spurious_set(rng.standard_normal(n) * 2.0, ustar)
        else:
            u = rng.uniform(-2.0, 2.0, size=n)
        res = classify_point(u, ustar)
        if res.kind == GLOBAL_MIN:
            assert objective(u, ustar) <= 1e-9
        if res.kind == NOT_STATIONARY:
            both = (
                is_stationary_closed_form(u, ustar).is_stationary
                and is_stationary_lp(u, ustar).is_stationary
            )
            assert not both
            assert directional_derivative(u, ustar, res.descent_direction) < 0.0
        if res.kind == SPURIOUS_STATIONARY:
            assert res.curvature < 0.0
