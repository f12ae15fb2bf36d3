import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cohosoliton.exceptions import ProfileError
from cohosoliton.profiles import (
    AnalyticProfile,
    AnsatzParams,
    ProfileGrid,
    SProfile,
    build_grid,
    derivative,
    fd_node_derivatives,
    from_s,
    gaussian_profile,
    node_derivatives,
    to_s,
    value,
)


def _sine_grid(count=201, t0=0.0, t1=2.0):
    t = np.linspace(t0, t1, count)
    return ProfileGrid(t, 1.5 + np.sin(t), 2.0 + np.cos(t), t**3)


class TestAnsatzParams:
    def test_base_kind_follows_sign_of_k(self):
        assert AnsatzParams(2, 4.0, 1.0).base_kind == "cp"
        assert AnsatzParams(2, 0.0, 1.0).base_kind == "flat"
        assert AnsatzParams(2, -1.0, 1.0).base_kind == "hyperbolic-base"

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(n=1, k=1.0, lam=0.0),
            dict(n=2.5, k=1.0, lam=0.0),
            dict(n=2, k=1.0, lam=0.0, q=0.5),
            dict(n=2, k=1.0, lam=0.0, base_kind="flat"),
            dict(n=2, k=1.0, lam=0.0, base_kind="torus"),
            dict(n=2, k=1.0, lam=0.0, fiber_kind="knot"),
        ],
    )
    def test_rejects_inadmissible(self, kwargs):
        with pytest.raises(ValueError):
            AnsatzParams(**kwargs)

    def test_main_theorem_flag(self):
        assert AnsatzParams(3, 6.0, 1.0).main_theorem_setting
        assert not AnsatzParams(3, 6.0, -1.0).main_theorem_setting
        assert not AnsatzParams(3, 0.0, 1.0).main_theorem_setting


class TestProfileGrid:
    def test_build_from_analytic(self):
        grid = build_grid(gaussian_profile(2.0), (0.5, 1.5), 11)
        assert len(grid) == 11
        assert grid.derivative_source == "analytic-callback"
        assert grid.f[-1] == pytest.approx(2.25)

    def test_build_from_samples_is_finite_difference(self):
        t = np.linspace(0, 1, 6)
        grid = build_grid([t, 1 + t, 1 + t, t])
        assert grid.derivative_source == "finite-difference"

    @pytest.mark.parametrize(
        "t, H, match",
        [
            ([0, 1, 1, 2, 3], [1] * 5, "non-monotone"),
            ([0, 1, 2, 3], [1] * 4, "at least 5"),
            ([0, 1, 2, 3, 4], [1, 1, -1, 1, 1], "non-positive interior H"),
            ([0, 1, 2, 3, 4], [-1, 1, 1, 1, 1], "negative boundary H"),
        ],
    )
    def test_validation(self, t, H, match):
        with pytest.raises(ProfileError, match=match):
            ProfileGrid(t, H, np.ones(len(t)), np.zeros(len(t)))

    def test_rejects_nan_and_ragged(self):
        with pytest.raises(ProfileError):
            ProfileGrid([0, 1, 2, 3, 4], [1, np.nan, 1, 1, 1], [1] * 5, [0] * 5)
        with pytest.raises(ProfileError):
            ProfileGrid([0, 1, 2, 3, 4], [1] * 4, [1] * 5, [0] * 5)

    def test_samples_are_read_only(self):
        grid = _sine_grid()
        with pytest.raises(ValueError):
            grid.H[0] = 3.0

    def test_boundary_zero_allowed_and_excluded_from_interior(self):
        t = np.linspace(0, 1, 7)
        grid = ProfileGrid(t, t, 1 + t, t)
        mask = grid.interior_mask()
        assert not mask[0] and not mask[-1] and mask[1:-1].all()


class TestValueAndDerivative:
    def test_value_exact_at_nodes(self):
        grid = _sine_grid()
        assert value(grid, "H", float(grid.t[17])) == grid.H[17]

    def test_value_interpolates_to_high_order(self):
        grid = _sine_grid()
        assert value(grid, "H", 0.123) == pytest.approx(1.5 + np.sin(0.123), abs=1e-12)

    @pytest.mark.parametrize("t", [0.0, 0.01, 0.777, 2.0])
    def test_finite_differences(self, t):
        grid = _sine_grid(401)
        assert derivative(grid, "H", 1, t) == pytest.approx(np.cos(t), abs=1e-8)
        assert derivative(grid, "H", 2, t) == pytest.approx(-np.sin(t), abs=1e-6)
        assert derivative(grid, "F", 3, t) == pytest.approx(np.sin(t), abs=1e-4)

    def test_callbacks_take_precedence(self):
        grid = build_grid(gaussian_profile(3.0), (0.1, 2.0), 7)
        assert derivative(grid, "f", 1, 0.4) == 1.2000000000000002
        assert derivative(grid, "f", 2, 0.4) == 3.0

    def test_bad_order_and_field(self):
        grid = _sine_grid()
        with pytest.raises(ValueError):
            derivative(grid, "H", 4, 0.5)
        with pytest.raises(ValueError):
            derivative(grid, "g", 1, 0.5)
        with pytest.raises(ValueError):
            value(grid, "g", 0.5)

    def test_node_derivatives_nonuniform(self):
        t = np.sort(np.concatenate([np.linspace(0, 1, 60), [0.3333, 0.51234]]))
        d = fd_node_derivatives(t, np.exp(t), 1)
        assert np.max(np.abs(d - np.exp(t))) < 1e-6

    def test_node_derivatives_match_pointwise(self):
        grid = _sine_grid(101)
        table = node_derivatives(grid, "F", 2)
        assert table[40] == pytest.approx(derivative(grid, "F", 2, float(grid.t[40])), rel=1e-9)

    def test_too_few_samples_for_order(self):
        t = np.linspace(0, 1, 5)
        with pytest.raises(ProfileError):
            fd_node_derivatives(t, t, 3)


class TestCoordinateChange:
    def test_gaussian_s_coordinate(self):
        # H = F = t gives s = t^2 / 2 and beta = 2s, phi = lam s
        grid = build_grid(gaussian_profile(0.5), (0.1, 2.0), 401)
        sp = to_s(grid, 1, 0.005)
        assert np.max(np.abs(sp.s - grid.t**2 / 2)) < 1e-13
        assert sp.constants["A"] == pytest.approx(0.0, abs=1e-12)
        assert sp.constants["B"] == pytest.approx(0.5, abs=1e-12)
        assert sp.constants["C"] == pytest.approx(0.0, abs=1e-12)

    def test_from_s_linear_alpha(self):
        s = np.linspace(0.005, 0.5, 4001)
        sp = SProfile(s, 2 * s, 2 * s, np.zeros_like(s), {"A": 0.0, "B": 0.0, "C": 0.0})
        grid = from_s(sp, 1, 0.1)
        assert np.max(np.abs(grid.t - np.sqrt(2 * s))) < 1e-8
        assert np.max(np.abs(grid.H - grid.t)) < 1e-8

    def test_from_s_rejects_vanishing_alpha(self):
        s = np.linspace(0.0, 1.0, 11)
        sp = SProfile(s, np.zeros_like(s), 2 * s + 1, np.zeros_like(s), {})
        with pytest.raises(ProfileError):
            from_s(sp, 1, 0.0)

    def test_from_s_through_collapsing_fiber(self):
        s = np.linspace(0.0, 0.5, 2001)
        sp = SProfile(s, 2 * s, 2 * s + 1.0, np.zeros_like(s), {"A": 1.0, "B": 0.0, "C": 0.0})
        grid = from_s(sp, 1, 0.0)
        assert np.max(np.abs(grid.t - np.sqrt(2 * s))) < 1e-9

    def test_q_guards(self):
        grid = _sine_grid()
        with pytest.raises(ValueError, match="q = 0"):
            to_s(grid, 0)
        s = np.linspace(0.1, 1, 10)
        sp = SProfile(s, s, s, s, {})
        with pytest.raises(ValueError):
            from_s(sp, -1, 0.0)
        with pytest.raises(ValueError):
            from_s(sp, 0, 0.0)

    def test_to_s_needs_increasing_base(self):
        t = np.linspace(0.1, 1, 20)
        grid = ProfileGrid(t, t, 2 - t, t)
        with pytest.raises(ProfileError, match="non-monotone coordinate"):
            to_s(grid, 1)

    def test_sprofile_validation(self):
        with pytest.raises(ProfileError):
            SProfile([0, 1, 1], [1, 1, 1], [1, 1, 1], [0, 0, 0], {})
        with pytest.raises(ProfileError):
            SProfile([0, 1, 2], [1, 1], [1, 1, 1], [0, 0, 0], {})


@settings(max_examples=30, deadline=None)
@given(
    lam=st.floats(-3, 3),
    t0=st.floats(0.05, 1.0),
    length=st.floats(0.5, 3.0),
)
def test_gaussian_round_trip(lam, t0, length):
    grid = build_grid(gaussian_profile(lam), (t0, t0 + length), 4001)
    back = from_s(to_s(grid, 1, t0 * t0 / 2), 1, t0)
    for name in ("t", "H", "F", "f"):
        a, b = getattr(back, name), getattr(grid, name)
        assert np.max(np.abs(a - b)) <= 1e-8 * max(1.0, np.max(np.abs(b)))


@settings(max_examples=30, deadline=None)
@given(
    amp=st.floats(0.0, 0.9),
    freq=st.floats(0.2, 3.0),
    count=st.integers(40, 300),
)
def test_fd_second_derivative_exact_on_quadratics(amp, freq, count):
    t = np.linspace(0.0, 1.0, count)
    y = amp * t**2 + freq * t + 1.0
    assert np.allclose(fd_node_derivatives(t, y, 2), 2 * amp, atol=1e-6)


@settings(max_examples=20, deadline=None)
@given(slope=st.floats(0.1, 5.0), t0=st.floats(0.0, 1.0))
def test_from_s_recovers_time_for_constant_fiber(slope, t0):
    # alpha = 1 so dt = ds: t - t0 equals s - s0
    s = np.linspace(0.0, slope, 201)
    sp = SProfile(s, np.ones_like(s), 2 * s + 1, np.zeros_like(s), {})
    grid = from_s(sp, 1, t0)
    assert np.max(np.abs(grid.t - t0 - s)) < 1e-12


def test_fd_converges_at_fourth_order():
    prof = AnalyticProfile(
        H=np.sin,
        F=np.cosh,
        f=lambda t: t**3,
        derivatives={
            "H": (np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t)),
            "F": (np.sinh, np.cosh, np.sinh),
            "f": (lambda t: 3 * t**2, lambda t: 6 * t, lambda t: 6 + 0 * t),
        },
    )
    errors = []
    for count in (101, 201):
        exact = build_grid(prof, (0.5, 1.5), count)
        fd = ProfileGrid(exact.t, exact.H, exact.F, exact.f)
        errors.append(
            max(
                np.max(np.abs(node_derivatives(fd, name, o) - node_derivatives(exact, name, o)))
                for name in ("H", "F")
                for o in (1, 2)
            )
        )
    assert errors[0] / errors[1] >= 8.0


def test_analytic_profile_callbacks_vectorized():
    prof = AnalyticProfile(H=np.cosh, F=np.cosh, f=np.sinh, derivatives={"H": (np.sinh,)})
    grid = build_grid(prof, (0, 1), 9)
    assert node_derivatives(grid, "H", 1)[-1] == pytest.approx(np.sinh(1.0))
