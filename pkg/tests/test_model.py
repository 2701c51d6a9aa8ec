import math
from dataclasses import replace

import numpy as np
import pytest
import scipy.constants as const

from omtx import (
    DriveConfig,
    OptomechParams,
    SingularResponseError,
    b_plus_closed_form,
    coupling_rate,
    drive_amplitude,
    eta,
    f_denominator,
    output_field,
    response_eps,
    select_branch,
    steady_state_roots,
)
from omtx.model import steady_effective_detuning

TWO_PI = 2.0 * math.pi


class TestParams:
    def test_rejects_nonpositive_omega_m(self):
        with pytest.raises(ValueError):
            OptomechParams(g0=0.9, omega_m=0.0, kappa=1.0, gamma_m=0.1, delta_p=0.0)

    def test_rejects_negative_g0(self):
        with pytest.raises(ValueError):
            OptomechParams(g0=-0.1, omega_m=10.0, kappa=1.0, gamma_m=0.1, delta_p=0.0)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            OptomechParams(g0=0.9, omega_m=10.0, kappa=math.inf, gamma_m=0.1, delta_p=0.0)

    def test_resolved_sideband_flag(self, params):
        assert params.resolved_sideband
        assert not replace(params, kappa=20.0).resolved_sideband


class TestDriveConfig:
    def test_rejects_negative_amplitudes(self):
        with pytest.raises(ValueError):
            DriveConfig(e_pump=-1.0, e_signal=0.0, delta=0.0)
        with pytest.raises(ValueError):
            DriveConfig(e_pump=1.0, e_signal=-1.0, delta=0.0)

    def test_warns_outside_linear_regime(self):
        with pytest.warns(UserWarning):
            DriveConfig(e_pump=1.0, e_signal=0.5, delta=0.0)

    def test_silent_in_linear_regime(self, recwarn):
        DriveConfig(e_pump=1.0, e_signal=1e-3, delta=0.0)
        assert not recwarn.list


class TestEta:
    def test_zero_detuning(self, params):
        assert eta(0.0, params) == 1.0 + 0.0j

    def test_on_mechanical_resonance(self, params):
        # real parts of the denominator cancel exactly at delta = omega_m
        got = eta(params.omega_m, params)
        want = 1j * params.omega_m / params.gamma_m
        assert got == pytest.approx(want, rel=1e-15)
        assert abs(got.imag - 11.368) < 1e-3

    def test_undamped_twice_resonance(self, params):
        p = replace(params, gamma_m=0.0)
        assert eta(2.0 * p.omega_m, p) == pytest.approx(-1.0 / 3.0, rel=1e-15)

    def test_undamped_pole_is_domain_error(self, params):
        p = replace(params, gamma_m=0.0)
        with pytest.raises(ZeroDivisionError):
            eta(p.omega_m, p)

    def test_conjugation_property(self, params):
        rng = np.random.default_rng(7)
        for delta in rng.uniform(-50.0, 50.0, size=50):
            assert eta(-delta, params) == np.conj(eta(delta, params))


class TestDriveAmplitude:
    def test_zero_power(self):
        assert drive_amplitude(0.0, 1.0, 1e15) == 0.0

    def test_square_root_law(self):
        one = drive_amplitude(1e-6, 1.3, 1e15)
        two = drive_amplitude(2e-6, 1.3, 1e15)
        assert two == pytest.approx(math.sqrt(2.0) * one, rel=1e-14)

    def test_against_direct_constant_arithmetic(self):
        # independent single-line oracle: 1 uW at 1064 nm, kappa = 2*pi*0.215 rad/us
        kappa = TWO_PI * 0.215
        omega = TWO_PI * const.c / 1064e-9
        expected = math.sqrt(2.0 * 1e-6 * (kappa * 1e6) / (const.hbar * omega)) / 1e6
        assert drive_amplitude(1e-6, kappa, omega) == pytest.approx(expected, rel=1e-12)

    def test_negative_power_rejected(self):
        with pytest.raises(ValueError):
            drive_amplitude(-1.0, 1.0, 1e15)


class TestCouplingRate:
    def test_mass_scaling(self):
        base = coupling_rate(1e15, 1e-4, 1e-12, 1e7)
        heavy = coupling_rate(1e15, 1e-4, 4e-12, 1e7)
        assert heavy == pytest.approx(base / 2.0, rel=1e-14)

    def test_length_scaling(self):
        base = coupling_rate(1e15, 1e-4, 1e-12, 1e7)
        assert coupling_rate(1e15, 2e-4, 1e-12, 1e7) == pytest.approx(base / 2.0, rel=1e-14)

    def test_inverted_for_reference_value(self):
        # pick L so the formula gives exactly 0.9e6 rad/s, then check round trip
        omega_c = TWO_PI * const.c / 1064e-9
        mass, omega_m = 5e-12, 1e7
        target = 0.9e6
        length = (omega_c / target) * math.sqrt(const.hbar / (mass * omega_m))
        assert coupling_rate(omega_c, length, mass, omega_m) == pytest.approx(
            target, rel=1e-12
        )

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            coupling_rate(1e15, 0.0, 1e-12, 1e7)


def _brute_root_count(params, e_pump, w_max):
    """Sign-change count of the cubic on a dense grid (independent oracle)."""
    g2 = params.g0 ** 2 / params.omega_m
    w = np.linspace(0.0, w_max, 200001)
    poly = (
        g2 * g2 * w ** 3
        - 2.0 * g2 * params.delta_p * w ** 2
        + (params.kappa ** 2 + params.delta_p ** 2) * w
        - e_pump ** 2
    )
    # drop exact zeros so a grid point landing on a root still counts once
    signs = np.sign(poly)
    nonzero = signs[signs != 0]
    return int(np.sum(nonzero[:-1] * nonzero[1:] < 0))


class TestSteadyStateRoots:
    def test_zero_pump(self, params):
        roots = steady_state_roots(params, 0.0)
        assert len(roots) == 1
        assert roots[0].w0 == 0.0
        assert roots[0].b0 == 0.0
        assert roots[0].stable

    def test_uncoupled_lorentzian_filling(self, params):
        p = replace(params, g0=0.0)
        (root,) = steady_state_roots(p, 3.0)
        want = 9.0 / (p.kappa ** 2 + p.delta_p ** 2)
        assert root.w0 == pytest.approx(want, rel=1e-14)

    def test_red_detuning_always_single_root(self, params):
        for e_pump in np.geomspace(0.1, 3000.0, 25):
            roots = steady_state_roots(params, float(e_pump))
            assert len(roots) == 1
            w_max = 2.0 * max(r.w0 for r in roots) + 1.0
            assert _brute_root_count(params, float(e_pump), w_max) == 1

    def test_blue_detuning_bistable_window(self, params):
        p = replace(params, delta_p=10.0)
        roots = steady_state_roots(p, 25.0)
        assert len(roots) == 3
        assert [r.branch for r in roots] == ["lower", "middle", "upper"]
        assert roots[0].w0 < roots[1].w0 < roots[2].w0
        assert not roots[1].stable  # middle branch is always unstable
        w_max = 2.0 * roots[2].w0
        assert _brute_root_count(p, 25.0, w_max) == 3

    def test_residual_and_field_invariants(self, params):
        rng = np.random.default_rng(11)
        for _ in range(100):
            p = replace(params, delta_p=float(rng.uniform(-20.0, 20.0)))
            e_pump = float(10.0 ** rng.uniform(-1.0, 3.0))
            for root in steady_state_roots(p, e_pump):
                dtil = steady_effective_detuning(p, root)
                lhs = root.w0 * (p.kappa ** 2 + dtil ** 2)
                assert abs(lhs - e_pump ** 2) <= 1e-10 * e_pump ** 2
                assert abs(abs(root.b0) ** 2 - root.w0) <= 1e-12 * max(root.w0, 1e-300)
                assert root.q0 == pytest.approx(
                    p.g0 * root.w0 / p.omega_m, rel=1e-14, abs=0.0
                )

    def test_lower_branch_monotone_in_pump(self, params):
        w_prev = -1.0
        for e_pump in np.linspace(0.1, 100.0, 60):
            root = select_branch(steady_state_roots(params, float(e_pump)), "lowest")
            assert root.w0 > w_prev
            w_prev = root.w0

    def test_negative_pump_rejected(self, params):
        with pytest.raises(ValueError):
            steady_state_roots(params, -1.0)


class TestSelectBranch:
    def test_single_root_any_policy(self, params):
        roots = steady_state_roots(params, 1.0)
        for policy in ("lowest", "highest"):
            assert select_branch(roots, policy) is roots[0]
        assert select_branch(roots, "continuation", previous=42.0) is roots[0]

    def test_three_roots(self, params):
        p = replace(params, delta_p=10.0)
        roots = steady_state_roots(p, 25.0)
        assert select_branch(roots, "lowest") is roots[0]
        assert select_branch(roots, "highest") is roots[2]
        near_upper = roots[2].w0 * 0.95
        assert select_branch(roots, "continuation", previous=near_upper) is roots[2]

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError):
            select_branch([], "lowest")


class TestFDenominator:
    def test_uncoupled_limit(self, params):
        p = replace(params, g0=0.0)
        delta = 3.7
        want = (p.kappa - 1j * delta) ** 2 * p.omega_m ** 2 + p.omega_m ** 2 * p.delta_p ** 2
        assert f_denominator(delta, p, 123.0) == pytest.approx(want, rel=1e-14)
        assert f_denominator(delta, params, 0.0) == pytest.approx(
            (params.kappa - 1j * delta) ** 2 * params.omega_m ** 2
            + params.omega_m ** 2 * params.delta_p ** 2,
            rel=1e-14,
        )

    def test_matches_linear_system_determinant(self, params, threshold):
        # independent re-derivation: f(delta) = eta(delta) * det of the 3x3
        # sideband system
        root = select_branch(steady_state_roots(params, 0.5 * threshold), "lowest")
        dtil = steady_effective_detuning(params, root)
        g0, wm, gm, k = params.g0, params.omega_m, params.gamma_m, params.kappa
        for delta in (params.omega_m, params.omega_m - 1.0, -params.omega_m, 2.5):
            mat = np.array(
                [
                    [k + 1j * (dtil - delta), 0.0, -1j * g0 * root.b0],
                    [0.0, k - 1j * (dtil + delta), 1j * g0 * np.conj(root.b0)],
                    [
                        -wm * g0 * np.conj(root.b0),
                        -wm * g0 * root.b0,
                        wm * wm - delta * delta - 1j * gm * delta,
                    ],
                ]
            )
            want = eta(delta, params) * np.linalg.det(mat)
            got = f_denominator(delta, params, root.w0)
            assert abs(got - want) <= 1e-10 * abs(want)


class TestBPlusClosedForm:
    def test_zero_signal(self, params):
        assert b_plus_closed_form(4.0, params, 10.0, 0.0) == 0.0

    def test_bare_cavity_factorization(self, params):
        for delta in np.linspace(-30.0, 30.0, 61):
            got = b_plus_closed_form(float(delta), params, 0.0, 1.0)
            want = 1.0 / (params.kappa - 1j * delta + 1j * params.delta_p)
            assert abs(got - want) <= 1e-12 * abs(want)

    def test_linear_in_signal_amplitude(self, params, threshold):
        root = select_branch(steady_state_roots(params, 0.5 * threshold), "lowest")
        one = b_plus_closed_form(9.5, params, root.w0, 1.0)
        ten = b_plus_closed_form(9.5, params, root.w0, 10.0)
        assert ten == pytest.approx(10.0 * one, rel=1e-14)

    def test_singular_floor_raises(self, params):
        with pytest.raises(SingularResponseError) as exc_info:
            # an absurdly high floor turns any point singular
            b_plus_closed_form(9.5, params, 1.0, 1.0, floor=1e30)
        assert exc_info.value.delta == 9.5


class TestOutputField:
    def test_zero(self):
        assert output_field(0.0j, 0.7) == 0.0

    def test_unit_kappa_half(self):
        assert output_field(1.0 + 0.0j, 0.5) == 1.0 + 0.0j

    def test_linearity(self):
        a = 2.0 - 3.0j
        x = 0.4 + 0.1j
        assert output_field(a * x, 1.3) == pytest.approx(a * output_field(x, 1.3))

    def test_rejects_nonpositive_kappa(self):
        with pytest.raises(ValueError):
            output_field(1.0, 0.0)


class TestResponseEps:
    def test_bare_cavity_on_resonance(self, params):
        steady = steady_state_roots(params, 0.0)[0]
        pt = response_eps(params.delta_p, params, steady, 1e-3)
        assert pt.delta_s == 0.0
        assert pt.eps_t == pytest.approx(2.0 + 0.0j, rel=1e-13)

    def test_bare_cavity_far_detuned(self, params):
        steady = steady_state_roots(params, 0.0)[0]
        pt = response_eps(params.delta_p + 1e6, params, steady, 1e-3)
        assert abs(pt.eps_t) < 1e-5

    def test_point_invariants(self, params, threshold):
        steady = select_branch(steady_state_roots(params, 0.5 * threshold), "lowest")
        for method in ("closed_form", "linearized"):
            pt = response_eps(9.7, params, steady, 1e-3, method=method)
            assert pt.b_out_plus == math.sqrt(2.0 * params.kappa) * pt.b_plus
            assert pt.power_response == abs(pt.eps_t) ** 2
            assert pt.delta_s == pt.delta - params.delta_p

    def test_eps_t_independent_of_signal_amplitude(self, params, threshold):
        steady = select_branch(steady_state_roots(params, 0.5 * threshold), "lowest")
        small = response_eps(9.7, params, steady, 1e-4).eps_t
        large = response_eps(9.7, params, steady, 1e-3).eps_t
        assert large == pytest.approx(small, rel=1e-13)

    def test_pump_on_beats_pump_off_at_cavity_resonance(self, params, threshold):
        off = response_eps(
            params.delta_p, params, steady_state_roots(params, 0.0)[0], 1e-3
        )
        on_state = select_branch(steady_state_roots(params, 0.7 * threshold), "lowest")
        on = response_eps(params.delta_p, params, on_state, 1e-3, method="linearized")
        assert off.power_response == pytest.approx(4.0, rel=1e-12)
        assert on.power_response > off.power_response

    def test_rejects_zero_signal(self, params):
        steady = steady_state_roots(params, 0.0)[0]
        with pytest.raises(ValueError):
            response_eps(1.0, params, steady, 0.0)

    def test_unknown_method_rejected(self, params):
        steady = steady_state_roots(params, 0.0)[0]
        with pytest.raises(ValueError):
            response_eps(1.0, params, steady, 1e-3, method="psychic")
