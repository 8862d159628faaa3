import numpy as np
import pytest

from pillar_qed import (
    BackgroundModel,
    DesignPoint,
    QdState,
    SystemParams,
    conditional_phase_spectrum,
    interface_feasible,
    max_conditional_phase,
    reflection_amplitude,
    relative_phase,
    sweep_kappa,
)

from conftest import DEVICE, grid_around

WC = DEVICE["omega_c"]

# frozen from the dense-grid oracle (arg-convention conditional phase)
COND_MAX_INTRINSIC = 0.0606878937
COND_MAX_OFFSET = -6.2105
COND_MAX_BG07 = 0.0229739


def inline_amplitude(g, kap, ks, gam, wc, wqd, w):
    return 1 - (kap * (1j * (wqd - w) + gam / 2)) / (
        (1j * (wqd - w) + gam / 2) * (1j * (wc - w) + (kap + ks) / 2) + g * g
    )


class TestConditionalPhaseSpectrum:
    def test_uncoupled_dot_gives_zero_spectrum(self):
        p = SystemParams(g=0.0, kappa_top=1.2, kappa_side=24.7, gamma=5.0, omega_c=WC)
        grid = grid_around(WC, 100.0, 2001)
        s = conditional_phase_spectrum(p, WC, grid)
        np.testing.assert_allclose(s.values, 0.0, atol=1e-14)

    def test_device_intrinsic_maximum_against_grid_oracle(self):
        p = SystemParams(**DEVICE)
        grid = grid_around(WC, 100.0, 200001)
        s = conditional_phase_spectrum(p, WC, grid)
        i = int(np.argmax(np.abs(s.values)))

        r_d = inline_amplitude(9.4, 1.2, 24.7, 5.0, WC, WC, grid)
        r_c = inline_amplitude(0.0, 1.2, 24.7, 5.0, WC, WC, grid)
        oracle = np.angle(r_d) - np.angle(r_c)  # no winding at these rates
        j = int(np.argmax(np.abs(oracle)))

        assert abs(s.values[i]) == pytest.approx(abs(oracle[j]), abs=1e-12)
        assert abs(s.values[i]) == pytest.approx(COND_MAX_INTRINSIC, abs=1e-6)
        assert grid[i] - WC == pytest.approx(COND_MAX_OFFSET, abs=0.01)

    def test_device_maximum_with_background(self):
        p = SystemParams(**DEVICE)
        grid = grid_around(WC, 100.0, 200001)
        s = conditional_phase_spectrum(p, WC, grid, bg=BackgroundModel(0.7))
        assert np.max(np.abs(s.values)) == pytest.approx(COND_MAX_BG07, abs=1e-6)

    def test_matches_relative_phase_without_winding(self):
        p = SystemParams(**DEVICE)
        grid = grid_around(WC, 100.0, 2001)
        s = conditional_phase_spectrum(p, WC, grid)
        np.testing.assert_allclose(s.values, relative_phase(p, WC, grid), atol=1e-12)

    def test_unwrapped_difference_winds_at_overcoupled_point(self):
        p = SystemParams(g=9.4, kappa_top=37.6, kappa_side=24.7, gamma=5.0, omega_c=WC)
        grid = grid_around(WC, 2000.0, 40001)
        s = conditional_phase_spectrum(p, WC, grid)
        # empty cavity winds by 2*pi, coupled does not: the unwrapped
        # difference steps from ~0 to ~(-)2*pi across resonance
        assert abs(s.values[0]) < 0.2
        assert abs(abs(s.values[-1]) - 2 * np.pi) < 0.2


class TestMaxConditionalPhase:
    def test_refinement_beats_dense_scan(self):
        p = SystemParams(**DEVICE)
        magnitude, argmax = max_conditional_phase(p)
        grid = grid_around(WC, 5 * 25.9, 2000001)
        dense = np.max(np.abs(relative_phase(p, WC, grid)))
        assert magnitude >= dense - 1e-12
        assert magnitude == pytest.approx(COND_MAX_INTRINSIC, abs=1e-7)
        assert argmax - WC == pytest.approx(COND_MAX_OFFSET, abs=1e-3)

    def test_design_point_reaches_pi_at_resonance(self):
        p = SystemParams(g=9.4, kappa_top=37.6, kappa_side=24.7, gamma=5.0, omega_c=WC)
        magnitude, argmax = max_conditional_phase(p)
        # the maximum sits on the sign-flip cusp at resonance
        assert magnitude == pytest.approx(np.pi, abs=1e-6)
        assert argmax == pytest.approx(WC, abs=0.01)
        assert relative_phase(p, WC, WC) == pytest.approx(np.pi, abs=0.0)

    def test_magnitude_bounded_by_pi(self):
        for kappa in (0.5, 5.0, 24.7, 60.0):
            p = SystemParams(g=9.4, kappa_top=kappa, kappa_side=24.7, gamma=5.0, omega_c=WC)
            magnitude, _ = max_conditional_phase(p)
            assert 0.0 <= magnitude <= np.pi + 1e-12


class TestSweep:
    def test_device_and_design_points(self):
        base = SystemParams(**DEVICE)
        points = sweep_kappa(base, [37.6, 1.2])
        assert [pt.params.kappa_top for pt in points] == [1.2, 37.6]

        as_built, redesigned = points
        assert not as_built.feasible
        assert not interface_feasible(as_built)
        assert as_built.max_conditional_phase == pytest.approx(COND_MAX_INTRINSIC, abs=1e-6)

        assert redesigned.feasible
        assert interface_feasible(redesigned)
        assert redesigned.max_conditional_phase == pytest.approx(np.pi, abs=1e-6)
        assert redesigned.on_resonance_reflectivity == pytest.approx(0.1888210545, abs=1e-9)
        assert redesigned.on_resonance_reflectivity == pytest.approx(0.19, abs=0.03)

    def test_vanishing_outcoupling_vanishing_phase(self):
        base = SystemParams(**DEVICE)
        (point,) = sweep_kappa(base, [1e-3])
        assert point.max_conditional_phase < 1e-3
        assert not point.feasible

    def test_empty_cavity_sign_flip_at_kappa_side(self):
        for eps in (1e-6, 1e-3):
            below = SystemParams(g=9.4, kappa_top=24.7 - eps, kappa_side=24.7, gamma=5.0, omega_c=WC)
            above = SystemParams(g=9.4, kappa_top=24.7 + eps, kappa_side=24.7, gamma=5.0, omega_c=WC)
            qd = QdState(WC, coupled=False)
            assert reflection_amplitude(below, qd, WC).real > 0
            assert reflection_amplitude(above, qd, WC).real < 0

    def test_feasibility_boundary_in_strongly_coupled_sweep(self):
        # with g >= (kappa + kappa_side + gamma)/4 across the sweep the
        # classification follows the sign of the empty-cavity on-resonance
        # amplitude: the boundary sits at kappa = kappa_side
        base = SystemParams(g=30.0, kappa_top=5.0, kappa_side=10.0, gamma=2.0, omega_c=WC)
        kappas = [6.0, 8.0, 9.9, 10.1, 12.0, 20.0, 40.0]
        points = sweep_kappa(base, kappas)
        for pt in points:
            assert pt.params.g >= (pt.params.kappa_total + pt.params.gamma) / 4
            assert pt.feasible == (pt.params.kappa_top > base.kappa_side)

    def test_rescaling_invariance(self):
        base = SystemParams(**DEVICE)
        scale = 3.7
        scaled = SystemParams(
            g=9.4 * scale,
            kappa_top=1.2 * scale,
            kappa_side=24.7 * scale,
            gamma=5.0 * scale,
            omega_c=WC,
        )
        mag0, arg0 = max_conditional_phase(base)
        mag1, arg1 = max_conditional_phase(scaled)
        assert mag1 == pytest.approx(mag0, abs=1e-8)
        assert (arg1 - WC) == pytest.approx(scale * (arg0 - WC), rel=1e-4)
        refl0 = abs(reflection_amplitude(base, QdState(WC), WC)) ** 2
        refl1 = abs(reflection_amplitude(scaled, QdState(WC), WC)) ** 2
        assert refl1 == pytest.approx(refl0, abs=1e-12)


class TestDesignPoint:
    def test_field_validation(self):
        p = SystemParams(**DEVICE)
        with pytest.raises(ValueError):
            DesignPoint(p, max_conditional_phase=4.0, argmax_omega=WC,
                        on_resonance_reflectivity=0.5, feasible=True)
        with pytest.raises(ValueError):
            DesignPoint(p, max_conditional_phase=0.5, argmax_omega=WC,
                        on_resonance_reflectivity=1.5, feasible=False)
