import numpy as np
import pytest

from tracelab.errors import DomainError, InputError, ResourceLimitError, TruncationError
from tracelab.potentials import Potential, gt_rhs, load_sampled
from tracelab.spectra import (
    Spectrum,
    TailModel,
    box_spectrum,
    dirichlet_eigensystem,
    dirichlet_solve,
    harmonic_spectrum,
    heat_trace,
    radial_solve,
)


class TestBoxSpectrum:
    def test_first_levels_1d(self):
        s = box_spectrum(1.0, 1, 10)
        assert s.eigenvalues[:3].tolist() == [2.0, 5.0, 10.0]
        assert s.multiplicities[:3].tolist() == [1, 1, 1]

    def test_lowest_2d(self):
        s = box_spectrum(1.0, 2, 10)
        assert s.eigenvalues[0] == 3.0
        assert s.multiplicities[0] == 1

    def test_degenerate_level_2d(self):
        s = box_spectrum(1.0, 2, 30)
        idx = np.where(s.eigenvalues == 6.0)[0]
        assert s.multiplicities[idx[0]] == 2  # (1,2) and (2,1)

    @pytest.mark.parametrize("eps", [0.5, 0.2])
    def test_eps_scaling_exact(self, eps):
        # (lambda - 1)/eps^2 is the same integer lattice for every eps
        a = box_spectrum(1.0, 2, 40)
        b = box_spectrum(eps, 2, 40)
        n = min(len(a.eigenvalues), len(b.eigenvalues))
        sa = np.round(a.eigenvalues[:n] - 1.0).astype(int)
        sb = np.round((b.eigenvalues[:n] - 1.0) / eps**2).astype(int)
        np.testing.assert_array_equal(sa, sb)
        np.testing.assert_array_equal(a.multiplicities[:n], b.multiplicities[:n])
        np.testing.assert_allclose(b.eigenvalues[:n] - 1.0, (a.eigenvalues[:n] - 1.0) * eps**2, rtol=1e-14)

    def test_budget(self):
        with pytest.raises(ResourceLimitError):
            box_spectrum(1e-4, 3, 10_000_000, budget=10_000)


class TestHarmonicSpectrum:
    def test_1d_ladder(self):
        s = harmonic_spectrum(1.0, 0.0, 1, 5)
        assert s.eigenvalues.tolist() == [1.0, 3.0, 5.0, 7.0, 9.0]
        assert s.multiplicities.tolist() == [1] * 5

    def test_2d_multiplicities(self):
        s = harmonic_spectrum(1.0, 0.0, 2, 10)
        assert s.eigenvalues[:3].tolist() == [2.0, 4.0, 6.0]
        assert s.multiplicities[:3].tolist() == [1, 2, 3]

    def test_shift_by_b(self):
        a = harmonic_spectrum(1.0, 0.0, 1, 8)
        b = harmonic_spectrum(1.0, 0.7, 1, 8)
        np.testing.assert_allclose(b.eigenvalues - a.eigenvalues, 0.7, rtol=0, atol=1e-15)


class TestDirichletSolve:
    def test_free_laplacian(self):
        v = Potential.sampled(np.linspace(0.0, np.pi, 11), np.zeros(11))
        s = dirichlet_solve(v, 5, 2000)
        want = np.arange(1, 6, dtype=float) ** 2
        assert np.max(np.abs(s.eigenvalues / want - 1.0)) < 1e-3

    def test_constant_shift(self):
        grid = np.linspace(0.0, np.pi, 11)
        s0 = dirichlet_solve(Potential.sampled(grid, np.zeros(11)), 4, 1000)
        s1 = dirichlet_solve(Potential.sampled(grid, np.ones(11)), 4, 1000)
        np.testing.assert_allclose(s1.eigenvalues - s0.eigenvalues, 1.0, rtol=0, atol=1e-9)

    def test_harmonic_oracle(self):
        v = Potential.harmonic(1.0, 0.0, 1)
        s = dirichlet_solve(v, 2, 4000, domain=(-12.0, 12.0))
        assert abs(s.eigenvalues[0] - 1.0) < 1e-4
        assert abs(s.eigenvalues[1] - 3.0) < 1e-4

    def test_h_squared_convergence(self):
        # halving h shrinks the defect by 4 +- 20% (V=0 and harmonic fixtures)
        v0 = Potential.sampled(np.linspace(0.0, np.pi, 11), np.zeros(11))
        e1 = dirichlet_solve(v0, 1, 500).eigenvalues[0] - 1.0
        e2 = dirichlet_solve(v0, 1, 1001).eigenvalues[0] - 1.0
        assert 0.8 * 4.0 <= e1 / e2 <= 1.2 * 4.0
        vh = Potential.harmonic(1.0, 0.0, 1)
        f1 = dirichlet_solve(vh, 1, 1000, domain=(-12, 12)).eigenvalues[0] - 1.0
        f2 = dirichlet_solve(vh, 1, 2001, domain=(-12, 12)).eigenvalues[0] - 1.0
        assert 0.8 * 4.0 <= f1 / f2 <= 1.2 * 4.0

    def test_monotonicity_in_potential(self):
        rng = np.random.default_rng(11)
        grid = np.linspace(0.0, 4.0, 41)
        v1 = rng.uniform(0.0, 2.0, size=41)
        v2 = v1 + rng.uniform(0.0, 1.5, size=41)
        s1 = dirichlet_solve(Potential.sampled(grid, v1), 6, 800)
        s2 = dirichlet_solve(Potential.sampled(grid, v2), 6, 800)
        assert np.all(s1.expanded()[:6] <= s2.expanded()[:6] + 1e-9)

    def test_grid_requirement(self):
        v = Potential.harmonic(1.0, 0.0, 1)
        with pytest.raises(InputError):
            dirichlet_solve(v, 10, 50)

    def test_nonfinite_rejected(self):
        grid = np.linspace(0.0, 1.0, 5)
        with pytest.raises(InputError):
            Potential.sampled(grid, np.array([0.0, 1.0, np.nan, 1.0, 0.0]))

    def test_eigensystem_orthonormal(self, harmonic_eigensystem):
        x, h, levels, psis = harmonic_eigensystem
        g = psis @ psis.T * h
        assert np.max(np.abs(g - np.eye(len(levels)))) < 1e-10
        np.testing.assert_allclose(levels[:3], [1.0, 3.0, 5.0], atol=2e-4)


class TestRadialSolve:
    def test_harmonic_3d(self):
        v = Potential.harmonic(1.0, 0.0, 3)
        s = radial_solve(v, 3, 2, 3000, rmax=10.0)
        assert abs(s.eigenvalues[0] - 3.0) < 1e-3
        assert abs(s.eigenvalues[1] - 7.0) < 4e-3

    def test_ball_ground_mode(self):
        # V=0 on a ball of radius pi: ground mode sin(r)/r, eigenvalue 1
        v = Potential.sampled(np.linspace(0.0, np.pi, 31), np.zeros(31))
        s = radial_solve(v, 3, 1, 3000, rmax=np.pi)
        assert abs(s.eigenvalues[0] - 1.0) < 1e-3

    def test_d1_reduction_bitwise(self):
        v = Potential.harmonic(1.0, 0.0, 1)
        a = radial_solve(v, 1, 3, 1000, rmax=8.0)
        b = dirichlet_solve(v, 3, 1000, domain=(0.0, 8.0))
        np.testing.assert_array_equal(a.eigenvalues, b.eigenvalues)

    def test_angular_sector(self):
        # 3D oscillator ell=1 ladder starts at 2*0 + 1 + 3/2... levels A(2k+d)
        # with ell shifting the radial problem: lowest ell=1 level is 5
        v = Potential.harmonic(1.0, 0.0, 3)
        s = radial_solve(v, 3, 1, 3000, rmax=10.0, ell=1)
        assert abs(s.eigenvalues[0] - 5.0) < 2e-3


class TestHeatTrace:
    def test_harmonic_closed_form(self):
        s = harmonic_spectrum(1.0, 0.0, 1, 30)
        val = heat_trace(s, 1.0)
        assert val.value == pytest.approx(1.0 / (2.0 * np.sinh(1.0)), rel=1e-13)

    def test_b_shift_factor(self):
        s0 = harmonic_spectrum(1.0, 0.0, 1, 30)
        s1 = harmonic_spectrum(1.0, 1.0, 1, 30)
        t = 0.7
        assert heat_trace(s1, t).value == pytest.approx(np.exp(-t) * heat_trace(s0, t).value, rel=1e-12)

    def test_large_t_multiplicity(self):
        s = harmonic_spectrum(1.0, 0.0, 2, 40)  # ground level 2, multiplicity 1
        t = 30.0
        v = heat_trace(s, t)
        assert v.value / np.exp(-t * s.eigenvalues[0]) == pytest.approx(s.multiplicities[0], rel=1e-10)

    def test_box_tail_bracket_honest(self):
        s = box_spectrum(1.0, 1, 60)
        v = heat_trace(s, 0.25)
        exact = sum(np.exp(-0.25 * (1.0 + n * n)) for n in range(1, 2000))
        assert abs(v.value - exact) <= v.error + 1e-14

    def test_box_tail_2d(self):
        s = box_spectrum(0.7, 2, 600)
        v = heat_trace(s, 0.3)
        exact = sum(
            np.exp(-0.3 * (1.0 + 0.49 * (i * i + j * j))) for i in range(1, 80) for j in range(1, 80)
        )
        assert abs(v.value - exact) <= v.error + 1e-12

    def test_missing_tail_raises(self):
        s = Spectrum(np.array([1.0, 2.0]), np.array([1, 1]), 2, TailModel("none"))
        with pytest.raises(TruncationError):
            heat_trace(s, 0.05)
        # fine at large t where the remainder is negligible
        heat_trace(s, 40.0)


class TestGtRhs:
    def test_gaussian_1d(self):
        assert gt_rhs(Potential.harmonic(1.0, 0.0, 1), 1.0) == pytest.approx(0.5, rel=1e-10)

    def test_harmonic_closed_form(self):
        v = Potential.harmonic(1.3, 0.4, 2)
        t = 0.9
        want = np.exp(-0.4 * t) / (2.0 * 1.3 * t) ** 2
        assert gt_rhs(v, t) == pytest.approx(want, rel=1e-9)

    def test_t_scaling(self):
        v = Potential.harmonic(1.0, 0.0, 1)
        assert gt_rhs(v, 2.0) == pytest.approx(0.5 * gt_rhs(v, 1.0), rel=1e-10)

    def test_box(self):
        v = Potential.box(0.5, 1)
        want = (4.0 * np.pi) ** -0.5 * np.exp(-1.0) * (np.pi / 0.5)
        assert gt_rhs(v, 1.0) == pytest.approx(want, rel=1e-12)

    def test_power_vs_closed_form(self):
        # int e^{-t c |x|^p} dx = 2 Gamma(1+1/p) (tc)^{-1/p} in d=1
        from scipy.special import gamma as G

        v = Potential.power(2.0, 4.0, 1)
        t = 1.5
        want = (4 * np.pi * t) ** -0.5 * 2.0 * G(1.25) * (t * 2.0) ** -0.25
        assert gt_rhs(v, t) == pytest.approx(want, rel=1e-9)


class TestSerialization:
    def test_spectrum_roundtrip(self):
        s = box_spectrum(0.8, 2, 25)
        s2 = Spectrum.from_json(s.to_json())
        np.testing.assert_array_equal(s.eigenvalues, s2.eigenvalues)
        np.testing.assert_array_equal(s.multiplicities, s2.multiplicities)
        assert s2.tail.kind == "box_lattice"

    def test_load_sampled_text_and_json(self, tmp_path):
        x = np.linspace(0.0, 1.0, 9)
        v = x**2
        ptxt = tmp_path / "v.txt"
        np.savetxt(ptxt, np.column_stack([x, v]))
        pot = load_sampled(ptxt)
        np.testing.assert_allclose(pot.values, v)
        pjson = tmp_path / "v.json"
        pjson.write_text('{"x": %s, "v": %s}' % (x.tolist(), v.tolist()))
        pot2 = load_sampled(pjson)
        np.testing.assert_allclose(pot2.values, v)
        ppairs = tmp_path / "pairs.json"
        ppairs.write_text(str([[float(a), float(b)] for a, b in zip(x, v)]))
        pot3 = load_sampled(ppairs)
        np.testing.assert_allclose(pot3.grid, x)

    def test_sampled_validation(self):
        with pytest.raises(InputError):
            Potential.sampled([0.0, 1.0], [1.0, 2.0])  # too few points
        with pytest.raises(InputError):
            Potential.sampled([0.0, 0.5, 0.2], [1.0, 2.0, 3.0])  # not increasing


class TestDualIntegrability:
    def test_box_always(self):
        assert Potential.box(1.0, 1).check_dual_integrability(2.0)

    def test_harmonic_needs_offset_and_gamma(self):
        assert Potential.harmonic(1.0, 1.0, 1).check_dual_integrability(3.0)
        assert not Potential.harmonic(1.0, 0.0, 1).check_dual_integrability(3.0)
        assert not Potential.harmonic(1.0, 1.0, 1).check_dual_integrability(0.9)

    def test_power_never(self):
        assert not Potential.power(1.0, 2.0, 1).check_dual_integrability(3.0)
