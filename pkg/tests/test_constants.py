import numpy as np
import pytest
from scipy.special import gammaln as scipy_gammaln

from tracelab.constants import (
    SemiclassicalParams,
    dual_exponent_identity,
    gamma_ln,
    interp_constant,
    kappa_dual,
    kappa_standard,
    one_bound_state_readings,
    one_bound_state_via_kappa,
    semiclassical_c_lt,
    sharp_constant,
)
from tracelab.errors import DomainError, MissingInputError


class TestGammaLn:
    def test_trivial_values(self):
        assert gamma_ln(1.0) == pytest.approx(0.0, abs=1e-14)
        assert gamma_ln(5.0) == pytest.approx(np.log(24.0), rel=1e-13)
        assert gamma_ln(0.5) == pytest.approx(0.5 * np.log(np.pi), rel=1e-13)

    def test_against_scipy_oracle(self):
        xs = np.concatenate([np.linspace(1e-3, 0.5, 307, endpoint=False), np.linspace(0.5, 170.0, 2500)])
        ours = np.array([gamma_ln(float(x)) for x in xs])
        ref = scipy_gammaln(xs)
        rel = np.abs(ours - ref) / np.maximum(np.abs(ref), 1e-3)
        assert rel.max() < 1e-12

    def test_recurrence(self):
        # ln Gamma(x+1) = ln Gamma(x) + ln x on a sampled grid
        rng = np.random.default_rng(3)
        xs = np.concatenate([rng.uniform(0.05, 30.0, 200), rng.uniform(30.0, 160.0, 100)])
        for x in xs:
            lhs = gamma_ln(x + 1.0)
            rhs = gamma_ln(x) + np.log(x)
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))

    def test_domain(self):
        with pytest.raises(DomainError):
            gamma_ln(0.0)
        with pytest.raises(DomainError):
            gamma_ln(-2.5)


class TestSharpConstant:
    def test_reference_values(self):
        assert sharp_constant(1.0, 1) == pytest.approx(0.5, rel=1e-12)
        assert sharp_constant(1.5, 1) == pytest.approx(1.0 / np.pi, rel=1e-12)

    def test_physical_units(self):
        # hbar=1, m=1 carries the factor (2m/hbar^2)^{d/2} = sqrt(2)
        assert sharp_constant(1.0, 1, hbar=1.0, mass=1.0) == pytest.approx(np.sqrt(2.0) * 0.5, rel=1e-12)

    @pytest.mark.parametrize("hbar", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("mass", [0.25, 0.5, 1.0])
    @pytest.mark.parametrize("gamma,d", [(1.0, 1), (2.5, 2), (3.0, 3)])
    def test_scaling_law(self, hbar, mass, gamma, d):
        ref = sharp_constant(gamma, d)
        val = sharp_constant(gamma, d, hbar=hbar, mass=mass)
        assert val == pytest.approx((2.0 * mass / hbar**2) ** (d / 2.0) * ref, rel=1e-12)

    def test_gamma_pole(self):
        with pytest.raises(DomainError):
            sharp_constant(0.5, 1)
        with pytest.raises(DomainError):
            SemiclassicalParams(1.0, 1, hbar=-1.0)

    def test_semiclassical_preset(self):
        # Gamma(5/2)/((4 pi)^{1/2} Gamma(3)) = 3/16 in d=1
        assert semiclassical_c_lt(1.5, 1) == pytest.approx(3.0 / 16.0, rel=1e-12)


class TestKappas:
    def test_standard_values(self):
        kp = kappa_standard(1.5, 1)
        assert kp.kappa1 == pytest.approx(3.0 * 4.0 ** (-4.0 / 3.0), rel=1e-12)
        assert kp.kappa2 == pytest.approx(8.0 / 3.0, rel=1e-15)
        kp22 = kappa_standard(2.0, 2)
        assert kp22.kappa1 == pytest.approx(2.0 * (1.0 / 3.0) ** 1.5, rel=1e-12)
        assert kp22.kappa2 == pytest.approx(3.0, rel=1e-15)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_kappa2_at_gamma_equal_d(self, d):
        assert kappa_standard(float(d), d).kappa2 == pytest.approx(3.0, rel=1e-15)

    def test_dual_values(self):
        kp = kappa_dual(2.0, 1)
        assert kp.q == pytest.approx(0.6, rel=1e-15)
        want = 1.2**1.5 * 0.4**0.5 / 1.6**2
        assert kp.kappa1 == pytest.approx(want, rel=1e-12)
        assert kp.kappa2 == pytest.approx(4.0, rel=1e-15)
        kp53 = kappa_dual(2.5, 3)
        assert kp53.q == pytest.approx(0.5, rel=1e-15)
        assert kp53.kappa1 == pytest.approx(1.5**1.5 / 2.5**2.5, rel=1e-12)
        assert kp53.kappa2 == pytest.approx(5.0, rel=1e-15)

    def test_dual_exponent_identity(self):
        lhs, rhs = dual_exponent_identity(2.0, 1)
        assert lhs == pytest.approx(0.75, rel=1e-14)
        assert rhs == pytest.approx(0.75, rel=1e-14)
        for gamma, d in [(0.8, 1), (1.7, 2), (4.0, 3)]:
            lhs, rhs = dual_exponent_identity(gamma, d)
            assert lhs == pytest.approx(rhs, rel=1e-13)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_dual_q_range_and_threshold(self, d):
        # q in (0,1) always; 2q > 1 exactly when gamma > 1 + d/2
        for gamma in np.linspace(d / 2.0 + 0.01, d / 2.0 + 6.0, 40):
            q = kappa_dual(gamma, d).q
            assert 0.0 < q < 1.0
            assert (2.0 * q > 1.0) == (gamma > 1.0 + d / 2.0)

    def test_domains(self):
        with pytest.raises(DomainError):
            kappa_dual(0.5, 1)
        with pytest.raises(DomainError):
            kappa_standard(0.3, 1)  # needs gamma > 1/2 in d = 1
        kappa_standard(0.4, 3)  # in-domain: the constraint is gamma > 0 for d >= 2


class TestInterpConstant:
    def test_dual_value(self):
        # q = 0.6, C(2) = 1/4: K = 1/(q [C (gamma-d/2)]^{q-1})
        want = 1.0 / (0.6 * (0.25 * 1.5) ** (-0.4))
        val = interp_constant("dual", 2.0, 1)
        assert val == pytest.approx(want, rel=1e-13)
        assert val == pytest.approx(1.1258000321005113, rel=1e-12)

    def test_standard_value(self):
        # q = 2, c_lt = 3/16: K^{-1} = 2 (3/16 * 2)^1 = 3/4
        val = interp_constant("standard", 1.5, 1, c_lt=3.0 / 16.0)
        assert val == pytest.approx(4.0 / 3.0, rel=1e-13)

    def test_standard_requires_c_lt(self):
        with pytest.raises(MissingInputError):
            interp_constant("standard", 1.5, 1)

    def test_determinism(self):
        a = interp_constant("dual", 2.0, 1)
        b = interp_constant("dual", 2.0, 1)
        assert a == b  # identical bits


class TestKappaReadings:
    def test_standard_proof_consistent_reading(self):
        # d=1, gamma=3/2 closed-form chain: C_GN = 3^{1/8}, direct = 3/16
        cgn = 3.0**0.125
        via = one_bound_state_via_kappa("standard", 1.5, 1, cgn)
        assert via == pytest.approx(3.0 / 16.0, rel=1e-12)
        readings = one_bound_state_readings("standard", 1.5, 1, cgn)
        assert readings["proof_consistent"] == pytest.approx(3.0 / 16.0, rel=1e-12)
        # literal reading equals (3/16)^{1/gamma}, inconsistent with direct
        assert readings["literal"] == pytest.approx((3.0 / 16.0) ** (2.0 / 3.0), rel=1e-12)

    def test_dual_statement_matches_proof(self):
        readings = one_bound_state_readings("dual", 2.0, 1, 1.2353881814846542)
        assert readings["literal"] == readings["proof_consistent"]
