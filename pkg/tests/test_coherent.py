import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gammaln

from defosc import (
    DomainError,
    FockVector,
    Method,
    ModelParams,
    TruncationError,
    annihilation_eigenstate,
    apply,
    closed_form_bg_coefficients,
    compare_states,
    deformed_displacement_coefficients,
    displacement_state_closed_form,
    displacement_state_direct,
    displacement_state_factored,
    factored_displacement_matrices,
    glauber_coefficients,
    harmonic_deformation,
    harmonic_limit_deviation,
    ladder_matrices,
    photon_statistics,
    pseudoharmonic_deformation,
    tpt_deformation,
    tpt_ladder_coefficients,
    zeta_from_alpha,
)
from defosc.coherent import MAX_CUTOFF_ENV, max_auto_cutoff


def negative_binomial_tail(r_index, zeta, start):
    """Independent tail sum of the displacement weights from `start` on,
    closed with a geometric-majorant remainder bound."""
    z = abs(zeta) ** 2
    total = 0.0
    n = start
    while True:
        log_t = (
            r_index * math.log1p(-z)
            + n * math.log(z)
            + gammaln(n + r_index)
            - gammaln(n + 1.0)
            - gammaln(r_index)
        )
        t = math.exp(log_t)
        total += t
        ratio = z * (n + r_index) / (n + 1.0)
        if ratio < 1.0 and t * ratio / (1.0 - ratio) < 1e-18:
            return total + t * ratio / (1.0 - ratio)
        n += 1


class TestAnnihilationEigenstate:
    def test_recurrence_ratios(self):
        f = tpt_deformation(ModelParams.tpt(2.0))
        c = annihilation_eigenstate(f, 0.5, 32).state.coeffs
        assert c[1] / c[0] == pytest.approx(0.5, abs=1e-14)
        assert c[2] / c[0] == pytest.approx(0.25 / (math.sqrt(2) * math.sqrt(1.25)), abs=1e-14)

    def test_zero_amplitude_gives_vacuum(self):
        f = tpt_deformation(ModelParams.tpt(2.0))
        res = annihilation_eigenstate(f, 0.0, 16)
        assert np.array_equal(res.state.coeffs, FockVector.vacuum(16).coeffs)
        assert res.tail_mass == 0.0

    def test_result_metadata(self):
        f = tpt_deformation(ModelParams.tpt(2.0))
        res = annihilation_eigenstate(f, 0.5, 32)
        assert res.method is Method.ANNIHILATION_EIGENSTATE
        assert res.state.norm() == pytest.approx(1.0, abs=1e-12)
        assert res.model is not None and res.model.lam == 2.0
        # normalization constant rescales the raw family (c_0 = 1) to unit norm
        assert res.state.coeffs[0].real == pytest.approx(res.normalization_constant, rel=1e-12)

    def test_auto_doubling_reports_final_cutoff(self):
        f = tpt_deformation(ModelParams.tpt(2.0))
        res = annihilation_eigenstate(f, 2.0, 4, tail_tol=1e-12)
        assert res.state.cutoff > 4
        assert res.tail_mass <= 1e-12

    def test_truncation_error_at_cap(self):
        f = tpt_deformation(ModelParams.tpt(2.0))
        with pytest.raises(TruncationError):
            annihilation_eigenstate(f, 3.0, 8, tail_tol=1e-30, max_cutoff=16)

    def test_env_cap(self, monkeypatch):
        monkeypatch.setenv(MAX_CUTOFF_ENV, "8")
        assert max_auto_cutoff() == 8
        f = tpt_deformation(ModelParams.tpt(2.0))
        with pytest.raises(TruncationError):
            annihilation_eigenstate(f, 4.0, 8, tail_tol=1e-30)
        monkeypatch.setenv(MAX_CUTOFF_ENV, "junk")
        with pytest.raises(DomainError):
            max_auto_cutoff()

    def test_eigenstate_property_interior(self):
        f = tpt_deformation(ModelParams.tpt(2.0))
        alpha = 0.8 - 0.3j
        c = annihilation_eigenstate(f, alpha, 64).state.coeffs
        lowering, _ = ladder_matrices(f, 64)
        image = lowering.entries @ c
        assert np.max(np.abs(image[:-1] - alpha * c[:-1])) < 1e-10


class TestClosedFormCoefficients:
    def test_tpt_first_ratio(self):
        p = ModelParams.tpt(2.0)
        c = closed_form_bg_coefficients(p, 0.5, 16).coeffs
        assert c[1] / c[0] == pytest.approx(0.5, abs=1e-14)

    def test_pseudoharmonic_first_ratio(self):
        p = ModelParams.pseudoharmonic(1.0)
        c = closed_form_bg_coefficients(p, 1.0, 16).coeffs
        assert c[1] / c[0] == pytest.approx(1.0 / math.sqrt(3.0), abs=1e-14)

    def test_zero_amplitude(self):
        p = ModelParams.pseudoharmonic(1.0)
        assert np.array_equal(closed_form_bg_coefficients(p, 0.0, 8).coeffs,
                              FockVector.vacuum(8).coeffs)

    def test_harmonic_not_covered(self):
        with pytest.raises(DomainError):
            closed_form_bg_coefficients(ModelParams.harmonic(), 1.0, 8)

    @pytest.mark.parametrize("lam", [0.75, 2.0, 10.0])
    @pytest.mark.parametrize("amag", [0.5, 2.0, 4.0])
    def test_matches_recurrence_tpt(self, lam, amag):
        p = ModelParams.tpt(lam)
        alpha = amag * np.exp(0.4j)
        rec = annihilation_eigenstate(tpt_deformation(p), alpha, 96, tail_tol=1.0, max_cutoff=96)
        closed = closed_form_bg_coefficients(p, alpha, 96)
        assert np.max(np.abs(rec.state.coeffs - closed.coeffs)) < 1e-12

    @pytest.mark.parametrize("s", [0.75, 2.0, 10.0])
    @pytest.mark.parametrize("amag", [0.5, 2.0, 4.0])
    def test_matches_recurrence_pseudoharmonic(self, s, amag):
        p = ModelParams.pseudoharmonic(s)
        alpha = amag * np.exp(-1.1j)
        rec = annihilation_eigenstate(pseudoharmonic_deformation(s), alpha, 96,
                                      tail_tol=1.0, max_cutoff=96)
        closed = closed_form_bg_coefficients(p, alpha, 96)
        assert np.max(np.abs(rec.state.coeffs - closed.coeffs)) < 1e-12

    def test_ladder_route_identical(self):
        # eigenfunction-ladder amplitudes and deformed-operator amplitudes
        # define the same coefficient family
        lam, alpha = 3.3, 1.7 * np.exp(0.9j)
        p = ModelParams.tpt(lam)
        lad = tpt_ladder_coefficients(lam, alpha, 64)
        deformed = annihilation_eigenstate(tpt_deformation(p), alpha, 64,
                                           tail_tol=1.0, max_cutoff=64)
        assert np.max(np.abs(lad.coeffs - deformed.state.coeffs)) < 1e-13


class TestZetaMap:
    def test_value(self):
        assert zeta_from_alpha(0.5, 2.0) == pytest.approx(math.tanh(0.25), abs=1e-14)

    def test_zero(self):
        assert zeta_from_alpha(0.0, 2.0) == 0

    def test_saturates_inside_unit_disk(self):
        for amag in (10.0, 100.0, 1e4):
            z = zeta_from_alpha(amag * np.exp(0.3j), 2.0)
            assert abs(z) < 1.0
        assert abs(zeta_from_alpha(1e8, 2.0)) == pytest.approx(1.0, abs=1e-12)

    def test_phase_carried(self):
        z = zeta_from_alpha(0.5j, 2.0)
        assert z == pytest.approx(1j * math.tanh(0.25), abs=1e-14)


class TestDisplacementClosedForm:
    def test_first_coefficients(self):
        p = ModelParams.tpt(2.0)
        res = displacement_state_closed_form(p, 0.5, 32)
        raw = res.state.coeffs * math.sqrt(1.0 - res.tail_mass)
        assert raw[0].real == pytest.approx(0.5625, abs=1e-13)
        assert raw[1].real == pytest.approx(0.5625, abs=1e-13)
        assert res.normalization_constant == pytest.approx(0.5625, abs=1e-13)

    def test_zero_parameter(self):
        res = displacement_state_closed_form(ModelParams.tpt(2.0), 0.0, 8)
        assert np.array_equal(res.state.coeffs, FockVector.vacuum(8).coeffs)

    def test_outside_unit_disk(self):
        with pytest.raises(DomainError, match="outside unit disk"):
            displacement_state_closed_form(ModelParams.tpt(2.0), 1.0, 8)

    @pytest.mark.parametrize("lam", [0.75, 2.0, 10.0, 20.0])
    @pytest.mark.parametrize("zmag", [0.3, 0.6, 0.9])
    def test_exact_normalization_with_independent_tail(self, lam, zmag):
        res = displacement_state_closed_form(ModelParams.tpt(lam), zmag * np.exp(0.7j), 64)
        finite = 1.0 - res.tail_mass
        tail = negative_binomial_tail(2.0 * lam, zmag, 64)
        assert finite + tail == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("s", [0.5, 1.0, 3.0])
    def test_pseudoharmonic_family_normalization(self, s):
        res = displacement_state_closed_form(ModelParams.pseudoharmonic(s), 0.8, 64)
        finite = 1.0 - res.tail_mass
        tail = negative_binomial_tail(2.0 * s + 1.0, 0.8, 64)
        assert finite + tail == pytest.approx(1.0, abs=1e-12)

    def test_matches_deformed_route(self):
        for p, f in (
            (ModelParams.tpt(2.0), tpt_deformation(ModelParams.tpt(2.0))),
            (ModelParams.pseudoharmonic(1.0), pseudoharmonic_deformation(1.0)),
        ):
            zeta = 0.45 * np.exp(1.3j)
            res = displacement_state_closed_form(p, zeta, 48)
            raw_closed = res.state.coeffs * math.sqrt(1.0 - res.tail_mass)
            raw_deformed = deformed_displacement_coefficients(f, zeta, 48)
            assert np.max(np.abs(raw_closed - raw_deformed)) < 1e-13


class TestDisplacementOperatorRoutes:
    def test_direct_harmonic_matches_glauber(self):
        res = displacement_state_direct(harmonic_deformation(), 1.0, 64)
        assert np.max(np.abs(res.state.coeffs - glauber_coefficients(1.0, 64).coeffs)) < 1e-10

    def test_direct_matches_closed_form(self):
        p = ModelParams.tpt(2.0)
        f = tpt_deformation(p)
        res = displacement_state_direct(f, 0.5, 64)
        closed = displacement_state_closed_form(p, zeta_from_alpha(0.5, 2.0), 64)
        assert np.max(np.abs(res.state.coeffs - closed.state.coeffs)) < 1e-9

    def test_direct_zero(self):
        res = displacement_state_direct(tpt_deformation(ModelParams.tpt(2.0)), 0.0, 16)
        assert np.allclose(res.state.coeffs, FockVector.vacuum(16).coeffs, atol=1e-15)

    def test_direct_truncation_error(self):
        with pytest.raises(TruncationError):
            displacement_state_direct(tpt_deformation(ModelParams.tpt(2.0)), 3.0, 8)

    def test_factored_middle_diagonal(self):
        p = ModelParams.tpt(2.0)
        f = tpt_deformation(p)
        # choose alpha so that zeta = 0.5
        alpha = 2.0 * math.atanh(0.5)
        _, weight, _ = factored_displacement_matrices(f, alpha, 8)
        diag = weight.entries.diagonal().real
        assert diag[0] == pytest.approx(0.5625, abs=1e-13)   # (1-0.25)^(2+0)
        assert diag[1] == pytest.approx(0.421875, abs=1e-13)  # 0.75^3

    def test_factored_zero_is_identity(self):
        f = tpt_deformation(ModelParams.tpt(2.0))
        left, weight, right = factored_displacement_matrices(f, 0.0, 6)
        for m in (left, weight, right):
            assert np.allclose(m.entries, np.eye(6), atol=1e-15)

    @pytest.mark.parametrize("lam", [2.0, 10.0])
    def test_factored_equals_direct(self, lam):
        f = tpt_deformation(ModelParams.tpt(lam))
        alpha = 0.5 * np.exp(0.9j)
        direct = displacement_state_direct(f, alpha, 64)
        fact = displacement_state_factored(f, alpha, 64)
        assert np.max(np.abs(direct.state.coeffs - fact.state.coeffs)) < 1e-9

    def test_pseudoharmonic_factored_vs_direct(self):
        # the closed algebra uses the level weight n + s + 1/2
        f = pseudoharmonic_deformation(1.0)
        direct = displacement_state_direct(f, 0.4, 64)
        fact = displacement_state_factored(f, 0.4, 64)
        assert np.max(np.abs(direct.state.coeffs - fact.state.coeffs)) < 1e-9
        closed = displacement_state_closed_form(
            ModelParams.pseudoharmonic(1.0), zeta_from_alpha(0.4, 0.5), 64
        )
        assert np.max(np.abs(direct.state.coeffs - closed.state.coeffs)) < 1e-9

    def test_no_su11_structure_for_harmonic_factoring(self):
        with pytest.raises(DomainError):
            factored_displacement_matrices(harmonic_deformation(), 0.5, 8)


class TestCompareStates:
    def test_equal_states(self):
        c = closed_form_bg_coefficients(ModelParams.tpt(2.0), 0.5, 16)
        assert compare_states(c, c) == (0.0, 0.0)

    def test_orthogonal_basis_states(self):
        diff, infid = compare_states(FockVector.basis_state(0, 8), FockVector.basis_state(1, 8))
        assert diff == pytest.approx(1.0)
        assert infid == pytest.approx(1.0)

    def test_bg_and_displacement_families_differ(self):
        p = ModelParams.tpt(2.0)
        alpha = 0.5
        bg = closed_form_bg_coefficients(p, alpha, 48)
        disp = displacement_state_closed_form(p, zeta_from_alpha(alpha, 2.0), 48).state
        diff, infid = compare_states(bg, disp)
        assert diff > 1e-3
        assert infid > 1e-5

    @settings(max_examples=30, deadline=None, derandomize=True)
    @given(phase=st.floats(min_value=-math.pi, max_value=math.pi))
    def test_global_phase_invariance(self, phase):
        u = closed_form_bg_coefficients(ModelParams.tpt(2.0), 0.7, 24)
        v = FockVector(u.coeffs * np.exp(1j * phase))
        diff, infid = compare_states(u, v)
        assert diff < 1e-12
        assert infid < 1e-12

    def test_requires_normalized(self):
        u = FockVector(np.ones(4, dtype=complex))
        with pytest.raises(DomainError):
            compare_states(u, u)


class TestPhotonStatistics:
    def test_vacuum(self):
        stats = photon_statistics(FockVector.vacuum(8))
        assert stats.mean_n == 0.0
        assert stats.variance_n == 0.0
        assert stats.mandel_q is None

    def test_glauber_is_poissonian(self):
        stats = photon_statistics(glauber_coefficients(1.0, 64))
        assert stats.mean_n == pytest.approx(1.0, abs=1e-10)
        assert stats.variance_n == pytest.approx(1.0, abs=1e-10)
        assert stats.mandel_q == pytest.approx(0.0, abs=1e-10)

    def test_displacement_state_is_super_poissonian(self):
        # weights |c_n|^2 follow a negative-binomial law: Q = 1/3 at lam=2, zeta=0.5
        res = displacement_state_closed_form(ModelParams.tpt(2.0), 0.5, 128)
        stats = photon_statistics(res.state)
        assert stats.mandel_q is not None and stats.mandel_q > 0
        assert stats.mean_n == pytest.approx(4.0 / 3.0, abs=1e-10)
        assert stats.variance_n == pytest.approx(16.0 / 9.0, abs=1e-9)
        assert stats.mandel_q == pytest.approx(1.0 / 3.0, abs=1e-9)


class TestHarmonicLimit:
    def test_strictly_decreasing(self):
        devs = harmonic_limit_deviation(1.0, [100.0, 1000.0, 10000.0], 64)
        assert devs[0] > devs[1] > devs[2]
        assert devs[2] < 1e-2

    def test_zero_amplitude(self):
        devs = harmonic_limit_deviation(0.0, [100.0, 1000.0], 32)
        assert devs == [0.0, 0.0]

    def test_single_lambda_against_oracle(self):
        lam = 500.0
        (dev,) = harmonic_limit_deviation(1.0, [lam], 64)
        oracle = np.max(np.abs(
            closed_form_bg_coefficients(ModelParams.tpt(lam), 1.0, 64).coeffs
            - glauber_coefficients(1.0, 64).coeffs
        ))
        assert dev == pytest.approx(float(oracle), rel=1e-12)


class TestStructuralIdentity:
    @settings(max_examples=50, deadline=None, derandomize=True)
    @given(
        lam=st.floats(min_value=0.6, max_value=50.0),
        amag=st.floats(min_value=0.0, max_value=4.0),
        phase=st.floats(min_value=-math.pi, max_value=math.pi),
    )
    def test_eigenstate_families_coincide(self, lam, amag, phase):
        alpha = amag * np.exp(1j * phase)
        p = ModelParams.tpt(lam)
        a = annihilation_eigenstate(tpt_deformation(p), alpha, 64, tail_tol=1.0, max_cutoff=64)
        b = tpt_ladder_coefficients(lam, alpha, 64)
        c = closed_form_bg_coefficients(p, alpha, 64)
        assert np.max(np.abs(a.state.coeffs - b.coeffs)) < 1e-12
        assert np.max(np.abs(a.state.coeffs - c.coeffs)) < 1e-12

    @settings(max_examples=50, deadline=None, derandomize=True)
    @given(
        lam=st.floats(min_value=0.6, max_value=50.0),
        amag=st.floats(min_value=0.0, max_value=4.0),
        phase=st.floats(min_value=-math.pi, max_value=math.pi),
    )
    def test_displacement_families_coincide(self, lam, amag, phase):
        alpha = amag * np.exp(1j * phase)
        p = ModelParams.tpt(lam)
        f = tpt_deformation(p)
        zeta = zeta_from_alpha(alpha, lam)
        res = displacement_state_closed_form(p, zeta, 64)
        raw_closed = res.state.coeffs * math.sqrt(max(0.0, 1.0 - res.tail_mass))
        raw_deformed = deformed_displacement_coefficients(f, zeta, 64)
        assert np.max(np.abs(raw_closed - raw_deformed)) < 1e-12


class TestEigenstateAction:
    @pytest.mark.parametrize("s", [0.5, 1.0, 3.0])
    def test_pseudoharmonic_eigenstate_property(self, s):
        f = pseudoharmonic_deformation(s)
        alpha = 1.2 * np.exp(0.5j)
        c = annihilation_eigenstate(f, alpha, 64).state
        lowering, _ = ladder_matrices(f, 64)
        image = apply(lowering, c)
        assert np.max(np.abs(image.coeffs[:-1] - alpha * c.coeffs[:-1])) < 1e-10
