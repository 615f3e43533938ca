import math

import numpy as np
import pytest

from latmon.core.config import settings
from latmon.core.exceptions import AliasingError, DomainError, RankDeficiencyError
from latmon.schemas.bounds import ConstantsRegistry
from latmon.services.bounds import gagnir_constant
from latmon.services.orthofam import (
    FourierField,
    alpha_ortho_family,
    available_modes,
    check_alpha_consistency,
    check_gagnir,
    check_liebd2,
    field_lq_norm,
    fuzz_alpha,
    fuzz_gagnir,
    fuzz_liebd2,
    orthonormalize,
    random_field,
    random_ortho_family,
    rho_lp_norm,
)


def test_single_mode_family(single_mode_family):
    (field,) = single_mode_family.fields
    np.testing.assert_allclose(np.abs(field.coeffs), 1.0 / (4.0 * math.pi), rtol=1e-14)
    assert rho_lp_norm(single_mode_family, 1) == pytest.approx(0.5, rel=1e-13)
    assert rho_lp_norm(single_mode_family, 2) == pytest.approx(math.sqrt(6.0) / (8.0 * math.pi), rel=1e-13)

    check = check_liebd2(single_mode_family, 2)
    assert check.holds
    assert check.rhs == pytest.approx(1.0 / (2.0 * math.sqrt(math.pi)), rel=1e-14)


def test_available_modes():
    modes = available_modes(8)
    assert len(modes) == 196
    norms = np.sum(modes * modes, axis=1)
    assert np.all(np.diff(norms) >= 0)
    assert norms[0] == 1 and norms[-1] == 64
    with pytest.raises(DomainError):
        available_modes(0)


def test_random_family_is_orthonormal():
    fam = random_ortho_family(10, 1.0, 8, seed=3)
    assert fam.n == 10 and fam.k_max <= 8
    assert fam.gram_residual < 1e-12
    for f in fam.fields:
        assert f.real_valued
        assert f.l2_norm_sq + f.grad_norm_sq == pytest.approx(1.0, rel=1e-12)


def test_families_are_reproducible():
    a = random_ortho_family(6, 2.0, 5, seed=11)
    b = random_ortho_family(6, 2.0, 5, seed=11)
    c = random_ortho_family(6, 2.0, 5, seed=12)
    for fa, fb in zip(a.fields, b.fields):
        np.testing.assert_array_equal(fa.coeffs, fb.coeffs)
    assert not np.array_equal(a.fields[0].coeffs, c.fields[0].coeffs)


@pytest.mark.parametrize("m", [0.5, 1.0, 3.0])
def test_rho_integral_is_the_sum_of_l2_norms(m):
    fam = random_ortho_family(5, m, 4, seed=1)
    expected = sum(f.l2_norm_sq for f in fam.fields)
    assert rho_lp_norm(fam, 1) == pytest.approx(expected, rel=1e-12)
    assert expected <= fam.n / (m * m)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
@pytest.mark.parametrize("n,m", [(1, 1.0), (4, 0.5), (8, 2.0)])
def test_collective_bound_holds(p, n, m):
    fam = random_ortho_family(n, m, 4, seed=n)
    check = check_liebd2(fam, p)
    assert check.holds, check
    assert check.ratio <= 1.0 + 1e-12


@pytest.mark.slow
@pytest.mark.parametrize("p", [1.25, 2.0, 4.0])
@pytest.mark.parametrize("m", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("n", [1, 10, 50])
def test_collective_bound_sweep(p, m, n):
    fam = random_ortho_family(n, m, 8, seed=7)
    assert check_liebd2(fam, p).holds


@pytest.mark.slow
@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, 4.0])
@pytest.mark.parametrize("n", [1, 4, 8, 16])
@pytest.mark.parametrize("m", [0.5, 1.0, 3.0])
def test_collective_bound_on_one_hundred_seeds(p, n, m):
    summary = fuzz_liebd2(trials=100, seed=0, n=n, m=m, p=p, k_max=8)
    assert summary.all_passed, summary.first_failing_seed


def test_complex_families():
    fam = random_ortho_family(5, 1.0, 4, seed=2, complex_valued=True)
    assert fam.gram_residual < 1e-12
    assert not fam.fields[0].real_valued
    assert check_liebd2(fam, 2).holds


@pytest.mark.parametrize("p", [1.25, 1.5])
def test_single_real_field_at_fractional_p(p):
    # rho = phi^2 vanishes along curves, so the grid rule is only algebraically accurate
    fam = random_ortho_family(1, 1.0, 8, seed=0)
    norm = rho_lp_norm(fam, p)
    assert norm == pytest.approx(rho_lp_norm(fam, p, grid_n=72), rel=1e-7)
    assert check_liebd2(fam, p).holds


def test_resampled_rho_matches_direct_synthesis():
    fam = random_ortho_family(3, 1.0, 5, seed=4)
    direct = sum(np.abs(f.synthesize(48)) ** 2 for f in fam.fields)
    fine = float(np.sum(direct**3)) * (2.0 * math.pi / 48) ** 2
    assert rho_lp_norm(fam, 3, grid_n=48) == pytest.approx(fine ** (1.0 / 3.0), rel=1e-13)


def test_grid_checks(single_mode_family):
    with pytest.raises(AliasingError):
        rho_lp_norm(single_mode_family, 2, grid_n=4)
    with pytest.raises(AliasingError):
        single_mode_family.fields[0].synthesize(2)
    with pytest.raises(DomainError):
        rho_lp_norm(single_mode_family, 0.5)
    coarse = rho_lp_norm(single_mode_family, 2, grid_n=6)
    fine = rho_lp_norm(single_mode_family, 2, grid_n=64)
    assert coarse == pytest.approx(fine, rel=1e-13)


def test_family_size_limits():
    with pytest.raises(DomainError):
        random_ortho_family(13, 1.0, 2, seed=0)
    with pytest.raises(DomainError):
        random_ortho_family(2, 0.0, 2, seed=0)
    with pytest.raises(DomainError):
        alpha_ortho_family(2, -1.0, 2, seed=0)


def test_dependent_fields_are_rejected(cosine_field):
    with pytest.raises(RankDeficiencyError):
        orthonormalize([cosine_field, cosine_field.scaled(2.0)], m=1.0)


def test_field_validation():
    with pytest.raises(DomainError):
        FourierField(np.array([[1, 0]]), np.array([1.0, 2.0]))
    with pytest.raises(DomainError):
        FourierField(np.array([[0, 0]]), np.array([1.0]), real_valued=False)
    with pytest.raises(DomainError):
        FourierField(np.array([[1, 0], [1, 0]]), np.array([1.0, 1.0]), real_valued=False)
    with pytest.raises(DomainError):
        FourierField(np.array([[1, 0], [-1, 0]]), np.array([1.0, 2.0]))
    with pytest.raises(DomainError):
        FourierField(np.zeros((0, 2)), np.zeros(0))
    field = FourierField(np.array([[1, 0], [-1, 0]]), np.array([1j, -1j]))
    assert np.allclose(field.synthesize(8).imag, 0.0)


def test_random_field_sparsity(rng):
    field = random_field(6, rng, n_modes=3)
    assert len(field.wavevectors) == 6
    assert np.isrealobj(field.synthesize(16))
    complex_field = random_field(6, rng, complex_valued=True, n_modes=3)
    assert len(complex_field.wavevectors) == 3
    with pytest.raises(DomainError):
        random_field(2, rng, n_modes=100)


def test_gagnir_q2_ratio_is_one(rng):
    check = check_gagnir(random_field(5, rng), 2.0)
    assert check.ratio == pytest.approx(1.0, rel=1e-12)
    assert check.holds and check.additive_holds
    assert check.additive_gap is None


def test_gagnir_single_mode_closed_form(cosine_field):
    check = check_gagnir(cosine_field, 4.0)
    assert check.ratio == pytest.approx(24.0**0.25 / math.sqrt(8.0 * math.pi), rel=1e-13)
    assert check.ratio == pytest.approx(0.4415, abs=1e-4)
    assert check.bound == pytest.approx(0.7511, abs=1e-4)
    assert check.holds


@pytest.mark.parametrize("q", [4.0, 6.0, 3.0])
def test_additive_form_touches_the_multiplicative_form(q, rng):
    check = check_gagnir(random_field(4, rng, spectral_slope=1.0), q)
    assert check.additive_holds
    assert abs(check.additive_gap) < 1e-12


def test_field_lq_norm_parseval(rng):
    field = random_field(4, rng)
    assert field_lq_norm(field, 2) == pytest.approx(math.sqrt(field.l2_norm_sq), rel=1e-12)
    with pytest.raises(AliasingError):
        field_lq_norm(field, 4, grid_n=16)


@pytest.mark.parametrize("alpha", [0.05, 0.25, 1.0])
def test_alpha_consistency(alpha):
    check = check_alpha_consistency(4, alpha, seed=5, k_max=4)
    assert check.holds and check.consistent
    assert check.rhs == pytest.approx(2.0 / (2.0 * math.sqrt(math.pi * alpha)), rel=1e-14)


def test_alpha_family_matches_shifted_family():
    alpha = 0.25
    fam_alpha = alpha_ortho_family(3, alpha, 4, seed=9)
    fam_m = random_ortho_family(3, 2.0, 4, seed=9)
    assert fam_alpha.m == pytest.approx(2.0)
    for fa, fm in zip(fam_alpha.fields, fam_m.fields):
        np.testing.assert_allclose(fa.coeffs, fm.coeffs / math.sqrt(alpha), rtol=1e-12, atol=1e-15)


def test_fuzz_liebd2():
    summary = fuzz_liebd2(trials=10, seed=0, n=4, m=1.0, p=2.0, k_max=4)
    assert summary.all_passed
    assert summary.first_failing_seed is None
    assert 0 < summary.max_ratio <= 1.0


@pytest.mark.parametrize("q", [3.0, 4.0, 6.0, 10.0])
@pytest.mark.parametrize("k_max", [4, 8])
def test_fuzz_gagnir(q, k_max):
    summary = fuzz_gagnir(trials=5, seed=1, q=q, k_max=k_max)
    assert summary.all_passed
    assert summary.bound == pytest.approx(gagnir_constant(q))
    assert summary.max_ratio <= summary.bound


def test_fuzz_gagnir_sparse_fields():
    summary = fuzz_gagnir(trials=5, seed=4, q=4.0, k_max=6, n_modes=2, spectral_slope=0.0)
    assert summary.all_passed


def test_fuzz_alpha():
    summary = fuzz_alpha(trials=4, seed=2, n=3, alpha=0.5, k_max=4)
    assert summary.all_passed and summary.trials == 4


def test_fuzz_reports_failing_seed(monkeypatch):
    from latmon.schemas.orthofam import LiebThirringCheck
    from latmon.services import orthofam

    def failing(fam, p):
        return LiebThirringCheck(p=p, n=fam.n, m=fam.m, lhs=2.0, rhs=1.0, holds=False)

    monkeypatch.setattr(orthofam, "check_liebd2", failing)
    summary = fuzz_liebd2(trials=3, seed=40, n=2, m=1.0, p=2.0, k_max=3)
    assert summary.passed == 0
    assert summary.first_failing_seed == 40
    assert summary.max_ratio > 1.0


def test_parallel_fuzz_matches_sequential(monkeypatch):
    sequential = fuzz_liebd2(trials=6, seed=3, n=3, m=1.0, p=1.5, k_max=4)
    monkeypatch.setattr(settings, "FUZZ_WORKERS", 2)
    parallel = fuzz_liebd2(trials=6, seed=3, n=3, m=1.0, p=1.5, k_max=4)
    assert parallel.model_dump() == sequential.model_dump()


def test_fuzz_rejects_zero_trials():
    with pytest.raises(DomainError):
        fuzz_liebd2(trials=0, seed=0, n=1, m=1.0, p=2.0)


def test_b_p_at_one_is_one():
    assert ConstantsRegistry.b_p(1.0) == 1.0


@pytest.mark.slow
@pytest.mark.parametrize("q", [2.0, 3.0, 4.0, 6.0, 10.0])
def test_interpolation_inequality_on_ten_thousand_fields(q, monkeypatch):
    monkeypatch.setattr(settings, "FUZZ_WORKERS", 4)
    summary = fuzz_gagnir(trials=10_000, seed=0, q=q)
    assert summary.all_passed, summary.first_failing_seed


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [0.05, 0.5, 2.0])
def test_alpha_rescaling_on_one_hundred_seeds(alpha):
    summary = fuzz_alpha(trials=100, seed=0, n=4, alpha=alpha, k_max=8)
    assert summary.all_passed, summary.first_failing_seed
    assert summary.trials == 100
