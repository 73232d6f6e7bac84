import math

import numpy as np
import pytest

from ghzq.core import (
    BellConvention,
    ConventionLabel,
    Extraction,
    GhzSpec,
    MomentAccumulator,
    ardehali_convention,
    mermin_convention,
)
from ghzq.estimators import (
    bell_weight,
    estimate_bell,
    estimate_from_accumulator,
    fit_log2_slope,
    moment_weight,
    scaling_study,
    scatter_data,
    spin_up_total,
    spin_up_values,
)
from ghzq.oracle import oracle_bell_value
from ghzq.sampling import SampleStreamSpec, sample_batch
from ghzq.runner import convention_for_family


def _samples(m, phi, n, seed):
    return sample_batch(GhzSpec(m, phi), SampleStreamSpec(seed=seed, count=n))


def test_bell_weight_single_factor_at_plus_x():
    _, conv = mermin_convention(1)
    point = np.array([[1.0, 0.0, 0.0]])
    assert bell_weight(conv, point) == pytest.approx(3.0 + 0.0j)


def test_bell_weight_ardehali_literal_factors():
    # Literal factors at (+x, +x): 3(1-0i) * 3(1+0i) e^{i pi/4}.
    _, conv = ardehali_convention(2)
    point = np.array([[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    assert bell_weight(conv, point) == pytest.approx(9.0 * np.exp(1j * math.pi / 4))


def test_bell_weight_dimension_mismatch():
    _, conv = mermin_convention(3)
    with pytest.raises(ValueError):
        bell_weight(conv, np.array([[1.0, 0.0, 0.0]]))


def test_moment_weight_equals_literal_for_mermin():
    spec, conv = mermin_convention(3)
    points = _samples(3, spec.phi, 100, seed=1)
    assert np.allclose(moment_weight(conv, points), bell_weight(conv, points))


def test_moment_weight_is_all_raising_for_ardehali():
    spec, conv = ardehali_convention(2)
    points = _samples(2, spec.phi, 100, seed=2)
    raising = np.prod(3.0 * (points[:, :, 0] + 1j * points[:, :, 1]), axis=1)
    assert np.allclose(moment_weight(conv, points), raising)
    assert not np.allclose(moment_weight(conv, points), bell_weight(conv, points))


def test_mermin_m3_sampled_weight_mean():
    spec, conv = mermin_convention(3)
    points = _samples(3, spec.phi, 10**6, seed=3)
    est = estimate_bell(spec, conv, points)
    assert est.complex_mean.imag == pytest.approx(-4.0, abs=3 * est.f_stderr)
    assert est.f_value == pytest.approx(4.0, abs=3 * est.f_stderr)
    assert est.f_qm == 4.0


def test_ardehali_m2_ratio_near_one():
    spec, conv = ardehali_convention(2)
    points = _samples(2, spec.phi, 10**6, seed=4)
    est = estimate_bell(spec, conv, points)
    assert est.f_qm == 2.0
    assert est.ratio == pytest.approx(1.0, abs=3 * est.ratio_stderr)
    assert est.ratio * est.f_qm == pytest.approx(est.f_value, rel=1e-12)


@pytest.mark.parametrize("m", [2, 3, 5, 6])
def test_sampled_moment_unbiased_spot(m):
    spec, conv = convention_for_family(m, "auto")
    points = _samples(m, spec.phi, 2 * 10**5, seed=50 + m)
    est = estimate_bell(spec, conv, points)
    exact, _ = oracle_bell_value(spec, conv)
    acc = MomentAccumulator.from_samples(moment_weight(conv, points))
    se_re = acc.component_stderr(Extraction.NEG_REAL)
    se_im = acc.component_stderr(Extraction.NEG_IMAG)
    assert est.complex_mean.real == pytest.approx(exact.real, abs=4 * se_re)
    assert est.complex_mean.imag == pytest.approx(exact.imag, abs=4 * se_im)


def test_weight_second_moment_grows_sixfold():
    previous = None
    for m in range(3, 9):
        spec, conv = convention_for_family(m, "auto")
        points = _samples(m, spec.phi, 10**5, seed=500 + m)
        second = float(np.mean(np.abs(moment_weight(conv, points)) ** 2))
        assert second == pytest.approx(6.0**m, rel=0.1)
        if previous is not None:
            assert 5.0 <= second / previous <= 7.0
        previous = second


def test_estimate_merge_invariance():
    spec, conv = mermin_convention(3)
    points = _samples(3, spec.phi, 40000, seed=6)
    whole = estimate_bell(spec, conv, points)
    acc = MomentAccumulator()
    for chunk in np.array_split(points, 7):
        acc = acc.merge(MomentAccumulator.from_samples(moment_weight(conv, chunk)))
    merged = estimate_from_accumulator(spec, conv, acc)
    assert merged.f_value == pytest.approx(whole.f_value, rel=1e-12)
    assert merged.f_stderr == pytest.approx(whole.f_stderr, rel=1e-10)


def test_ratio_invariant_under_qubit_permutation():
    spec, conv = ardehali_convention(4)
    points = _samples(4, spec.phi, 30000, seed=7)
    order = [2, 0, 3, 1]
    permuted_conv = conv.permuted(order)
    # Per-sample identity: the factor product commutes, so permuting (s,
    # theta) together with the sampled qubits leaves every literal weight
    # unchanged, hence every estimate built from it.
    assert np.allclose(
        bell_weight(conv, points),
        bell_weight(permuted_conv, points[:, order, :]),
        rtol=1e-12,
    )
    est = estimate_bell(spec, conv, points)
    custom_all_plus = BellConvention(
        s=(1,) * 4, theta=(0.0,) * 4, extraction=Extraction.NEG_REAL,
        label=ConventionLabel.CUSTOM,
    )
    est_a = estimate_bell(spec, custom_all_plus, points, f_qm=est.f_qm)
    est_b = estimate_bell(
        spec, custom_all_plus.permuted(order), points[:, order, :], f_qm=est.f_qm
    )
    assert est_a.ratio == pytest.approx(est_b.ratio, rel=1e-12)


def test_estimate_rejects_empty():
    spec, conv = mermin_convention(3)
    with pytest.raises(ValueError):
        estimate_bell(spec, conv, np.empty((0, 3, 3)))
    with pytest.raises(ValueError):
        spin_up_total(spec, np.empty((0, 3, 3)))


def test_spin_up_mean_is_half_m():
    for m, seed in [(3, 8), (6, 9)]:
        spec, _ = convention_for_family(m, "auto")
        points = _samples(m, spec.phi, 10**5, seed=seed)
        mean, stderr = spin_up_total(spec, points)
        assert mean == pytest.approx(m / 2.0, abs=4 * stderr)


def test_spin_up_single_all_north_sample():
    points = np.tile(np.array([0.0, 0.0, 1.0]), (1, 4, 1))
    assert spin_up_values(points)[0] == pytest.approx(8.0)  # 2m, outside [0, m]


def test_spin_up_relative_error_shrinks_with_m():
    n = 10**5
    rels = {}
    for m in (4, 20):
        spec, _ = convention_for_family(m, "auto")
        points = _samples(m, spec.phi, n, seed=10 + m)
        mean, stderr = spin_up_total(spec, points)
        rels[m] = stderr / mean
    assert rels[20] < rels[4]


def test_scatter_columns_and_ranges():
    spec, conv = ardehali_convention(2)
    points = _samples(2, spec.phi, 10**4, seed=11)
    table = scatter_data(conv, points, 0, 1)
    assert np.abs(table.factor_re_a).max() > 1.5
    assert len(table.terms) == 2
    # Means reproduce the two-qubit reduction: -<xx> = +1 and +<yy> = +1.
    assert table.terms[0].mean() == pytest.approx(1.0, abs=0.05)
    assert table.terms[1].mean() == pytest.approx(1.0, abs=0.05)


def test_scatter_term_correlation_negative():
    spec, conv = ardehali_convention(2)
    points = _samples(2, spec.phi, 10**5, seed=12)
    table = scatter_data(conv, points, 0, 1)
    corr = np.corrcoef(table.terms[0], table.terms[1])[0, 1]
    assert corr < -0.05


def test_scatter_factor_vanishes_at_pole():
    _, conv = ardehali_convention(2)
    point = np.array([[[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]]])
    table = scatter_data(conv, point, 0, 1)
    assert table.factor_re_a[0] == pytest.approx(0.0, abs=1e-15)
    assert table.factor_re_b[0] == pytest.approx(0.0, abs=1e-15)


def test_scatter_validation():
    spec, conv = ardehali_convention(2)
    points = _samples(2, spec.phi, 10, seed=13)
    with pytest.raises(ValueError):
        scatter_data(conv, points, 0, 2)
    with pytest.raises(ValueError):
        scatter_data(conv, points, 0, 1, term_count=3)
    assert len(scatter_data(conv, points, 0, 1, term_count=1).terms) == 1


def test_fit_log2_slope_recovers_synthetic_law():
    m = np.arange(4, 20)
    rel = 0.01 * 2.0 ** (m / 3.0)
    slope, stderr = fit_log2_slope(m, rel)
    assert slope == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert stderr == pytest.approx(0.0, abs=1e-9)


def test_scaling_study_small():
    study = scaling_study(range(4, 17), "auto", samples_per_m=20000, seed=99)
    assert [row.m for row in study.rows] == list(range(4, 17))
    assert 0.25 <= study.slope <= 0.41
    rels_n = [row.rel_err_n for row in study.rows]
    assert rels_n[-1] < rels_n[0]
