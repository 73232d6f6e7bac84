"""Observable estimates from sampled phase-space points.

The operator correspondence underlying everything here: under the spin-1/2
Q distribution, Pauli expectations are reproduced by Bloch components scaled
by 3, i.e. <sigma_i> = 3 E[n_i] per qubit, and products over distinct qubits
carry one factor of 3 each. Sampled single-qubit values therefore live in
[-3, 3] rather than the eigenvalue range [-1, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ghzq.core import (
    BellConvention,
    Extraction,
    GhzSpec,
    MomentAccumulator,
    as_point_array,
    extract_f,
    f_qm_closed_form,
)

MOMENT_WEIGHT_PER_QUBIT = 3.0


@dataclass(frozen=True)
class BellEstimate:
    """Sampled Bell moment with its extracted quantity and normalization."""

    complex_mean: complex
    f_value: float
    f_stderr: float
    n_samples: int
    f_qm: float
    ratio: float
    ratio_stderr: float


def convention_factors(points, signs, phases) -> np.ndarray:
    """Per-qubit factors 3 (nx + i s_j ny) e^{-i delta_j} as an (n, m) array."""
    arr = as_point_array(points)
    signs = np.asarray(signs, dtype=float)
    phases = np.asarray(phases, dtype=float)
    if signs.shape != (arr.shape[1],) or phases.shape != (arr.shape[1],):
        raise ValueError(
            f"need {arr.shape[1]} signs/phases, got {signs.shape}/{phases.shape}"
        )
    factors = MOMENT_WEIGHT_PER_QUBIT * (arr[:, :, 0] + 1j * signs * arr[:, :, 1])
    return factors * np.exp(-1j * phases)


def bell_weight(conv: BellConvention, point) -> np.ndarray | complex:
    """Literal sampled weight prod_j 3 (nx_j + i s_j ny_j) e^{-i s_j theta_j}.

    Its sample mean estimates the expectation of the literal product
    operator. Note that for the Ardehali label that expectation vanishes
    identically on GHZ states; the moment the Bell quantity is read from is
    the one given by `BellConvention.moment_settings` (see `moment_weight`).
    """
    arr = as_point_array(point, m=conv.m)
    scalar = not (isinstance(point, np.ndarray) and np.asarray(point).ndim == 3)
    delta = tuple(s * t for s, t in zip(conv.s, conv.theta))
    weights = convention_factors(arr, conv.s, delta).prod(axis=1)
    return complex(weights[0]) if scalar else weights


def moment_weight(conv: BellConvention, points) -> np.ndarray:
    """Sampled weight whose mean the Bell quantity F is extracted from."""
    arr = as_point_array(points, m=conv.m)
    signs, phases = conv.moment_settings()
    return convention_factors(arr, signs, phases).prod(axis=1)


def spin_up_values(points) -> np.ndarray:
    """Per-sample total spin-up number, sum_j (3 nz_j + 1) / 2."""
    arr = as_point_array(points)
    return ((MOMENT_WEIGHT_PER_QUBIT * arr[:, :, 2] + 1.0) / 2.0).sum(axis=1)


def bell_block_states(conv: BellConvention, points: np.ndarray):
    """Accumulator states (bell weight, spin-up) for one block of samples.

    Shared by the serial folds and the parallel runner so that both produce
    bit-identical ordered merges.
    """
    weight_acc = MomentAccumulator.from_samples(moment_weight(conv, points))
    spin_acc = MomentAccumulator.from_samples(spin_up_values(points).astype(complex))
    return weight_acc.to_state(), spin_acc.to_state()


def estimate_from_accumulator(
    spec: GhzSpec,
    conv: BellConvention,
    acc: MomentAccumulator,
    f_qm: float | None = None,
) -> BellEstimate:
    if acc.count == 0:
        raise ValueError("cannot estimate from an empty sample set")
    if f_qm is None:
        f_qm = f_qm_closed_form(spec, conv)
    f_value = extract_f(conv.extraction, acc.mean)
    f_stderr = acc.component_stderr(conv.extraction)
    return BellEstimate(
        complex_mean=acc.mean,
        f_value=f_value,
        f_stderr=f_stderr,
        n_samples=acc.count,
        f_qm=float(f_qm),
        ratio=f_value / f_qm,
        ratio_stderr=f_stderr / abs(f_qm),
    )


def estimate_bell(
    spec: GhzSpec,
    conv: BellConvention,
    samples,
    f_qm: float | None = None,
) -> BellEstimate:
    """Bell estimate from a materialized sample array.

    `f_qm` defaults to the closed form for labeled conventions; custom
    conventions must pass their normalizer (take it from the oracle).
    """
    arr = as_point_array(samples, m=spec.m)
    if arr.shape[0] == 0:
        raise ValueError("cannot estimate from an empty sample set")
    acc = MomentAccumulator.from_samples(moment_weight(conv, arr))
    return estimate_from_accumulator(spec, conv, acc, f_qm=f_qm)


def spin_up_total(spec: GhzSpec, samples) -> tuple[float, float]:
    """Mean and standard error of the total spin-up number."""
    arr = as_point_array(samples, m=spec.m)
    if arr.shape[0] == 0:
        raise ValueError("cannot estimate from an empty sample set")
    values = spin_up_values(arr)
    n = values.size
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mean, stderr


@dataclass(frozen=True)
class ScatterTable:
    """Per-sample Fig.1-style columns for one qubit pair.

    `factor_re_a/b` are real parts of the literal convention factors; the
    term columns are the signed contributions of the two-qubit reduction
    F = -<sx sx> + <sy sy>, i.e. term_x = -(3 nx_a)(3 nx_b) and
    term_y = +(3 ny_a)(3 ny_b).
    """

    factor_re_a: np.ndarray
    factor_re_b: np.ndarray
    terms: tuple[np.ndarray, ...]


def scatter_data(
    conv: BellConvention,
    samples,
    qubit_a: int = 0,
    qubit_b: int = 1,
    term_count: int = 2,
) -> ScatterTable:
    arr = as_point_array(samples, m=conv.m)
    for name, idx in (("qubit_a", qubit_a), ("qubit_b", qubit_b)):
        if not 0 <= idx < conv.m:
            raise ValueError(f"{name} = {idx} out of range for m = {conv.m}")
    if not 1 <= term_count <= 2:
        raise ValueError("term_count must be 1 or 2 (the two quadrature terms)")
    delta = tuple(s * t for s, t in zip(conv.s, conv.theta))
    factors = convention_factors(arr, conv.s, delta)
    w = MOMENT_WEIGHT_PER_QUBIT
    term_x = -(w * arr[:, qubit_a, 0]) * (w * arr[:, qubit_b, 0])
    term_y = (w * arr[:, qubit_a, 1]) * (w * arr[:, qubit_b, 1])
    return ScatterTable(
        factor_re_a=factors[:, qubit_a].real,
        factor_re_b=factors[:, qubit_b].real,
        terms=(term_x, term_y)[:term_count],
    )


@dataclass(frozen=True)
class ScalingRow:
    m: int
    rel_err_f: float
    rel_err_n: float
    samples: int


@dataclass(frozen=True)
class ScalingStudy:
    """Relative-error scaling table with the fitted log2 slope for F."""

    rows: tuple[ScalingRow, ...]
    slope: float
    slope_stderr: float
    seed: int

    @property
    def slope_ci95(self) -> tuple[float, float]:
        half = 1.96 * self.slope_stderr
        return (self.slope - half, self.slope + half)


def fit_log2_slope(m_values, rel_errors) -> tuple[float, float]:
    """OLS slope of log2(rel_err) vs m with its standard error."""
    m_values = np.asarray(m_values, dtype=float)
    y = np.log2(np.asarray(rel_errors, dtype=float))
    if m_values.size < 3:
        raise ValueError("need at least 3 points to fit a slope")
    coeffs, cov = np.polyfit(m_values, y, 1, cov=True)
    return float(coeffs[0]), float(math.sqrt(max(cov[0, 0], 0.0)))


def scaling_study(
    m_list,
    conv_family: str,
    samples_per_m: int,
    seed: int,
    workers: int = 1,
) -> ScalingStudy:
    """Run a fixed-sample-count sweep and fit the error-growth exponent.

    Relative errors are normalized by the known true values (F_QM for the
    Bell quantity, m/2 for the spin-up number) so the fitted slope is not
    polluted by noise in the denominators.
    """
    # Imported here: the runner imports this module for its block tasks.
    from ghzq import runner

    rows = []
    for m in m_list:
        spec, conv = runner.convention_for_family(m, conv_family)
        weight_acc, spin_acc = runner.run_moments(
            spec, conv, samples_per_m, runner.derive_seed(seed, m), workers=workers
        )
        estimate = estimate_from_accumulator(spec, conv, weight_acc)
        rel_f = estimate.f_stderr / estimate.f_qm
        rel_n = spin_acc.component_stderr(Extraction.NEG_REAL) / (m / 2.0)
        rows.append(ScalingRow(m=m, rel_err_f=rel_f, rel_err_n=rel_n,
                               samples=samples_per_m))
    slope, slope_stderr = fit_log2_slope(
        [r.m for r in rows], [r.rel_err_f for r in rows]
    )
    return ScalingStudy(rows=tuple(rows), slope=slope, slope_stderr=slope_stderr,
                        seed=seed)
