"""Acceptance gates, one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
report; sample counts and tolerances follow the stated gates exactly.
"""

import math
import os
import time

import numpy as np
import scipy.stats

from ghzq.cli import main as cli_main
from ghzq.core import (
    GENUINE_THRESHOLD,
    GhzSpec,
    Extraction,
    ardehali_convention,
    lhv_bound_ratio,
    mermin_convention,
)
from ghzq.decoherence import NoiseSpec, decay_curve, fit_decay_rate
from ghzq.estimators import scaling_study
from ghzq.oracle import build_ghz, coherent_overlap, oracle_bell_value, oracle_pauli_correlator
from ghzq.qfunction import (
    KERNEL_PER_QUBIT,
    q_cell_masses,
    q_density,
    q_density_quadrature_check,
    sample_cell_ids,
)
from ghzq.runner import convention_for_family, derive_seed, run_bell, run_moments
from ghzq.sampling import SampleStreamSpec, measure_acceptance_rate, sample_batch

WORKERS = max(1, min(os.cpu_count() or 1, 4))
BASE_SEED = 20140811


def _report(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_oracle_identities():
    t0 = time.time()
    worst = 0.0
    for m in (3, 5, 7, 9, 11):
        spec, conv = mermin_convention(m)
        _, f = oracle_bell_value(spec, conv)
        worst = max(worst, abs(f - 2.0 ** (m - 1)) / 2.0 ** (m - 1))
    spec2, conv2 = ardehali_convention(2)
    _, f2 = oracle_bell_value(spec2, conv2)
    state = build_ghz(spec2)
    eq5 = -oracle_pauli_correlator(state, "xx") + oracle_pauli_correlator(state, "yy")
    ok = worst <= 1e-10 and abs(f2 - 2.0) <= 1e-10 and abs(eq5 - 2.0) <= 1e-12
    _report(
        "oracle identities",
        ok,
        f"max Mermin rel err {worst:.2e}, m=2 F={f2:.12f}, "
        f"-<xx>+<yy>={eq5:.12f} ({time.time() - t0:.2f}s)",
    )


def test_density_correctness():
    t0 = time.time()
    masses = {
        1: q_density_quadrature_check(GhzSpec(1, 0.0), 64),
        2: q_density_quadrature_check(GhzSpec(2, math.pi), 48),
        3: q_density_quadrature_check(GhzSpec(3, -math.pi / 2), 16),
    }
    mass_ok = all(abs(v - 1.0) <= 0.01 for v in masses.values())

    rng = np.random.default_rng(BASE_SEED)
    worst = 0.0
    for _ in range(10**4):
        m = int(rng.integers(1, 5))
        spec = GhzSpec(m, float(rng.uniform(-math.pi, math.pi)))
        u = rng.uniform(-1.0, 1.0, m)
        azim = rng.uniform(0.0, 2.0 * math.pi, m)
        sin_t = np.sqrt(1.0 - u * u)
        point = np.stack([sin_t * np.cos(azim), sin_t * np.sin(azim), u], axis=-1)
        direct = KERNEL_PER_QUBIT**m * abs(coherent_overlap(spec, point)) ** 2
        worst = max(worst, abs(q_density(spec, point) - direct))
    overlap_ok = worst <= 1e-12
    _report(
        "density correctness",
        mass_ok and overlap_ok,
        f"masses={ {k: round(v, 6) for k, v in masses.items()} }, "
        f"max overlap err {worst:.2e} over 1e4 points ({time.time() - t0:.1f}s)",
    )


def test_sampler_exactness():
    t0 = time.time()
    details = []
    chi_ok = True
    for m, phi, n_u, n_a in ((1, 0.0, 8, 8), (2, math.pi, 3, 3)):
        spec = GhzSpec(m, phi)
        n = 10**6
        points = sample_batch(spec, SampleStreamSpec(seed=derive_seed(BASE_SEED, m),
                                                     count=n))
        u_edges = np.linspace(-1.0, 1.0, n_u + 1)
        a_edges = np.linspace(0.0, 2.0 * math.pi, n_a + 1)
        masses = q_cell_masses(spec, u_edges, a_edges, sub_resolution=12)
        masses /= masses.sum()
        counts = np.bincount(sample_cell_ids(points, u_edges, a_edges),
                             minlength=masses.size)
        _, p_value = scipy.stats.chisquare(counts, f_exp=masses * n)
        chi_ok = chi_ok and p_value > 0.001
        details.append(f"chi2 m={m} p={p_value:.3f}")

    rate_ok = True
    for m in (2, 10, 40):
        spec, _ = convention_for_family(m, "auto")
        rate = measure_acceptance_rate(spec, derive_seed(BASE_SEED, 100 + m), 10**6)
        rate_ok = rate_ok and abs(rate - 0.5) <= 0.01
        details.append(f"rate m={m} {rate:.4f}")
    _report("sampler exactness", chi_ok and rate_ok,
            ", ".join(details) + f" ({time.time() - t0:.1f}s)")


def test_moment_unbiasedness():
    t0 = time.time()
    worst_z = 0.0
    worst_case = ""
    for m in range(1, 11):
        spec, conv = convention_for_family(m, "auto") if m > 1 else mermin_convention(1)
        weight_acc, _ = run_moments(spec, conv, 10**6,
                                    derive_seed(BASE_SEED, 200 + m), workers=WORKERS)
        exact, _ = oracle_bell_value(spec, conv)
        se_re = weight_acc.component_stderr(Extraction.NEG_REAL)
        se_im = weight_acc.component_stderr(Extraction.NEG_IMAG)
        z_re = abs(weight_acc.mean.real - exact.real) / se_re
        z_im = abs(weight_acc.mean.imag - exact.imag) / se_im
        if max(z_re, z_im) > worst_z:
            worst_z = max(z_re, z_im)
            worst_case = f"m={m} ({conv.label.value})"
    _report(
        "moment unbiasedness",
        worst_z <= 4.0,
        f"worst |z| = {worst_z:.2f} at {worst_case}, m <= 10, 1e6 samples "
        f"({time.time() - t0:.1f}s)",
    )


def test_bell_violations_at_scale():
    t0 = time.time()
    details = []
    ok = True
    for m in range(3, 22, 2):
        spec, conv = mermin_convention(m)
        est = run_bell(spec, conv, 10**7, derive_seed(BASE_SEED, 300 + m),
                       workers=WORKERS)
        lhv = lhv_bound_ratio(m, conv)
        margin = (est.ratio - lhv) / est.ratio_stderr
        genuine_ok = est.ratio > GENUINE_THRESHOLD - 3.0 * est.ratio_stderr
        ok = ok and margin >= 3.0 and genuine_ok
        details.append(f"m={m} ratio={est.ratio:.4f} (lhv margin {margin:.0f} se)")
    _report("bell violations m=3..21 odd, 1e7 samples", ok,
            "; ".join(details[:3]) + f" ... ({time.time() - t0:.0f}s)")


def test_m60_smoke_run():
    t0 = time.time()
    spec, conv = ardehali_convention(60)
    est = run_bell(spec, conv, 10**5, derive_seed(BASE_SEED, 360), workers=WORKERS)
    finite = all(
        math.isfinite(v)
        for v in (est.f_value, est.f_stderr, est.ratio, est.ratio_stderr,
                  est.complex_mean.real, est.complex_mean.imag)
    )
    _report(
        "m=60 smoke run (1e5 samples)",
        finite and est.n_samples == 10**5,
        f"ratio={est.ratio:.2f} +- {est.ratio_stderr:.2f}, f_qm=2^59 "
        f"({time.time() - t0:.1f}s)",
    )


def test_error_scaling_law():
    t0 = time.time()
    study = scaling_study(range(4, 25), "auto", samples_per_m=10**6,
                          seed=BASE_SEED, workers=WORKERS)
    slope_ok = 0.25 <= study.slope <= 0.41
    rel_n = [row.rel_err_n for row in study.rows]
    n = 10**6
    monotone_ok = all(
        rel_n[i + 1] <= rel_n[i] * (1.0 + 2.0 * math.sqrt(2.0 / n))
        for i in range(len(rel_n) - 1)
    )
    _report(
        "error scaling law",
        slope_ok and monotone_ok,
        f"slope={study.slope:.3f} in [0.25, 0.41], rel_err_N "
        f"{rel_n[0]:.2e} -> {rel_n[-1]:.2e} non-increasing "
        f"({time.time() - t0:.0f}s)",
    )


def test_decoherence_decay():
    t0 = time.time()
    rates = {}
    envelope_ok = True
    worst = 0.0
    for m in (2, 3, 4, 6):
        spec, conv = convention_for_family(m, "auto")
        noise = NoiseSpec(epsilon=0.1, steps=30, seed=derive_seed(BASE_SEED, 400 + m))
        curve = decay_curve(spec, conv, noise, samples_per_point=10**6,
                            workers=WORKERS)
        for point in curve:
            if point.tau == 0:
                continue
            z = abs(point.f_ratio - point.analytic_ratio) / point.stderr
            worst = max(worst, z)
            envelope_ok = envelope_ok and z <= 4.0
        rates[m] = fit_decay_rate(curve)
    ms = np.array(sorted(rates))
    exponent = float(np.polyfit(np.log(ms), np.log([rates[m] for m in ms]), 1)[0])
    exponent_ok = abs(exponent - 2.0) <= 0.1
    _report(
        "decoherence decay",
        envelope_ok and exponent_ok,
        f"worst |z| vs exp(-eps^2 m^2 tau/2) = {worst:.2f}, "
        f"rate exponent = {exponent:.3f} ({time.time() - t0:.0f}s)",
    )


def test_reproducibility_across_workers(tmp_path):
    t0 = time.time()
    bodies = {}
    files = {}
    for workers in (1, 4, 8):
        tag = f"w{workers}"
        sweep = tmp_path / f"sweep_{tag}.csv"
        scatter = tmp_path / f"scatter_{tag}.csv"
        deco = tmp_path / f"deco_{tag}.csv"
        assert cli_main(["bell-sweep", "--m", "2,3,5", "--samples", "2e5",
                         "--seed", "17", "--workers", str(workers),
                         "--out", str(sweep)]) == 0
        assert cli_main(["scatter", "--m", "2", "--samples", "1e5",
                         "--row-limit", "200", "--seed", "17",
                         "--workers", str(workers), "--out", str(scatter)]) == 0
        assert cli_main(["decoherence", "--m", "2,3", "--samples", "5e4",
                         "--epsilon", "0.1", "--steps", "6", "--seed", "17",
                         "--workers", str(workers), "--out", str(deco)]) == 0
        bodies[workers] = tuple(
            tuple(line for line in path.read_text().splitlines()
                  if not line.startswith("#"))
            for path in (sweep, scatter, deco)
        )
        files[workers] = tuple(path.read_bytes() for path in (sweep, scatter, deco))
    ok = bodies[1] == bodies[4] == bodies[8] and files[1] == files[4] == files[8]
    _report("reproducibility across workers {1,4,8}", ok,
            f"bell-sweep, scatter and decoherence outputs byte-identical "
            f"({time.time() - t0:.0f}s)")


def test_out_of_range_sampling_artifact():
    spec, _ = ardehali_convention(2)
    points = sample_batch(spec, SampleStreamSpec(seed=derive_seed(BASE_SEED, 500),
                                                 count=10**4))
    peak = float(np.abs(3.0 * points[:, 0, 0]).max())
    _report(
        "out-of-range sampling artifact",
        peak > 1.5,
        f"max |Re(3 nx)| = {peak:.3f} > 1.5 over 1e4 samples",
    )
