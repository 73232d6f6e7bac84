"""Block-parallel execution with worker-count-invariant results.

Work is decomposed into the sampler's fixed index blocks; each task computes
per-block accumulator states and the parent merges them in global block
order. States are bit-identical functions of (seed, block), and the merge
sequence never depends on the worker count, so every run produces identical
numbers for any `workers` value.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ghzq.core import (
    BellConvention,
    GENUINE_THRESHOLD,
    GhzSpec,
    MomentAccumulator,
    ardehali_convention,
    convention_for,
    lhv_bound_ratio,
    mermin_convention,
)
from ghzq.decoherence import NoiseSpec, dephasing_factors
from ghzq.estimators import (
    BellEstimate,
    MOMENT_WEIGHT_PER_QUBIT,
    bell_block_states,
    convention_factors,
    estimate_from_accumulator,
    moment_weight,
)
from ghzq.sampling import (
    BLOCK_SIZE,
    THIN_DOMAIN,
    block_generator,
    mix64,
    sample_block_prefix,
)


def derive_seed(seed: int, tag: int) -> int:
    """Per-run stream seed, so sweeps over m use disjoint random streams."""
    return mix64(seed, tag)


def convention_for_family(m: int, family: str) -> tuple[GhzSpec, BellConvention]:
    family = family.lower()
    if family == "auto":
        return convention_for(m)
    if family == "mermin":
        return mermin_convention(m)
    if family == "ardehali":
        return ardehali_convention(m)
    raise ValueError(f"unknown convention family {family!r}")


def block_slices(count: int) -> list[tuple[int, int, int]]:
    """Decompose sample indices [0, count) into (block_index, lo, hi) slices."""
    if count <= 0:
        raise ValueError(f"sample count must be positive, got {count}")
    slices = []
    for block in range(0, (count + BLOCK_SIZE - 1) // BLOCK_SIZE):
        lo = 0
        hi = min(count - block * BLOCK_SIZE, BLOCK_SIZE)
        slices.append((block, lo, hi))
    return slices


def _chunked(items: list, n_chunks: int) -> list[list]:
    n_chunks = max(1, min(n_chunks, len(items)))
    size = math.ceil(len(items) / n_chunks)
    return [items[i : i + size] for i in range(0, len(items), size)]


def _map_tasks(fn, payloads: list, workers: int) -> list:
    if workers <= 1 or len(payloads) <= 1:
        return [fn(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, payloads))


def _merge_ordered(state_lists, n_accumulators: int) -> list[MomentAccumulator]:
    """Left-fold per-block states in global block order."""
    flat = [entry for result in state_lists for entry in result]
    flat.sort(key=lambda entry: entry[0])
    accs = [MomentAccumulator() for _ in range(n_accumulators)]
    for _, states in flat:
        for i, state in enumerate(states):
            accs[i] = accs[i].merge(MomentAccumulator.from_state(state))
    return accs


def _moment_task(payload):
    spec, conv, seed, slices = payload
    out = []
    for block, lo, hi in slices:
        points, _, _ = sample_block_prefix(spec, seed, block, hi)
        out.append((block, bell_block_states(conv, points[lo:hi])))
    return out


def run_moments(
    spec: GhzSpec,
    conv: BellConvention,
    n_samples: int,
    seed: int,
    workers: int = 1,
) -> tuple[MomentAccumulator, MomentAccumulator]:
    """Bell-weight and spin-up accumulators over a fresh sample stream."""
    slices = block_slices(n_samples)
    payloads = [
        (spec, conv, seed, chunk) for chunk in _chunked(slices, max(workers, 1) * 4)
    ]
    results = _map_tasks(_moment_task, payloads, workers)
    weight_acc, spin_acc = _merge_ordered(results, 2)
    return weight_acc, spin_acc


def run_bell(
    spec: GhzSpec,
    conv: BellConvention,
    n_samples: int,
    seed: int,
    workers: int = 1,
    f_qm: float | None = None,
) -> BellEstimate:
    weight_acc, _ = run_moments(spec, conv, n_samples, seed, workers=workers)
    return estimate_from_accumulator(spec, conv, weight_acc, f_qm=f_qm)


def _decay_task(payload):
    spec, conv, noise, slices = payload
    out = []
    for block, lo, hi in slices:
        points, _, _ = sample_block_prefix(spec, noise.seed, block, hi)
        weights = moment_weight(conv, points[lo:hi])
        factors = dephasing_factors(noise, spec.m, block, hi)[lo:hi]
        noisy = weights[:, None] * factors
        states = tuple(
            MomentAccumulator.from_samples(noisy[:, tau]).to_state()
            for tau in range(noise.steps + 1)
        )
        out.append((block, states))
    return out


def run_decay_moments(
    spec: GhzSpec,
    conv: BellConvention,
    noise: NoiseSpec,
    n_samples: int,
    workers: int = 1,
) -> list[MomentAccumulator]:
    """Per-tau accumulators of the dephased Bell weight, tau = 0..steps."""
    slices = block_slices(n_samples)
    payloads = [
        (spec, conv, noise, chunk) for chunk in _chunked(slices, max(workers, 1) * 4)
    ]
    results = _map_tasks(_decay_task, payloads, workers)
    return _merge_ordered(results, noise.steps + 1)


def thinned_indices(seed: int, n_total: int, limit: int) -> np.ndarray:
    """Uniform sample of row indices without replacement, in index order.

    Draw order has first-occurrence semantics, so the selected set matches a
    reservoir pass over the stream while depending only on (seed, n, limit).
    """
    if limit <= 0:
        raise ValueError("row limit must be positive")
    if n_total <= limit:
        return np.arange(n_total, dtype=np.int64)
    rng = block_generator(THIN_DOMAIN, seed, 0)
    seen: set[int] = set()
    while len(seen) < limit:
        for value in rng.integers(0, n_total, size=2 * (limit - len(seen)) + 16):
            if value not in seen:
                seen.add(int(value))
                if len(seen) == limit:
                    break
    return np.array(sorted(seen), dtype=np.int64)


def _scatter_task(payload):
    spec, conv, seed, slices, qubit_a, qubit_b, selected = payload
    out = []
    w = MOMENT_WEIGHT_PER_QUBIT
    delta = tuple(s * t for s, t in zip(conv.s, conv.theta))
    for block, lo, hi in slices:
        points, _, _ = sample_block_prefix(spec, seed, block, hi)
        points = points[lo:hi]
        factors = convention_factors(points, conv.s, delta)
        columns = np.column_stack(
            [
                factors[:, qubit_a].real,
                factors[:, qubit_b].real,
                -(w * points[:, qubit_a, 0]) * (w * points[:, qubit_b, 0]),
                (w * points[:, qubit_a, 1]) * (w * points[:, qubit_b, 1]),
            ]
        )
        states = tuple(
            MomentAccumulator.from_samples(columns[:, i].astype(complex)).to_state()
            for i in range(4)
        )
        start = block * BLOCK_SIZE + lo
        pick = selected[np.searchsorted(selected, start):
                        np.searchsorted(selected, start + points.shape[0])]
        rows = np.column_stack([pick.astype(float), columns[pick - start]])
        out.append((block, states, rows))
    return out


SCATTER_COLUMNS = ("re_factor_a", "re_factor_b", "term_x", "term_y")


def run_scatter(
    spec: GhzSpec,
    conv: BellConvention,
    n_samples: int,
    seed: int,
    qubit_a: int = 0,
    qubit_b: int = 1,
    row_limit: int = 10000,
    workers: int = 1,
) -> tuple[np.ndarray, dict[str, MomentAccumulator]]:
    """Thinned per-sample scatter rows plus full-stream column moments.

    Rows are (sample_index, re_factor_a, re_factor_b, term_x, term_y); the
    moments cover every sample, not just the emitted rows.
    """
    for name, idx in (("qubit_a", qubit_a), ("qubit_b", qubit_b)):
        if not 0 <= idx < spec.m:
            raise ValueError(f"{name} = {idx} out of range for m = {spec.m}")
    selected = thinned_indices(seed, n_samples, row_limit)
    slices = block_slices(n_samples)
    payloads = [
        (spec, conv, seed, chunk, qubit_a, qubit_b, selected)
        for chunk in _chunked(slices, max(workers, 1) * 4)
    ]
    results = _map_tasks(_scatter_task, payloads, workers)
    flat = [entry for result in results for entry in result]
    flat.sort(key=lambda entry: entry[0])
    accs = [MomentAccumulator() for _ in range(4)]
    for _, states, _ in flat:
        for i, state in enumerate(states):
            accs[i] = accs[i].merge(MomentAccumulator.from_state(state))
    rows = np.concatenate([rows for _, _, rows in flat]) if flat else np.empty((0, 5))
    return rows, dict(zip(SCATTER_COLUMNS, accs))


def bell_sweep_rows(
    m_list,
    family: str,
    n_samples: int,
    seed: int,
    workers: int = 1,
) -> list[dict]:
    """One bell-sweep result row per m, using per-m derived stream seeds."""
    rows = []
    for m in m_list:
        spec, conv = convention_for_family(m, family)
        estimate = run_bell(spec, conv, n_samples, derive_seed(seed, m),
                            workers=workers)
        rows.append(
            {
                "m": m,
                "convention": conv.label.value,
                "samples": n_samples,
                "f_value": estimate.f_value,
                "f_stderr": estimate.f_stderr,
                "f_qm": estimate.f_qm,
                "ratio": estimate.ratio,
                "ratio_stderr": estimate.ratio_stderr,
                "lhv_ratio": lhv_bound_ratio(m, conv),
                "genuine_threshold": GENUINE_THRESHOLD,
                "seed": seed,
            }
        )
    return rows
