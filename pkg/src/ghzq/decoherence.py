"""Collective dephasing applied to sampled Bell weights.

The noise Hamiltonian couples a delta-correlated field to the collective
z-spin, so after each time step the sampled weight picks up a pure phase
exp(i eps m zeta) with one standard Gaussian zeta per sample per step. The
ensemble mean of the phase factor after tau steps is exp(-eps^2 m^2 tau / 2),
which is the quadratic (super-decoherence) decay law in m.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ghzq.core import BellConvention, GhzSpec

from ghzq.sampling import BLOCK_SIZE, NOISE_DOMAIN, block_generator


@dataclass(frozen=True)
class NoiseSpec:
    """Dephasing strength eps per step, step count, and the noise seed."""

    epsilon: float
    steps: int
    seed: int

    def __post_init__(self) -> None:
        if self.epsilon < 0.0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if not isinstance(self.steps, (int, np.integer)) or self.steps < 0:
            raise ValueError(f"steps must be a nonnegative integer, got {self.steps!r}")
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "steps", int(self.steps))
        object.__setattr__(self, "seed", int(self.seed))


def noise_draws(noise: NoiseSpec, block_index: int, take: int) -> np.ndarray:
    """Standard Gaussians zeta for the first `take` samples of one block.

    Shape (take, steps); row k is the noise history of the sample at global
    index block_index * BLOCK_SIZE + k, a pure function of (seed, index, t).
    """
    if not 0 < take <= BLOCK_SIZE:
        raise ValueError(f"take must be in 1..{BLOCK_SIZE}, got {take}")
    rng = block_generator(NOISE_DOMAIN, noise.seed, block_index)
    return rng.standard_normal((take, noise.steps))


def apply_dephasing(
    weight: complex, m: int, noise: NoiseSpec, sample_index: int
) -> complex:
    """Weight after `steps` dephasing steps for the given global sample index."""
    if noise.steps == 0 or noise.epsilon == 0.0:
        return complex(weight)
    block_index, offset = divmod(int(sample_index), BLOCK_SIZE)
    zeta = noise_draws(noise, block_index, offset + 1)[offset]
    phase = noise.epsilon * m * zeta.sum()
    return complex(weight) * complex(np.exp(1j * phase))


def dephasing_factors(
    noise: NoiseSpec, m: int, block_index: int, take: int
) -> np.ndarray:
    """Cumulative phase factors e^{i eps m sum_t zeta} of shape (take, steps+1).

    Column tau holds the factor after tau steps; column 0 is 1 (no noise).
    """
    factors = np.empty((take, noise.steps + 1), dtype=complex)
    factors[:, 0] = 1.0
    if noise.steps:
        zeta = noise_draws(noise, block_index, take)
        phases = np.cumsum(noise.epsilon * m * zeta, axis=1)
        factors[:, 1:] = np.exp(1j * phases)
    return factors


def analytic_decay(noise: NoiseSpec, m: int, tau) -> np.ndarray | float:
    """Expected F(tau)/F(0) under the collective dephasing model."""
    tau = np.asarray(tau, dtype=float)
    out = np.exp(-(noise.epsilon**2) * m * m * tau / 2.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class DecayPoint:
    tau: int
    f_ratio: float
    stderr: float
    f_value: float
    f_stderr: float
    analytic_ratio: float


def decay_curve(
    spec: GhzSpec,
    conv: BellConvention,
    noise: NoiseSpec,
    samples_per_point: int,
    workers: int = 1,
) -> tuple[DecayPoint, ...]:
    """F(tau)/F(0) for tau = 0..steps from one set of noisy sampled weights.

    The ratio's standard error treats the tau=0 estimate as the fixed
    normalizer; its own sampling error is common to every point of the curve.
    NoiseSpec.seed also seeds the underlying sample stream (the two RNG
    purposes are domain-separated).
    """
    if samples_per_point <= 0:
        raise ValueError("samples_per_point must be positive")
    # Imported here: the runner imports this module for its block tasks.
    from ghzq import runner

    accs = runner.run_decay_moments(spec, conv, noise, samples_per_point,
                                    workers=workers)
    from ghzq.estimators import estimate_from_accumulator

    base = estimate_from_accumulator(spec, conv, accs[0])
    points = []
    for tau, acc in enumerate(accs):
        est = estimate_from_accumulator(spec, conv, acc, f_qm=base.f_qm)
        points.append(
            DecayPoint(
                tau=tau,
                f_ratio=est.f_value / base.f_value,
                stderr=est.f_stderr / abs(base.f_value),
                f_value=est.f_value,
                f_stderr=est.f_stderr,
                analytic_ratio=float(analytic_decay(noise, spec.m, tau)),
            )
        )
    return tuple(points)


def fit_decay_rate(points: tuple[DecayPoint, ...], min_ratio: float = 0.04) -> float:
    """Decay rate from a weighted linear fit of ln F_ratio over resolvable tau.

    Points whose analytic ratio has fallen below `min_ratio` are excluded;
    the remaining ones are weighted by their expected signal size.
    """
    taus = np.array([p.tau for p in points], dtype=float)
    ratios = np.array([p.f_ratio for p in points])
    analytic = np.array([p.analytic_ratio for p in points])
    keep = (analytic > min_ratio) & (ratios > 0.0)
    if keep.sum() < 3:
        raise ValueError("not enough resolvable points to fit a decay rate")
    slope = np.polyfit(taus[keep], np.log(ratios[keep]), 1, w=analytic[keep])[0]
    return float(-slope)
