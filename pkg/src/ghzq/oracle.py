"""Exact dense state-vector reference for small qubit counts.

Basis ordering: qubit 1 is the most significant bit, spin-up is bit 0, so the
all-up component sits at index 0 and the all-down component at index 2^m - 1.
"""

from __future__ import annotations

import math

import numpy as np

from ghzq.core import BellConvention, GhzSpec, extract_f

ORACLE_CAP = 12

_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_ID = np.eye(2, dtype=complex)

PAULI_BY_AXIS = {"x": _SX, "y": _SY, "z": _SZ, "identity": _ID, "i": _ID}


def _check_cap(m: int, cap: int) -> None:
    if m > cap:
        raise ValueError(f"m = {m} exceeds the oracle cap {cap}")


def build_ghz(spec: GhzSpec, cap: int = ORACLE_CAP) -> np.ndarray:
    _check_cap(spec.m, cap)
    state = np.zeros(2**spec.m, dtype=complex)
    state[0] = 1.0 / math.sqrt(2.0)
    state[-1] = np.exp(1j * spec.phi) / math.sqrt(2.0)
    return state


def apply_single_qubit(state: np.ndarray, m: int, qubit: int, op: np.ndarray) -> np.ndarray:
    """Apply a 2x2 operator to one qubit of a dense 2^m state vector."""
    if state.shape != (2**m,):
        raise ValueError(f"state has shape {state.shape}, expected ({2 ** m},)")
    if not 0 <= qubit < m:
        raise ValueError(f"qubit index {qubit} out of range for m = {m}")
    tensor = state.reshape([2] * m)
    tensor = np.moveaxis(np.tensordot(op, tensor, axes=([1], [qubit])), 0, qubit)
    return tensor.reshape(-1)


def product_moment(
    spec: GhzSpec,
    signs,
    phases,
    cap: int = ORACLE_CAP,
) -> complex:
    """Exact <prod_j (sx + i s_j sy) e^{-i delta_j}> on the GHZ state.

    `phases` are the already-signed exponents delta_j (the factor carries
    e^{-i delta_j}); pass delta_j = s_j * theta_j for literal conventions.
    """
    signs = tuple(int(v) for v in signs)
    phases = tuple(float(v) for v in phases)
    if len(signs) != spec.m or len(phases) != spec.m:
        raise ValueError(f"need {spec.m} signs and phases, got {len(signs)}/{len(phases)}")
    _check_cap(spec.m, cap)
    state = build_ghz(spec, cap)
    out = state.copy()
    for j in range(spec.m):
        op = (_SX + 1j * signs[j] * _SY) * np.exp(-1j * phases[j])
        out = apply_single_qubit(out, spec.m, j, op)
    return complex(np.vdot(state, out))


def oracle_bell_value(
    spec: GhzSpec, conv: BellConvention, cap: int = ORACLE_CAP
) -> tuple[complex, float]:
    """Exact complex Bell moment and extracted F for a convention.

    Uses the convention's moment settings, i.e. the same product the sampler
    averages (see BellConvention.moment_settings for why the Ardehali label
    does not average its literal mixed-sign factors).
    """
    if conv.m != spec.m:
        raise ValueError(f"convention covers {conv.m} qubits, state has {spec.m}")
    signs, phases = conv.moment_settings()
    moment = product_moment(spec, signs, phases, cap=cap)
    return moment, extract_f(conv.extraction, moment)


def oracle_pauli_correlator(state: np.ndarray, axes, cap: int = ORACLE_CAP) -> float:
    """Exact <prod_j sigma_axis_j> for axes drawn from {x, y, z, identity}."""
    m = int(round(math.log2(state.size)))
    if 2**m != state.size:
        raise ValueError(f"state length {state.size} is not a power of two")
    _check_cap(m, cap)
    axes = list(axes)
    if len(axes) != m:
        raise ValueError(f"need {m} axes, got {len(axes)}")
    out = state.copy()
    for j, axis in enumerate(axes):
        try:
            op = PAULI_BY_AXIS[str(axis).lower()]
        except KeyError:
            raise ValueError(f"unknown axis {axis!r}") from None
        out = apply_single_qubit(out, m, j, op)
    value = complex(np.vdot(state, out))
    return float(value.real)


def oracle_q_moment_check(
    spec: GhzSpec,
    conv: BellConvention,
    grid_resolution: int,
) -> complex:
    """Quadrature of the sampled weight against the Q density.

    Integrates moment_weight * q_density over the product of spheres; the
    result must reproduce oracle_bell_value's complex moment, which pins the
    density normalization, the factor-3 moment weight and every phase
    convention in one check. Limited to m <= 3 by the grid cost.
    """
    if conv.m != spec.m:
        raise ValueError(f"convention covers {conv.m} qubits, state has {spec.m}")
    if spec.m > 3:
        raise ValueError(f"moment quadrature limited to m <= 3, got m = {spec.m}")
    from ghzq.estimators import moment_weight
    from ghzq.qfunction import integrate_product_sphere, q_density

    def integrand(points: np.ndarray) -> np.ndarray:
        return moment_weight(conv, points) * q_density(spec, points)

    return integrate_product_sphere(spec.m, grid_resolution, integrand)


def coherent_overlap(spec: GhzSpec, point_array: np.ndarray, cap: int = ORACLE_CAP) -> complex:
    """<n_1 ... n_m | GHZ> via the full 2^m tensor product, no shortcuts.

    The per-qubit coherent state is cos(t/2)|up> + e^{i a} sin(t/2)|down>
    with polar angle t and azimuth a read off the Bloch vector.
    """
    _check_cap(spec.m, cap)
    point_array = np.asarray(point_array, dtype=float)
    if point_array.shape != (spec.m, 3):
        raise ValueError(f"expected point of shape ({spec.m}, 3), got {point_array.shape}")
    coherent = np.array([1.0 + 0.0j])
    for nx, ny, nz in point_array:
        theta = math.acos(max(-1.0, min(1.0, nz)))
        azimuth = math.atan2(ny, nx)
        qubit = np.array(
            [math.cos(theta / 2.0), np.exp(1j * azimuth) * math.sin(theta / 2.0)]
        )
        coherent = np.kron(coherent, qubit)
    return complex(np.vdot(coherent, build_ghz(spec, cap)))
