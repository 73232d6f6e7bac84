"""Positive SU(2)-Q density of the GHZ state on a product of unit spheres.

Conventions fixed here and validated against the dense oracle:

- Per-qubit spin coherent state |n> = cos(t/2)|up> + e^{i a} sin(t/2)|down>
  for polar angle t and azimuth a.
- Q is normalized as a probability density with respect to the product of
  solid-angle measures, which brings in a (2/4pi) kernel factor per qubit.
- The interference phase enters as cos(phi - sum_j a_j); the sign is pinned
  by matching directly computed overlap amplitudes (see tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from ghzq.core import GhzSpec, as_point_array

# (2j+1)/4pi normalization of the spin-1/2 coherent projector.
KERNEL_PER_QUBIT = 1.0 / (2.0 * math.pi)

MIN_QUADRATURE_RESOLUTION = 8


@dataclass(frozen=True)
class QDensityParts:
    """Branch products entering the GHZ Q density at one phase-space point.

    up_product = prod_j cos^2(t_j/2), down_product = prod_j sin^2(t_j/2),
    cross_product = prod_j cos(t_j/2) sin(t_j/2) and phase_sum is the total
    azimuth entering the interference cosine.
    """

    up_product: float
    down_product: float
    cross_product: float
    phase_sum: float


def _points_to_angles(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split (n, m, 3) Bloch vectors into (cos polar, azimuth) arrays."""
    u = np.clip(points[..., 2], -1.0, 1.0)
    azimuth = np.arctan2(points[..., 1], points[..., 0])
    return u, azimuth


def _branch_products(u: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # cos^2(t/2) = (1+u)/2 and sin^2(t/2) = (1-u)/2 for u = cos t.
    up = np.prod((1.0 + u) / 2.0, axis=-1)
    down = np.prod((1.0 - u) / 2.0, axis=-1)
    cross = np.prod(np.sqrt(np.clip((1.0 - u) * (1.0 + u), 0.0, None)) / 2.0, axis=-1)
    return up, down, cross


def q_density_parts(spec: GhzSpec, point) -> QDensityParts:
    arr = as_point_array(point, m=spec.m)
    if arr.shape[0] != 1:
        raise ValueError("q_density_parts takes a single phase-space point")
    u, azimuth = _points_to_angles(arr)
    up, down, cross = _branch_products(u)
    return QDensityParts(
        up_product=float(up[0]),
        down_product=float(down[0]),
        cross_product=float(cross[0]),
        phase_sum=float(azimuth.sum(axis=-1)[0]),
    )


def q_density(spec: GhzSpec, points) -> np.ndarray | float:
    """Normalized joint Q density, (2/4pi)^m |<n_1..n_m|GHZ>|^2.

    Accepts a PhasePoint, an (m, 3) array or an (n, m, 3) batch; returns a
    scalar for single points and an (n,) array for batches.
    """
    arr = as_point_array(points, m=spec.m)
    scalar = not (isinstance(points, np.ndarray) and np.asarray(points).ndim == 3)
    u, azimuth = _points_to_angles(arr)
    up, down, cross = _branch_products(u)
    kernel = KERNEL_PER_QUBIT**spec.m
    interference = 2.0 * cross * np.cos(spec.phi - azimuth.sum(axis=-1))
    density = kernel * 0.5 * (up + down + interference)
    density = np.maximum(density, 0.0)  # clamp float round-off at zeros
    return float(density[0]) if scalar else density


def envelope_density(spec: GhzSpec, points) -> np.ndarray | float:
    """Rejection envelope (2/4pi)^m (up_product + down_product), >= q_density."""
    arr = as_point_array(points, m=spec.m)
    scalar = not (isinstance(points, np.ndarray) and np.asarray(points).ndim == 3)
    u, _ = _points_to_angles(arr)
    up, down, _ = _branch_products(u)
    env = KERNEL_PER_QUBIT**spec.m * (up + down)
    return float(env[0]) if scalar else env


def _quadrature_axes(resolution: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-qubit 1D rules: Gauss-Legendre in u = cos t, uniform in azimuth."""
    u_nodes, u_weights = leggauss(resolution)
    step = 2.0 * math.pi / resolution
    a_nodes = (np.arange(resolution) + 0.5) * step
    a_weights = np.full(resolution, step)
    return u_nodes, u_weights, a_nodes, a_weights


def _iter_grid_chunks(m: int, nodes_per_axis, weights_per_axis, chunk_size: int):
    """Yield (points, weights) chunks of the full product grid.

    `nodes_per_axis` alternates (u_1, a_1, u_2, a_2, ...) with azimuth nodes
    in radians; the flat node index is decomposed into per-axis digits, so a
    grid of prod(len(axis)) nodes is visited with bounded memory.
    """
    sizes = [len(nodes) for nodes in nodes_per_axis]
    total = int(np.prod(sizes, dtype=np.int64))
    for start in range(0, total, chunk_size):
        idx = np.arange(start, min(start + chunk_size, total), dtype=np.int64)
        digits = []
        rem = idx
        for size in reversed(sizes):
            digits.append(rem % size)
            rem = rem // size
        digits.reverse()
        points = np.empty((idx.size, m, 3))
        weights = np.ones(idx.size)
        for qubit in range(m):
            u = nodes_per_axis[2 * qubit][digits[2 * qubit]]
            azimuth = nodes_per_axis[2 * qubit + 1][digits[2 * qubit + 1]]
            sin_t = np.sqrt(np.clip(1.0 - u * u, 0.0, None))
            points[:, qubit, 0] = sin_t * np.cos(azimuth)
            points[:, qubit, 1] = sin_t * np.sin(azimuth)
            points[:, qubit, 2] = u
            weights *= weights_per_axis[2 * qubit][digits[2 * qubit]]
            weights *= weights_per_axis[2 * qubit + 1][digits[2 * qubit + 1]]
        yield points, weights, digits


def integrate_product_sphere(
    m: int,
    resolution: int,
    integrand,
    chunk_size: int = 1 << 19,
) -> complex:
    """Integrate integrand(points) over the product of m unit spheres.

    Gauss-Legendre in cos(polar) and a uniform periodic rule in azimuth,
    resolution nodes each, i.e. resolution^(2m) grid nodes in total. The
    integrand receives (k, m, 3) Bloch-vector batches.
    """
    if resolution < MIN_QUADRATURE_RESOLUTION:
        raise ValueError(
            f"resolution {resolution} too small, need >= {MIN_QUADRATURE_RESOLUTION}"
        )
    u_nodes, u_weights, a_nodes, a_weights = _quadrature_axes(resolution)
    nodes = [u_nodes, a_nodes] * m
    weights = [u_weights, a_weights] * m
    accum = 0.0 + 0.0j
    for points, w, _ in _iter_grid_chunks(m, nodes, weights, chunk_size):
        accum += complex(np.sum(np.asarray(integrand(points)) * w))
    return accum


def q_density_quadrature_check(spec: GhzSpec, grid_resolution: int) -> float:
    """Total quadrature mass of q_density; 1 up to the grid error for m <= 3."""
    if spec.m > 3:
        raise ValueError(f"quadrature check limited to m <= 3, got m = {spec.m}")
    mass = integrate_product_sphere(
        spec.m, grid_resolution, lambda pts: q_density(spec, pts)
    )
    return float(mass.real)


def q_cell_masses(
    spec: GhzSpec,
    u_edges: np.ndarray,
    azimuth_edges: np.ndarray,
    sub_resolution: int = 8,
) -> np.ndarray:
    """Exact-quadrature probability mass of each histogram cell.

    Each qubit is binned on the same (u, azimuth) grid given by the edge
    arrays. Returns a flat array over joint cells; the per-qubit cell id is
    u_bin * n_azimuth_bins + azimuth_bin, and qubit 0 is the most significant
    digit of the joint index (matching `sample_cell_ids`).
    """
    u_edges = np.asarray(u_edges, dtype=float)
    azimuth_edges = np.asarray(azimuth_edges, dtype=float)
    n_u = u_edges.size - 1
    n_a = azimuth_edges.size - 1
    if n_u < 1 or n_a < 1:
        raise ValueError("need at least one bin per axis")
    if spec.m > 3:
        raise ValueError("cell-mass quadrature limited to m <= 3")

    gl_nodes, gl_weights = leggauss(sub_resolution)
    u_nodes, u_weights, u_bins = [], [], []
    for b in range(n_u):
        lo, hi = u_edges[b], u_edges[b + 1]
        u_nodes.append((gl_nodes + 1.0) * (hi - lo) / 2.0 + lo)
        u_weights.append(gl_weights * (hi - lo) / 2.0)
        u_bins.append(np.full(sub_resolution, b, dtype=np.int64))
    a_nodes, a_weights, a_bins = [], [], []
    for b in range(n_a):
        lo, hi = azimuth_edges[b], azimuth_edges[b + 1]
        step = (hi - lo) / sub_resolution
        a_nodes.append(lo + (np.arange(sub_resolution) + 0.5) * step)
        a_weights.append(np.full(sub_resolution, step))
        a_bins.append(np.full(sub_resolution, b, dtype=np.int64))

    axis_u = (np.concatenate(u_nodes), np.concatenate(u_weights), np.concatenate(u_bins))
    axis_a = (np.concatenate(a_nodes), np.concatenate(a_weights), np.concatenate(a_bins))
    nodes = [axis_u[0], axis_a[0]] * spec.m
    weights = [axis_u[1], axis_a[1]] * spec.m

    cells_per_qubit = n_u * n_a
    masses = np.zeros(cells_per_qubit**spec.m)
    for points, w, digits in _iter_grid_chunks(spec.m, nodes, weights, 1 << 19):
        joint = np.zeros(points.shape[0], dtype=np.int64)
        for qubit in range(spec.m):
            cell = (
                axis_u[2][digits[2 * qubit]] * n_a + axis_a[2][digits[2 * qubit + 1]]
            )
            joint = joint * cells_per_qubit + cell
        np.add.at(masses, joint, q_density(spec, points) * w)
    return masses


def sample_cell_ids(
    points: np.ndarray, u_edges: np.ndarray, azimuth_edges: np.ndarray
) -> np.ndarray:
    """Joint histogram cell id of each sample, matching `q_cell_masses`."""
    points = as_point_array(points)
    u, azimuth = _points_to_angles(points)
    azimuth = np.mod(azimuth, 2.0 * math.pi)
    n_u = len(u_edges) - 1
    n_a = len(azimuth_edges) - 1
    u_bin = np.clip(np.digitize(u, u_edges) - 1, 0, n_u - 1)
    a_bin = np.clip(np.digitize(azimuth, azimuth_edges) - 1, 0, n_a - 1)
    cell = u_bin * n_a + a_bin
    cells_per_qubit = n_u * n_a
    joint = np.zeros(points.shape[0], dtype=np.int64)
    for qubit in range(points.shape[1]):
        joint = joint * cells_per_qubit + cell[:, qubit]
    return joint
