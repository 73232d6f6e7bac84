"""State, convention and statistics types shared by every other module."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

# Double-precision headroom: second moments of the Bell weight grow like 6^m,
# which stays finite in float64 well past this cap (overflow near m ~ 390).
MAX_QUBITS = 256

# Ratio threshold for a genuine multipartite violation, F/F_QM > 1/sqrt(2)
# (the hybrid local-nonlocal bound).
GENUINE_THRESHOLD = 1.0 / math.sqrt(2.0)


def reduce_phase(phi: float) -> float:
    """Reduce an angle to the principal branch [-pi, pi)."""
    return float((float(phi) + math.pi) % (2.0 * math.pi) - math.pi)


class Extraction(str, enum.Enum):
    """Rule turning the complex Bell moment into the real quantity F."""

    NEG_REAL = "neg_real"
    NEG_IMAG = "neg_imag"
    MODULUS = "modulus"


class ConventionLabel(str, enum.Enum):
    MERMIN = "mermin"
    ARDEHALI = "ardehali"
    CUSTOM = "custom"


def extract_f(extraction: Extraction, moment: complex) -> float:
    if extraction is Extraction.NEG_REAL:
        return -moment.real
    if extraction is Extraction.NEG_IMAG:
        return -moment.imag
    return abs(moment)


@dataclass(frozen=True)
class GhzSpec:
    """Qubit count and superposition phase of the GHZ state.

    The state is (|up..up> + e^{i phi} |down..down>)/sqrt(2); phi is reduced
    to [-pi, pi) on construction, so phi=pi is stored as -pi (same state).
    """

    m: int
    phi: float

    def __post_init__(self) -> None:
        if not isinstance(self.m, (int, np.integer)) or isinstance(self.m, bool):
            raise ValueError(f"qubit count must be an integer, got {self.m!r}")
        if self.m < 1:
            raise ValueError(f"qubit count must be >= 1, got {self.m}")
        if self.m > MAX_QUBITS:
            raise ValueError(f"qubit count {self.m} exceeds the cap {MAX_QUBITS}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "phi", reduce_phase(self.phi))


@dataclass(frozen=True)
class BellConvention:
    """Per-qubit signs s_j and phases theta_j plus the F extraction rule.

    `s` and `theta` hold the literal detector-setting parameters of the
    labeled convention; they define the per-qubit sampling factors
    3*(nx + i*s_j*ny)*exp(-i*s_j*theta_j). The complex moment that the Bell
    quantity F is extracted from is given by :meth:`moment_settings`, which
    for the labeled conventions differs from the literal factors (see there).
    """

    s: tuple[int, ...]
    theta: tuple[float, ...]
    extraction: Extraction
    label: ConventionLabel

    def __post_init__(self) -> None:
        s = tuple(int(v) for v in self.s)
        theta = tuple(float(v) for v in self.theta)
        if len(s) != len(theta):
            raise ValueError(f"sign/phase length mismatch: {len(s)} vs {len(theta)}")
        if not s:
            raise ValueError("convention must cover at least one qubit")
        if any(v not in (-1, 1) for v in s):
            raise ValueError(f"signs must be +-1, got {s}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "theta", theta)
        m = len(s)
        if self.label is ConventionLabel.MERMIN:
            if any(v != 1 for v in s) or any(t != 0.0 for t in theta):
                raise ValueError("Mermin label requires s_j = 1 and theta_j = 0")
        elif self.label is ConventionLabel.ARDEHALI:
            ok = (
                all(v == -1 for v in s[:-1])
                and s[-1] == 1
                and all(t == 0.0 for t in theta[:-1])
                and theta[-1] == -math.pi / 4
            )
            if not ok:
                raise ValueError(
                    "Ardehali label requires s_j = -1, theta_j = 0 for j < m "
                    "and s_m = 1, theta_m = -pi/4"
                )

    @property
    def m(self) -> int:
        return len(self.s)

    def moment_settings(self) -> tuple[tuple[int, ...], tuple[float, ...]]:
        """Per-qubit (sign, phase) of the product whose mean F is read from.

        On a GHZ state every product mixing raising and lowering factors has
        identically zero expectation (its only nonvanishing matrix elements
        connect basis states the GHZ state has no weight on), so the literal
        Ardehali factors carry no Bell signal. The real combination of
        correlators that the even-m settings stand for is the real part of
        the all-raising product: at m = 2 its negated real part is exactly
        F = -<sx sx> + <sy sy>, the CHSH-type quantity with the last qubit's
        two settings at azimuth +-pi/4 recombined (absorbing theta_m). Both
        labeled conventions therefore average the all-raising product with
        zero phases; Custom conventions are averaged literally.
        """
        if self.label is ConventionLabel.CUSTOM:
            return self.s, tuple(s * t for s, t in zip(self.s, self.theta))
        return (1,) * self.m, (0.0,) * self.m

    def permuted(self, order: "list[int] | tuple[int, ...]") -> "BellConvention":
        """Convention with qubits reordered; label degrades to Custom."""
        if sorted(order) != list(range(self.m)):
            raise ValueError(f"not a permutation of 0..{self.m - 1}: {order}")
        return BellConvention(
            s=tuple(self.s[i] for i in order),
            theta=tuple(self.theta[i] for i in order),
            extraction=self.extraction,
            label=ConventionLabel.CUSTOM,
        )


def mermin_convention(m: int) -> tuple[GhzSpec, BellConvention]:
    """Odd-m convention: phi = -pi/2, s_j = 1, theta_j = 0, F = -Im of the moment."""
    if m % 2 == 0:
        raise ValueError(f"the Mermin convention needs odd m, got {m}")
    spec = GhzSpec(m=m, phi=-math.pi / 2)
    conv = BellConvention(
        s=(1,) * m,
        theta=(0.0,) * m,
        extraction=Extraction.NEG_IMAG,
        label=ConventionLabel.MERMIN,
    )
    return spec, conv


def ardehali_convention(m: int) -> tuple[GhzSpec, BellConvention]:
    """Even-m convention: phi = pi, s_j = -1 except s_m = 1, theta_m = -pi/4.

    F is extracted as -Re of the moment defined by
    :meth:`BellConvention.moment_settings`; the choice is pinned by the m = 2
    reduction F = -<sx sx> + <sy sy> = 2 and stays positive for all even m.
    """
    if m < 2 or m % 2 == 1:
        raise ValueError(f"the Ardehali convention needs even m >= 2, got {m}")
    spec = GhzSpec(m=m, phi=math.pi)
    conv = BellConvention(
        s=(-1,) * (m - 1) + (1,),
        theta=(0.0,) * (m - 1) + (-math.pi / 4,),
        extraction=Extraction.NEG_REAL,
        label=ConventionLabel.ARDEHALI,
    )
    return spec, conv


def convention_for(m: int) -> tuple[GhzSpec, BellConvention]:
    """Parity-matched convention: Mermin for odd m, Ardehali for even m."""
    return mermin_convention(m) if m % 2 else ardehali_convention(m)


def f_qm_closed_form(spec: GhzSpec, conv: BellConvention) -> float:
    """Quantum-mechanical value of F used to normalize sweeps: 2^(m-1).

    Valid for the labeled conventions only; both give |<moment>| = 2^(m-1)
    with the extraction rule aligned to the state phase. Verified against
    the dense oracle for every m within the oracle cap (see tests).
    """
    if conv.label is ConventionLabel.CUSTOM:
        raise ValueError("no closed form for custom conventions; use the oracle")
    if conv.m != spec.m:
        raise ValueError(f"convention covers {conv.m} qubits, state has {spec.m}")
    return float(2.0 ** (spec.m - 1))


def lhv_bound_ratio(m: int, conv: BellConvention) -> float:
    """LHV bound divided by F_QM for the standard Mermin/Ardehali inequalities.

    The bound on F is 2^((m-1)/2), so the ratio threshold is 2^(-(m-1)/2);
    a sampled ratio above it is a Bell violation. The stricter genuine
    multipartite threshold is the constant :data:`GENUINE_THRESHOLD`.
    """
    del conv  # same ratio for both labeled conventions
    return float(2.0 ** (-(m - 1) / 2.0))


@dataclass(frozen=True)
class BlochSample:
    """One qubit's sampled direction on the unit sphere."""

    nx: float
    ny: float
    nz: float

    def __post_init__(self) -> None:
        norm2 = self.nx * self.nx + self.ny * self.ny + self.nz * self.nz
        if abs(norm2 - 1.0) > 1e-12:
            raise ValueError(f"Bloch vector must be unit length, |n|^2 = {norm2!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.nx, self.ny, self.nz])


@dataclass(frozen=True)
class PhasePoint:
    """One draw from the Q distribution: an m-tuple of Bloch directions."""

    qubits: tuple[BlochSample, ...]

    def __post_init__(self) -> None:
        if not self.qubits:
            raise ValueError("phase point must contain at least one qubit")
        object.__setattr__(self, "qubits", tuple(self.qubits))

    @property
    def m(self) -> int:
        return len(self.qubits)

    def as_array(self) -> np.ndarray:
        return np.array([[q.nx, q.ny, q.nz] for q in self.qubits])

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "PhasePoint":
        arr = np.asarray(arr, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise ValueError(f"expected shape (m, 3), got {arr.shape}")
        return cls(qubits=tuple(BlochSample(*row) for row in arr))


def as_point_array(points, m: int | None = None) -> np.ndarray:
    """Coerce a PhasePoint or array of shape (m,3) / (n,m,3) to (n,m,3)."""
    if isinstance(points, PhasePoint):
        arr = points.as_array()[None, :, :]
    else:
        arr = np.asarray(points, dtype=float)
        if arr.ndim == 2:
            arr = arr[None, :, :]
    if arr.ndim != 3 or arr.shape[-1] != 3:
        raise ValueError(f"expected points of shape (n, m, 3), got {arr.shape}")
    if m is not None and arr.shape[1] != m:
        raise ValueError(f"points have {arr.shape[1]} qubits, expected {m}")
    return arr


@dataclass
class MomentAccumulator:
    """Mergeable streaming moments of a complex-valued sample stream.

    Tracks the count, complex mean, the magnitude second central moment
    (sum |x - mean|^2) and the per-component central moments needed for
    standard errors of the extracted real quantity. Merging partial
    accumulators reproduces sequential accumulation exactly up to float
    round-off (Chan et al. pairwise update).
    """

    count: int = 0
    mean: complex = 0j
    m2: float = 0.0
    m2_re: float = 0.0
    m2_im: float = 0.0
    m2_cross: float = 0.0

    @classmethod
    def from_samples(cls, values) -> "MomentAccumulator":
        acc = cls()
        acc.add_samples(values)
        return acc

    def add_samples(self, values) -> None:
        values = np.asarray(values)
        if values.size == 0:
            return
        values = values.reshape(-1).astype(complex)
        n = values.size
        mean = values.mean()
        dre = values.real - mean.real
        dim = values.imag - mean.imag
        batch = MomentAccumulator(
            count=n,
            mean=complex(mean),
            m2=float(np.sum(dre * dre + dim * dim)),
            m2_re=float(np.sum(dre * dre)),
            m2_im=float(np.sum(dim * dim)),
            m2_cross=float(np.sum(dre * dim)),
        )
        merged = self.merge(batch)
        self.count = merged.count
        self.mean = merged.mean
        self.m2 = merged.m2
        self.m2_re = merged.m2_re
        self.m2_im = merged.m2_im
        self.m2_cross = merged.m2_cross

    def add(self, value: complex) -> None:
        self.add_samples(np.array([value], dtype=complex))

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if self.count == 0:
            return MomentAccumulator(other.count, other.mean, other.m2,
                                     other.m2_re, other.m2_im, other.m2_cross)
        if other.count == 0:
            return MomentAccumulator(self.count, self.mean, self.m2,
                                     self.m2_re, self.m2_im, self.m2_cross)
        na, nb = self.count, other.count
        n = na + nb
        delta = other.mean - self.mean
        w = na * nb / n
        return MomentAccumulator(
            count=n,
            mean=self.mean + delta * (nb / n),
            m2=self.m2 + other.m2 + abs(delta) ** 2 * w,
            m2_re=self.m2_re + other.m2_re + delta.real**2 * w,
            m2_im=self.m2_im + other.m2_im + delta.imag**2 * w,
            m2_cross=self.m2_cross + other.m2_cross + delta.real * delta.imag * w,
        )

    @property
    def variance(self) -> float:
        """Sample variance of |x| spread, sum |x - mean|^2 / (n - 1)."""
        if self.count < 2:
            return 0.0
        return max(self.m2 / (self.count - 1), 0.0)

    @property
    def stderr(self) -> float:
        if self.count == 0:
            return 0.0
        return math.sqrt(self.variance / self.count)

    def component_stderr(self, extraction: Extraction) -> float:
        """Standard error of the extracted real component of the mean."""
        if self.count < 2:
            return 0.0
        n = self.count
        if extraction is Extraction.NEG_REAL:
            var = self.m2_re / (n - 1)
        elif extraction is Extraction.NEG_IMAG:
            var = self.m2_im / (n - 1)
        else:
            # Delta method for |mean|: project the component covariance onto
            # the radial direction mean/|mean|.
            mod = abs(self.mean)
            if mod == 0.0:
                var = self.m2 / (n - 1)
            else:
                ur, ui = self.mean.real / mod, self.mean.imag / mod
                var = (
                    ur * ur * self.m2_re
                    + 2.0 * ur * ui * self.m2_cross
                    + ui * ui * self.m2_im
                ) / (n - 1)
        return math.sqrt(max(var, 0.0) / n)

    def to_state(self) -> tuple:
        return (self.count, self.mean, self.m2, self.m2_re, self.m2_im, self.m2_cross)

    @classmethod
    def from_state(cls, state: tuple) -> "MomentAccumulator":
        return cls(*state)
