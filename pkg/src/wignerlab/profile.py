"""Variance profiles for generalized Wigner ensembles.

A profile is the N x N matrix of entry variances.  Valid profiles are
symmetric, doubly stochastic (every column sums to 1) and have all entries
bounded by c0/N.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

SYMMETRY_TOL = 1e-12
STOCHASTIC_TOL = 1e-12
CUSTOM_TOL = 1e-10
SIMPLE_EIG_TOL = 1e-8


class ProfileError(ValueError):
    """Raised when a variance profile violates its construction contract."""


@dataclass(frozen=True)
class VarianceProfile:
    """Immutable matrix of entry variances with assumption metadata."""

    n: int
    sigma2: np.ndarray
    kind: str
    c0: float

    def __post_init__(self):
        s = self.sigma2
        if s.shape != (self.n, self.n):
            raise ProfileError(f"sigma2 shape {s.shape} != ({self.n}, {self.n})")
        if np.any(s < 0):
            raise ProfileError("negative variance entry")
        if np.max(np.abs(s - s.T)) > SYMMETRY_TOL:
            raise ProfileError("sigma2 not symmetric")
        col = s.sum(axis=0)
        bad = np.argmax(np.abs(col - 1.0))
        if abs(col[bad] - 1.0) > STOCHASTIC_TOL:
            raise ProfileError(
                f"column {bad} sums to {col[bad]!r}, not doubly stochastic"
            )
        self.sigma2.flags.writeable = False

    @property
    def c_inf(self) -> float:
        return float(self.n * self.sigma2.min())

    @property
    def c_sup(self) -> float:
        return float(self.n * self.sigma2.max())

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.sigma2).tobytes())
        return h.hexdigest()[:16]

    def save_txt(self, path) -> None:
        np.savetxt(path, self.sigma2, fmt="%.17g")


@dataclass(frozen=True)
class AssumptionReport:
    """Spectral diagnostics of a profile against the model assumptions."""

    row_sum_residual: float
    spectrum_of_b: np.ndarray
    delta_minus: float
    delta_plus: float
    eigenvalue_one_simple: bool
    c_inf: float
    c_sup: float


def flat_profile(n: int) -> VarianceProfile:
    """Uniform profile sigma2_ij = 1/n (the standard Wigner case)."""
    if n < 2:
        raise ProfileError(f"dimension {n} < 2")
    return VarianceProfile(n=n, sigma2=np.full((n, n), 1.0 / n), kind="flat", c0=1.0)


def band_profile(n: int, w: int, f) -> VarianceProfile:
    """Band profile with bandwidth ``w`` and symmetric shape function ``f``.

    Raw variances are f([i-j]_n / w) / w with [i-j]_n the symmetric mod-n
    representative; the common circulant row sum is then divided out so
    double stochasticity holds exactly at finite n.
    """
    if n < 2:
        raise ProfileError(f"dimension {n} < 2")
    if not 1 <= w <= n // 2:
        raise ProfileError(f"bandwidth {w} outside [1, {n // 2}]")
    offsets = symmetric_offsets(n)
    weights = np.array([f(d / w) / w for d in offsets], dtype=float)
    if np.any(weights < 0):
        bad = offsets[int(np.argmin(weights))]
        raise ProfileError(f"shape function negative at offset {bad}")
    total = weights.sum()
    if total <= 0:
        raise ProfileError("shape function vanishes on all admissible offsets")
    weights /= total
    idx = np.arange(n)
    d = (idx[:, None] - idx[None, :]) % n
    d = np.where(d > n / 2, d - n, d)  # symmetric representative in (-n/2, n/2]
    sigma2 = weights[np.searchsorted(offsets, d)]
    c0 = float(n * sigma2.max())
    return VarianceProfile(n=n, sigma2=sigma2, kind="band", c0=c0)


def symmetric_offsets(n: int) -> np.ndarray:
    """All values of [i-j]_n: integers in (-n/2, n/2]."""
    return np.arange(-(n // 2) + 1 if n % 2 == 0 else -(n // 2), n // 2 + 1)


def custom_profile(sigma2: np.ndarray) -> VarianceProfile:
    """Validate an arbitrary variance matrix as a profile.

    Symmetrizes by averaging with the transpose, then checks column sums
    within 1e-10.
    """
    s = np.array(sigma2, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ProfileError(f"expected square matrix, got shape {s.shape}")
    n = s.shape[0]
    if n < 2:
        raise ProfileError(f"dimension {n} < 2")
    if np.any(s < 0):
        i, j = np.unravel_index(int(np.argmin(s)), s.shape)
        raise ProfileError(f"negative variance at ({i}, {j})")
    s = 0.5 * (s + s.T)
    col = s.sum(axis=0)
    bad = int(np.argmax(np.abs(col - 1.0)))
    if abs(col[bad] - 1.0) > CUSTOM_TOL:
        raise ProfileError(
            f"column {bad} sums to {col[bad]!r} (|residual| > {CUSTOM_TOL})"
        )
    # renormalize the sub-1e-10 residual away so the stricter invariant holds
    s = s / col[None, :]
    s = 0.5 * (s + s.T)
    s /= s.sum(axis=0, keepdims=True)
    s = 0.5 * (s + s.T)
    c0 = float(n * s.max())
    return VarianceProfile(n=n, sigma2=s, kind="custom", c0=c0)


def assumption_report(p: VarianceProfile) -> AssumptionReport:
    """Spectrum of the variance matrix and the spectral-gap parameters.

    delta_plus/minus locate Spec(B) \\ {1} inside [-1+delta_-, 1-delta_+];
    eigenvalue 1 counts as simple when exactly one eigenvalue lies within
    1e-8 of 1.
    """
    spec = np.linalg.eigvalsh(p.sigma2)
    col = p.sigma2.sum(axis=0)
    row_sum_residual = float(np.max(np.abs(col - 1.0)))
    near_one = np.abs(spec - 1.0) <= SIMPLE_EIG_TOL
    simple = int(near_one.sum()) == 1
    rest = spec[~near_one] if near_one.any() else spec[:-1]
    if rest.size:
        delta_plus = float(1.0 - rest.max())
        delta_minus = float(rest.min() + 1.0)
    else:
        delta_plus = delta_minus = 1.0
    return AssumptionReport(
        row_sum_residual=row_sum_residual,
        spectrum_of_b=spec,
        delta_minus=delta_minus,
        delta_plus=delta_plus,
        eigenvalue_one_simple=simple,
        c_inf=p.c_inf,
        c_sup=p.c_sup,
    )


def load_txt(path) -> VarianceProfile:
    return custom_profile(np.loadtxt(path))
