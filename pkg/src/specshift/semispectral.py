"""Semi-spectral cumulative functions of contractions.

A finite unitary has a jump spectral measure on the circle; compressing the
eigenprojections of a degree-N dilation of a contraction T to the base space
yields a positive operator-valued jump measure whose moments reproduce T^n
for 0 <= n <= N.  Angles live in (0, 2pi], with eigenvalue 1 assigned angle
2pi so that the cumulative function vanishes at 0 - this convention is load
bearing: it makes the boundary terms of every integration by parts drop out.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .dilation import n_dilation
from .opcore import as_operator, hs_norm, is_contraction, is_unitary

__all__ = [
    "SemiSpectralCDF",
    "MomentConsistencyError",
    "spectral_cdf_unitary",
    "semispectral_cdf",
    "cdf_eval",
    "moment_residual",
]

CLUSTER_TOL = 1e-9        # eigenangles closer than this are one jump
MASS_TOL = 1e-9           # | sum of jumps - I |
PSD_TOL = 1e-10           # jump blocks may dip this far below PSD
MOMENT_FAIL = 1e-7        # internal-consistency threshold for dilated CDFs
_DROP_TOL = 1e-12         # compressed blocks below this norm carry no mass


class MomentConsistencyError(RuntimeError):
    """A dilated cumulative function failed to reproduce the power moments."""


@dataclass(frozen=True)
class SemiSpectralCDF:
    """Operator-valued cumulative function t -> sum of jumps at angles <= t.

    ``angles`` is strictly increasing inside (0, 2pi]; ``blocks`` stacks the
    PSD jump operators.  The value at 0 is the zero matrix and the value at
    2pi is the identity (total mass).
    """

    dim: int
    angles: np.ndarray = field(repr=False)
    blocks: np.ndarray = field(repr=False)

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=np.float64)
        blocks = np.asarray(self.blocks, dtype=np.complex128)
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "blocks", blocks)
        if angles.ndim != 1 or blocks.shape != (angles.size, self.dim, self.dim):
            raise ValueError("angles and blocks have inconsistent shapes")
        if angles.size:
            if angles[0] <= 0.0 or angles[-1] > 2.0 * np.pi + 1e-12:
                raise ValueError("jump angles must lie in (0, 2pi]")
            if np.any(np.diff(angles) <= 0.0):
                raise ValueError("jump angles must be strictly increasing")
        if hs_norm(blocks.sum(axis=0) - np.eye(self.dim)) > MASS_TOL:
            raise ValueError("jump blocks must sum to the identity")

    def validate(self, psd_tol: float = PSD_TOL) -> None:
        """Full invariant check (PSD of every jump); raises on violation."""
        if self.blocks.size:
            herm = float(np.abs(self.blocks - self.blocks.conj().transpose(0, 2, 1)).max())
            if herm > 10 * psd_tol:
                raise ValueError(f"jump blocks not Hermitian: deviation {herm:.3e}")
            sym = 0.5 * (self.blocks + self.blocks.conj().transpose(0, 2, 1))
            low = float(np.linalg.eigvalsh(sym).min())
            if low < -psd_tol:
                raise ValueError(f"jump block eigenvalue {low:.3e} below PSD tolerance")

    def value(self, t: float) -> np.ndarray:
        """Cumulative value at t in [0, 2pi]."""
        if not 0.0 <= t <= 2.0 * np.pi + 1e-12:
            raise ValueError("evaluation angle outside [0, 2pi]")
        idx = int(np.searchsorted(self.angles, t, side="right"))
        if idx == 0:
            return np.zeros((self.dim, self.dim), dtype=np.complex128)
        return self.blocks[:idx].sum(axis=0)

    def moment(self, n: int) -> np.ndarray:
        """sum_j e^{i n t_j} J_j; reproduces T^n (adjoint powers for n < 0)."""
        phases = np.exp(1j * n * self.angles)
        return np.einsum("j,jab->ab", phases, self.blocks)

    def moments(self, ns) -> np.ndarray:
        ns = np.asarray(ns)
        phases = np.exp(1j * np.multiply.outer(ns, self.angles))
        return np.einsum("nj,jab->nab", phases, self.blocks)

    def to_json(self) -> str:
        jumps = [
            {
                "angle": float(a),
                "block_real": b.real.tolist(),
                "block_imag": b.imag.tolist(),
            }
            for a, b in zip(self.angles, self.blocks)
        ]
        return json.dumps({"dim": self.dim, "jumps": jumps})

    @classmethod
    def from_json(cls, text: str) -> "SemiSpectralCDF":
        data = json.loads(text)
        dim = int(data["dim"])
        angles = np.array([j["angle"] for j in data["jumps"]], dtype=np.float64)
        blocks = np.array(
            [np.array(j["block_real"]) + 1j * np.array(j["block_imag"]) for j in data["jumps"]],
            dtype=np.complex128,
        ).reshape(len(data["jumps"]), dim, dim)
        return cls(dim=dim, angles=angles, blocks=blocks)


def cdf_eval(cdf: SemiSpectralCDF, t: float) -> np.ndarray:
    """Module-level alias for :meth:`SemiSpectralCDF.value`."""
    return cdf.value(t)


def _wrap_angles(eigs: np.ndarray, cluster_tol: float) -> np.ndarray:
    # map eigenvalue arguments into (0, 2pi]; snap a neighbourhood of 1 to 2pi
    ang = np.angle(eigs)
    ang = np.where(ang <= 0.0, ang + 2.0 * np.pi, ang)
    ang = np.where(2.0 * np.pi - ang < cluster_tol, 2.0 * np.pi, ang)
    ang = np.where(ang < cluster_tol, 2.0 * np.pi, ang)
    return ang


def _jump_list(u: np.ndarray, compress_dim: int, cluster_tol: float, drop_tol: float):
    """Cluster the eigenangles of a unitary and compress the projections.

    Uses a complex Schur decomposition so the spectral basis is exactly
    orthonormal; for a unitary (normal) matrix its columns are eigenvectors
    up to rounding.
    """
    s, z = scipy.linalg.schur(u, output="complex")
    ang = _wrap_angles(np.diagonal(s), cluster_tol)
    order = np.argsort(ang, kind="stable")
    ang = ang[order]
    z = z[:, order]
    angles, blocks = [], []
    start = 0
    m = ang.size
    for stop in range(1, m + 1):
        if stop < m and ang[stop] - ang[stop - 1] <= cluster_tol:
            continue
        zc = z[:compress_dim, start:stop]
        block = zc @ zc.conj().T
        if hs_norm(block) > drop_tol:
            angles.append(float(ang[start:stop].mean()))
            blocks.append(block)
        start = stop
    return np.array(angles), np.array(blocks).reshape(len(blocks), compress_dim, compress_dim)


def spectral_cdf_unitary(u, cluster_tol: float = CLUSTER_TOL) -> SemiSpectralCDF:
    """Jump spectral measure of a finite unitary, eigenvalue 1 at angle 2pi."""
    u = as_operator(u)
    if not is_unitary(u):
        raise ValueError("input is not unitary within tolerance")
    angles, blocks = _jump_list(u, u.shape[0], cluster_tol, drop_tol=-1.0)
    return SemiSpectralCDF(dim=u.shape[0], angles=angles, blocks=blocks)


def moment_residual(cdf: SemiSpectralCDF, t: np.ndarray, nmax: int) -> float:
    """Largest Hilbert-Schmidt gap between CDF moments and powers of T."""
    t = as_operator(t)
    ns = np.arange(nmax + 1)
    mom = cdf.moments(ns)
    worst = 0.0
    power = np.eye(cdf.dim, dtype=np.complex128)
    for n in ns:
        worst = max(worst, hs_norm(mom[n] - power))
        power = power @ t
    return worst


def semispectral_cdf(t, n: int, cluster_tol: float = CLUSTER_TOL) -> SemiSpectralCDF:
    """Semi-spectral cumulative function of a contraction via an N-dilation.

    The eigenprojections of the degree-N dilation unitary are compressed to
    the leading corner; the resulting jump measure satisfies the moment
    identity up to power N (checked; a residual beyond ``MOMENT_FAIL`` raises
    :class:`MomentConsistencyError`).  Callers must pick N at least as large
    as the highest power they intend to integrate.
    """
    t = as_operator(t)
    if n < 1:
        raise ValueError("dilation degree must be at least 1")
    if not is_contraction(t):
        raise ValueError("semi-spectral measures are defined for contractions")
    u = n_dilation(t, n).unitary
    angles, blocks = _jump_list(u, t.shape[0], cluster_tol, drop_tol=_DROP_TOL)
    cdf = SemiSpectralCDF(dim=t.shape[0], angles=angles, blocks=blocks)
    residual = moment_residual(cdf, t, n)
    if residual > MOMENT_FAIL:
        raise MomentConsistencyError(
            f"dilated CDF moment residual {residual:.3e} exceeds {MOMENT_FAIL:g}"
        )
    return cdf
