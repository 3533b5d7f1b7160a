"""Dense complex-operator substrate.

Schatten norms, contraction classification, defect operators, the
trigonometric-polynomial functional calculus for contractions, and unitary
exponentials of Hermitian matrices.  Operators are square complex numpy
arrays at a fixed, small dimension; every function here is pure and leaves
its arguments untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

__all__ = [
    "CONTRACTION_TOL",
    "DEFECT_CLAMP",
    "HERMITIAN_TOL",
    "SUP_NORM_GRID",
    "NotAContractionError",
    "DefectPair",
    "TrigPolynomial",
    "as_operator",
    "hs_norm",
    "trace_norm",
    "op_norm",
    "is_contraction",
    "is_hermitian",
    "is_unitary",
    "defects",
    "apply_function",
    "hermitian_exp",
]

# Spectral-norm slack accepted when classifying contractions.
CONTRACTION_TOL = 1e-9

# Eigenvalues of I - T*T inside [-DEFECT_CLAMP, 0] are flushed to zero when
# building defect operators; anything lower means the input was never a
# contraction.  Numerically unitary inputs must pass.
DEFECT_CLAMP = 1e-10

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-8

# Sup norms of trigonometric polynomials are estimated on a uniform grid of
# this many angles.  The estimate is a lower bound on the true sup; callers
# that use it inside inequalities add an explicit slack.
SUP_NORM_GRID = 2048


class NotAContractionError(ValueError):
    """An operator expected to be a contraction has spectral norm > 1."""


def as_operator(m) -> np.ndarray:
    """Coerce to a square complex128 array with finite entries."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("matrix entries must be finite")
    return a


def hs_norm(m) -> float:
    """Hilbert-Schmidt (Frobenius) norm."""
    return float(np.linalg.norm(as_operator(m)))


def trace_norm(m) -> float:
    """Trace norm: sum of singular values.

    Raises ``numpy.linalg.LinAlgError`` if the SVD fails to converge.
    """
    return float(np.linalg.svd(as_operator(m), compute_uv=False).sum())


def op_norm(m) -> float:
    """Operator (spectral) norm: largest singular value."""
    a = as_operator(m)
    if a.shape[0] == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])


def is_contraction(t, tol: float = CONTRACTION_TOL) -> bool:
    """True iff the largest singular value is <= 1 + tol."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return op_norm(t) <= 1.0 + tol


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    a = as_operator(a)
    return float(np.abs(a - a.conj().T).max(initial=0.0)) <= tol


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = as_operator(u)
    return hs_norm(u.conj().T @ u - np.eye(u.shape[0])) <= tol


@dataclass(frozen=True)
class DefectPair:
    """Defect operators D_T = (I - T*T)^(1/2) and D_T* = (I - TT*)^(1/2)."""

    d_t: np.ndarray
    d_tstar: np.ndarray


def defects(t, clamp: float = DEFECT_CLAMP) -> DefectPair:
    """Build both defect operators of a contraction from one SVD.

    With T = W S X*, the defects are X sqrt(I-S^2) X* and W sqrt(I-S^2) W*,
    which makes the intertwining T D_T = D_T* T hold to rounding.  Squared
    singular values above 1 by at most ``clamp`` are flushed to 1; a larger
    excess raises :class:`NotAContractionError`.
    """
    t = as_operator(t)
    w, sig, xh = np.linalg.svd(t)
    gap = (1.0 - sig) * (1.0 + sig)  # eigenvalues of I - T*T, accurately
    if gap.size and gap.min(initial=0.0) < -clamp:
        raise NotAContractionError(
            f"largest singular value {sig[0]:.12g} exceeds 1 beyond the clamp"
        )
    root = np.sqrt(np.clip(gap, 0.0, None))
    d_t = (xh.conj().T * root) @ xh
    d_tstar = (w * root) @ w.conj().T
    return DefectPair(d_t=d_t, d_tstar=d_tstar)


class TrigPolynomial:
    """Finitely supported function on the circle, f(z) = sum_k c_k z^k.

    Negative indices stand for powers of the conjugate variable, so on the
    unit circle f(e^{it}) = sum_k c_k e^{ikt}.  These are the only symbols the
    toolkit ever applies to an operator; genuinely infinite Fourier series
    are out of scope and must be truncated by the caller.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Mapping[int, complex]):
        cleaned = {}
        for k, c in coeffs.items():
            k = int(k)
            c = complex(c)
            if c != 0:
                cleaned[k] = c
        self._coeffs = dict(sorted(cleaned.items()))

    @classmethod
    def monomial(cls, k: int, coeff: complex = 1.0) -> "TrigPolynomial":
        return cls({k: coeff})

    @property
    def coeffs(self) -> dict[int, complex]:
        return dict(self._coeffs)

    def coeff(self, k: int) -> complex:
        return self._coeffs.get(k, 0.0 + 0.0j)

    def __iter__(self) -> Iterator[tuple[int, complex]]:
        return iter(self._coeffs.items())

    def __len__(self) -> int:
        return len(self._coeffs)

    def __repr__(self) -> str:
        return f"TrigPolynomial({self._coeffs!r})"

    @property
    def analytic(self) -> bool:
        """True iff the support lies in the nonnegative indices."""
        return all(k >= 0 for k in self._coeffs)

    @property
    def max_index(self) -> int:
        return max(self._coeffs, default=0)

    @property
    def min_index(self) -> int:
        return min(self._coeffs, default=0)

    @property
    def max_abs_index(self) -> int:
        return max((abs(k) for k in self._coeffs), default=0)

    def second_moment_weight(self) -> float:
        """sum_k k^2 |c_k|, the membership weight of the C^2 symbol class."""
        return float(sum(k * k * abs(c) for k, c in self._coeffs.items()))

    def __call__(self, z):
        """Evaluate at scalar or array argument (nonzero for negative indices)."""
        z = np.asarray(z, dtype=np.complex128)
        out = np.zeros_like(z)
        for k, c in self._coeffs.items():
            out = out + c * z**k
        return out if out.ndim else complex(out)

    def at_angle(self, t):
        """Evaluate f(e^{it}) for scalar or array t."""
        t = np.asarray(t, dtype=np.float64)
        out = np.zeros(t.shape, dtype=np.complex128)
        for k, c in self._coeffs.items():
            out += c * np.exp(1j * k * t)
        return out if out.ndim else complex(out)

    def derivative(self) -> "TrigPolynomial":
        """d/dz derivative; defined for analytic symbols only."""
        if not self.analytic:
            raise ValueError("derivative in z requires an analytic symbol")
        return TrigPolynomial({k - 1: k * c for k, c in self._coeffs.items() if k != 0})

    def sup_norm_estimate(self, grid: int = SUP_NORM_GRID) -> float:
        """Max of |f| over a uniform angle grid (an estimate, not the sup)."""
        t = np.arange(grid) * (2.0 * np.pi / grid)
        return float(np.abs(self.at_angle(t)).max(initial=0.0))


def apply_function(f: TrigPolynomial, t) -> np.ndarray:
    """Evaluate f(T) = sum_{k>=0} c_k T^k + sum_{k>=1} c_{-k} (T*)^k.

    Both directions are accumulated Horner-style; powers of T are never
    obtained through an eigendecomposition because non-normal contractions
    may be defective.
    """
    t = as_operator(t)
    d = t.shape[0]
    eye = np.eye(d, dtype=np.complex128)
    out = np.zeros((d, d), dtype=np.complex128)
    coeffs = f.coeffs
    kmax = max((k for k in coeffs if k > 0), default=0)
    if kmax or 0 in coeffs:
        acc = np.zeros((d, d), dtype=np.complex128)
        for k in range(kmax, 0, -1):
            acc += coeffs.get(k, 0.0) * eye
            acc = t @ acc
        out += acc + coeffs.get(0, 0.0) * eye
    kmin = min((k for k in coeffs if k < 0), default=0)
    if kmin:
        tstar = t.conj().T
        acc = np.zeros((d, d), dtype=np.complex128)
        for k in range(kmin, 0):
            acc += coeffs.get(k, 0.0) * eye
            acc = tstar @ acc
        out += acc
    return out


def hermitian_exp(a, s: float) -> np.ndarray:
    """Unitary e^{isA} for Hermitian A, via the eigendecomposition of A."""
    a = as_operator(a)
    if not is_hermitian(a):
        raise ValueError("hermitian_exp requires a Hermitian matrix")
    w, q = np.linalg.eigh(a)
    return (q * np.exp(1j * s * w)) @ q.conj().T
