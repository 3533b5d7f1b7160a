"""Cayley-transform bridge: self-adjoint and maximal dissipative pairs.

A Hermitian H maps to the unitary U = (i - H)(i + H)^{-1}; a dissipative L
maps to a contraction the same way.  The linear path between the transforms
carries the second-order trace identity, and the interpolating operator

    W_s = (H + i)(H_s + i)^{-1}(H_0 + i) - i,    H_s = s H_0 + (1 - s) H,

satisfies (i - W_s)(i + W_s)^{-1} = (1 - s) U_0 + s U exactly, so W_0 = H_0
and W_1 = H pair with the endpoints of the linear unitary path.  The
real-line shift function comes out of the circle-to-line pipeline; the
resolvent identity is verified against it with the explicit cubic weight.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .opcore import TrigPolynomial, as_operator, hs_norm, is_contraction, is_hermitian, is_unitary
from .paths import PerturbationPath
from .report import VerificationReport
from .shift import (
    DEFAULT_QUAD,
    QuadConfig,
    RealLineShift,
    gamma_pipeline,
    mobius_polynomial_weight,
)

__all__ = [
    "SelfAdjointPair",
    "resolvent_pipeline",
    "DissipativePair",
    "DegenerateTransformError",
    "cayley_sa",
    "cayley_dissipative",
    "inverse_cayley",
    "w_path",
    "verify_selfadjoint_formula",
    "verify_resolvent_formula",
    "verify_dissipative_formula",
]

DISSIPATIVE_PSD_TOL = 1e-10
EIGENVALUE_ONE_TOL = 1e-9
CIRCLE_TOL = 1e-6
REAL_LINE_TOL = 1e-4
RESOLVENT_TOL = 1e-5
RESOLVENT_DEGREE = 36


class DegenerateTransformError(ValueError):
    """A Cayley image has eigenvalue 1 within tolerance."""


def cayley_sa(h) -> np.ndarray:
    """Unitary Cayley transform (i - H)(i + H)^{-1} of a Hermitian matrix."""
    h = as_operator(h)
    if not is_hermitian(h):
        raise ValueError("Cayley transform of this kind requires a Hermitian matrix")
    eye = 1j * np.eye(h.shape[0])
    return np.linalg.solve((eye + h).T, (eye - h).T).T


def cayley_dissipative(l) -> np.ndarray:
    """Contraction Cayley transform (i - L)(i + L)^{-1} of a dissipative matrix."""
    l = as_operator(l)
    imag_part = (l - l.conj().T) / 2j
    if float(np.linalg.eigvalsh(imag_part).min()) < -DISSIPATIVE_PSD_TOL:
        raise ValueError("matrix is not dissipative: imaginary part is not PSD")
    eye = 1j * np.eye(l.shape[0])
    t = np.linalg.solve((eye + l).T, (eye - l).T).T
    _require_no_eigenvalue_one(t)
    return t


def _require_no_eigenvalue_one(t: np.ndarray) -> None:
    eigs = np.linalg.eigvals(t)
    closest = float(np.abs(eigs - 1.0).min())
    if closest <= EIGENVALUE_ONE_TOL:
        raise DegenerateTransformError(
            f"Cayley image has an eigenvalue within {closest:.3e} of 1"
        )


def inverse_cayley(u) -> np.ndarray:
    """Recover the operator i (I - U)(I + U)^{-1} from its Cayley image."""
    u = as_operator(u)
    eye = np.eye(u.shape[0])
    return 1j * np.linalg.solve((eye + u).T, (eye - u).T).T


@dataclass(frozen=True)
class SelfAdjointPair:
    """A pair of Hermitian matrices with unitary Cayley transforms."""

    h: np.ndarray
    h0: np.ndarray

    def __post_init__(self):
        h = as_operator(self.h)
        h0 = as_operator(self.h0)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "h0", h0)
        if h.shape != h0.shape:
            raise ValueError("pair must share one dimension")
        if not (is_hermitian(h) and is_hermitian(h0)):
            raise ValueError("both matrices must be Hermitian")
        if not (is_unitary(cayley_sa(h), 1e-9) and is_unitary(cayley_sa(h0), 1e-9)):
            raise ValueError("Cayley transforms failed the unitarity check")

    @property
    def dim(self) -> int:
        return self.h.shape[0]

    def transforms(self) -> tuple[np.ndarray, np.ndarray]:
        return cayley_sa(self.h), cayley_sa(self.h0)

    def circle_path(self) -> PerturbationPath:
        u, u0 = self.transforms()
        return PerturbationPath.linear(u0, u - u0)


@dataclass(frozen=True)
class DissipativePair:
    """A pair of dissipative matrices whose Cayley images avoid eigenvalue 1."""

    l: np.ndarray
    l0: np.ndarray

    def __post_init__(self):
        l = as_operator(self.l)
        l0 = as_operator(self.l0)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "l0", l0)
        if l.shape != l0.shape:
            raise ValueError("pair must share one dimension")
        for x in (l, l0):
            imag_part = (x - x.conj().T) / 2j
            if float(np.linalg.eigvalsh(imag_part).min()) < -DISSIPATIVE_PSD_TOL:
                raise ValueError("both matrices must be dissipative")
        t, t0 = cayley_dissipative(l), cayley_dissipative(l0)
        if not (is_contraction(t) and is_contraction(t0)):
            raise ValueError("Cayley images failed the contraction check")

    @property
    def dim(self) -> int:
        return self.l.shape[0]

    def transforms(self) -> tuple[np.ndarray, np.ndarray]:
        return cayley_dissipative(self.l), cayley_dissipative(self.l0)

    def circle_path(self) -> PerturbationPath:
        t, t0 = self.transforms()
        return PerturbationPath.linear(t0, t - t0)


def _bridge(x: np.ndarray, x0: np.ndarray, s: float) -> np.ndarray:
    eye = 1j * np.eye(x.shape[0])
    xs = s * x0 + (1.0 - s) * x
    return (x + eye) @ np.linalg.solve(xs + eye, x0 + eye) - eye


def w_path(pair: SelfAdjointPair | DissipativePair, s: float) -> np.ndarray:
    """Interpolating operator whose Cayley image is the linear transform path.

    Checked on exit: the Cayley-type image of the returned operator matches
    (1 - s) C(X_0) + s C(X) within 1e-9, pinning the orientation W_0 = X_0,
    W_1 = X.
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError("path parameter outside [0, 1]")
    if isinstance(pair, SelfAdjointPair):
        x, x0 = pair.h, pair.h0
        c, c0 = pair.transforms()
    else:
        x, x0 = pair.l, pair.l0
        c, c0 = pair.transforms()
    w = _bridge(x, x0, s)
    eye = 1j * np.eye(w.shape[0])
    image = np.linalg.solve((eye + w).T, (eye - w).T).T
    target = (1.0 - s) * c0 + s * c
    if hs_norm(image - target) > 1e-9 * (1.0 + hs_norm(target)):
        raise ArithmeticError("interpolating operator failed the transform identity")
    return w


def _pipeline_for(
    path: PerturbationPath,
    max_power: int,
    grid: int,
    cfg: QuadConfig,
    degree: int | None = None,
    unitary_endpoints: bool = True,
) -> RealLineShift:
    return gamma_pipeline(
        path,
        grid=grid,
        max_power=max_power,
        cfg=cfg,
        degree=degree,
        require_unitary_endpoints=unitary_endpoints,
    )


def _verify_polynomial(
    kind: str,
    path: PerturbationPath,
    phi: TrigPolynomial,
    dim: int,
    grid: int,
    cfg: QuadConfig,
    seed: int | None,
    unitary_endpoints: bool,
) -> VerificationReport:
    if not phi.analytic:
        raise ValueError("the transform bridge applies to analytic polynomials")
    if phi.max_index > grid // 8:
        raise ValueError("polynomial degree too large for the configured grid")
    start = time.perf_counter()
    lhs = path.second_order_trace(phi)
    line = _pipeline_for(
        path, max(phi.max_index, 1), grid, cfg, unitary_endpoints=unitary_endpoints
    )
    rhs_a = line.pairing_second_derivative(phi)
    rhs_b = line.pairing_realline(mobius_polynomial_weight(phi))
    res_a = abs(lhs - rhs_a)
    res_ab = abs(rhs_a - rhs_b)
    passed = res_a <= CIRCLE_TOL * (1.0 + abs(lhs)) and res_ab <= REAL_LINE_TOL * (
        1.0 + abs(rhs_a)
    )
    return VerificationReport(
        kind=kind,
        lhs=lhs,
        rhs=rhs_a,
        residual=res_a,
        tol=CIRCLE_TOL,
        passed=passed,
        dim=dim,
        degree=phi.max_index,
        seed=seed,
        runtime=time.perf_counter() - start,
        extras={
            "rhs_realline": rhs_b,
            "residual_circle_vs_realline": res_ab,
            "realline_tol": REAL_LINE_TOL,
            "zero_integral_grid": line.diagnostics["zero_integral_grid"],
        },
    )


def verify_selfadjoint_formula(
    pair: SelfAdjointPair,
    phi: TrigPolynomial,
    grid: int = DEFAULT_QUAD.grid,
    cfg: QuadConfig = DEFAULT_QUAD,
    seed: int | None = None,
) -> VerificationReport:
    """Verify the self-adjoint trace identity along both routes.

    The left side lives on the circle through the transform bridge; the
    right side is computed (a) from the circle Fourier data of the pipeline
    output and (b) as a real-line integral of the pulled-back weight against
    xi.  Both residuals enter the verdict.
    """
    return _verify_polynomial(
        "cayley_sa",
        pair.circle_path(),
        phi,
        pair.dim,
        grid,
        cfg,
        seed,
        unitary_endpoints=True,
    )


def verify_dissipative_formula(
    pair: DissipativePair,
    phi: TrigPolynomial,
    grid: int = DEFAULT_QUAD.grid,
    cfg: QuadConfig = DEFAULT_QUAD,
    seed: int | None = None,
) -> VerificationReport:
    """Same pipeline as the self-adjoint case, over contraction transforms."""
    return _verify_polynomial(
        "cayley_diss",
        pair.circle_path(),
        phi,
        pair.dim,
        grid,
        cfg,
        seed,
        unitary_endpoints=False,
    )


def resolvent_pipeline(
    pair: SelfAdjointPair,
    grid: int = DEFAULT_QUAD.grid,
    cfg: QuadConfig = DEFAULT_QUAD,
    degree: int = RESOLVENT_DEGREE,
) -> RealLineShift:
    """Shift pipeline of a pair at resolvent-grade dilation degree.

    Build once and hand to :func:`verify_resolvent_formula` when checking
    several points z for the same pair.
    """
    return _pipeline_for(
        pair.circle_path(), max_power=degree, grid=grid, cfg=cfg, degree=degree
    )


def verify_resolvent_formula(
    pair: SelfAdjointPair,
    z: complex,
    grid: int = DEFAULT_QUAD.grid,
    cfg: QuadConfig = DEFAULT_QUAD,
    degree: int = RESOLVENT_DEGREE,
    tol: float = RESOLVENT_TOL,
    seed: int | None = None,
    line: RealLineShift | None = None,
) -> VerificationReport:
    """Verify the resolvent trace identity at a point with Im z < 0.

    Left side by direct matrix algebra,

        Tr{ (H-z)^{-1} - (H_0-z)^{-1} - X M X },
        X = (i + H_0)(H_0 - z)^{-1},  M = (H+i)^{-1} - (H_0+i)^{-1}

    (the two sign conventions for X's denominator agree because the factor
    appears squared); right side by real-line quadrature of the weight
    2 (1 + lam z) / (lam - z)^3 against xi.  The pulled-back symbol is a
    full analytic series whose modes decay like |tau|^{-k} with
    tau = (i - z)/(i + z), |tau| > 1, so the dilation ``degree`` controls
    the truncation tail; the default covers |tau| >= 2 at tolerance 1e-5.
    """
    z = complex(z)
    if z.imag >= 0:
        raise ValueError("the resolvent identity is stated for Im z < 0")
    start = time.perf_counter()
    tau = (1j - z) / (1j + z)
    h, h0 = pair.h, pair.h0
    eye = np.eye(pair.dim)
    rz = np.linalg.inv(h - z * eye)
    r0z = np.linalg.inv(h0 - z * eye)
    m = np.linalg.inv(h + 1j * eye) - np.linalg.inv(h0 + 1j * eye)
    x = (1j * eye + h0) @ np.linalg.inv(h0 - z * eye)
    lhs = complex(np.trace(rz - r0z - x @ m @ x))
    if line is None:
        line = resolvent_pipeline(pair, grid=grid, cfg=cfg, degree=degree)

    def weight(lam):
        lam = np.asarray(lam, dtype=np.complex128)
        return 2.0 * (1.0 + lam * z) / (lam - z) ** 3

    rhs = line.pairing_realline(weight)
    residual = abs(lhs - rhs)
    return VerificationReport(
        kind="cayley_resolvent",
        lhs=lhs,
        rhs=rhs,
        residual=residual,
        tol=tol,
        passed=residual <= tol * (1.0 + abs(lhs)),
        dim=pair.dim,
        degree=degree,
        seed=seed,
        runtime=time.perf_counter() - start,
        extras={"z": z, "tau_abs": abs(tau)},
    )
