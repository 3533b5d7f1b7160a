"""Second-order spectral shift functions on the circle, by two routes.

For a linear path the shift function eta satisfies

    Tr{ p(T_1) - p(T_0) - (d/ds) p(T_s)|_0 } = contour integral of p'' eta,

and its contour moments c_m have an exact quadrature form

    c_m = 1/(m+1) * int_0^1 Tr[ V (T_s^{m+1} - T_0^{m+1}) ] ds,

a polynomial in s, integrated exactly by Gauss-Legendre.  That moment route
is the authoritative representation: the class of eta modulo analytic terms
is determined by {c_m, m >= 0}.  Independently, eta has a pointwise
representation as an s-average of differences of semi-spectral cumulative
functions; it is an exact step function in the angle, so its Fourier data
can also be computed exactly and compared against the moments.

For a multiplicative path the analogous function eta~ is real valued and
unique up to an additive constant; its nonzero Fourier modes are

    d_r = 1/(i r) * int_0^1 Tr[ A (T_s^r - T_0^r) ] ds,   r != 0,

with adjoint powers for negative r, integrated adaptively (the integrand is
analytic but not polynomial in s).  The constant mode is fixed to zero by
convention.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass

import numpy as np

from .opcore import TrigPolynomial, hs_norm, is_unitary
from .paths import LINEAR, MULTIPLICATIVE, PerturbationPath
from .quadrature import QuadratureError, adaptive_gk15, gauss_legendre_01
from .report import VerificationReport
from .semispectral import SemiSpectralCDF, semispectral_cdf
from . import sampling

__all__ = [
    "QuadConfig",
    "StepFunction",
    "RealLineShift",
    "ShiftFunction",
    "PipelineError",
    "eta_moment_linear",
    "eta_pointwise_linear",
    "eta_tilde_moment_mult",
    "eta_tilde_moments_mult",
    "shift_step_representation",
    "verify_trace_formula_linear",
    "verify_trace_formula_mult",
    "quotient_bound_test",
    "gamma_pipeline",
    "mobius_polynomial_weight",
]

TRACE_TOL_LINEAR = 1e-8
TRACE_TOL_MULT = 1e-7
BOUND_SLACK = 1e-6


class PipelineError(RuntimeError):
    """The circle-to-line pipeline failed its internal zero-integral check."""


@dataclass(frozen=True)
class QuadConfig:
    """Quadrature configuration shared by the pointwise routes.

    ``s_nodes`` Gauss-Legendre nodes discretize the path average; the
    dilation degree is the highest integrated power plus ``degree_margin``;
    ``grid`` is the circle grid used by samplers and grid diagnostics;
    ``quad_tol``/``quad_max_depth`` drive the adaptive rule on
    multiplicative paths.
    """

    s_nodes: int = 32
    degree_margin: int = 2
    grid: int = 4096
    quad_tol: float = 1e-10
    quad_max_depth: int = 12

    def __post_init__(self):
        if self.s_nodes < 1 or self.grid < 256 or self.degree_margin < 0:
            raise ValueError("invalid quadrature configuration")
        if self.quad_tol <= 0 or self.quad_max_depth < 1:
            raise ValueError("invalid quadrature configuration")


DEFAULT_QUAD = QuadConfig()


class StepFunction:
    """Right-continuous complex step function on [0, 2pi] vanishing at 0.

    f(t) = sum of heights at angles <= t.  Because the jump data is explicit,
    integrals of f against circle harmonics are computed in closed form
    rather than by grid quadrature.
    """

    __slots__ = ("angles", "heights", "_prefix", "_prefix_rot")

    def __init__(self, angles, heights):
        angles = np.asarray(angles, dtype=np.float64)
        heights = np.asarray(heights, dtype=np.complex128)
        if angles.shape != heights.shape or angles.ndim != 1:
            raise ValueError("angles and heights must be matching 1-d arrays")
        order = np.argsort(angles, kind="stable")
        self.angles = angles[order]
        self.heights = heights[order]
        self._prefix = np.concatenate([[0.0], np.cumsum(self.heights)])
        self._prefix_rot = np.concatenate(
            [[0.0], np.cumsum(self.heights * np.exp(-1j * self.angles))]
        )

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        idx = np.searchsorted(self.angles, t, side="right")
        out = self._prefix[idx]
        return out if out.ndim else complex(out)

    def rotated_prefix(self, t):
        """sum of h_j e^{-i theta_j} over jumps with theta_j <= t."""
        t = np.asarray(t, dtype=np.float64)
        idx = np.searchsorted(self.angles, t, side="right")
        out = self._prefix_rot[idx]
        return out if out.ndim else complex(out)

    def time_fourier(self, k: int) -> complex:
        """Exact integral of e^{ikt} f(t) over [0, 2pi]."""
        if k == 0:
            return complex(np.sum(self.heights * (2.0 * np.pi - self.angles)))
        return complex(
            np.sum(self.heights * (1.0 - np.exp(1j * k * self.angles)) / (1j * k))
        )

    def contour_moment(self, m: int) -> complex:
        """Exact contour integral of z^m f against dz on the circle."""
        return 1j * self.time_fourier(m + 1)

    @property
    def total_variation(self) -> float:
        return float(np.abs(self.heights).sum())


def _cdf_heights(direction: np.ndarray, cdf: SemiSpectralCDF) -> np.ndarray:
    # Tr[direction @ J_j] for every jump block, vectorized
    return np.einsum("ab,jba->j", direction, cdf.blocks)


def shift_step_representation(
    path: PerturbationPath,
    max_power: int,
    cfg: QuadConfig = DEFAULT_QUAD,
    degree: int | None = None,
) -> StepFunction:
    """Pointwise shift function of a path as an exact step function.

    Encodes s-averaged differences of semi-spectral cumulative functions:
    the base CDF enters with weight one, each Gauss-Legendre node s_i with
    weight -w_i, and the heights are traces against the path direction.  The
    dilation degree defaults to ``max_power + cfg.degree_margin`` and bounds
    the Fourier modes that are faithful to the path.
    """
    n = degree if degree is not None else max_power + cfg.degree_margin
    n = max(n, 1)
    nodes, weights = gauss_legendre_01(cfg.s_nodes)
    direction = path.direction
    angles = []
    heights = []
    base_cdf = semispectral_cdf(path.base, n)
    angles.append(base_cdf.angles)
    heights.append(_cdf_heights(direction, base_cdf))
    for s_i, w_i in zip(nodes, weights):
        cdf_i = semispectral_cdf(path.at(float(s_i)), n)
        angles.append(cdf_i.angles)
        heights.append(-w_i * _cdf_heights(direction, cdf_i))
    return StepFunction(np.concatenate(angles), np.concatenate(heights))


def eta_moment_linear(path: PerturbationPath, m: int) -> complex:
    """Contour moment c_m of the linear-path shift function, exactly.

    The s-integrand is a polynomial of degree m+1, so ceil((m+2)/2)
    Gauss-Legendre nodes integrate it exactly; the result is reproducible
    bit for bit.
    """
    if path.kind != LINEAR:
        raise ValueError("moment route is defined for linear paths")
    if m < 0:
        raise ValueError("contour moments are indexed by m >= 0")
    nodes, weights = gauss_legendre_01((m + 3) // 2)
    t0 = path.base
    v = path.direction
    base_pow = np.linalg.matrix_power(t0, m + 1)
    total = 0.0 + 0.0j
    for s_i, w_i in zip(nodes, weights):
        ts = path.at(float(s_i))
        total += w_i * np.trace(v @ (np.linalg.matrix_power(ts, m + 1) - base_pow))
    return complex(total / (m + 1))


def eta_pointwise_linear(
    path: PerturbationPath,
    t: float,
    degree: int,
    s_nodes: int,
) -> complex:
    """Pointwise value of the linear-path shift function at angle t."""
    if path.kind != LINEAR:
        raise ValueError("pointwise route is defined for linear paths")
    cfg = QuadConfig(s_nodes=s_nodes)
    step = shift_step_representation(path, max_power=degree, cfg=cfg, degree=degree)
    return complex(step(t))


def _mult_fourier_integrand(path: PerturbationPath, rs: list[int]):
    t0 = path.base
    a = path.direction
    base = {r: _signed_power(t0, r) for r in rs}

    def f(s: float) -> np.ndarray:
        ts = path.at(s)
        return np.array(
            [np.trace(a @ (_signed_power(ts, r) - base[r])) for r in rs],
            dtype=np.complex128,
        )

    return f


def _signed_power(t: np.ndarray, r: int) -> np.ndarray:
    if r >= 0:
        return np.linalg.matrix_power(t, r)
    return np.linalg.matrix_power(t.conj().T, -r)


def eta_tilde_moments_mult(
    path: PerturbationPath,
    rs,
    tol: float = DEFAULT_QUAD.quad_tol,
    max_depth: int = DEFAULT_QUAD.quad_max_depth,
) -> dict[int, complex]:
    """Fourier modes d_r, r != 0, of the multiplicative shift function.

    All requested modes are integrated in one adaptive pass so the path
    exponentials are shared.  Quadrature failure propagates as
    :class:`~specshift.quadrature.QuadratureError` with the achieved
    estimate attached.
    """
    if path.kind != MULTIPLICATIVE:
        raise ValueError("these Fourier modes belong to multiplicative paths")
    rs = [int(r) for r in rs]
    if any(r == 0 for r in rs):
        raise ValueError("the constant mode is not determined; it is fixed to 0")
    if not rs:
        return {}
    value, _ = adaptive_gk15(_mult_fourier_integrand(path, rs), 0.0, 1.0, tol, max_depth)
    return {r: complex(val / (1j * r)) for r, val in zip(rs, value)}


def eta_tilde_moment_mult(
    path: PerturbationPath,
    r: int,
    tol: float = DEFAULT_QUAD.quad_tol,
    max_depth: int = DEFAULT_QUAD.quad_max_depth,
) -> complex:
    """Single Fourier mode d_r of the multiplicative shift function."""
    return eta_tilde_moments_mult(path, [r], tol=tol, max_depth=max_depth)[r]


class ShiftFunction:
    """Cached view of a path's shift function: moments plus a sampler.

    Caches are append-only maps guarded by a lock; reads are safe from any
    thread.
    """

    def __init__(self, path: PerturbationPath, cfg: QuadConfig = DEFAULT_QUAD):
        self.path = path
        self.cfg = cfg
        self._moments: dict[int, complex] = {}
        self._step: StepFunction | None = None
        self._step_power = -1
        self._lock = threading.Lock()

    def moment(self, m: int) -> complex:
        with self._lock:
            if m not in self._moments:
                if self.path.kind == LINEAR:
                    self._moments[m] = eta_moment_linear(self.path, m)
                else:
                    self._moments[m] = (
                        0.0 + 0.0j
                        if m == 0
                        else eta_tilde_moments_mult(
                            self.path, [m], self.cfg.quad_tol, self.cfg.quad_max_depth
                        )[m]
                    )
            return self._moments[m]

    def step(self, max_power: int) -> StepFunction:
        with self._lock:
            if self._step is None or self._step_power < max_power:
                self._step = shift_step_representation(self.path, max_power, self.cfg)
                self._step_power = max_power
            return self._step

    def pointwise(self, t, max_power: int = 6):
        return self.step(max_power)(t)


def verify_trace_formula_linear(
    path: PerturbationPath,
    p: TrigPolynomial,
    tol: float = TRACE_TOL_LINEAR,
    seed: int | None = None,
) -> VerificationReport:
    """Check the linear-path trace identity for an analytic polynomial.

    The left side is assembled directly from matrix powers; the right side
    pairs p'' with the moment-route shift data.  Failures become report
    verdicts, never exceptions.
    """
    if not p.analytic:
        raise ValueError("linear trace identity applies to analytic polynomials")
    start = time.perf_counter()
    lhs = path.second_order_trace(p)
    rhs = 0.0 + 0.0j
    for r, c in p:
        if r >= 2:
            rhs += c * r * (r - 1) * eta_moment_linear(path, r - 2)
    residual = abs(lhs - rhs)
    scale = 1.0 + abs(lhs)
    return VerificationReport(
        kind="linear",
        lhs=lhs,
        rhs=rhs,
        residual=residual,
        tol=tol,
        passed=residual <= tol * scale,
        dim=path.dim,
        degree=p.max_index,
        seed=seed,
        runtime=time.perf_counter() - start,
    )


def verify_trace_formula_mult(
    path: PerturbationPath,
    p: TrigPolynomial,
    tol: float = TRACE_TOL_MULT,
    cfg: QuadConfig = DEFAULT_QUAD,
    seed: int | None = None,
) -> VerificationReport:
    """Check the multiplicative-path trace identity for a trig polynomial.

    The constant coefficient is irrelevant to both sides.  Quadrature
    failure is recorded in the report rather than raised.
    """
    start = time.perf_counter()
    lhs = path.second_order_trace(p)
    rs = [r for r, _ in p if r != 0]
    extras: dict = {}
    try:
        modes = eta_tilde_moments_mult(path, rs, cfg.quad_tol, cfg.quad_max_depth)
        rhs = sum(p.coeff(r) * (-(r * r)) * modes[r] for r in rs)
        quad_ok = True
    except QuadratureError as exc:
        rhs = complex(np.nan)
        quad_ok = False
        extras["quadrature_error"] = str(exc)
        extras["quadrature_estimate"] = exc.estimate
    residual = abs(lhs - rhs) if quad_ok else float("inf")
    scale = 1.0 + abs(lhs)
    return VerificationReport(
        kind="mult",
        lhs=lhs,
        rhs=rhs,
        residual=residual,
        tol=tol,
        passed=quad_ok and residual <= tol * scale,
        dim=path.dim,
        degree=max((abs(r) for r, _ in p), default=0),
        seed=seed,
        runtime=time.perf_counter() - start,
        extras=extras,
    )


def quotient_bound_test(
    path: PerturbationPath,
    trials: int,
    max_deg: int,
    seed: int,
    slack: float = BOUND_SLACK,
) -> VerificationReport:
    """Test the quotient-norm bound: |pairing(f, eta)| <= sup|f| ||dir||_2^2 / 2.

    Random analytic polynomials f of degree at most ``max_deg`` are paired
    with the shift data through its contour moments.  The sup norm of f is a
    2048-point grid estimate, so the inequality is asserted with an explicit
    ``slack * ||dir||_2^2`` cushion; the report carries the worst ratio seen.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    dir_sq = hs_norm(path.direction) ** 2
    if path.kind == LINEAR:
        moments = np.array([eta_moment_linear(path, m) for m in range(max_deg + 1)])

        def pairing(coeffs: np.ndarray) -> complex:
            return complex(coeffs @ moments)

    else:
        modes = eta_tilde_moments_mult(path, list(range(1, max_deg + 2)))
        stacked = np.array([modes[k] for k in range(1, max_deg + 2)])

        def pairing(coeffs: np.ndarray) -> complex:
            return complex(1j * (coeffs @ stacked))

    max_ratio = 0.0
    worst_excess = -np.inf
    for _ in range(trials):
        coeffs = sampling.random_coefficients(rng, max_deg + 1)
        f = TrigPolynomial({k: c for k, c in enumerate(coeffs)})
        sup = f.sup_norm_estimate()
        paired = abs(pairing(coeffs))
        bound = 0.5 * sup * dir_sq
        worst_excess = max(worst_excess, paired - bound - slack * dir_sq)
        if bound > 0:
            max_ratio = max(max_ratio, paired / bound)
    passed = worst_excess <= 0 and (dir_sq == 0 or max_ratio <= 1.0 + slack)
    return VerificationReport(
        kind=f"quotient_bound_{path.kind}",
        lhs=complex(max_ratio),
        rhs=complex(1.0),
        residual=max(0.0, max_ratio - 1.0),
        tol=slack,
        passed=passed,
        dim=path.dim,
        degree=max_deg,
        seed=seed,
        runtime=time.perf_counter() - start,
        extras={"max_ratio": max_ratio, "trials": trials},
    )


def mobius_polynomial_weight(phi: TrigPolynomial):
    """Real-line weight (d/dlam){(1+lam^2) psi'(lam)} for psi = phi o Mobius.

    Chain rule through m(lam) = (i-lam)/(i+lam), with m' = -2i/(i+lam)^2 and
    m'' = 4i/(i+lam)^3.  Vectorized over lam.
    """
    dphi = phi.derivative()
    d2phi = dphi.derivative()

    def weight(lam):
        lam = np.asarray(lam, dtype=np.complex128)
        denom = 1j + lam
        m = (1j - lam) / denom
        m1 = -2j / denom**2
        m2 = 4j / denom**3
        p1 = dphi(m)
        psi1 = p1 * m1
        psi2 = d2phi(m) * m1 * m1 + p1 * m2
        return 2.0 * lam * psi1 + (1.0 + lam * lam) * psi2

    return weight


class RealLineShift:
    """Shift data transported from the circle to the real line.

    Wraps the step representation eta of a linear pair, subtracts the
    analytic correction z * c (c being the first Fourier coefficient of
    eta), integrates once to get a continuous circle function eta~, and
    exposes the real-line pullback xi(lam) = eta~(2 arctan lam) / 2.  All
    pairings are computed jump-aware: exactly for Fourier data, by
    per-piece Gauss rules for general real-line weights.
    """

    def __init__(
        self,
        step: StepFunction,
        grid: int,
        diagnostics: dict | None = None,
    ):
        self.step = step
        self.grid = int(grid)
        self.mean_mode = step.time_fourier(-1) / (2.0 * np.pi)
        self.diagnostics = dict(diagnostics or {})
        self._run_zero_check()

    # -- pointwise values ------------------------------------------------

    def eta(self, t):
        return self.step(t)

    def gamma(self, t):
        t = np.asarray(t, dtype=np.float64)
        out = self.step(t) - np.exp(1j * t) * self.mean_mode
        return out if out.ndim else complex(out)

    def running_integral(self, t):
        """G(t) = integral over [0, t] of e^{-is} gamma(s) ds, exactly."""
        t = np.asarray(t, dtype=np.float64)
        out = (
            1j * (np.exp(-1j * t) * self.step(t) - self.step.rotated_prefix(t))
            - self.mean_mode * t
        )
        return out if out.ndim else complex(out)

    def eta_tilde(self, t):
        t = np.asarray(t, dtype=np.float64)
        out = -1j * np.exp(-1j * t) * self.gamma(t) + self.running_integral(t)
        return out if out.ndim else complex(out)

    def xi(self, lam):
        """Real-line pullback xi(lam) = eta~ at the angle 2 arctan(lam), halved."""
        lam = np.asarray(lam, dtype=np.float64)
        t = 2.0 * np.arctan(lam)
        t = np.where(t < 0.0, t + 2.0 * np.pi, t)
        out = 0.5 * self.eta_tilde(t)
        return out if out.ndim else complex(out)

    # -- pairings ----------------------------------------------------------

    def eta_time_fourier(self, k: int) -> complex:
        return self.step.time_fourier(k)

    def pairing_second_derivative(self, phi: TrigPolynomial) -> complex:
        """Circle-side value of the pairing of (d^2/dt^2) phi(e^{it}) with eta~.

        Integration by parts (using that the full-period integral of
        e^{-is} gamma vanishes identically) turns the pairing into exact
        Fourier data of the step function: the r-th mode of eta~ equals
        -i (r-1)/r times the (r-1)-st time-Fourier coefficient of eta.
        """
        if not phi.analytic:
            raise ValueError("circle-side pairing applies to analytic polynomials")
        total = 0.0 + 0.0j
        for r, c in phi:
            if r >= 2:
                total += c * 1j * r * (r - 1) * self.step.time_fourier(r - 1)
        return complex(total)

    def _integration_nodes(self, nodes_per_piece: int = 16, coarse: int = 64):
        breaks = np.unique(
            np.concatenate(
                [
                    self.step.angles,
                    np.linspace(0.0, 2.0 * np.pi, coarse + 1),
                    [np.pi],
                ]
            )
        )
        x, w = np.polynomial.legendre.leggauss(nodes_per_piece)
        a = breaks[:-1]
        b = breaks[1:]
        keep = (b - a) > 1e-14
        a, b = a[keep], b[keep]
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        tt = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        ww = (half[:, None] * w[None, :]).ravel()
        return tt, ww

    def pairing_realline(self, weight, nodes_per_piece: int = 16) -> complex:
        """Integral over the real line of weight(lam) xi(lam) d lam.

        Evaluated through the half-angle substitution lam = tan(t/2) with
        the Jacobian (1 + lam^2)/2 applied analytically; the t-integration
        is split at every jump angle (and at pi, where lam blows up) so each
        piece is smooth and a fixed Gauss rule is accurate.
        """
        tt, ww = self._integration_nodes(nodes_per_piece)
        lam = np.tan(0.5 * tt)
        vals = np.asarray(weight(lam), dtype=np.complex128)
        xi_vals = 0.5 * self.eta_tilde(tt)
        return complex(np.sum(ww * vals * xi_vals * 0.5 * (1.0 + lam * lam)))

    # -- internal checks ---------------------------------------------------

    def _run_zero_check(self):
        """Grid diagnostic: the full-period integral of e^{-it} gamma is 0.

        The exact construction already forces it; the composite grid rule on
        midpoint samples must agree within a resolution-driven tolerance or
        the sampler and the step data are inconsistent.
        """
        g = self.grid
        t = (np.arange(g) + 0.5) * (2.0 * np.pi / g)
        quad = np.sum(np.exp(-1j * t) * self.gamma(t)) * (2.0 * np.pi / g)
        grid_tol = (2.0 * np.pi / g) * (
            self.step.total_variation + (1.0 + 2.0 * np.pi) * abs(self.mean_mode)
        )
        grid_tol = max(grid_tol, 1e-12)
        self.diagnostics["zero_integral_grid"] = abs(quad)
        self.diagnostics["zero_integral_tol"] = grid_tol
        mean_grid = np.sum(np.exp(-1j * t) * self.step(t)) / g
        self.diagnostics["mean_mode_grid_gap"] = abs(mean_grid - self.mean_mode)
        if abs(quad) > 10.0 * grid_tol:
            raise PipelineError(
                f"zero-integral grid check failed: {abs(quad):.3e} > "
                f"10 * {grid_tol:.3e}"
            )


def gamma_pipeline(
    path: PerturbationPath,
    grid: int = DEFAULT_QUAD.grid,
    max_power: int = 8,
    cfg: QuadConfig | None = None,
    degree: int | None = None,
    require_unitary_endpoints: bool = True,
) -> RealLineShift:
    """Transport a linear pair's shift function to the real line.

    Intended for paths between Cayley transforms: endpoints are expected to
    be unitary (set ``require_unitary_endpoints=False`` for contraction
    pairs coming from dissipative operators).  ``max_power`` bounds the
    polynomial degree downstream consumers may pair against; ``degree``
    overrides the dilation degree directly for consumers that integrate
    non-polynomial weights.
    """
    if path.kind != LINEAR:
        raise ValueError("the circle-to-line pipeline runs over linear paths")
    if grid < 256:
        raise ValueError("grid must have at least 256 points")
    if require_unitary_endpoints:
        if not (is_unitary(path.base) and is_unitary(path.at(1.0))):
            raise ValueError("path endpoints must be unitary")
    base_cfg = cfg if cfg is not None else DEFAULT_QUAD
    use_cfg = QuadConfig(
        s_nodes=base_cfg.s_nodes,
        degree_margin=base_cfg.degree_margin,
        grid=max(grid, 256),
        quad_tol=base_cfg.quad_tol,
        quad_max_depth=base_cfg.quad_max_depth,
    )
    step = shift_step_representation(path, max_power, cfg=use_cfg, degree=degree)
    return RealLineShift(step, grid=grid)
