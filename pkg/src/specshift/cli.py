"""Campaign runner: seeded randomized verification of every identity in the
toolkit, sample emission for the shift functions, and report aggregation.

Subcommands: ``verify``, ``eta``, ``diagnose``, ``report``.  Configuration
comes from an optional JSON file plus flags (flags win); campaigns are
deterministic given the seed, and summary CSVs are byte-stable.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import sampling
from .cayley import (
    DissipativePair,
    SelfAdjointPair,
    verify_dissipative_formula,
    verify_selfadjoint_formula,
)
from .dilation import hs_difference_schaffer, n_dilation, schaffer_window
from .opcore import TrigPolynomial, hs_norm, is_unitary
from .paths import PerturbationPath
from .report import VerificationReport, write_csv, write_reports_json
from .shift import (
    gamma_pipeline,
    shift_step_representation,
    verify_trace_formula_linear,
    verify_trace_formula_mult,
    quotient_bound_test,
)
from .truncate import (
    DIAGNOSTIC_FIELDS,
    build_projections,
    reduction_diagnostics,
    truncation_gap,
)

KINDS = ("linear", "mult", "cayley_sa", "cayley_diss", "dilation", "truncate")

def _num(x) -> str:
    return format(float(x), ".17g")


@dataclass
class Tolerances:
    trace_formula: float = 1e-8
    trace_formula_mult: float = 1e-7
    route_agreement: float = 1e-6
    bound_slack: float = 1e-6
    circle: float = 1e-6
    realline: float = 1e-4

    def validate(self):
        for name, value in asdict(self).items():
            if value <= 0:
                raise ValueError(f"tolerance {name} must be positive")


@dataclass
class CampaignConfig:
    kind: str = "linear"
    seed: int = 0
    trials: int = 50
    dims: list[int] = field(default_factory=lambda: [2, 3, 4, 6])
    degrees: list[int] = field(default_factory=lambda: [2, 3, 4, 5, 6])
    grid: int = 4096
    out: str = "specshift-out"
    zero_direction: bool = False
    workers: int = 1
    tolerances: Tolerances = field(default_factory=Tolerances)

    def validate(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.dims or any(d < 1 for d in self.dims):
            raise ValueError("dims must be positive")
        if not self.degrees or any(d < 0 for d in self.degrees):
            raise ValueError("degrees must be nonnegative")
        if self.grid < 256:
            raise ValueError("grid must be at least 256")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        self.tolerances.validate()

    @classmethod
    def from_sources(cls, args: argparse.Namespace) -> "CampaignConfig":
        cfg = cls()
        if getattr(args, "config", None):
            with open(args.config) as fh:
                data = json.load(fh)
            tols = data.pop("tolerances", {})
            for key, value in data.items():
                if not hasattr(cfg, key):
                    raise ValueError(f"unknown config key {key!r}")
                setattr(cfg, key, value)
            for key, value in tols.items():
                if not hasattr(cfg.tolerances, key):
                    raise ValueError(f"unknown tolerance {key!r}")
                setattr(cfg.tolerances, key, float(value))
        for key in ("kind", "seed", "trials", "grid", "out", "workers"):
            value = getattr(args, key, None)
            if value is not None:
                setattr(cfg, key, value)
        if getattr(args, "dims", None):
            cfg.dims = [int(x) for x in args.dims.split(",")]
        if getattr(args, "degrees", None):
            cfg.degrees = [int(x) for x in args.degrees.split(",")]
        if getattr(args, "zero_direction", False):
            cfg.zero_direction = True
        cfg.validate()
        return cfg


def _trial_rng(master: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master, index]))


def _pick(rng: np.random.Generator, items) -> int:
    return int(items[int(rng.integers(len(items)))])


# --- per-kind trial bodies -------------------------------------------------


def _trial_linear(cfg: CampaignConfig, i: int) -> VerificationReport:
    rng = _trial_rng(cfg.seed, i)
    dim = _pick(rng, cfg.dims)
    if cfg.zero_direction:
        path = PerturbationPath.linear(sampling.random_contraction(rng, dim), np.zeros((dim, dim)))
    else:
        path = sampling.random_linear_path(rng, dim)
    deg = _pick(rng, cfg.degrees)
    p = sampling.random_analytic_polynomial(rng, deg)
    rep = verify_trace_formula_linear(path, p, tol=cfg.tolerances.trace_formula, seed=i)
    return rep


def _trial_mult(cfg: CampaignConfig, i: int) -> VerificationReport:
    rng = _trial_rng(cfg.seed, i)
    dim = _pick(rng, cfg.dims)
    if cfg.zero_direction:
        path = PerturbationPath.multiplicative(
            sampling.random_contraction(rng, dim), np.zeros((dim, dim))
        )
    else:
        path = sampling.random_multiplicative_path(rng, dim)
    deg = max(_pick(rng, cfg.degrees), 1)
    p = sampling.random_trig_polynomial(rng, deg)
    return verify_trace_formula_mult(path, p, tol=cfg.tolerances.trace_formula_mult, seed=i)


def _trial_cayley_sa(cfg: CampaignConfig, i: int) -> VerificationReport:
    rng = _trial_rng(cfg.seed, i)
    dim = _pick(rng, cfg.dims)
    h0 = sampling.random_hermitian(rng, dim)
    h = h0 if cfg.zero_direction else sampling.random_hermitian(rng, dim)
    pair = SelfAdjointPair(h, h0)
    deg = max(_pick(rng, cfg.degrees), 2)
    phi = sampling.random_analytic_polynomial(rng, deg)
    return verify_selfadjoint_formula(pair, phi, grid=cfg.grid, seed=i)


def _trial_cayley_diss(cfg: CampaignConfig, i: int) -> VerificationReport:
    rng = _trial_rng(cfg.seed, i)
    dim = _pick(rng, cfg.dims)
    l0 = sampling.random_dissipative(rng, dim)
    l = l0 if cfg.zero_direction else sampling.random_dissipative(rng, dim)
    pair = DissipativePair(l, l0)
    deg = max(_pick(rng, cfg.degrees), 2)
    phi = sampling.random_analytic_polynomial(rng, deg)
    return verify_dissipative_formula(pair, phi, grid=cfg.grid, seed=i)


def _trial_dilation(cfg: CampaignConfig, i: int) -> VerificationReport:
    rng = _trial_rng(cfg.seed, i)
    start = time.perf_counter()
    dim = _pick(rng, cfg.dims)
    t = sampling.random_contraction(rng, dim)
    t0 = sampling.random_contraction(rng, dim)
    degree = max(_pick(rng, cfg.degrees), 1)
    dil = n_dilation(t, degree)
    eye = np.eye(dil.unitary.shape[0])
    unitarity = hs_norm(dil.unitary.conj().T @ dil.unitary - eye)
    compression = max(
        hs_norm(dil.compression(k) - np.linalg.matrix_power(t, k)) for k in range(degree + 1)
    )
    overshoot = hs_norm(
        dil.compression(degree + 1) - np.linalg.matrix_power(t, degree + 1)
    )
    closed = hs_difference_schaffer(t, t0)
    k_win = max(degree, 1)
    windowed = hs_norm(
        schaffer_window(t, k_win).to_dense() - schaffer_window(t0, k_win).to_dense()
    )
    residual = abs(closed - windowed)
    negcontrol_ok = is_unitary(t, 1e-6) or overshoot > 1e-8
    passed = unitarity <= 1e-9 and compression <= 1e-9 and residual <= 1e-10 and negcontrol_ok
    return VerificationReport(
        kind="dilation",
        lhs=complex(closed),
        rhs=complex(windowed),
        residual=residual,
        tol=1e-10,
        passed=passed,
        dim=dim,
        degree=degree,
        seed=i,
        runtime=time.perf_counter() - start,
        extras={
            "unitarity": unitarity,
            "compression": compression,
            "overshoot": overshoot,
        },
    )


def _trial_truncate(cfg: CampaignConfig, i: int) -> VerificationReport:
    rng = _trial_rng(cfg.seed, i)
    start = time.perf_counter()
    dim = max(_pick(rng, cfg.dims), 2)
    n0 = 0.8 * sampling.random_normal_contraction(rng, dim)
    v = 0.05 * sampling.complex_gaussian(rng, dim)
    a = sampling.random_hermitian(rng, dim, cap=1.0)
    ranks = sorted(set([max(1, dim // 2), dim]))
    seq = build_projections(n0, ranks, rotate=True, seed=i)
    rows = reduction_diagnostics(seq, n0, v, a)
    bound_ok = all(
        row["exp_remainder_gap"] <= row["exp_remainder_bound"] + 1e-10 for row in rows
    )
    base = n0 + v
    scale = 1.0 / max(1.0, np.linalg.norm(base, 2) * 1.01)
    path = PerturbationPath.multiplicative(scale * base, a)
    deg = max(_pick(rng, cfg.degrees), 1)
    gaps = truncation_gap(seq, path, TrigPolynomial({deg: 1.0}))
    full_gap = gaps[-1]["gap"]
    passed = bound_ok and full_gap <= 1e-12
    return VerificationReport(
        kind="truncate",
        lhs=complex(full_gap),
        rhs=0.0,
        residual=full_gap,
        tol=1e-12,
        passed=passed,
        dim=dim,
        degree=deg,
        seed=i,
        runtime=time.perf_counter() - start,
        extras={"bound_ok": bound_ok, "first_gap": gaps[0]["gap"]},
    )


_TRIALS = {
    "linear": _trial_linear,
    "mult": _trial_mult,
    "cayley_sa": _trial_cayley_sa,
    "cayley_diss": _trial_cayley_diss,
    "dilation": _trial_dilation,
    "truncate": _trial_truncate,
}


def run_campaign(cfg: CampaignConfig) -> tuple[int, list[VerificationReport]]:
    """Run the configured suite; write summary.csv and reports.json.

    Returns (exit_status, reports): 0 when every verdict passes, 1 otherwise.
    """
    body = _TRIALS[cfg.kind]
    indices = range(cfg.trials)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            reports = list(pool.map(lambda i: body(cfg, i), indices))
    else:
        reports = [body(cfg, i) for i in indices]
    # quotient-bound reports ride along with linear campaigns
    if cfg.kind == "linear" and not cfg.zero_direction:
        rng = _trial_rng(cfg.seed, cfg.trials)
        path = sampling.random_linear_path(rng, _pick(rng, cfg.dims))
        reports.append(
            quotient_bound_test(
                path,
                trials=min(cfg.trials * 5, 500),
                max_deg=max(cfg.degrees),
                seed=cfg.seed,
                slack=cfg.tolerances.bound_slack,
            )
        )
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "summary.csv", reports)
    write_reports_json(out / "reports.json", reports)
    with open(out / "config.json", "w") as fh:
        data = asdict(cfg)
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")
    status = 0 if all(r.passed for r in reports) else 1
    return status, reports


def emit_shift_samples(cfg: CampaignConfig) -> Path:
    """Write pointwise shift samples for external plotting.

    Circle kinds produce rows (t, re_eta, im_eta) on a uniform closed grid of
    ``grid`` rows including both endpoints; transform kinds produce
    (lambda, re_xi, im_xi) on the half-angle pullback of a midpoint grid.
    """
    rng = _trial_rng(cfg.seed, 0)
    dim = _pick(rng, cfg.dims)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path_file = out / "shift_samples.csv"
    max_deg = max(cfg.degrees)
    if cfg.kind in ("linear", "mult"):
        if cfg.kind == "linear":
            path = (
                PerturbationPath.linear(
                    sampling.random_contraction(rng, dim), np.zeros((dim, dim))
                )
                if cfg.zero_direction
                else sampling.random_linear_path(rng, dim)
            )
        else:
            path = (
                PerturbationPath.multiplicative(
                    sampling.random_contraction(rng, dim), np.zeros((dim, dim))
                )
                if cfg.zero_direction
                else sampling.random_multiplicative_path(rng, dim)
            )
        step = shift_step_representation(path, max_power=max_deg)
        t = np.linspace(0.0, 2.0 * np.pi, cfg.grid)
        vals = step(t)
        header = "t,re_eta,im_eta"
        cols = (t, vals.real, vals.imag)
    elif cfg.kind in ("cayley_sa", "cayley_diss"):
        if cfg.kind == "cayley_sa":
            pair = SelfAdjointPair(
                sampling.random_hermitian(rng, dim), sampling.random_hermitian(rng, dim)
            )
            unitary_endpoints = True
        else:
            pair = DissipativePair(
                sampling.random_dissipative(rng, dim), sampling.random_dissipative(rng, dim)
            )
            unitary_endpoints = False
        line = gamma_pipeline(
            pair.circle_path(),
            grid=cfg.grid,
            max_power=max_deg,
            require_unitary_endpoints=unitary_endpoints,
        )
        t = (np.arange(cfg.grid) + 0.5) * (2.0 * np.pi / cfg.grid)
        lam = np.tan(0.5 * t)
        vals = 0.5 * line.eta_tilde(t)
        header = "lambda,re_xi,im_xi"
        cols = (lam, vals.real, vals.imag)
    else:
        raise ValueError(f"kind {cfg.kind!r} does not emit shift samples")
    with open(path_file, "w") as fh:
        fh.write(header + "\n")
        for row in zip(*cols):
            fh.write(",".join(_num(x) for x in row) + "\n")
    return path_file


def run_diagnose(cfg: CampaignConfig) -> Path:
    """Write per-rank truncation diagnostics to CSV (one row per rank)."""
    rng = _trial_rng(cfg.seed, 0)
    dim = max(max(cfg.dims), 2)
    n0 = 0.8 * sampling.random_normal_contraction(rng, dim)
    v = np.zeros((dim, dim)) if cfg.zero_direction else 0.05 * sampling.complex_gaussian(rng, dim)
    a = np.zeros((dim, dim)) if cfg.zero_direction else sampling.random_hermitian(rng, dim, cap=1.0)
    ranks = sorted(set(list(range(1, dim + 1, max(1, dim // 4))) + [dim]))
    seq = build_projections(n0, ranks, rotate=True, seed=cfg.seed)
    rows = reduction_diagnostics(seq, n0, v, a)
    base = n0 + v
    scale = 1.0 / max(1.0, np.linalg.norm(base, 2) * 1.01)
    path = PerturbationPath.multiplicative(scale * base, a)
    gaps = truncation_gap(seq, path, TrigPolynomial({max(cfg.degrees): 1.0}))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    table = out / "truncation_diagnostics.csv"
    with open(table, "w") as fh:
        fh.write(",".join(DIAGNOSTIC_FIELDS) + ",gap\n")
        for row, gap in zip(rows, gaps):
            fh.write(
                ",".join(_num(row[k]) for k in DIAGNOSTIC_FIELDS)
                + ","
                + _num(gap["gap"])
                + "\n"
            )
    return table


def run_report(cfg: CampaignConfig) -> int:
    """Aggregate a campaign directory into summary.json; echo per-kind stats."""
    out = Path(cfg.out)
    reports_file = out / "reports.json"
    if not reports_file.exists():
        print(f"no reports.json under {out}", file=sys.stderr)
        return 2
    with open(reports_file) as fh:
        entries = json.load(fh)
    by_kind: dict[str, dict] = {}
    for entry in entries:
        slot = by_kind.setdefault(
            entry["kind"], {"count": 0, "failed": 0, "max_residual": 0.0}
        )
        slot["count"] += 1
        slot["failed"] += entry["verdict"] != "pass"
        if np.isfinite(entry["residual"]):
            slot["max_residual"] = max(slot["max_residual"], entry["residual"])
    summary = {"kinds": by_kind, "total": len(entries)}
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True)
        fh.write("\n")
    for kind, slot in sorted(by_kind.items()):
        print(
            f"{kind}: {slot['count'] - slot['failed']}/{slot['count']} pass, "
            f"max residual {slot['max_residual']:.3e}"
        )
    return 0 if all(slot["failed"] == 0 for slot in by_kind.values()) else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specshift",
        description="verification campaigns for second-order spectral shift identities",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in (
        ("verify", "run a randomized verification campaign"),
        ("eta", "emit pointwise shift-function samples"),
        ("diagnose", "emit truncation diagnostics tables"),
        ("report", "aggregate an existing campaign directory"),
    ):
        cmd = sub.add_parser(name, help=desc)
        cmd.add_argument("--config", help="JSON config file")
        cmd.add_argument("--seed", type=int)
        cmd.add_argument("--kind", choices=KINDS)
        cmd.add_argument("--trials", type=int)
        cmd.add_argument("--dims", help="comma-separated dimensions")
        cmd.add_argument("--degrees", help="comma-separated polynomial degrees")
        cmd.add_argument("--grid", type=int)
        cmd.add_argument("--out", help="output directory")
        cmd.add_argument("--workers", type=int)
        cmd.add_argument("--zero-direction", dest="zero_direction", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = CampaignConfig.from_sources(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "verify":
            status, reports = run_campaign(cfg)
            failed = sum(not r.passed for r in reports)
            print(
                f"{cfg.kind}: {len(reports) - failed}/{len(reports)} pass "
                f"-> {Path(cfg.out) / 'summary.csv'}"
            )
            return status
        if args.command == "eta":
            path = emit_shift_samples(cfg)
            print(f"wrote {path}")
            return 0
        if args.command == "diagnose":
            path = run_diagnose(cfg)
            print(f"wrote {path}")
            return 0
        return run_report(cfg)
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
