"""Command-line front end tying the modules into reproducible batch runs.

Subcommands: locus, verify, wbasis, reduce, realize, roundtrip, simulate,
oracle.  Every run emits a deterministic structured report with a residual
block; exit status 0 means all residual checks passed, 1 names a failing
residual, 2 flags a parse failure with its location, 3 an internal error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

import numpy as np

from . import formats
from .errors import ParseError, TrizeroError
from .formats import Report, fmt
from .homological import w_basis, lb_matrix
from .linear import bilinear, char_derivatives, locus, psi_basis
from .poly import format_poly
from .realize import realize
from .reduction import FGSeries, reduce
from .simulate import project_center, simulate_dde, spectral_oracle

__all__ = ["RunConfig", "run", "main"]

EXIT_OK = 0
EXIT_RESIDUAL = 1
EXIT_PARSE = 2
EXIT_INTERNAL = 3

DEFAULT_TOLERANCES = {
    "locus": 1e-12,
    "kappa_identity": 1e-9,
    "normalization": 1e-10,
    "axis_margin": 1e-6,
    "split": 1e-9,
    "cm_residual": 1e-10,
    "roundtrip": 1e-8,
    "oracle_center": 1e-5,
    "oracle_gap": 0.1,
    "oracle_nilpotent": 1e-6,
}


@dataclass
class RunConfig:
    """One batch invocation: the command plus its inputs and knobs."""

    command: str
    params_path: str | None = None
    f_path: str | None = None
    g_path: str | None = None
    target_path: str | None = None
    order: int = 2
    output_path: str | None = None
    tolerances: dict = field(default_factory=dict)
    degree: int = 2
    ncheb: int = 24
    dps: int = 30
    nsteps: int = 64
    horizon: float = 1.0
    history: tuple[float, float] | None = None
    seed: tuple[float, float, float] | None = None
    project: bool = False
    epsilon: float = 0.02

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))


def _require_params(cfg: RunConfig):
    if cfg.params_path is None:
        raise ParseError("this command needs --params")
    a, beta = formats.read_params_file(cfg.params_path)
    return locus(a, beta)


def _echo_params(rep: Report, p):
    rep.kv("a", p.a)
    rep.kv("beta", p.beta)
    rep.kv("tau0", p.tau0)
    rep.kv("b", p.b)
    rep.kv("alpha", p.alpha)
    rep.kv("kappa1", p.kappa1)
    rep.kv("kappa2", p.kappa2)


def _cmd_locus(cfg: RunConfig) -> Report:
    p = _require_params(cfg)
    rep = Report("locus")
    _echo_params(rep, p)
    cr = char_derivatives(p)
    rep.kv("char_p3", cr.p3)
    rep.kv("axis_margin", cr.axis_margin)
    rep.kv("scan_bound", cr.scan_bound)
    tol = cfg.tol("locus")
    rep.residual("char_p0", abs(cr.p0), tol)
    rep.residual("char_p1", abs(cr.p1), tol)
    rep.residual("char_p2", abs(cr.p2), tol)
    rep.residual("kappa2_identity", abs(p.kappa2 * cr.p3 - 6.0), cfg.tol("kappa_identity"))
    return rep


def _cmd_verify(cfg: RunConfig) -> Report:
    p = _require_params(cfg)
    rep = Report("verify")
    _echo_params(rep, p)
    cr = char_derivatives(p)
    rep.kv("char_p3", cr.p3)
    rep.kv("axis_margin", cr.axis_margin)
    basis = psi_basis(p)
    rep.add("psi0 rows:")
    for i in range(3):
        rep.add(f"  psi{i+1}(0) = ({fmt(basis.psi0[i,0])}, {fmt(basis.psi0[i,1])})")
    gram = np.array([
        [bilinear(basis.psi[i], basis.phi[j], p) for j in range(3)]
        for i in range(3)
    ])
    tol = cfg.tol("locus")
    rep.residual("char_p0", abs(cr.p0), tol)
    rep.residual("char_p1", abs(cr.p1), tol)
    rep.residual("char_p2", abs(cr.p2), tol)
    rep.residual("kappa2_identity", abs(p.kappa2 * cr.p3 - 6.0), cfg.tol("kappa_identity"))
    rep.residual("normalization", float(np.max(np.abs(gram - np.eye(3)))),
                 cfg.tol("normalization"))
    rep.residual("psi0_kappa1", abs(basis.psi0[1, 1] - p.kappa1), cfg.tol("normalization"))
    rep.residual("psi0_kappa2", abs(basis.psi0[2, 1] - p.kappa2), cfg.tol("normalization"))
    rep.residual("axis_margin_floor", cfg.tol("axis_margin") - cr.axis_margin, 0.0)
    return rep


def _cmd_wbasis(cfg: RunConfig) -> Report:
    basis = w_basis(cfg.degree)
    rep = Report("wbasis")
    rep.kv("degree", cfg.degree)
    rep.kv("count", len(basis))
    j = cfg.degree
    expected = (3 * j + 2) // 2 if j % 2 == 0 else (3 * j + 3) // 2
    rep.add("label -> third-component monomial:")
    for lb, vec in zip(basis.labels, basis.vectors):
        rep.add(f"  {lb} = {format_poly(vec.components[2])}")
    rank = int(np.linalg.matrix_rank(lb_matrix(j), tol=1e-9))
    rep.kv("lb_rank", rank)
    rep.residual("w_count", abs(len(basis) - expected), 0.0)
    rep.residual("rank_plus_count", abs(rank + len(basis) - 3 * (j + 1) * (j + 2) // 2), 0.0)
    return rep


def _read_fg(cfg: RunConfig) -> FGSeries:
    F = formats.read_fg_file(cfg.f_path, cfg.order) if cfg.f_path else {}
    G = formats.read_fg_file(cfg.g_path, cfg.order) if cfg.g_path else {}
    return FGSeries.build(F=F, G=G, max_degree=cfg.order)


def _cmd_reduce(cfg: RunConfig) -> Report:
    p = _require_params(cfg)
    fg = _read_fg(cfg)
    rep = Report("reduce")
    _echo_params(rep, p)
    rep.kv("order", cfg.order)
    nf, trace = reduce(fg, p, cfg.order)
    rep.add("normal-form coefficients:")
    for line in formats.format_nf_coeffs(nf):
        rep.add("  " + line)
    for j, tr in trace.orders.items():
        rep.residual(f"split_residual[{j}]", tr.split_residual, cfg.tol("split"))
        for name, val in tr.U2.residuals.items():
            rep.residual(f"cm_{name}[{j}]", val, cfg.tol("cm_residual"))
    return rep


def _cmd_realize(cfg: RunConfig, with_roundtrip: bool = False) -> Report:
    p = _require_params(cfg)
    if cfg.target_path is None:
        raise ParseError("realize needs --target")
    target = formats.read_target_file(cfg.target_path, cfg.order)
    rep = Report("roundtrip" if with_roundtrip else "realize")
    _echo_params(rep, p)
    rep.kv("order", cfg.order)
    fg = realize(target, p)
    rep.add("F = " + formats.write_fg_text(fg.F))
    rep.add("G = " + formats.write_fg_text(fg.G))
    nf, trace = reduce(fg, p, cfg.order)
    diff = nf.max_coeff_diff(target.as_nfseries())
    rep.add("reduced coefficients:")
    for line in formats.format_nf_coeffs(nf):
        rep.add("  " + line)
    rep.residual("roundtrip_diff", diff, cfg.tol("roundtrip"))
    for j, tr in trace.orders.items():
        rep.residual(f"split_residual[{j}]", tr.split_residual, cfg.tol("split"))
    return rep


def _cmd_simulate(cfg: RunConfig) -> Report:
    p = _require_params(cfg)
    fg = _read_fg(cfg) if (cfg.f_path or cfg.g_path) else None
    if cfg.seed is not None:
        u0 = np.asarray(cfg.seed, dtype=float)

        def hist(t):
            from .linear import phi_at
            return phi_at(t) @ u0
    else:
        const = np.asarray(cfg.history if cfg.history is not None else (0.0, 0.0))

        def hist(t):
            return const

    traj = simulate_dde(p, fg, hist, cfg.horizon, cfg.nsteps)
    rep = Report("simulate")
    _echo_params(rep, p)
    rep.kv("T", cfg.horizon)
    rep.kv("N", cfg.nsteps)
    rep.kv("dt", traj.dt)
    if cfg.project:
        times, proj = project_center(traj, p)
        csv = formats.trajectory_csv(times, traj.states, proj)
    else:
        csv = formats.trajectory_csv(traj.times, traj.states)
    rep.add("csv:")
    for line in csv.rstrip("\n").split("\n"):
        rep.add(line)
    return rep


def _cmd_oracle(cfg: RunConfig) -> Report:
    p = _require_params(cfg)
    rep = Report("oracle")
    _echo_params(rep, p)
    rep.kv("N", cfg.ncheb)
    rep.kv("dps", cfg.dps)
    orc = spectral_oracle(p, cfg.ncheb, dps=cfg.dps if cfg.dps > 0 else None)
    rep.add("center eigenvalues:")
    for lam in orc.center_eigs:
        rep.add(f"  {fmt(lam.real)} {fmt(lam.imag)}i")
    rep.kv("gap", orc.gap)
    rep.kv("nilpotent_residual", orc.nilpotent_residual)
    rep.residual("center_modulus", float(np.max(np.abs(orc.center_eigs))),
                 cfg.tol("oracle_center"))
    rep.residual("gap_floor", cfg.tol("oracle_gap") - orc.gap, 0.0)
    rep.residual("nilpotent_residual", orc.nilpotent_residual,
                 cfg.tol("oracle_nilpotent"))
    return rep


_COMMANDS = {
    "locus": _cmd_locus,
    "verify": _cmd_verify,
    "wbasis": _cmd_wbasis,
    "reduce": _cmd_reduce,
    "realize": lambda cfg: _cmd_realize(cfg, with_roundtrip=False),
    "roundtrip": lambda cfg: _cmd_realize(cfg, with_roundtrip=True),
    "simulate": _cmd_simulate,
    "oracle": _cmd_oracle,
}


def run(config: RunConfig) -> tuple[int, str]:
    """Execute one command; returns (exit status, report text)."""
    if config.command not in _COMMANDS:
        return EXIT_PARSE, f"unknown command {config.command!r}\n"
    if not 2 <= config.order <= 6:
        return EXIT_PARSE, f"order {config.order} outside the supported range 2..6\n"
    for k, v in config.tolerances.items():
        if k not in DEFAULT_TOLERANCES:
            return EXIT_PARSE, f"unknown tolerance key {k!r}\n"
        if not v > 0:
            return EXIT_PARSE, f"tolerance {k} must be positive\n"
    try:
        rep = _COMMANDS[config.command](config)
    except ParseError as exc:
        return EXIT_PARSE, f"parse error: {exc}\n"
    except TrizeroError as exc:
        rep = Report(config.command)
        rep.add(f"error: {type(exc).__name__}: {exc}")
        rep.residual(type(exc).__name__, float("inf"), 0.0)
        return EXIT_RESIDUAL, rep.render()
    except Exception as exc:  # noqa: BLE001 - the CLI boundary maps to exit 3
        return EXIT_INTERNAL, f"internal error: {type(exc).__name__}: {exc}\n"
    text = rep.render()
    if rep.passed():
        return EXIT_OK, text
    return EXIT_RESIDUAL, text


def _parse_tol(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ParseError(f"tolerance override must be KEY=VALUE, got {item!r}")
        k, _, v = item.partition("=")
        out[k.strip()] = float(v)
    return out


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="trizero",
        description="triple-zero oscillator toolkit: locus, reduction, "
                    "realizability and numerical verification",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, params=True):
        if params:
            sp.add_argument("--params", required=True, help="parameter file")
        sp.add_argument("--out", help="also write the report to this path")
        sp.add_argument("--tol", action="append", metavar="KEY=VALUE",
                        help="tolerance override (repeatable)")

    common(sub.add_parser("locus", help="derived locus quantities"))
    common(sub.add_parser("verify", help="full linear-part verification"))

    sp = sub.add_parser("wbasis", help="labeled complement basis")
    sp.add_argument("--degree", type=int, required=True)
    common(sp, params=False)

    sp = sub.add_parser("reduce", help="normal-form reduction of given F, G")
    common(sp)
    sp.add_argument("--order", type=int, required=True)
    sp.add_argument("--fpoly", dest="f_path", help="F polynomial file")
    sp.add_argument("--gpoly", dest="g_path", help="G polynomial file")

    for name in ("realize", "roundtrip"):
        sp = sub.add_parser(name, help=f"{name} a target normal form")
        common(sp)
        sp.add_argument("--order", type=int, required=True)
        sp.add_argument("--target", dest="target_path", required=True)

    sp = sub.add_parser("simulate", help="integrate the delay equation")
    common(sp)
    sp.add_argument("--fpoly", dest="f_path")
    sp.add_argument("--gpoly", dest="g_path")
    sp.add_argument("--order", type=int, default=6,
                    help="maximum nonlinearity degree accepted from files")
    sp.add_argument("--T", type=float, default=1.0)
    sp.add_argument("--N", type=int, default=64)
    sp.add_argument("--history", metavar="X,Y", help="constant history")
    sp.add_argument("--seed", metavar="U1,U2,U3",
                    help="center-plane history Phi(theta) u0")
    sp.add_argument("--project", action="store_true",
                    help="append center projections to the CSV")

    sp = sub.add_parser("oracle", help="collocation spectrum of the generator")
    common(sp)
    sp.add_argument("--ncheb", type=int, default=24)
    sp.add_argument("--dps", type=int, default=30,
                    help="digits for the extended-precision eigensolve "
                         "(0 uses plain double)")
    return ap


def main(argv=None) -> int:
    ap = _build_parser()
    ns = ap.parse_args(argv)
    try:
        cfg = RunConfig(
            command=ns.command,
            params_path=getattr(ns, "params", None),
            f_path=getattr(ns, "f_path", None),
            g_path=getattr(ns, "g_path", None),
            target_path=getattr(ns, "target_path", None),
            order=getattr(ns, "order", 2),
            output_path=getattr(ns, "out", None),
            tolerances=_parse_tol(getattr(ns, "tol", None)),
            degree=getattr(ns, "degree", 2),
            ncheb=getattr(ns, "ncheb", 24),
            dps=getattr(ns, "dps", 30),
            nsteps=getattr(ns, "N", 64),
            horizon=getattr(ns, "T", 1.0),
            history=tuple(float(x) for x in ns.history.split(","))
            if getattr(ns, "history", None) else None,
            seed=tuple(float(x) for x in ns.seed.split(","))
            if getattr(ns, "seed", None) else None,
            project=getattr(ns, "project", False),
        )
    except (ParseError, ValueError) as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    code, text = run(cfg)
    sys.stdout.write(text)
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
