"""Batch command-line front end.

    memtaxis analyze     --config run.cfg [--out DIR]
    memtaxis normal-form --config run.cfg [--out DIR]
    memtaxis simulate    --config run.cfg [--out DIR]
    memtaxis sweep       --config run.cfg [--out DIR] [--normal-form]

Every command reads one configuration file, prints a human-readable summary
and writes CSV artifacts into the output directory. Output directory
precedence: --out, then the MEMTAXIS_OUT environment variable, then the
[output] dir key, then the working directory. Exit codes: 0 success,
2 configuration error, 3 numerical error, 4 verdict unavailable/undecided.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import diagnostics, linear, model, normalform, simulator
from .config import RunConfig, parse_config
from .errors import ConfigError, InsufficientData, MemtaxisError

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_UNDECIDED = 4


def _fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _fmt6(x) -> str:
    return "-" if x is None else format(float(x), ".6g")


def _out_dir(args, cfg: RunConfig) -> Path:
    path = args.out or os.environ.get("MEMTAXIS_OUT") or cfg.out_dir or "."
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _analysis_rows(lin, tr, ss, report):
    rows = []
    for ma in report.modes:
        tau0 = ma.tau_ladder[0] if ma.tau_ladder else None
        trans = None
        if ma.omega_n is not None:
            trans = linear.transversality(ma, lin, tr, ss, tau0)
        rows.append({
            "n": ma.n, "t_n": ma.t_n, "j_n": ma.j_n, "p_n": ma.p_n,
            "q_n": ma.q_n, "q_tilde_n": ma.q_tilde_n, "gamma_n0": ma.gamma_n0,
            "omega_n": ma.omega_n, "tau_n0": tau0, "transversality": trans,
        })
    return rows


def _write_analysis_csv(rows, path: Path) -> None:
    cols = ["n", "t_n", "j_n", "p_n", "q_n", "q_tilde_n", "gamma_n0",
            "omega_n", "tau_n0", "transversality"]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(
                str(row["n"]) if c == "n" else _fmt(row[c]) for c in cols) + "\n")


def _summary_header(kin, tr, ss, lin, report) -> list[str]:
    w = report.window
    lines = [
        "== memtaxis summary ==",
        f"model:      beta={_fmt6(kin.beta)} m={_fmt6(kin.m)} s={_fmt6(kin.s)}",
        f"transport:  d11={_fmt6(tr.d11)} d22={_fmt6(tr.d22)} d21={_fmt6(tr.d21)}"
        f" xi={_fmt6(tr.xi)} ell={_fmt6(tr.ell)}",
        f"steady state: u*=v*={_fmt6(ss.u_star)}",
        f"jacobian:   a11={_fmt6(lin.a11)} a12={_fmt6(lin.a12)}"
        f" a21={_fmt6(lin.a21)} a22={_fmt6(lin.a22)}",
        f"conditions: C0={report.conditions.c0} C1(all modes)={report.conditions.c1_all_modes}"
        f" C2={report.conditions.c2}"
        f" net-diffusion det={_fmt6(report.conditions.diffusion_det)}",
    ]
    if w.exists:
        lines.append(f"mode window: n1={_fmt6(w.n1)} n2={_fmt6(w.n2)}"
                     f" integer modes={list(w.integer_modes)}")
    else:
        lines.append(f"mode window: none ({w.failure})")
    lines.append(f"regime: {report.regime}")
    if report.tau_star is not None:
        hp = report.critical
        lines.append(f"tau*={_fmt6(report.tau_star)} at mode n_c={hp.n_c}"
                     f" (omega={_fmt6(hp.omega_nc)})")
    for hp in report.hopf_points:
        lines.append(f"  mode {hp.n_c}: omega={_fmt6(hp.omega_nc)}"
                     f" tau_0={_fmt6(hp.tau_c)}")
    if report.two_root_modes:
        lines.append(f"two-root modes (reported, not classified): "
                     f"{list(report.two_root_modes)}")
    if report.degenerate_modes:
        lines.append(f"degenerate window-edge modes: {list(report.degenerate_modes)}")
    return lines


def _emit_summary(lines: list[str], out: Path) -> None:
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    (out / "summary.txt").write_text(text, encoding="utf-8")


def _analysis_context(cfg: RunConfig):
    kin = cfg.kinetic_params()
    tr = cfg.transport_params()
    ss = model.steady_state(kin)
    lin = model.linearize(kin, tr, ss)
    return kin, tr, ss, lin


def cmd_analyze(cfg: RunConfig, args) -> int:
    out = _out_dir(args, cfg)
    kin, tr, ss, lin = _analysis_context(cfg)
    report = linear.classify(lin, tr, ss)
    _write_analysis_csv(_analysis_rows(lin, tr, ss, report), out / "analysis.csv")
    _emit_summary(_summary_header(kin, tr, ss, lin, report), out)
    return EXIT_OK


def _normal_form_lines(kin, ss, tr, lin, report):
    hp = report.critical
    if hp is None:
        return None, ["normal form: no Hopf point to classify"]
    kt = model.kinetic_taylor(kin, ss, hp.tau_c)
    nf = normalform.normal_form(hp, lin, tr, ss, kt)
    lines = [
        f"normal form at tau_c={_fmt6(hp.tau_c)} (mode {hp.n_c}):",
        f"  K1={_fmt6(nf.k1)} K2={_fmt6(nf.k2)} K1K2={_fmt6(nf.k1 * nf.k2)}",
        f"  classification: {nf.direction.lower()}, {nf.orbit_stability.lower()}",
    ]
    return nf, lines


def cmd_normal_form(cfg: RunConfig, args) -> int:
    out = _out_dir(args, cfg)
    kin, tr, ss, lin = _analysis_context(cfg)
    report = linear.classify(lin, tr, ss)
    lines = _summary_header(kin, tr, ss, lin, report)
    _, nf_lines = _normal_form_lines(kin, ss, tr, lin, report)
    _emit_summary(lines + nf_lines, out)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, args) -> int:
    out = _out_dir(args, cfg)
    kin, tr, ss, lin = _analysis_context(cfg)
    report = linear.classify(lin, tr, ss)
    tau = cfg.single_tau()
    n_c = report.critical.n_c if report.critical is not None else None
    ic_mode = cfg.ic_mode if cfg.ic_mode is not None else (n_c or 1)

    sim_cfg = simulator.SimConfig(
        kin=kin, tr=tr, tau=tau, n_cells=cfg.n_cells, dt=cfg.dt,
        t_end=cfg.t_end, record_every=cfg.record_every,
        trace_every=cfg.trace_every, ic_mode=ic_mode,
        ic_amplitude=cfg.ic_amplitude, probe_x=cfg.probe_x)
    traj = simulator.run(sim_cfg)

    simulator.write_snapshots_csv(traj, out / "snapshots.csv")
    simulator.write_probe_csv(traj, out / "probe.csv")
    spec = diagnostics.mode_spectrum(traj)
    diagnostics.write_spectrum_csv(spec, out / "spectrum.csv")

    monitored = n_c or max(ic_mode, 1)
    est = diagnostics.detect(traj, ss, monitored)
    diagnostics.write_verdict_csv(est, out / "verdict.csv")

    lines = _summary_header(kin, tr, ss, lin, report)
    lines += [
        f"simulation: tau={_fmt6(tau)} n_cells={sim_cfg.n_cells}"
        f" dt={_fmt6(traj.dt)} t_end={_fmt6(cfg.t_end)}"
        f" ic: mode {ic_mode}, amplitude {_fmt6(cfg.ic_amplitude)}",
        f"verdict: {est.verdict} (monitored mode {monitored})",
        f"  period={_fmt6(est.period) if not math.isnan(est.period) else '-'}"
        f" amplitude={_fmt6(est.amplitude)}"
        f" spacing_std={_fmt6(est.relative_spacing_std) if not math.isnan(est.relative_spacing_std) else '-'}"
        f" drift={_fmt6(est.amplitude_drift) if not math.isnan(est.amplitude_drift) else '-'}"
        f" steady_dev={_fmt6(est.steady_deviation)}",
    ]
    _emit_summary(lines, out)
    return EXIT_UNDECIDED if est.verdict == diagnostics.VERDICT_UNDECIDED else EXIT_OK


def _sweep_row(kin, tr, tau, with_nf):
    row = {"beta": kin.beta, "m": kin.m, "s": kin.s, "d11": tr.d11,
           "d22": tr.d22, "d21": tr.d21, "xi": tr.xi, "ell": tr.ell,
           "tau": tau, "regime": "", "tau_star": None, "n_c": "",
           "omega_nc": None, "stable": "", "k1": None, "k2": None,
           "direction": "", "orbit_stability": "", "error": ""}
    try:
        ss = model.steady_state(kin)
        lin = model.linearize(kin, tr, ss)
        report = linear.classify(lin, tr, ss)
        row["regime"] = report.regime
        if report.regime == linear.REGIME_STABLE_ALL_TAU:
            row["stable"] = "true"
        hp = report.critical
        if report.tau_star is not None:
            row["tau_star"] = report.tau_star
            row["n_c"] = hp.n_c
            row["omega_nc"] = hp.omega_nc
            if report.regime == linear.REGIME_DELAY_HOPF:
                row["stable"] = "true" if tau < report.tau_star else "false"
        if with_nf and hp is not None:
            kt = model.kinetic_taylor(kin, ss, hp.tau_c)
            nf = normalform.normal_form(hp, lin, tr, ss, kt)
            row["k1"] = nf.k1
            row["k2"] = nf.k2
            row["direction"] = nf.direction
            row["orbit_stability"] = nf.orbit_stability
    except MemtaxisError as exc:
        row["error"] = str(exc).replace(",", ";")
    return row


def cmd_sweep(cfg: RunConfig, args) -> int:
    out = _out_dir(args, cfg)
    taus = cfg.taus()
    jobs = [(kin, tr, tau)
            for kin, tr, _ in cfg.parameter_grid() for tau in taus]
    with_nf = args.normal_form

    def work(job):
        kin, tr, tau = job
        return _sweep_row(kin, tr, tau, with_nf)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(work, jobs))
    else:
        rows = [work(job) for job in jobs]

    cols = ["beta", "m", "s", "d11", "d22", "d21", "xi", "ell", "tau",
            "regime", "tau_star", "n_c", "omega_nc", "stable",
            "k1", "k2", "direction", "orbit_stability", "error"]
    num = {"beta", "m", "s", "d11", "d22", "d21", "xi", "ell", "tau",
           "tau_star", "omega_nc", "k1", "k2"}
    with open(out / "sweep.csv", "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(
                _fmt(row[c]) if c in num else str(row[c]) for c in cols) + "\n")
    flips = sum(1 for a, b in zip(rows, rows[1:])
                if a["stable"] and b["stable"] and a["stable"] != b["stable"])
    sys.stdout.write(f"sweep: {len(rows)} rows -> {out / 'sweep.csv'}"
                     f" ({flips} stability flips)\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memtaxis",
        description="Hopf onset analysis, normal forms and direct simulation "
                    "of the memory/taxis predator-prey system.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("analyze", cmd_analyze), ("normal-form", cmd_normal_form),
                     ("simulate", cmd_simulate), ("sweep", cmd_sweep)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="run configuration file")
        p.add_argument("--out", default=None, help="output directory")
        if name == "sweep":
            p.add_argument("--normal-form", action="store_true",
                           help="also evaluate K1/K2 per grid point")
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        return args.func(cfg, args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except OSError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except InsufficientData as exc:
        sys.stderr.write(f"no verdict: {exc}\n")
        return EXIT_UNDECIDED
    except MemtaxisError as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
