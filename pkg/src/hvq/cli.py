"""Batch command line: ``hvq <subcommand> [key=value ...] [--config FILE] [--out DIR]``.

Each run validates its whole configuration before touching the disk, writes
CSV outputs plus ``manifest.json`` into the output directory and prints a
short result summary.  Exit status: 0 success, 1 runtime failure, 2 bad
configuration (nothing written).
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from . import bell_bounds, epr_sim, fock_phase, historical, hv_polarization
from .config import (
    Field,
    choice,
    parse_angle,
    parse_assignments,
    parse_bool,
    parse_float_list,
    parse_seed,
    positive,
    read_config_file,
    resolve,
)
from .errors import ConfigError, HVQError
from .laxphillips import oscillator, resonance, wavepacket
from .reports import write_csv

OUTPUT_ENV = "HVQ_OUTPUT_DIR"

SEED = Field(parse_seed, 0, "64-bit unsigned seed")
_STD = epr_sim.STANDARD_SETTINGS


@dataclass
class RunResult:
    outputs: dict[str, Path] = field(default_factory=dict)
    results: dict[str, Any] = field(default_factory=dict)
    lines: list[str] = field(default_factory=list)


def _g(x) -> str:
    return f"{x:.15g}"


# --------------------------------------------------------------------------
# polarization
# --------------------------------------------------------------------------

MALUS_FIT = {
    "epsilon": Field(float, 0.02, "Malus offset"),
    "grid": Field(positive(int), hv_polarization.DEFAULT_GRID, "angular grid size"),
    "restarts": Field(positive(int), 1, "1 = plain cos^2 start; >1 = seeded perturbed starts"),
    "amplitude": Field(float, 0.1, "restart perturbation amplitude"),
    "max_iter": Field(positive(int), 20000, "iteration cap per fit"),
    "seed": SEED,
}


def run_malus_fit(cfg, out: Path) -> RunResult:
    target = hv_polarization.MalusTarget(cfg["epsilon"])
    r = RunResult()
    if cfg["restarts"] == 1:
        reports = [hv_polarization.fit_response(target, cfg["grid"], max_iter=cfg["max_iter"])]
    else:
        reports = hv_polarization.fit_restarts(target, cfg["restarts"], cfg["seed"], cfg["grid"],
                                               cfg["amplitude"], max_iter=cfg["max_iter"])
    best = hv_polarization.best_fit(reports)
    r.outputs["response"] = best.to_csv(out / "response.csv")
    coinc = hv_polarization.autocorrelate(best.fitted)
    r.outputs["coincidence"] = coinc.to_csv(out / "coincidence.csv")
    r.outputs["restarts"] = write_csv(
        out / "restarts.csv", ["restart", "sup_residual", "l2_residual", "iterations", "converged"],
        [(i, f.sup_residual, f.l2_residual, f.iterations, f.converged) for i, f in enumerate(reports)],
    )
    r.results = {"sup_residual": best.sup_residual, "l2_residual": best.l2_residual,
                 "feasibility_bound": best.feasibility_bound, "iterations": best.iterations}
    r.lines = [f"sup_residual {_g(best.sup_residual)}", f"l2_residual {_g(best.l2_residual)}"]
    return r


MALUS_FEAS = {
    "epsilon": Field(float, 0.02, "Malus offset"),
    "grid": Field(positive(int), hv_polarization.DEFAULT_GRID, "grid for the cos^2 mismatch check"),
    "seed": SEED,
}


def run_malus_feasibility(cfg, out: Path) -> RunResult:
    rep = hv_polarization.fourier_feasibility(cfg["epsilon"])
    mis = hv_polarization.malus_mismatch(cfg["grid"], cfg["epsilon"])
    r = RunResult()
    r.outputs["feasibility"] = write_csv(
        out / "feasibility.csv",
        ["epsilon", "c0", "c1", "ratio", "feasible_exact", "min_epsilon_exact", "cos2_max_deviation", "at_angle"],
        [(cfg["epsilon"], rep.c0, rep.c1, rep.ratio, rep.feasible_exact, rep.min_epsilon_exact,
          mis.max_deviation, mis.at_angle)],
    )
    r.results = {"ratio": rep.ratio, "feasible_exact": rep.feasible_exact, "cos2_max_deviation": mis.max_deviation}
    r.lines = [f"ratio {_g(rep.ratio)}", f"feasible_exact {str(rep.feasible_exact).lower()}"]
    return r


# --------------------------------------------------------------------------
# photon pairs
# --------------------------------------------------------------------------

ANGLES = {
    "alpha1": Field(parse_angle, _STD.alpha1, "left setting 1"),
    "alpha2": Field(parse_angle, _STD.alpha2, "left setting 2"),
    "beta1": Field(parse_angle, _STD.beta1, "right setting 1"),
    "beta2": Field(parse_angle, _STD.beta2, "right setting 2"),
}

EPR_SIM = {
    **ANGLES,
    "mode": Field(choice("f_dependent", "f_independent"), "f_dependent", "detection rule"),
    "sampling": Field(choice("counterfactual", "fresh"), "counterfactual", "hidden-state reuse"),
    "n": Field(positive(int), 100000, "pairs per setting pair"),
    "response": Field(choice("cos2", "fitted"), "cos2", "single-polarizer curve"),
    "epsilon": Field(float, 0.02, "Malus offset for response=fitted"),
    "grid": Field(positive(int), hv_polarization.DEFAULT_GRID, "response grid size"),
    "workers": Field(positive(int), 1, "thread count (results do not depend on it)"),
    "seed": SEED,
}


def _model(cfg) -> epr_sim.DetectionModel:
    if cfg.get("response", "cos2") == "fitted":
        curve = hv_polarization.fit_response(cfg["epsilon"], cfg["grid"]).fitted
    else:
        curve = hv_polarization.ResponseCurve.cos2(cfg["grid"])
    return epr_sim.DetectionModel(curve, cfg["mode"])


def _settings(cfg) -> epr_sim.AngleSettings:
    return epr_sim.AngleSettings(cfg["alpha1"], cfg["alpha2"], cfg["beta1"], cfg["beta2"])


def run_epr_sim(cfg, out: Path) -> RunResult:
    stats = epr_sim.run_experiment(_model(cfg), _settings(cfg), cfg["n"], cfg["seed"], cfg["sampling"],
                                   workers=cfg["workers"])
    r = RunResult()
    r.outputs["coincidences"] = stats.to_csv(out / "coincidences.csv")
    rows = epr_sim.summary_rows(stats, {"local": bell_bounds.deterministic_bound()})
    r.outputs["summary"] = write_csv(out / "summary.csv", ["quantity", "value", "stderr"], rows)
    r.results = {name: value for name, value, _ in rows}
    r.lines = [f"{name} {_g(v)} +- {_g(se)}" for name, v, se in rows[:2]]
    return r


GAP = {
    **ANGLES,
    "mode": Field(choice("f_dependent", "f_independent"), "f_dependent", "detection rule"),
    "n": Field(positive(int), 1000000, "hidden states"),
    "grid": Field(positive(int), hv_polarization.DEFAULT_GRID, "response grid size"),
    "oracle": Field(parse_bool, True, "also run the quadrature oracle"),
    "seed": SEED,
}


def run_interchange_gap(cfg, out: Path) -> RunResult:
    model, settings = _model(cfg), _settings(cfg)
    g = epr_sim.interchange_gap(model, settings, cfg["n"], cfg["seed"])
    oracle = epr_sim.interchange_gap_quadrature(model, settings) if cfg["oracle"] else math.nan
    r = RunResult()
    r.outputs["gap"] = write_csv(out / "gap.csv", ["gap", "stderr", "shared", "redrawn", "n", "oracle"],
                                 [(g.gap, g.stderr, g.lhs, g.rhs, g.n, oracle)])
    r.results = {"gap": g.gap, "stderr": g.stderr, "oracle": oracle}
    r.lines = [f"gap {_g(g.gap)} +- {_g(g.stderr)}", f"oracle {_g(oracle)}"]
    return r


CHSH = {
    "mode": Field(choice("deterministic", "tensor_commuting", "noncommuting", "all"), "all", "operator model"),
    "dim": Field(positive(int), None, "space dimension (default per mode)"),
    "restarts": Field(positive(int), None, "optimizer restarts (default per mode)"),
    "seed": SEED,
}


def run_chsh_bounds(cfg, out: Path) -> RunResult:
    modes = list(bell_bounds.BoundMode) if cfg["mode"] == "all" else [bell_bounds.BoundMode(cfg["mode"])]
    results = [bell_bounds.bell_operator_bound(m, cfg["dim"], cfg["restarts"], cfg["seed"]) for m in modes]
    r = RunResult()
    r.outputs["bounds"] = write_csv(out / "bounds.csv", ["mode", "value", "dim", "restarts"],
                                    [(b.mode.value, b.value, "" if b.dim is None else b.dim, b.restarts)
                                     for b in results])
    r.results = {b.mode.value: b.value for b in results}
    if len(results) == 1:
        r.lines = [_g(results[0].value)]
    else:
        r.lines = [f"{b.mode.value} {_g(b.value)}" for b in results]
    return r


# --------------------------------------------------------------------------
# phase operators
# --------------------------------------------------------------------------

PHASE_OP = {
    "dim": Field(positive(int), 8, "Fock truncation"),
    "omega": Field(float, 1.0, "oscillator frequency"),
    "seed": SEED,
}


def run_phase_op(cfg, out: Path) -> RunResult:
    osc = fock_phase.build_oscillator(cfg["dim"], cfg["omega"])
    ph = fock_phase.sg_phase(cfg["dim"])
    rep = fock_phase.commutator_report(osc, ph)
    r = RunResult()
    rows = [(k, v, ph.dim, "single") for k, v in ph.isometry_defects().items()] + list(rep.rows())
    r.outputs["checks"] = write_csv(out / "checks.csv", ["check", "norm", "dimension", "block"], rows)
    r.outputs["phase_matrix"] = fock_phase.export_matrix(ph.E, out / "phase_matrix.csv")
    r.outputs["ladder_matrix"] = fock_phase.export_matrix(osc.a, out / "ladder_matrix.csv")
    r.results = {name: value for name, value, *_ in rows}
    r.lines = [f"{name} {_g(value)}" for name, value, *_ in rows]
    return r


DOUBLED = {
    "dim": Field(positive(int), 8, "levels per J block"),
    "omega": Field(float, 1.0, "oscillator frequency"),
    "t_max": Field(positive(float), 100.0, "time span in units of 1/omega"),
    "n_t": Field(positive(int), 201, "time samples"),
    "seed": SEED,
}


def run_doubled_space(cfg, out: Path) -> RunResult:
    rows = fock_phase.diagnostics_rows(cfg["dim"], cfg["omega"], cfg["t_max"], cfg["n_t"])
    space = fock_phase.build_doubled(cfg["dim"], cfg["omega"])
    t = np.linspace(0.0, cfg["t_max"], cfg["n_t"]) / (cfg["omega"] if cfg["omega"] else 1.0)
    plus = fock_phase.phase_winding(space, +1, t)
    minus = fock_phase.phase_winding(space, -1, t)
    r = RunResult()
    r.outputs["checks"] = write_csv(out / "checks.csv", ["check", "norm", "dimension", "block"], rows)
    r.outputs["winding"] = write_csv(out / "winding.csv", ["t", "phase_plus", "phase_minus"],
                                     zip(t, plus.phase, minus.phase))
    r.outputs["shift_matrix"] = fock_phase.export_matrix(space.S, out / "shift_matrix.csv")
    r.results = {"slope_plus": plus.mean_slope, "slope_minus": minus.mean_slope,
                 **{name: value for name, value, *_ in rows}}
    r.lines = [f"slope_plus {_g(plus.mean_slope)}", f"slope_minus {_g(minus.mean_slope)}"]
    return r


# --------------------------------------------------------------------------
# in/out evolution
# --------------------------------------------------------------------------

EVOLVE = {
    "x0": Field(float, -5.0, "initial center"),
    "p0": Field(float, 2.0, "initial momentum"),
    "sigma": Field(positive(float), 1.0, "position width"),
    "mass": Field(positive(float), 1.0, "reduced mass"),
    "hbar": Field(positive(float), 1.0, "action unit"),
    "n_grid": Field(positive(int), 1024, "grid nodes (power of two)"),
    "length": Field(positive(float), 80.0, "periodic box length"),
    "dt": Field(positive(float), 0.005, "sampling step"),
    "steps": Field(positive(int), 1000, "number of steps"),
    "tol_R": Field(positive(float), wavepacket.TOL_R, "half-width of the Zero band"),
    "seed": SEED,
}


def run_evolve(cfg, out: Path) -> RunResult:
    grid = wavepacket.Grid(cfg["n_grid"], cfg["length"])
    psi = wavepacket.gaussian_packet(cfg["x0"], cfg["p0"], cfg["sigma"], grid, mass=cfg["mass"], hbar=cfg["hbar"])
    tr = wavepacket.evolve_free(psi, cfg["dt"], cfg["steps"], cfg["tol_R"])
    slope = float(np.polyfit(tr.t, tr.expect_R, 1)[0])
    try:
        t0 = wavepacket.zero_crossing(tr.t, tr.expect_R)
    except HVQError:
        t0 = math.nan
    r = RunResult()
    r.outputs["trajectory"] = tr.to_csv(out / "trajectory.csv")
    r.results = {"R_slope": slope, "t0": t0, "max_norm_drift": float(np.abs(tr.norm - 1).max())}
    r.lines = [f"R_slope {_g(slope)}", f"t0 {_g(t0)}"]
    return r


OSC = {
    "omega": Field(positive(float), 1.0, "frequency"),
    "q0": Field(float, 1.0, "initial position"),
    "p0": Field(float, 0.0, "initial momentum"),
    "mass": Field(positive(float), 1.0, "mass"),
    "hbar": Field(positive(float), 1.0, "action unit"),
    "periods": Field(positive(float), 2.0, "time span in periods"),
    "n_t": Field(positive(int), 801, "time samples"),
    "seed": SEED,
}


def run_oscillator_phase(cfg, out: Path) -> RunResult:
    t = np.linspace(0.0, cfg["periods"] * 2 * math.pi / cfg["omega"], cfg["n_t"])
    tr = oscillator.oscillator_trajectory(cfg["omega"], cfg["q0"], cfg["p0"], t, mass=cfg["mass"], hbar=cfg["hbar"])
    slope = float(np.polyfit(t, tr.phase, 1)[0])
    r = RunResult()
    r.outputs["oscillator"] = tr.to_csv(out / "oscillator.csv")
    r.results = {"phase_slope": slope, "fock_dim": tr.dim}
    r.lines = [f"phase_slope {_g(slope)}"]
    return r


RESONANCE = {
    "n_channels": Field(positive(int), 1, "out channels"),
    "hopping": Field(float, 3.0, "doorway-to-channel-site hopping"),
    "width_in": Field(float, 0.2, "golden-rule width of the In coupling"),
    "widths_out": Field(parse_float_list, (0.2,), "per-channel widths (one value = all channels)"),
    "spacing": Field(positive(float), 0.04, "continuum level spacing"),
    "bandwidth": Field(positive(float), 16.0, "continuum bandwidth"),
    "packet_width": Field(positive(float), 0.6, "incoming energy spread"),
    "arrival": Field(float, 8.0, "arrival time at the doorway"),
    "coupling_scale": Field(float, 1.0, "multiplies all continuum couplings"),
    "t_max": Field(positive(float), 60.0, "final time"),
    "n_t": Field(positive(int), 601, "time samples"),
    "seed": SEED,
}


def run_resonance(cfg, out: Path) -> RunResult:
    widths = cfg["widths_out"]
    params = resonance.ResonanceParams(
        n_channels=cfg["n_channels"], hopping=cfg["hopping"], width_in=cfg["width_in"],
        widths_out=widths[0] if len(widths) == 1 else widths, spacing=cfg["spacing"],
        bandwidth=cfg["bandwidth"], packet_width=cfg["packet_width"], arrival=cfg["arrival"],
        coupling_scale=cfg["coupling_scale"],
    )
    system = resonance.build_resonance(params)
    t = np.linspace(0.0, cfg["t_max"], cfg["n_t"])
    res = resonance.resonance_evolve(system, resonance.in_packet(system), t)
    fit = resonance.decay_fit(t, res.P_theta)
    golden = resonance.golden_rule_rate(system)
    r = RunResult()
    r.outputs["occupations"] = res.to_csv(out / "occupations.csv")
    r.outputs["branching"] = write_csv(out / "branching.csv", ["channel", "fraction"],
                                       enumerate(res.branching, start=1))
    r.results = {"decay_rate": fit.rate, "golden_rule_rate": golden, "fit_residual": fit.residual,
                 "branching": [float(b) for b in res.branching],
                 "max_total_defect": float(np.abs(res.total - 1).max())}
    r.lines = [f"decay_rate {_g(fit.rate)}", f"golden_rule_rate {_g(golden)}",
               "branching " + " ".join(_g(b) for b in res.branching)]
    return r


# --------------------------------------------------------------------------
# early quantum formulas
# --------------------------------------------------------------------------

CONSTANTS = {
    "h": Field(positive(float), historical.SI.h, "Planck constant"),
    "c": Field(positive(float), historical.SI.c, "speed of light"),
    "k_B": Field(positive(float), historical.SI.k_B, "Boltzmann constant"),
    "m_e": Field(positive(float), historical.SI.m_e, "electron mass"),
    "e": Field(positive(float), historical.SI.e, "elementary charge"),
    "epsilon_0": Field(positive(float), historical.SI.epsilon_0, "vacuum permittivity"),
    "units": Field(choice("SI", "gaussian"), "SI", "unit system for the Coulomb factor"),
}


def _constants(cfg) -> historical.PhysicalConstants:
    return historical.PhysicalConstants(**{k: cfg[k] for k in CONSTANTS})


BLACKBODY = {
    **CONSTANTS,
    "T": Field(positive(float), 5000.0, "temperature"),
    "nu_min": Field(positive(float), 1e11, "lowest frequency"),
    "nu_max": Field(positive(float), 1e16, "highest frequency"),
    "n_points": Field(positive(int), 200, "log-spaced samples"),
    "seed": SEED,
}


def run_blackbody(cfg, out: Path) -> RunResult:
    const = _constants(cfg)
    if cfg["nu_max"] <= cfg["nu_min"]:
        raise ConfigError("nu_max must exceed nu_min")
    nu = np.geomspace(cfg["nu_min"], cfg["nu_max"], cfg["n_points"])
    T = cfg["T"]
    a, b = historical.wien_coefficients(const)
    planck = historical.planck_density(nu, T, const)
    rj = historical.rayleigh_jeans(nu, T, const)
    w = historical.wien(nu, T, a, b)
    r = RunResult()
    r.outputs["blackbody"] = write_csv(out / "blackbody.csv", ["nu", "T", "planck", "rayleigh_jeans", "wien"],
                                       ((n, T, p, q, x) for n, p, q, x in zip(nu, planck, rj, w)))
    k = int(np.argmax(planck))
    r.results = {"peak_nu": float(nu[k]), "planck_le_rj": bool(np.all(planck <= rj))}
    r.lines = [f"peak_nu {_g(nu[k])}"]
    return r


BOHR = {
    **CONSTANTS,
    "n_max": Field(positive(int), 6, "highest level"),
    "seed": SEED,
}


def run_bohr(cfg, out: Path) -> RunResult:
    const = _constants(cfg)
    levels = [(n, historical.bohr_level(n, const)) for n in range(1, cfg["n_max"] + 1)]
    r = RunResult()
    r.outputs["levels"] = write_csv(out / "levels.csv", ["n", "energy", "energy_over_e"],
                                    [(n, e, e / const.e) for n, e in levels])
    lines = [(n, m, historical.emission_frequency(n, m, const), str(historical.line_weight(n, m)))
             for n in range(2, cfg["n_max"] + 1) for m in range(1, n)]
    r.outputs["lines"] = write_csv(out / "lines.csv", ["n", "m", "frequency", "weight"], lines)
    e1 = levels[0][1]
    r.results = {"E1": e1, "E1_over_e": e1 / const.e}
    r.lines = [f"E1 {_g(e1)}", f"E1_over_e {_g(e1 / const.e)}"]
    return r


@dataclass(frozen=True)
class Command:
    schema: dict[str, Field]
    run: Callable[[dict, Path], RunResult]
    help: str


COMMANDS: dict[str, Command] = {
    "malus-fit": Command(MALUS_FIT, run_malus_fit, "fit a response curve to a Malus target"),
    "malus-feasibility": Command(MALUS_FEAS, run_malus_feasibility, "Fourier feasibility of a Malus target"),
    "epr-sim": Command(EPR_SIM, run_epr_sim, "hidden-variable coincidence experiment"),
    "interchange-gap": Command(GAP, run_interchange_gap, "shared vs redrawn impact parameters"),
    "chsh-bounds": Command(CHSH, run_chsh_bounds, "Bell-combination bounds per operator model"),
    "phase-op": Command(PHASE_OP, run_phase_op, "phase operator identities in a truncated Fock space"),
    "doubled-space": Command(DOUBLED, run_doubled_space, "doubled space checks and phase winding"),
    "evolve": Command(EVOLVE, run_evolve, "free wavepacket trajectory with <R> and <T>"),
    "oscillator-phase": Command(OSC, run_oscillator_phase, "coherent-state phase trajectory"),
    "resonance": Command(RESONANCE, run_resonance, "In -> resonance -> Out occupations"),
    "blackbody": Command(BLACKBODY, run_blackbody, "Planck, Rayleigh-Jeans and Wien densities"),
    "bohr": Command(BOHR, run_bohr, "hydrogen levels and line frequencies"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hvq", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    for name, cmd in COMMANDS.items():
        keys = "\n".join(f"  {k} (default {f.default!r}): {f.help}" for k, f in cmd.schema.items())
        p = sub.add_parser(name, help=cmd.help, description=f"{cmd.help}\n\nkeys:\n{keys}",
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("assignments", nargs="*", metavar="key=value")
        p.add_argument("--config", type=Path, help="flat key = value file")
        p.add_argument("--out", type=Path, help=f"output directory (default ${OUTPUT_ENV}/<subcommand>)")
    return parser


def output_dir(command: str, explicit: Path | None) -> Path:
    if explicit is not None:
        return explicit
    return Path(os.environ.get(OUTPUT_ENV, "hvq-output")) / command


def _jsonable(value):
    if isinstance(value, Path):
        return str(value)
    if hasattr(value, "item"):
        return value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    raise TypeError(f"not serializable: {type(value).__name__}")


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item"):
        return _clean(value.item())
    return value


def write_manifest(out: Path, command: str, cfg: dict, result: RunResult | None, error: str | None = None) -> Path:
    manifest = {
        "command": command,
        "version": __version__,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "status": "ok" if error is None else "failed",
        "config": _clean(cfg),
        "outputs": {k: p.name for k, p in (result.outputs.items() if result else [])},
        "results": _clean(result.results) if result else {},
    }
    if error is not None:
        manifest["error"] = error
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cmd = COMMANDS[args.command]
    try:
        file_pairs = read_config_file(args.config) if args.config else {}
        cli_pairs = parse_assignments(args.assignments, "<command line>")
        cfg = resolve(cmd.schema, file_pairs, cli_pairs)
    except ConfigError as exc:
        print(f"hvq {args.command}: configuration error: {exc}", file=sys.stderr)
        return 2
    out = output_dir(args.command, args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        result = cmd.run(cfg, out)
    except ConfigError as exc:
        print(f"hvq {args.command}: configuration error: {exc}", file=sys.stderr)
        return 2
    except (HVQError, ValueError, ArithmeticError, OSError) as exc:
        print(f"hvq {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        if out.is_dir():
            write_manifest(out, args.command, cfg, None, f"{type(exc).__name__}: {exc}")
        return 1
    write_manifest(out, args.command, cfg, result)
    for line in result.lines:
        print(line)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
