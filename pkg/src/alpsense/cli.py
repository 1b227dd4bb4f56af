"""``alp`` command line: budgets, optimization, curves, simulations, oracles."""
import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .config import CONVENTIONS, default_config, load_config_file
from .errors import ConvergenceError, DomainError, IntegrationError, NoEquilibriumError, ValidationError

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


@dataclass
class CommandResult:
    exit_code: int = 0
    artifacts: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _common(p):
    p.add_argument("--config", help="config file (default: $ALP_CONFIG)")
    p.add_argument("--json", action="store_true", help="print the summary as JSON")
    p.add_argument("--convention", choices=CONVENTIONS, help="thermal / background prefactor convention")


def build_parser():
    ap = _Parser(prog="alp", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("budget", help="force-noise budget and coupling limit")
    _common(p)
    p.add_argument("--t1", type=float, help="spin relaxation time, s")
    p.add_argument("--lambda", dest="lam", type=float, help="interaction range, m")
    p.add_argument("--out", default="budget.csv")
    p.add_argument("--t1-curve", help="also write limit vs T1 to this CSV (+ plot script)")

    p = sub.add_parser("budget-geometry", help="spin-source tolerance budget")
    _common(p)
    p.add_argument("--out", default="budget_geometry.csv")
    p.add_argument("--target", type=float, default=1e-23)

    p = sub.add_parser("optimize", help="null the spin-induced magnetic force")
    _common(p)
    p.add_argument("--target", type=float, default=1e-23)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="optimize.json")

    p = sub.add_parser("exclusion", help="coupling limit vs interaction range")
    _common(p)
    p.add_argument("--lambda-min", type=float, default=0.5e-6)
    p.add_argument("--lambda-max", type=float, default=50e-6)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--t1", type=float)
    p.add_argument("--worst-case", action="store_true")
    p.add_argument("--zeta-method", choices=("closed", "bruteforce"), default="closed")
    p.add_argument("--out", default="exclusion.csv")

    p = sub.add_parser("trap", help="trap potential, equilibrium and depth")
    _common(p)
    p.add_argument("--out", default="trap_profile.csv")
    p.add_argument("--no-casimir", action="store_true")

    p = sub.add_parser("gtilde", help="modulation spectrum, closed form and quadrature")
    _common(p)
    p.add_argument("--t1", type=float)
    p.add_argument("--omega-z", type=float)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--out", default="gtilde.csv")

    p = sub.add_parser("zeta-sm", help="spin-mass effective volume")
    _common(p)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--brute-force", action="store_true")

    p = sub.add_parser("simulate", help="one Langevin trajectory")
    _common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration", type=float, default=60.0)
    p.add_argument("--inject-g", type=float, default=0.0)
    p.add_argument("--gamma-scale", type=float, default=1e4)
    p.add_argument("--decimation", type=int, default=1)
    p.add_argument("--out", default="traj.csv")

    p = sub.add_parser("montecarlo", help="recovered amplitudes over many seeds")
    _common(p)
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--duration", type=float, default=60.0)
    p.add_argument("--inject-g", type=float, default=0.0)
    p.add_argument("--gamma-scale", type=float, default=1e4)
    p.add_argument("--summary", default="montecarlo.json")

    p = sub.add_parser("validate", help="run the oracle-equivalence suites")
    _common(p)
    p.add_argument("--suite", action="append", help="restrict to a suite (repeatable)")
    return ap


def _load(args):
    path = args.config or os.environ.get("ALP_CONFIG")
    cfg = load_config_file(path) if path else default_config()
    if getattr(args, "convention", None):
        cfg = cfg.replace(convention=args.convention)
    return cfg


def _meta(cfg, command, **extra):
    m = {"command": command, "config_hash": cfg.config_hash, "convention": cfg.convention}
    m.update(extra)
    return m


def _plot(csv_path, kind):
    from .io import emit_plot_script

    path = os.path.splitext(csv_path)[0] + "_plot.py"
    with open(path, "w") as fh:
        fh.write(emit_plot_script(csv_path, kind))
    return path


def cmd_budget(args, cfg):
    from .io import write_outputs
    from .noise import build_budget, g_limit_vs_T1

    b = build_budget(cfg, lam=args.lam, T1=args.t1)
    summary = {"lambda_m": b.lam, "T1_s": b.T1, "g_limit": b.g_total, "convention": b.convention_tag,
               "delta_F_s_N": b.delta_F_s, "F_s_N": b.F_s, "gtilde_s": b.gtilde_res,
               "g_chain_reference_delta_F_s": b.g_contributions["chain_reference_delta_F_s"], "notes": b.notes}
    res = CommandResult(summary=summary)
    notes = {f"note_{i + 1}": n for i, n in enumerate(b.notes)}
    res.artifacts += write_outputs(b.rows(), args.out, _meta(cfg, "budget", lambda_m=b.lam, T1_s=b.T1, **notes),
                                   summary=summary)
    if args.t1_curve:
        T1 = np.geomspace(1e-5, 10, 121)
        c = g_limit_vs_T1(cfg, T1, lam=args.lam)
        rows = [{"T1_s": t, "fluctuation": f, "background": g, "total": s}
                for t, f, g, s in zip(c["T1"], c["fluctuation"], c["background"], c["total"])]
        res.artifacts += write_outputs(rows, args.t1_curve, _meta(cfg, "budget --t1-curve"),
                                       summary={"crossover_T1_s": c["crossover_T1"]})
        res.artifacts.append(_plot(args.t1_curve, "T1"))
    res.warnings += b.notes
    return res, f"g_limit = {b.g_total:.3g} at lambda = {b.lam:.3g} m, T1 = {b.T1:g} s ({b.convention_tag})"


def cmd_budget_geometry(args, cfg):
    from .background import nulled_budget
    from .io import write_outputs

    bud, rep, geo = nulled_budget(cfg, target=args.target)
    summary = {"zeta_s_m3": bud.zeta_s, "F_s_N": bud.F_s, "total_delta_zeta_m3": bud.total_delta_zeta,
               "total_delta_F_N": bud.total_delta_F, "convention": bud.convention, "nulled_geometry_m": rep.optimized,
               "optimizer_converged": rep.converged}
    res = CommandResult(summary=summary)
    res.artifacts += write_outputs(bud.table(), args.out, _meta(cfg, "budget-geometry"), summary=summary)
    if not rep.converged:
        res.warnings.append("geometry did not reach the nulling target")
    return res, f"total delta zeta_s = {bud.total_delta_zeta:.3g} m^3, delta F_s = {bud.total_delta_F:.3g} N"


def cmd_optimize(args, cfg):
    from .background import optimize_geometry

    rep = optimize_geometry(cfg.source, target=args.target, R=cfg.sphere.radius, trap=cfg.trap, seed=args.seed)
    doc = asdict(rep)
    doc["config_hash"] = cfg.config_hash
    with open(args.out, "w") as fh:
        json.dump(doc, fh, indent=1)
    res = CommandResult(artifacts=[args.out], summary=doc)
    if not rep.converged:
        res.warnings.append("no restart reached the target")
    return res, f"|zeta_s| = {rep.achieved:.3g} m^3 after {rep.iterations} evaluations (converged={rep.converged})"


def cmd_exclusion(args, cfg):
    from .io import write_outputs
    from .noise import exclusion_curve

    if args.points < 1:
        raise ValidationError("points", "must be >= 1")
    lam = np.geomspace(args.lambda_min, args.lambda_max, args.points)
    cur = exclusion_curve(cfg, lam, T1=args.t1, worst_case=args.worst_case, zeta_method=args.zeta_method)
    meta = _meta(cfg, "exclusion", T1_s=cur.T1, delta_F_s_N=cur.delta_F_s,
                 delta_F_s_provenance=cur.delta_F_s_provenance, zeta_method=cur.zeta_method)
    res = CommandResult(summary={"points": len(lam), "g_min": float(cur.g_limit.min())})
    res.artifacts += write_outputs(cur.rows(), args.out, meta)
    res.artifacts.append(_plot(args.out, "exclusion"))
    return res, f"{len(lam)} points, min g_limit = {cur.g_limit.min():.3g}"


def cmd_trap(args, cfg):
    from .io import write_outputs
    from .trap import calibrate_trap, resonance_and_depth

    model = calibrate_trap(cfg, include_casimir=not args.no_casimir)
    prof = resonance_and_depth(model, B_pm=cfg.trap.B_pm)
    rows = [{"z_m": float(z), "E_p_J": float(e), "dE_dz_N": float(model.force_gradient(z))}
            for z, e in zip(prof.z, prof.E_p)]
    kT = 1.380649e-23 * cfg.env.temperature
    summary = {"z_eq_m": prof.z_eq, "omega_z_rad_s": prof.omega_z, "depth_J": prof.depth,
               "depth_over_kT": prof.depth / kT, "depth_ok": prof.depth >= 100 * kT,
               "B_ext_calibrated_T": prof.B_ext, "field_curvature_T_m2": model.curvature,
               "depth_target_J": cfg.trap.depth_target}
    res = CommandResult(summary=summary)
    res.artifacts += write_outputs(rows, args.out, _meta(cfg, "trap"), summary=summary)
    if not summary["depth_ok"]:
        res.warnings.append("trap depth below 100 k_B T")
    return res, f"omega_z = {prof.omega_z:.6g} rad/s, depth = {prof.depth:.3g} J ({prof.depth / kT:.3g} k_B T)"


def cmd_gtilde(args, cfg):
    from .io import write_outputs
    from .modulation import gtilde, gtilde_numeric

    wz = args.omega_z or cfg.trap.omega_z
    T1 = args.t1 or cfg.T1
    w = np.linspace(0.1 * wz, 10 * wz, args.points)
    a = gtilde(w, T1, math.pi / wz)
    b = gtilde_numeric(w, T1, math.pi / wz)
    rows = [{"omega_rad_s": x, "G_closed_s": y, "G_numeric_s": z} for x, y, z in zip(w, a, b)]
    res = CommandResult()
    res.artifacts += write_outputs(rows, args.out, _meta(cfg, "gtilde", T1_s=T1, omega_z=wz))
    err = float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-6 * np.abs(b).max())))
    res.summary = {"max_rel_diff": err}
    return res, f"G(omega_z) = {gtilde(wz, T1, math.pi / wz):.6g} s, max closed/numeric difference {err:.2g}"


def cmd_zeta_sm(args, cfg):
    from .spinmass import zeta_sm, zeta_sm_bruteforce

    lam = args.lam or cfg.lam
    z = zeta_sm(cfg.sphere.radius, cfg.source.d, lam)
    summary = {"lambda_m": lam, "zeta_sm_closed_m3": z}
    msg = f"zeta_sm(closed) = {z:.6g} m^3"
    if args.brute_force:
        v, e = zeta_sm_bruteforce(cfg.sphere.radius, cfg.source, lam)
        summary.update(zeta_sm_bruteforce_m3=v, error_estimate_m3=e, ratio=v / z)
        msg += f", brute force = {v:.6g} +/- {e:.2g} m^3 (ratio {v / z:.4f})"
    return CommandResult(summary=summary), msg


def _sim_config(args, cfg):
    from .langevin import SimulationConfig

    return SimulationConfig(duration=args.duration, seed=getattr(args, "seed", 0), gamma_scale=args.gamma_scale,
                            spin_mass=args.inject_g != 0, g_product=args.inject_g,
                            decimation=getattr(args, "decimation", 1))


def cmd_simulate(args, cfg):
    from .io import write_outputs
    from .langevin import recover_signal, simulate

    tr = simulate(_sim_config(args, cfg), cfg)
    est = recover_signal(tr)
    rows = [{"t_s": t, "z_m": z, "v_m_s": v} for t, z, v in zip(tr.t, tr.z, tr.v)]
    summary = {"seed": args.seed, "recovered_amplitude_N": float(est.amplitude), "error_N": est.error,
               "injected_amplitude_N": tr.meta["F_mod"], "z_rms_m": float(np.sqrt(np.mean(tr.z**2)))}
    res = CommandResult(summary=summary)
    res.artifacts += write_outputs(rows, args.out, _meta(cfg, "simulate", seed=args.seed,
                                                         gamma_scale=args.gamma_scale), summary=summary)
    return res, f"recovered {float(est.amplitude):.3g} +/- {est.error:.2g} N (injected {tr.meta['F_mod']:.3g} N)"


def cmd_montecarlo(args, cfg):
    from .langevin import monte_carlo

    mc = monte_carlo(_sim_config(args, cfg), cfg, n_seeds=args.seeds, base_seed=args.base_seed)
    counts, edges = mc.histogram
    doc = {"config_hash": cfg.config_hash, "convention": cfg.convention, "n_seeds": len(mc.seeds),
           "injected_N": mc.injected, "mean_N": mc.mean, "std_N": mc.std, "predicted_std_N": mc.predicted_std,
           "histogram_counts": counts.tolist(), "histogram_edges_N": edges.tolist(),
           "amplitudes_N": mc.amplitudes.tolist()}
    with open(args.summary, "w") as fh:
        json.dump(doc, fh, indent=1)
    return CommandResult(artifacts=[args.summary], summary={k: doc[k] for k in ("mean_N", "std_N", "predicted_std_N")}), \
        f"mean {mc.mean:.3g} N, std {mc.std:.3g} N (predicted {mc.predicted_std:.3g} N) over {len(mc.seeds)} seeds"


def cmd_validate(args, cfg):
    from .validate import SUITES, run_all

    names = args.suite or list(SUITES)
    for n in names:
        if n not in SUITES:
            raise ValidationError("suite", f"unknown suite {n!r}")
    results = run_all(names, cfg)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    res = CommandResult(exit_code=EXIT_DOMAIN if failed else EXIT_OK,
                        summary={"checks": len(results), "failed": len(failed)})
    return res, f"{len(results) - len(failed)}/{len(results)} oracle checks passed"


COMMANDS = {
    "budget": cmd_budget, "budget-geometry": cmd_budget_geometry, "optimize": cmd_optimize,
    "exclusion": cmd_exclusion, "trap": cmd_trap, "gtilde": cmd_gtilde, "zeta-sm": cmd_zeta_sm,
    "simulate": cmd_simulate, "montecarlo": cmd_montecarlo, "validate": cmd_validate,
}


def run(argv=None):
    """Parse ``argv``, dispatch, print a one-line summary and return a CommandResult."""
    try:
        args = build_parser().parse_args(argv)
    except _UsageError:
        return CommandResult(exit_code=EXIT_USAGE)
    except SystemExit as exc:  # --help / --version
        return CommandResult(exit_code=int(exc.code or 0))
    try:
        cfg = _load(args)
        res, msg = COMMANDS[args.command](args, cfg)
    except ValidationError as exc:
        print(f"alp {args.command}: invalid {exc}", file=sys.stderr)
        return CommandResult(exit_code=EXIT_DOMAIN)
    except (DomainError, ConvergenceError, IntegrationError, NoEquilibriumError, FileNotFoundError,
            PermissionError, IsADirectoryError) as exc:
        print(f"alp {args.command}: {exc}", file=sys.stderr)
        return CommandResult(exit_code=EXIT_DOMAIN)
    for w in res.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.json:
        print(json.dumps({"command": args.command, "exit_code": res.exit_code, "message": msg,
                          "artifacts": res.artifacts, "summary": res.summary}, default=float))
    else:
        print(msg)
    return res


def main(argv=None):
    sys.exit(run(argv).exit_code)


if __name__ == "__main__":
    main()
