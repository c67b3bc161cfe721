"""Experiment runner: seeded, reproducible figure-class datasets.

Every command writes CSV (with '#' metadata header lines echoing the
configuration and seed) or JSON; identical configuration and seed give
byte-identical files.  Exit codes: 0 success, 2 configuration error,
3 resource-bound error.
"""

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, cv_qec, metrics, protocols, pulses, synthesis
from .errors import DomainError, GkpsimError, ResourceError
from .output import write_csv, write_json
from .states import approx_codeword, export_wavefunction_csv, export_wigner_csv

SQRT_PI = math.sqrt(math.pi)


def _thread_count(args):
    # GKPSIM_THREADS overrides the flag; default is the logical core count
    env = os.environ.get("GKPSIM_THREADS")
    if env is not None:
        return max(1, int(env))
    if getattr(args, "threads", None):
        return max(1, args.threads)
    return os.cpu_count() or 1


def _meta(args, **extra):
    cfg = {k: v for k, v in sorted(vars(args).items())
           if k not in ("func", "out") and v is not None}
    meta = {"command": args.command, "config": cfg}
    meta.update(extra)
    return meta


# -- commands -----------------------------------------------------------


def cmd_table(args):
    table = protocols.build_feedback_table(args.depth)
    write_csv(args.out, ["history_bits", "phi_radians"], list(table.rows()),
              meta=_meta(args))
    return 0


def cmd_survey(args):
    res = protocols.deviation_survey(args.protocol, args.rounds, args.samples,
                                     args.seed)
    rows = list(zip(res.epsilon, res.survival))
    write_csv(args.out, ["epsilon", "survival"], rows, meta=_meta(args))
    return 0


def cmd_histogram(args):
    hist = protocols.error_histogram(args.protocol, args.rounds,
                                     bin_width=args.bin)
    rows = [(left, left + hist.bin_width, p)
            for left, p in zip(hist.bin_left, hist.probability)]
    rows.append((0.1, 1.0, hist.overflow))
    write_csv(args.out, ["bin_left", "bin_right", "probability"], rows,
              meta=_meta(args, below_1pct=f"{hist.below_threshold:.17g}"))
    return 0


def cmd_photons(args):
    proto = protocols.normalize_protocol(args.protocol)
    step = 2 if proto == "nonadaptive" else 1
    rows = []
    for m in range(step, args.rounds + 1, step):
        mean, std = synthesis.average_photons_over_theta(proto, m, args.delta)
        rows.append((m, mean, std))
    write_csv(args.out, ["M", "mean", "std"], rows, meta=_meta(args))
    return 0


def cmd_squeeze(args):
    start, stop, step = (float(x) for x in args.sweep_db.split(":"))
    rows = []
    db = start
    while db <= stop + 1e-12:
        delta = metrics.delta_from_db(db) if db > 0 else 1.0
        rows.append((db, delta, metrics.squeezed_vac_error(delta),
                     metrics.squeezed_vac_photons(delta)))
        db += step
    write_csv(args.out, ["db", "delta", "p_error", "n_photons"], rows,
              meta=_meta(args))
    return 0


def cmd_expand(args):
    from .expansion import expand_annihilation, fock_residual_norm, split_correctable

    exp = expand_annihilation(args.delta, args.order)
    good, _ = split_correctable(exp)
    good_keys = {(t.axis, t.step_index) for t in good.terms}
    rows = [(t.axis, t.step_index, t.coeff.real, t.coeff.imag,
             int((t.axis, t.step_index) in good_keys)) for t in exp.terms]
    resid = fock_residual_norm(exp, args.nmax)
    write_csv(args.out, ["axis", "step_index", "re", "im", "correctable_flag"],
              rows, meta=_meta(args, residual_norm=f"{resid:.17g}",
                               base_step_quadrature=f"{exp.metadata['base_step_quadrature']:.17g}"))
    return 0


def cmd_qec(args):
    res = cv_qec.run_qec_simulation(args.rounds, args.bound, args.seed)
    rows = list(zip(res.measured_q, res.measured_p, res.residual_u,
                    res.residual_v, res.logical_flag))
    write_csv(args.out,
              ["measured_q", "measured_p", "residual_u", "residual_v", "logical_flag"],
              rows, meta=_meta(args, logical_errors=res.logical_errors))
    return 0


def cmd_pulse(args):
    chi = 2.0 * math.pi * args.chi_mhz * 1e6
    omega_r = 2.0 * math.pi * args.omega_r_ghz * 1e9
    T = math.pi / chi
    pulse = pulses.PulseSpec(omega_x=0.0, omega_y=-2.0 * args.target_gamma / T,
                             T=T, omega_d=omega_r + chi)
    params = pulses.DispersiveParams(omega_r=omega_r, chi=chi)
    summary = pulses.controlled_displacement_summary(params, pulse)
    record = {
        "T_ns": T * 1e9,
        "omega_y_rad_per_s": pulse.omega_y,
        "gamma_plus": [summary["gamma_plus"].real, summary["gamma_plus"].imag],
        "gamma_minus": [summary["gamma_minus"].real, summary["gamma_minus"].imag],
        "leakage_ratio": summary["leakage_ratio"],
        "relative_rotation": summary["relative_rotation"],
        "psi_relative": summary["psi_relative"],
        "rotation_condition_pass": summary["rotation_condition_pass"],
        # engineering arithmetic, not simulation output
        "timing": {
            "t_meas_ns": args.t_meas_ns,
            "T_round_ns": T * 1e9 + args.t_meas_ns,
            "rounds": args.rounds,
            "T_pe_us": (T * 1e9 + args.t_meas_ns) * args.rounds / 1e3,
        },
        "nonlinearity_budget": {
            "kerr_khz": args.kerr_khz,
            "epsilon": 2.0 * math.pi * args.kerr_khz * 1e3
            * (T * 1e9 + args.t_meas_ns) * args.rounds * 1e-9,
            "n_max": args.nmax,
            "epsilon_nmax_sq": 2.0 * math.pi * args.kerr_khz * 1e3
            * (T * 1e9 + args.t_meas_ns) * args.rounds * 1e-9 * args.nmax**2,
        },
    }
    write_json(args.out, record, meta=_meta(args))
    return 0


def cmd_reproduce_all(args):
    out = args.out
    os.makedirs(out, exist_ok=True)
    seed = args.seed

    def fig1():
        qs = np.round(np.arange(-10.0, 10.0 + 1e-9, 0.01), 10)
        for bit in (0, 1):
            export_wavefunction_csv(
                approx_codeword(0.2, bit), qs, os.path.join(out, f"fig1_codeword{bit}.csv"),
                meta={"command": "reproduce-all", "figure": 1, "delta": 0.2, "bit": bit})

    def fig2():
        grid = np.round(np.linspace(-6.0, 6.0, 61), 10)
        for delta in (0.5, 0.2):
            tag = str(delta).replace(".", "")
            export_wigner_csv(
                approx_codeword(delta, 0), grid, grid,
                os.path.join(out, f"fig2_wigner_d{tag}.csv"),
                meta={"command": "reproduce-all", "figure": 2, "delta": delta})

    def fig5(protocol, m):
        res = protocols.deviation_survey(protocol, m, args.samples, seed)
        write_csv(os.path.join(out, f"fig5_{protocol}_M{m}.csv"),
                  ["epsilon", "survival"], list(zip(res.epsilon, res.survival)),
                  meta={"command": "reproduce-all", "figure": 5,
                        "protocol": protocol, "rounds": m, "seed": seed,
                        "samples": args.samples})

    def fig7():
        rows = []
        for i in range(201):
            db = 0.1 * i
            delta = metrics.delta_from_db(db) if db > 0 else 1.0
            rows.append((db, delta, metrics.squeezed_vac_error(delta),
                         metrics.squeezed_vac_photons(delta)))
        write_csv(os.path.join(out, "fig7.csv"),
                  ["db", "delta", "p_error", "n_photons"], rows,
                  meta={"command": "reproduce-all", "figure": 7})

    def fig9(protocol):
        step = 2 if protocol == "pe" else 1
        rows = []
        for m in range(step, 9, step):
            mean, std = synthesis.average_photons_over_theta(protocol, m, 0.2)
            rows.append((m, mean, std))
        write_csv(os.path.join(out, f"fig9_{protocol}.csv"), ["M", "mean", "std"],
                  rows, meta={"command": "reproduce-all", "figure": 9,
                              "protocol": protocol, "delta": 0.2})

    def fig12(protocol):
        hist = protocols.error_histogram(protocol, 8, bin_width=0.002)
        rows = [(left, left + hist.bin_width, p)
                for left, p in zip(hist.bin_left, hist.probability)]
        rows.append((0.1, 1.0, hist.overflow))
        write_csv(os.path.join(out, f"fig12_{protocol}_M8.csv"),
                  ["bin_left", "bin_right", "probability"], rows,
                  meta={"command": "reproduce-all", "figure": 12,
                        "protocol": protocol, "rounds": 8,
                        "below_1pct": f"{hist.below_threshold:.17g}"})

    def qec():
        res = cv_qec.run_qec_simulation(100000, 0.99 * SQRT_PI / 6.0, seed)
        rows = list(zip(res.measured_q, res.measured_p, res.residual_u,
                        res.residual_v, res.logical_flag))
        write_csv(os.path.join(out, "qec.csv"),
                  ["measured_q", "measured_p", "residual_u", "residual_v",
                   "logical_flag"], rows,
                  meta={"command": "reproduce-all", "rounds": 100000,
                        "bound": 0.99 * SQRT_PI / 6.0, "seed": seed,
                        "logical_errors": res.logical_errors})

    def pulse():
        ns = argparse.Namespace(
            command="pulse", chi_mhz=2.5, omega_r_ghz=10.0,
            target_gamma=math.sqrt(2.0 * math.pi), t_meas_ns=300.0, rounds=8,
            kerr_khz=4.0, nmax=25, out=os.path.join(out, "pulse.json"), func=None)
        cmd_pulse(ns)

    tasks = [fig1, fig2, fig7, qec, pulse,
             lambda: fig5("pe", 4), lambda: fig5("pe", 8),
             lambda: fig5("ape", 4), lambda: fig5("ape", 8),
             lambda: fig9("pe"), lambda: fig9("ape"),
             lambda: fig12("pe"), lambda: fig12("ape")]
    workers = _thread_count(args)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda f: f(), tasks))
    else:
        for f in tasks:
            f()
    return 0


# -- parser -------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(
        prog="gkpsim",
        description="GKP code-state preparation and analysis by phase estimation")
    p.add_argument("--version", action="version", version=f"gkpsim {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table", help="build an adaptive feedback lookup table")
    t.add_argument("--depth", type=int, required=True)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_table)

    s = sub.add_parser("survey", help="deviation survival curve over random phases")
    s.add_argument("--protocol", choices=["pe", "ape", "spe"], required=True)
    s.add_argument("--rounds", type=int, required=True)
    s.add_argument("--samples", type=int, default=100000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_survey)

    h = sub.add_parser("histogram", help="exact error-rate histogram over outcomes")
    h.add_argument("--protocol", choices=["pe", "ape"], required=True)
    h.add_argument("--rounds", type=int, required=True)
    h.add_argument("--bin", type=float, default=0.002)
    h.add_argument("--out", required=True)
    h.set_defaults(func=cmd_histogram)

    n = sub.add_parser("photons", help="photon budget versus round count")
    n.add_argument("--protocol", choices=["pe", "ape"], required=True)
    n.add_argument("--rounds", type=int, required=True)
    n.add_argument("--delta", type=float, required=True)
    n.add_argument("--out", required=True)
    n.set_defaults(func=cmd_photons)

    q = sub.add_parser("squeeze", help="squeezing sweep: error rate and photons")
    q.add_argument("--sweep-db", default="0:20:0.1")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_squeeze)

    e = sub.add_parser("expand", help="shift expansion of sqrt(delta) a")
    e.add_argument("--delta", type=float, required=True)
    e.add_argument("--order", type=int, required=True)
    e.add_argument("--nmax", type=int, required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_expand)

    c = sub.add_parser("qec", help="Monte-Carlo Steane correction rounds")
    c.add_argument("--rounds", type=int, required=True)
    c.add_argument("--bound", type=float, required=True)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_qec)

    u = sub.add_parser("pulse", help="controlled-displacement pulse report")
    u.add_argument("--chi-mhz", type=float, default=2.5)
    u.add_argument("--omega-r-ghz", type=float, default=10.0)
    u.add_argument("--target-gamma", type=float, default=math.sqrt(2.0 * math.pi))
    u.add_argument("--t-meas-ns", type=float, default=300.0)
    u.add_argument("--rounds", type=int, default=8)
    u.add_argument("--kerr-khz", type=float, default=4.0)
    u.add_argument("--nmax", type=int, default=25)
    u.add_argument("--out", required=True)
    u.set_defaults(func=cmd_pulse)

    r = sub.add_parser("reproduce-all", help="emit every figure-class dataset")
    r.add_argument("--out", default="figures")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--samples", type=int, default=100000)
    r.add_argument("--threads", type=int)
    r.set_defaults(func=cmd_reproduce_all)

    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResourceError as exc:
        print(f"gkpsim: resource bound exceeded: {exc}", file=sys.stderr)
        return 3
    except (GkpsimError, ValueError) as exc:
        print(f"gkpsim: invalid configuration: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
