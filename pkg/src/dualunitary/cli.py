"""Command-line interface.

Exit codes: 0 success, 1 validation failure, 2 I/O or configuration error.
All randomness derives from ``--seed`` through :mod:`dualunitary.seeding`,
so identical arguments give byte-identical output files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from dualunitary import channels, dynamics, gates, linalg, spectra
from dualunitary._io import atomic_write_text
from dualunitary.seeding import rng_for

EXIT_OK, EXIT_INVALID, EXIT_CONFIG = 0, 1, 2

EXTRA_CLASSES = ("dft", "qubit", "swap")


class ConfigError(Exception):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _matrix_payload(A):
    A = np.asarray(A)
    return {"re": A.real.tolist(), "im": A.imag.tolist()}


def _complex_payload(z):
    return [float(np.real(z)), float(np.imag(z))]


# -- argument helpers -----------------------------------------------------------


def _add_gate_args(p, required_q=True):
    p.add_argument("--q", type=int, required=required_q, help="local dimension")
    p.add_argument("--class", dest="gate_class", default="ergodic-mixing",
                   help="gate class: ergodic-mixing, non-ergodic, non-ergodic-noncommuting, "
                        "ergodic-nonmixing, non-interacting, prethermal, dft, qubit, swap")
    p.add_argument("--n", type=int, default=None, help="commuting charges (block construction)")
    p.add_argument("--m", type=int, default=0, help="equal leading rows of J")
    p.add_argument("--phi", type=float, default=0.0, help="offset between equal rows of J")
    p.add_argument("--epsilon", type=float, default=0.0, help="prethermal perturbation strength")
    p.add_argument("--thetas", type=float, nargs="+", default=None, help="shift-matrix phases")
    p.add_argument("--J", dest="J", type=float, default=None, help="coupling of the qubit gate")
    p.add_argument("--seed", type=int, default=0, help="master seed")


def _spec_from_args(args, epsilon=None) -> gates.GateSpec:
    cls = gates.normalize_class(args.gate_class)
    n = args.n
    if n is None:
        n = 1 if cls in gates._USES_BLOCKS else 0
    eps = args.epsilon if epsilon is None else epsilon
    try:
        return gates.GateSpec(args.q, cls, n=n, m=args.m, epsilon=eps, thetas=args.thetas,
                              phi=args.phi, seed=args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _gate_from_args(args):
    """Return ``(U, bundle_or_None, class_name)``."""
    cls = gates.normalize_class(args.gate_class)
    if cls == "dft":
        return gates.dft_kicked_gate(args.q), None, "dft"
    if cls == "qubit":
        if args.q != 2:
            raise ConfigError("the qubit gate needs --q 2")
        if args.J is None:
            raise ConfigError("the qubit gate needs --J")
        return gates.qubit_gate(args.J), None, "qubit"
    if cls == "swap":
        return linalg.swap_gate(args.q), None, "swap"
    bundle = gates.make_gate(_spec_from_args(args))
    return bundle.U, bundle, bundle.spec.gate_class


def _load_gate_file(path):
    try:
        U, meta = gates.load_gate(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read gate file {path}: {exc}") from exc
    return U, meta


def _resolve_gate(args):
    if getattr(args, "gate", None):
        U, meta = _load_gate_file(args.gate)
        return U, None, meta["class"]
    if args.q is None:
        raise ConfigError("give --gate FILE or --q with generator options")
    return _gate_from_args(args)


def _operator(choice, q, seed, index, kind):
    if choice == "random-density":
        return gates.random_density(q, rng_for(seed, "operator", index))
    if choice == "random-traceless":
        return gates.random_traceless(q, rng_for(seed, "operator", index))
    if choice == "identity":
        return np.eye(q, dtype=np.complex128)
    if choice == "maximally-mixed":
        return np.eye(q, dtype=np.complex128) / q
    try:
        data = json.loads(Path(choice).read_text())
        A = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot read {kind} operator {choice!r}: {exc}") from exc
    if A.shape != (q, q):
        raise ConfigError(f"{kind} operator must be {q}x{q}, got {A.shape}")
    return A


def _operators(args, q):
    rho = _operator(args.rho, q, args.seed, 0, "rho")
    sigma = _operator(args.sigma, q, args.seed, 1, "sigma")
    if args.unit_overlap:
        overlap = np.trace(rho @ sigma)
        if abs(overlap) < 1e-14:
            raise ConfigError("tr(rho sigma) vanishes; cannot normalize the overlap")
        sigma = sigma / overlap
    return rho, sigma


def _add_operator_args(p):
    p.add_argument("--rho", default="random-density",
                   help="random-density, maximally-mixed, identity or a JSON file {re, im}")
    p.add_argument("--sigma", default="random-traceless",
                   help="random-traceless, identity or a JSON file {re, im}")
    p.add_argument("--unit-overlap", action="store_true", help="rescale sigma so that tr(rho sigma) = 1")


def _finite_or_none(x):
    return None if x is None or not math.isfinite(x) else x


# -- commands -------------------------------------------------------------------


def cmd_gen(args) -> int:
    U, bundle, cls = _gate_from_args(args)
    out = Path(args.out)
    gates.save_gate(out, U, cls, args.seed)
    report = _verification(U)
    if bundle is not None:
        report["spec"] = bundle.spec.to_dict()
        report["svd_check"] = channels.channel_svd_check(bundle).passed
    atomic_write_text(out.with_name(out.stem + ".report.json"), _dumps(report))
    print(_dumps({"gate": str(out), "class": report.get("class"), "n_unit_one": report.get("n_unit_one")}), end="")
    return EXIT_OK


def _verification(U, tol=linalg.STRUCTURE_TOL):
    check = linalg.validate_gate(U, tol)
    report = check.to_dict()
    if check.unitary:
        M = channels.build_channel(U)
        report.update(channels.classify(M).to_dict())
        report["singular_values"] = sorted(channels.channel_singular_values(M).tolist(), reverse=True)
    return report


def cmd_verify(args) -> int:
    U, meta = _load_gate_file(args.gate_file)
    try:
        report = _verification(U, args.tol)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    report["file_class"] = meta["class"]
    print(_dumps(report), end="")
    return EXIT_OK if report["unitary"] and report["dual_unitary"] else EXIT_INVALID


def cmd_correlate(args) -> int:
    U, bundle, cls = _resolve_gate(args)
    if not linalg.validate_gate(U).unitary:
        print("gate is not unitary", file=sys.stderr)
        return EXIT_INVALID
    M = channels.build_channel(U, args.direction)
    q = M.q
    rho, sigma = _operators(args, q)
    series = dynamics.correlation_series(M, rho, sigma, args.t_max)
    steady = dynamics.steady_state(rho, M)
    lam_sub = channels.subleading_modulus(linalg.general_eigvals(M.matrix))
    try:
        tau = dynamics.decay_time_from_modulus(lam_sub)
    except ValueError:
        tau = None
    meta = {
        "class": cls,
        "spec": bundle.spec.to_dict() if bundle is not None else None,
        "seed": args.seed,
        "direction": args.direction,
        "t_max": args.t_max,
        "rho": args.rho,
        "sigma": args.sigma,
        "steady_value": _complex_payload(np.trace(steady @ sigma)),
        "thermal_value": _complex_payload(dynamics.thermal_value(sigma, q)),
        "subleading_modulus": lam_sub,
        "decay_time": tau,
    }
    if bundle is not None and bundle.analytic_charges is not None and bundle.spec.gate_class == "non_ergodic":
        gge = dynamics.gge_state(rho, bundle.analytic_charges, q, bundle.spec.n)
        meta["gge_value"] = _complex_payload(np.trace(gge.matrix @ sigma))
    out = Path(args.out)
    atomic_write_text(out, series.to_csv())
    atomic_write_text(out.with_suffix(".json"), _dumps(meta))
    if args.gnuplot:
        atomic_write_text(out.with_suffix(".gp"), _gnuplot_series([(out.name, "c(t,t)")], meta))
    return EXIT_OK


def cmd_gge(args) -> int:
    spec = _spec_from_args(args)
    if spec.gate_class not in ("non_ergodic", "prethermal") or spec.epsilon != 0.0:
        raise ConfigError("gge needs a non-ergodic gate (class non-ergodic, or prethermal at epsilon 0)")
    bundle = gates.make_gate(spec)
    rho = _operator(args.rho, spec.q, args.seed, 0, "rho")
    gge = dynamics.gge_state(rho, bundle.analytic_charges, spec.q, spec.n)
    M = channels.build_channel(bundle.U)
    limit = dynamics.iterate_channel(M, rho)
    payload = {
        "spec": spec.to_dict(),
        "mu_a": [_finite_or_none(m) for m in gge.mu_a],
        "mu": _finite_or_none(gge.mu),
        "weights": list(gge.weights),
        "residual_weight": gge.residual_weight,
        "matrix": _matrix_payload(gge.matrix),
        "charge_expectations": [_complex_payload(np.trace(rho @ c)) for c in bundle.analytic_charges],
        "iterated_limit_deviation": float(np.max(np.abs(limit - gge.matrix))),
    }
    text = _dumps(payload)
    if args.out:
        atomic_write_text(Path(args.out), text)
    else:
        print(text, end="")
    return EXIT_OK


def cmd_prethermal(args) -> int:
    base = _spec_from_args(args, epsilon=0.0)
    if base.gate_class != "prethermal":
        raise ConfigError("prethermal needs --class prethermal")
    rho, sigma = _operators(args, base.q)
    sweep = dynamics.prethermal_sweep(base, args.epsilons, rho, sigma, args.t_max)
    out_dir = Path(args.out_dir)
    runs = []
    for run in sweep.runs:
        name = f"series_eps{run.epsilon:g}.csv"
        atomic_write_text(out_dir / name, run.series.to_csv())
        runs.append({
            "epsilon": run.epsilon,
            "file": name,
            "subleading_modulus": run.subleading_modulus,
            "decay_time": _finite_or_none(run.decay_time),
        })
    summary = {
        "spec": base.to_dict(),
        "seed": args.seed,
        "t_max": args.t_max,
        "gge_value": _complex_payload(sweep.gge_value),
        "thermal_value": _complex_payload(sweep.thermal_value),
        "runs": runs,
    }
    atomic_write_text(out_dir / "summary.json", _dumps(summary))
    if args.gnuplot:
        curves = [(r["file"], f"eps={r['epsilon']:g}") for r in runs]
        atomic_write_text(out_dir / "plot.gp", _gnuplot_series(curves, summary, logx=True,
                                                               markers=[r["decay_time"] for r in runs]))
    return EXIT_OK


def cmd_levelstats(args) -> int:
    eps_list = args.epsilons or [args.epsilon]
    reports = []
    for eps in eps_list:
        spec = _spec_from_args(args, epsilon=eps)
        try:
            circuit = spectra.CircuitSpec(spec.q, args.L, gate_spec=spec, realizations=args.realizations,
                                          seed=args.seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        rep = spectra.ensemble_mean_r(circuit, method=args.method).to_dict()
        if spec.gate_class == "prethermal":
            rep["epsilon"] = eps
        reports.append(rep)
    payload = reports[0] if len(reports) == 1 else reports
    text = _dumps(payload)
    if args.out:
        atomic_write_text(Path(args.out), text)
    else:
        print(text, end="")
    return EXIT_OK


def _gnuplot_series(curves, meta, logx=False, markers=()):
    lines = ["set datafile separator ','", "set key autotitle columnhead", "set xlabel 't'",
             "set ylabel 'Re c(t,t)'"]
    if logx:
        lines.append("set logscale x")
    for key in ("thermal_value", "gge_value"):
        if meta.get(key) is not None:
            lines.append(f"{key} = {meta[key][0]!r}")
    for k, tau in enumerate(markers):
        if tau is not None:
            lines.append(f"set arrow {k + 1} from {tau!r}, graph 0 to {tau!r}, graph 1 nohead dashtype 2")
    plots = [f"'{f}' using 1:2 with lines title '{title}'" for f, title in curves]
    for key in ("thermal_value", "gge_value"):
        if meta.get(key) is not None:
            plots.append(f"{key} with lines dashtype 3 title '{key.split('_')[0]}'")
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualunitary", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a gate file and its ergodicity report")
    _add_gate_args(p)
    p.add_argument("--out", required=True, help="gate JSON path")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="check (dual-)unitarity and classify a gate file")
    p.add_argument("gate_file")
    p.add_argument("--tol", type=float, default=linalg.STRUCTURE_TOL)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("correlate", help="light-cone correlation series c(t,t)")
    _add_gate_args(p, required_q=False)
    p.add_argument("--gate", help="gate JSON file (overrides the generator options)")
    _add_operator_args(p)
    p.add_argument("--direction", choices=("plus", "minus"), default="plus")
    p.add_argument("--t-max", type=int, default=dynamics.DEFAULT_T_MAX)
    p.add_argument("--out", required=True, help="CSV path; metadata goes next to it as .json")
    p.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("gge", help="GGE steady state of a non-ergodic gate")
    _add_gate_args(p)
    p.add_argument("--rho", default="random-density")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gge)

    p = sub.add_parser("prethermal", help="correlation series for a sweep of perturbation strengths")
    _add_gate_args(p)
    _add_operator_args(p)
    p.add_argument("--epsilons", type=float, nargs="+", required=True)
    p.add_argument("--t-max", type=int, default=dynamics.DEFAULT_T_MAX)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--gnuplot", action="store_true")
    p.set_defaults(func=cmd_prethermal, gate_class="prethermal")

    p = sub.add_parser("levelstats", help="mean level-spacing ratio of random periodic circuits")
    _add_gate_args(p)
    p.add_argument("--L", type=int, default=6)
    p.add_argument("--realizations", type=int, default=100)
    p.add_argument("--epsilons", type=float, nargs="+", default=None, help="sweep of prethermal strengths")
    p.add_argument("--method", choices=("eig", "cayley"), default="eig")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_levelstats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
