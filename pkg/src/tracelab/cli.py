"""Command-line driver: every experiment as a subcommand with
machine-readable output.

Reports are JSON with a deterministic body: floats are serialized with 17
significant digits, keys are sorted, and the only nondeterministic fields
(timestamp, versions) live in a separate "meta" object that can be dropped
with --no-meta.  Identical config + seed therefore give byte-identical
report bodies.  CSV output flattens the same content into rows; --plot-data
writes plain two/three-column text.

Exit codes: 0 success, 2 validation failure, 3 numeric failure (with a
diagnostic JSON object on stderr).
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from ._backend import backend_name
from .constants import (
    dual_exponent_identity,
    interp_constant,
    kappa_dual,
    kappa_standard,
    semiclassical_c_lt,
    sharp_constant,
)
from .errors import DomainError, InputError, NumericError, ValidationError
from .groundstate import gn_constant_dual, gn_constant_standard, one_bound_state_constant, shoot_ground_state, soliton_1d
from .interpolation import (
    legendre_pair,
    log_sobolev_constant_check,
    random_corpus_states,
    system_interp_check,
)
from .mixedstate import (
    MixedState,
    boltzmann_law,
    ck_lower_bound,
    cn_estimate,
    evolve_check,
    fermi_law,
    minimizer_state,
    orthogonal_energy_check,
    power_law_occupation,
)
from .potentials import Potential, gt_rhs, load_sampled
from .riesz import SolverConfig, harmonic_q, verify_trace_inequality, weight_pair, weyl_sweep
from .spectra import box_spectrum, dirichlet_solve, harmonic_spectrum, radial_solve

OUTDIR_ENV = "TRACELAB_OUTDIR"


# ---------------------------------------------------------------------------
# deterministic JSON rendering (17 significant digits, sorted keys)
# ---------------------------------------------------------------------------


def _render(obj, out):
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if np.isnan(x):
            out.append('"nan"')
        elif np.isinf(x):
            out.append('"inf"' if x > 0 else '"-inf"')
        else:
            out.append(format(x, ".17g"))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, k in enumerate(sorted(obj)):
            if i:
                out.append(",")
            out.append(json.dumps(str(k)))
            out.append(":")
            _render(obj[k], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        for i, item in enumerate(seq):
            if i:
                out.append(",")
            _render(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj)!r}")


def render_json(obj) -> str:
    out = []
    _render(obj, out)
    return "".join(out)


def _flatten(prefix, obj, row):
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten(f"{prefix}.{k}" if prefix else str(k), obj[k], row)
    elif isinstance(obj, (list, tuple)):
        for i, item in enumerate(obj):
            _flatten(f"{prefix}[{i}]", item, row)
    else:
        row[prefix] = obj


def render_csv(report) -> str:
    rows = report.get("rows")
    lines = []
    if rows:
        keys = sorted(rows[0])
        lines.append(",".join(keys))
        for r in rows:
            lines.append(",".join(_csv_cell(r.get(k)) for k in keys))
    else:
        flat = {}
        _flatten("", {k: v for k, v in report.items() if k != "rows"}, flat)
        keys = sorted(flat)
        lines.append(",".join(keys))
        lines.append(",".join(_csv_cell(flat[k]) for k in keys))
    return "\n".join(lines) + "\n"


def _csv_cell(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


# ---------------------------------------------------------------------------
# potential mini-language: kind:key=val,...
# ---------------------------------------------------------------------------


def parse_potential(text, d=1):
    """harmonic:A=1,B=0 | box:eps=0.01 | power:c=1,p=4 | sampled:file=V.txt"""
    kind, _, rest = text.partition(":")
    kv = {}
    if rest:
        for part in rest.split(","):
            key, _, val = part.partition("=")
            if not _:
                raise InputError(f"malformed potential parameter {part!r}")
            kv[key.strip()] = val.strip()
    try:
        if kind == "harmonic":
            return Potential.harmonic(float(kv.get("A", 1.0)), float(kv.get("B", 0.0)), d=d)
        if kind == "box":
            return Potential.box(float(kv["eps"]), d=d)
        if kind == "power":
            return Potential.power(float(kv.get("c", 1.0)), float(kv.get("p", 2.0)), d=d)
        if kind == "sampled":
            return load_sampled(kv["file"], d=d)
    except KeyError as exc:
        raise InputError(f"potential {kind!r} is missing parameter {exc}") from exc
    raise InputError(f"unknown potential kind {kind!r}")


def _parse_list(text):
    return [float(t) for t in text.split(",") if t.strip()]


# ---------------------------------------------------------------------------
# subcommand handlers: each returns (values, rows, plot_columns)
# ---------------------------------------------------------------------------


def _cmd_constants(args):
    gamma, d = args.gamma, args.d
    values = {
        "sharp_constant": sharp_constant(gamma, d, args.hbar, args.mass),
        "sharp_constant_reference_units": sharp_constant(gamma, d),
        "scaling_factor": (2.0 * args.mass / args.hbar**2) ** (d / 2.0),
        "semiclassical_c_lt": semiclassical_c_lt(gamma, d),
    }
    if gamma > max(0.0, 1.0 - d / 2.0):
        kp = kappa_standard(gamma, d)
        values["kappa_standard"] = {"kappa1": kp.kappa1, "kappa2": kp.kappa2, "q": kp.q}
        if args.c_lt is not None:
            values["interp_constant_standard"] = interp_constant("standard", gamma, d, c_lt=args.c_lt)
    if gamma > d / 2.0:
        kp = kappa_dual(gamma, d)
        lhs, rhs = dual_exponent_identity(gamma, d)
        values["kappa_dual"] = {"kappa1": kp.kappa1, "kappa2": kp.kappa2, "q": kp.q}
        values["dual_exponent_identity"] = {"lhs": lhs, "rhs": rhs}
        values["interp_constant_dual"] = interp_constant("dual", gamma, d)
    return values, None, None


def _spectrum_of_args(args, v):
    if v.kind == "box":
        return box_spectrum(v.eps, args.d, args.cutoff)
    if v.kind == "harmonic":
        return harmonic_spectrum(v.A, v.B, args.d, args.cutoff)
    if args.d == 1:
        return dirichlet_solve(v, args.n_eigs, args.n_grid)
    return radial_solve(v, args.d, args.n_eigs, args.n_grid, rmax=args.rmax, ell=args.ell)


def _cmd_spectrum(args):
    v = parse_potential(args.potential, d=args.d)
    s = _spectrum_of_args(args, v)
    values = {
        "eigenvalues": s.eigenvalues.tolist(),
        "multiplicities": s.multiplicities.tolist(),
        "truncation": s.truncation,
        "tail": s.tail.to_dict(),
    }
    rows = [
        {"index": i + 1, "eigenvalue": float(lam), "multiplicity": int(m)}
        for i, (lam, m) in enumerate(zip(s.eigenvalues, s.multiplicities))
    ]
    plot = [(r["index"], r["eigenvalue"]) for r in rows]
    return values, rows, plot


def _cmd_trace_verify(args):
    v = parse_potential(args.potential, d=args.d)
    fam = {"power": "power", "exp": "exponential", "exponential": "exponential", "fermi": "fermi"}.get(args.family)
    if fam is None:
        raise InputError(f"unknown weight family {args.family!r}")
    w = weight_pair(fam, args.gamma, args.d)
    config = SolverConfig(n_eigs=args.n_eigs, n_grid=args.n_grid, cutoff=args.cutoff)
    rep = verify_trace_inequality(v, w, config)
    return rep.to_dict(), None, None


def _cmd_weyl_sweep(args):
    eps_list = _parse_list(args.eps)
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            rows_nested = list(pool.map(lambda e: weyl_sweep(args.gamma, args.d, [e], tol=args.tol), eps_list))
        rows = [r for chunk in rows_nested for r in chunk]
    else:
        rows = weyl_sweep(args.gamma, args.d, eps_list, tol=args.tol)
    values = {"ratios": [r["ratio"] for r in rows], "final_ratio": rows[-1]["ratio"]}
    plot = [(r["eps"], r["ratio"]) for r in rows]
    return values, rows, plot


def _cmd_harmonic_q(args):
    svals = _parse_list(args.s)
    rows = [{"s": s, "q": harmonic_q(s, args.gamma, args.d)} for s in svals]
    values = {
        "max_q": max(r["q"] for r in rows),
        "all_below_one": all(r["q"] <= 1.0 for r in rows),
    }
    plot = [(r["s"], r["q"]) for r in rows]
    return values, rows, plot


def _cmd_gn_solve(args):
    rep = one_bound_state_constant(args.family, args.gamma, args.d)
    if args.family == "standard" and args.d == 1:
        q = rep.q
        state = soliton_1d(q)
    else:
        state = shoot_ground_state(rep.q, args.d)
    values = {
        "one_bound_state": rep.to_dict(),
        "ground_state": {
            "u0": state.u0,
            "support_radius": None if np.isinf(state.support_radius) else state.support_radius,
            "norms": state.norms,
            "residual": state.residual,
        },
    }
    if args.profile_out:
        state.export_text(args.profile_out)
        values["profile_file"] = args.profile_out
    plot = list(zip(state.r.tolist(), state.u.tolist()))
    return values, None, plot


def _law_from_name(name):
    if name == "boltzmann":
        return boltzmann_law()
    if name == "fermi":
        return fermi_law()
    if name.startswith("power:"):
        return power_law_occupation(float(name.split(":", 1)[1]))
    raise InputError(f"unknown occupation law {name!r}")


def _cmd_ck_check(args):
    law = _law_from_name(args.law)
    rng = np.random.default_rng(args.seed)
    worst = np.inf
    violations = 0
    hi = 1.0 if law.nu_max == np.inf else 0.98
    for _ in range(args.pairs):
        n = int(rng.integers(3, 12))
        a = rng.uniform(0.01, hi, size=n)
        b = rng.uniform(0.01, hi, size=n)
        rep = ck_lower_bound(np.sort(a)[::-1], np.sort(b)[::-1], law)
        slack = rep.bregman - rep.bound
        worst = min(worst, slack)
        if slack < -1e-12:
            violations += 1
    values = {"pairs": args.pairs, "min_slack": worst, "violations": violations, "p": law.ck_p, "alpha": law.ck_alpha}
    return values, None, None


def _cmd_ortho_check(args):
    v = parse_potential(args.potential, d=1)
    law = power_law_occupation(0.5)
    md = minimizer_state(law, v, args.n_modes, n_grid=args.n_grid, domain=(-args.half_width, args.half_width))
    rng = np.random.default_rng(args.seed)
    worst = np.inf
    for _ in range(args.trials):
        qmat, _ = np.linalg.qr(rng.standard_normal((args.n_modes, args.n_modes)))
        nu = np.sort(rng.uniform(0.05, 1.0, size=args.n_modes))[::-1]
        phis = np.sqrt(nu)[:, None] * (qmat @ md.wavefunctions)
        rep = orthogonal_energy_check(v, md.mesh, phis)
        worst = min(worst, rep.margin)
    values = {"trials": args.trials, "min_margin": worst, "passed": bool(worst >= -1e-8)}
    return values, None, None


def _cmd_evolve(args):
    v = parse_potential(args.potential, d=1)
    law = boltzmann_law()
    md = minimizer_state(law, v, 2, n_grid=args.n_grid, domain=(-args.half_width, args.half_width))
    if args.single_eigenstate:
        state = MixedState(md.mesh, np.array([1.0]), md.wavefunctions[:1].astype(complex))
    else:
        psi1 = (md.wavefunctions[0] + md.wavefunctions[1]) / np.sqrt(2.0)
        psi2 = (md.wavefunctions[0] - md.wavefunctions[1]) / np.sqrt(2.0)
        state = MixedState(md.mesh, np.array([0.6, 0.3]), np.vstack([psi1, psi2]).astype(complex))
    dt = args.dt if args.dt else 0.08 / float(md.levels[-1])
    rep = evolve_check(state, v, law, T=args.T, dt=dt)
    values = {
        "T": args.T,
        "dt": dt,
        "fe_drift": rep.fe_drift,
        "ortho_drift": rep.ortho_drift,
        "norm_drift": rep.norm_drift,
        "occupations_evolved": False,
    }
    rows = [{"t": float(t), "free_energy": float(f)} for t, f in zip(rep.times, rep.free_energies)]
    return values, rows, [(r["t"], r["free_energy"]) for r in rows]


def _cmd_cn_mono(args):
    reports = [cn_estimate(n, args.gamma, args.d) for n in range(1, args.n_max + 1)]
    rows = [{"n": r.n, "value": r.value, "family": r.best_family} for r in reports]
    vals = [r.value for r in reports]
    values = {
        "values": vals,
        "strictly_increasing": bool(all(b > a for a, b in zip(vals, vals[1:]))),
        "full_constant": sharp_constant(args.gamma, args.d),
    }
    return values, rows, [(r["n"], r["value"]) for r in rows]


def _cmd_interp_check(args):
    name = {"logsob": "log_sobolev", "logsob-sharp": "log_sobolev_sharp", "power-dual": "power_dual", "power-standard": "power_standard"}.get(args.pair)
    if name is None:
        raise InputError(f"unknown pair {args.pair!r}")
    pair = legendre_pair(name, args.gamma, args.d, c_lt=args.c_lt)
    nu_max = 1.0 if name == "power_standard" else None
    states = random_corpus_states(args.corpus, n_modes=args.n_modes, seed=args.seed, nu_max=nu_max)
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            reports = list(pool.map(lambda s: system_interp_check(s, pair), states))
    else:
        reports = [system_interp_check(s, pair) for s in states]
    gaps = [r.gap for r in reports]
    values = {
        "corpus": args.corpus,
        "min_gap": min(gaps),
        "mean_gap": float(np.mean(gaps)),
        "passed": bool(min(gaps) >= -1e-8),
    }
    if name == "power_standard":
        values["conditional_on_c_lt"] = args.c_lt
    rows = [{"state": i, "gap": g} for i, g in enumerate(gaps)]
    return values, rows, None


def _cmd_logsob(args):
    rep = log_sobolev_constant_check(args.d)
    return dict(rep), None, None


HANDLERS = {
    "constants": _cmd_constants,
    "spectrum": _cmd_spectrum,
    "trace-verify": _cmd_trace_verify,
    "weyl-sweep": _cmd_weyl_sweep,
    "harmonic-q": _cmd_harmonic_q,
    "gn-solve": _cmd_gn_solve,
    "ck-check": _cmd_ck_check,
    "ortho-check": _cmd_ortho_check,
    "evolve": _cmd_evolve,
    "cn-mono": _cmd_cn_mono,
    "interp-check": _cmd_interp_check,
    "logsob": _cmd_logsob,
}


def build_parser():
    p = argparse.ArgumentParser(prog="tracelab", description="Schrodinger trace-inequality laboratory")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="report file path (or set $TRACELAB_OUTDIR)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--no-meta", action="store_true", help="omit the timestamp/meta block")
        sp.add_argument("--plot-data", help="write plot-ready columns to this path")
        sp.add_argument("--config", help="key=value file supplying defaults for the flags")

    sp = sub.add_parser("constants", help="sharp constant, kappa pairs, interpolation constants")
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--hbar", type=float, default=1.0)
    sp.add_argument("--mass", type=float, default=0.5)
    sp.add_argument("--c-lt", type=float, default=None, dest="c_lt")
    common(sp)

    sp = sub.add_parser("spectrum", help="eigenvalues of -Delta + V")
    sp.add_argument("--potential", required=True)
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--n-eigs", type=int, default=10)
    sp.add_argument("--n-grid", type=int, default=2000)
    sp.add_argument("--cutoff", type=int, default=64)
    sp.add_argument("--rmax", type=float, default=None)
    sp.add_argument("--ell", type=int, default=0)
    common(sp)

    sp = sub.add_parser("trace-verify", help="both sides of the trace inequality")
    sp.add_argument("--potential", required=True)
    sp.add_argument("--family", required=True, help="power | exp | fermi")
    sp.add_argument("--gamma", type=float, default=None)
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--n-eigs", type=int, default=40)
    sp.add_argument("--n-grid", type=int, default=2000)
    sp.add_argument("--cutoff", type=int, default=4000)
    common(sp)

    sp = sub.add_parser("weyl-sweep", help="box-potential sharpness sweep")
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--eps", required=True, help="comma-separated eps values")
    sp.add_argument("--tol", type=float, default=1e-7)
    common(sp)

    sp = sub.add_parser("harmonic-q", help="the oscillator ratio q(s)")
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--s", required=True, help="comma-separated s values")
    common(sp)

    sp = sub.add_parser("gn-solve", help="ground state, GN constant, one-bound-state check")
    sp.add_argument("--family", choices=("standard", "dual"), required=True)
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--profile-out", default=None)
    common(sp)

    sp = sub.add_parser("ck-check", help="Csiszar-Kullback bound vs Bregman sum")
    sp.add_argument("--law", default="boltzmann", help="boltzmann | fermi | power:M")
    sp.add_argument("--pairs", type=int, default=1000)
    common(sp)

    sp = sub.add_parser("ortho-check", help="orthogonal-family energy inequality")
    sp.add_argument("--potential", default="harmonic:A=1,B=0")
    sp.add_argument("--n-modes", type=int, default=6)
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--n-grid", type=int, default=1500)
    sp.add_argument("--half-width", type=float, default=9.0)
    common(sp)

    sp = sub.add_parser("evolve", help="free-energy conservation under unitary evolution")
    sp.add_argument("--potential", default="harmonic:A=1,B=0")
    sp.add_argument("--T", type=float, default=10.0)
    sp.add_argument("--dt", type=float, default=None)
    sp.add_argument("--n-grid", type=int, default=1200)
    sp.add_argument("--half-width", type=float, default=9.0)
    sp.add_argument("--single-eigenstate", action="store_true")
    common(sp)

    sp = sub.add_parser("cn-mono", help="strict growth of the n-level constants")
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--n-max", type=int, default=3)
    common(sp)

    sp = sub.add_parser("interp-check", help="system interpolation inequality on a random corpus")
    sp.add_argument("--pair", default="logsob", help="logsob | logsob-sharp | power-dual | power-standard")
    sp.add_argument("--gamma", type=float, default=None)
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--c-lt", type=float, default=None, dest="c_lt")
    sp.add_argument("--corpus", type=int, default=25)
    sp.add_argument("--n-modes", type=int, default=6)
    common(sp)

    sp = sub.add_parser("logsob", help="the one-function log-Sobolev constant (2/e)^d")
    sp.add_argument("--d", type=int, default=1)
    common(sp)

    return p


def _apply_config_file(args):
    if not getattr(args, "config", None):
        return args
    for line in open(args.config):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, val = line.partition("=")
        if not _:
            raise InputError(f"malformed config line {line!r}")
        key = key.strip().replace("-", "_")
        if not hasattr(args, key):
            raise InputError(f"unknown config key {key!r}")
        cur = getattr(args, key)
        if isinstance(cur, bool):
            setattr(args, key, val.strip().lower() in ("1", "true", "yes"))
        elif isinstance(cur, int):
            setattr(args, key, int(val))
        elif isinstance(cur, float):
            setattr(args, key, float(val))
        else:
            setattr(args, key, val.strip())
    return args


def _input_echo(args):
    skip = {"command", "out", "format", "no_meta", "plot_data", "config"}
    return {k: v for k, v in vars(args).items() if k not in skip and v is not None}


def run(argv=None):
    args = build_parser().parse_args(argv)
    args = _apply_config_file(args)
    handler = HANDLERS[args.command]
    values, rows, plot = handler(args)
    report = {
        "command": args.command,
        "seed": getattr(args, "seed", 0),
        "inputs": _input_echo(args),
        "values": values,
    }
    if rows:
        report["rows"] = rows
    envelope = {"report": report}
    if not args.no_meta:
        envelope["meta"] = {
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "version": __version__,
            "backend": backend_name(),
        }

    if args.format == "json":
        text = render_json(envelope) + "\n"
    else:
        text = render_csv(report)

    out_path = args.out
    if out_path is None and os.environ.get(OUTDIR_ENV):
        os.makedirs(os.environ[OUTDIR_ENV], exist_ok=True)
        out_path = os.path.join(os.environ[OUTDIR_ENV], f"{args.command}.{args.format}")
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)

    if args.plot_data and plot:
        with open(args.plot_data, "w") as fh:
            for tup in plot:
                fh.write(" ".join(format(float(x), ".17g") for x in tup) + "\n")

    _human_summary(args.command, values)
    if out_path:
        print(f"report written to {out_path}")
    else:
        sys.stdout.write(text)
    return 0


def _human_summary(command, values):
    keys = [k for k, v in sorted(values.items()) if np.isscalar(v)][:6]
    parts = []
    for k in keys:
        v = values[k]
        parts.append(f"{k}={format(float(v), '.6g') if isinstance(v, (float, np.floating)) else v}")
    print(f"[{command}] " + "  ".join(parts))


def main(argv=None):
    try:
        return run(argv)
    except ValidationError as exc:
        sys.stderr.write(render_json({"error": "validation", "message": str(exc)}) + "\n")
        return 2
    except NumericError as exc:
        sys.stderr.write(render_json({"error": "numeric", "message": str(exc)}) + "\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
