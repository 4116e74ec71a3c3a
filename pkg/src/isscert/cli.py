"""Command-line front end.

Commands: simulate, certify, construct, bound, lmi — each takes a single
JSON config plus output-directory and seed flags.  Exit codes: 0 ok,
1 config error, 2 non-finite state, 3 violations, 4 structural
precondition failure, 5 heuristic search infeasible.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import jsonio
from .bounds import build_bound, certify_iss
from .certify import (
    check_dissipation,
    check_dwell_conditions,
    check_flow_implication,
    check_jump_implication,
    check_sandwich,
)
from .construct import build_decreasing, certify_decrease
from .errors import (
    ConfigError,
    DegenerateGammaError,
    ImageNotFullError,
    NonFiniteError,
    StepTooLargeError,
)
from .lmi import (
    Infeasible,
    QuadraticCertificate,
    check_flow_lmi,
    check_jump_lmi,
    check_rate_conditions,
    synthesize,
)
from .simulate import constant_input, reachability_bound, simulate, sinusoid_input
from .switching import mdadt_slack, mdalt_slack

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NONFINITE = 2
EXIT_VIOLATIONS = 3
EXIT_STRUCTURAL = 4
EXIT_INFEASIBLE = 5


def _run_setup(cfg):
    model = jsonio.parse_model(jsonio._require(cfg, "system", "config"))
    sig = jsonio.parse_signal(jsonio._require(cfg, "signal", "config"))
    n, m = model.dims
    missing = sig.mode_set - set(model.A)
    if missing:
        raise ConfigError(f"signal uses modes absent from the system: {sorted(missing)}",
                          field="signal.modes")
    inp = jsonio.parse_input(cfg.get("input"), m)
    x0 = np.array(jsonio._require(cfg, "x0", "config"), dtype=float)
    if x0.shape != (n,):
        raise ConfigError(f"x0 must have length {n}", field="x0")
    step = float(cfg.get("step", 1e-3))
    if step <= 0:
        raise ConfigError("step must be > 0", field="step")
    return model, sig, inp, x0, step


def _dini(cfg) -> float:
    return float(cfg.get("tolerances", {}).get("dini_coeff", 10.0))


def _a_grid(cfg):
    return [float(a) for a in cfg.get("dwell_a_grid", [1.0, 10.0, 100.0])]


def cmd_simulate(cfg, out: Path, seed: int) -> int:
    model, sig, inp, x0, step = _run_setup(cfg)
    try:
        traj = simulate(model.to_system_model(), sig, x0, inp, step)
    except NonFiniteError as e:
        if e.partial is not None:
            jsonio.write_trajectory_csv(out / "trajectory.csv", e.partial, model.dims[0])
        print(f"non-finite state: {e}", file=sys.stderr)
        return EXIT_NONFINITE
    jsonio.write_trajectory_csv(out / "trajectory.csv", traj, model.dims[0])
    return EXIT_OK


def cmd_certify(cfg, out: Path, seed: int) -> int:
    model, sig, inp, x0, step = _run_setup(cfg)
    cert = jsonio.parse_certificate(jsonio._require(cfg, "certificate", "config"))
    form = cfg.get("certificate", {}).get("form", "implication")
    try:
        traj = simulate(model.to_system_model(), sig, x0, inp, step)
    except NonFiniteError as e:
        print(f"non-finite state: {e}", file=sys.stderr)
        return EXIT_NONFINITE
    reports = list(check_sandwich(cert, traj))
    if form == "dissipation":
        reports += check_dissipation(cert, traj, inp, dini_coeff=_dini(cfg))
    else:
        reports += check_flow_implication(cert, traj, inp, dini_coeff=_dini(cfg))
        reports += check_jump_implication(cert, traj, inp)
    reports += check_dwell_conditions(cert, sig, _a_grid(cfg))
    slack_s = mdadt_slack(sig, cert.partition, cert.dwell.tau)
    slack_u = mdalt_slack(sig, cert.partition, cert.dwell.tau)
    violations = [r for r in reports if r.kind != "dwell-inconclusive"]
    jsonio.write_reports_csv(out / "reports.csv", reports)
    jsonio.write_json(out / "summary.json", {
        "violations": len(violations),
        "mdadt_slack": slack_s,
        "mdalt_slack": slack_u,
        "mdadt_ok": slack_s <= cert.dwell.T_S + 1e-9,
        "mdalt_ok": slack_u <= cert.dwell.T_U + 1e-9,
    })
    dwell_ok = slack_s <= cert.dwell.T_S + 1e-9 and slack_u <= cert.dwell.T_U + 1e-9
    return EXIT_OK if not violations and dwell_ok else EXIT_VIOLATIONS


def cmd_construct(cfg, out: Path, seed: int) -> int:
    model, sig, inp, x0, step = _run_setup(cfg)
    cert = jsonio.parse_certificate(jsonio._require(cfg, "certificate", "config"))
    try:
        dec = build_decreasing(cert, sig, a_grid=_a_grid(cfg))
    except ImageNotFullError as e:
        print(f"structural precondition failed: {e}", file=sys.stderr)
        return EXIT_STRUCTURAL
    except ValueError as e:
        print(f"dwell precondition failed: {e}", file=sys.stderr)
        return EXIT_VIOLATIONS
    try:
        traj = simulate(model.to_system_model(), sig, x0, inp, step)
    except NonFiniteError as e:
        print(f"non-finite state: {e}", file=sys.stderr)
        return EXIT_NONFINITE
    reports = certify_decrease(dec, traj, inp, dini_coeff=_dini(cfg))

    rows = []
    for k, seg in enumerate(traj.segments):
        start = 0
        if k > 0:
            jr = traj.jump_records[k - 1]
            h_l = dec.h(jr.time, side="left")
            v_pre = float(cert.V[jr.mode_before](jr.time, jr.pre_state))
            rows.append((jr.time, v_pre,
                         dec.compose(v_pre, jr.mode_before, jr.mode_before, h_l), h_l))
            h_r = dec.h(jr.time)
            v_post = float(cert.V[jr.mode_after](jr.time, jr.post_state))
            rows.append((jr.time, v_post,
                         dec.compose(v_post, jr.mode_after, jr.mode_before, h_r), h_r))
            start = 1
        for t, x in zip(seg.times[start:], seg.states[start:]):
            t = float(t)
            h_r = dec.h(t)
            v = float(cert.V[seg.mode](t, x))
            rows.append((t, v, dec.compose(v, seg.mode, seg.mode, h_r), h_r))
    lines = ["t,V,W,h"]
    for t, v, w, h in rows:
        lines.append(",".join(jsonio.fmt(z) for z in (t, v, w, h)))
    (out / "construct.csv").write_text("\n".join(lines) + "\n")
    jsonio.write_reports_csv(out / "reports.csv", reports)
    return EXIT_OK if not reports else EXIT_VIOLATIONS


def cmd_bound(cfg, out: Path, seed: int) -> int:
    model, sig, inp, x0, step = _run_setup(cfg)
    cert = jsonio.parse_certificate(jsonio._require(cfg, "certificate", "config"))
    bcfg = jsonio._require(cfg, "bound", "config")
    env = jsonio._require(bcfg, "envelopes", "bound")
    lower = jsonio.parse_rate(jsonio._require(env, "lower", "bound.envelopes"),
                              "bound.envelopes.lower")
    upper = jsonio.parse_rate(jsonio._require(env, "upper", "bound.envelopes"),
                              "bound.envelopes.upper")
    runs = int(bcfg.get("runs", 100))
    x0_range = float(bcfg.get("x0_range", 1.0))
    u_bound = float(bcfg.get("u_bound", 0.0))
    sys_model = model.to_system_model()

    delta = cert.dwell.delta
    c_slack = (1 - delta) * cert.dwell.T_S + (1 + delta) * cert.dwell.T_U
    patch = None
    if c_slack > 0:
        k_hat = reachability_bound(sys_model, sig, x0_range, u_bound,
                                   c_slack / delta, int(bcfg.get("patch_samples", 20)),
                                   step=step, seed=seed)
        level = cert.alpha2(k_hat)
        patch = lambda r: level  # noqa: E731
    try:
        bound = build_bound(cert, cert.dwell, lower, upper, short_horizon_envelope=patch)
        r_list = [float(r) for r in bcfg.get("r_list", [1.0])]
        s_grid = [float(s) for s in bcfg.get(
            "s_grid", np.linspace(0.0, sig.horizon - sig.t0, 51))]
        lines = ["r,s,beta(r,s)"]
        for r in r_list:
            for s in s_grid:
                lines.append(f"{jsonio.fmt(r)},{jsonio.fmt(s)},{jsonio.fmt(bound.beta(r, s))}")
        (out / "bound.csv").write_text("\n".join(lines) + "\n")

        rng = np.random.default_rng(seed)
        n, m = model.dims
        total_violations = 0
        max_margin = -np.inf
        for _ in range(runs):
            run_x0 = rng.uniform(-x0_range, x0_range, n)
            if u_bound > 0:
                amp = rng.uniform(0, u_bound)
                direction = rng.standard_normal(m)
                nv = np.linalg.norm(direction)
                direction = direction / nv if nv > 0 else np.eye(m)[0]
                if rng.uniform() < 0.5:
                    run_inp = constant_input(amp * direction)
                else:
                    run_inp = sinusoid_input(amp * direction, rng.uniform(0.5, 5.0))
            else:
                run_inp = jsonio.parse_input({"kind": "zero"}, m)
            try:
                traj = simulate(sys_model, sig, run_x0, run_inp, step)
            except NonFiniteError as e:
                print(f"non-finite state: {e}", file=sys.stderr)
                return EXIT_NONFINITE
            reports = certify_iss(bound, traj, run_x0, run_inp)
            total_violations += len(reports)
            r0 = float(np.linalg.norm(run_x0))
            g = bound.gamma(run_inp.sup_norm)
            for t, _, x, _ in traj.rows():
                margin = float(np.linalg.norm(x)) - (bound.beta(r0, t - traj.t0) + g)
                max_margin = max(max_margin, margin)
    except DegenerateGammaError as e:
        print(f"structural precondition failed: {e}", file=sys.stderr)
        return EXIT_STRUCTURAL
    jsonio.write_json(out / "verdict.json", {
        "violations": total_violations,
        "max_margin": max_margin,
        "case": bound.case,
        "C": bound.C,
        "patched": bound.metadata["patched"],
        "t0_independent": bound.metadata["t0_independent"],
    })
    return EXIT_OK if total_violations == 0 else EXIT_VIOLATIONS


def cmd_lmi(cfg, out: Path, seed: int) -> int:
    model = jsonio.parse_model(jsonio._require(cfg, "system", "config"))
    lcfg = jsonio._require(cfg, "lmi", "config")
    partition = jsonio.parse_partition(jsonio._require(lcfg, "partition", "lmi"))
    dwell = jsonio.parse_dwell(jsonio._require(lcfg, "dwell", "lmi"))
    q_set = jsonio.parse_mode_changes(jsonio._require(lcfg, "pairs", "lmi"))
    mode = lcfg.get("mode", "verify")

    if mode == "synth":
        result = synthesize(model, partition, q_set, dwell,
                            budget=int(lcfg.get("budget", 40)))
        if isinstance(result, Infeasible):
            jsonio.write_json(out / "verdict.json", {
                "infeasible": True,
                "reason": result.reason,
                "details": {k: _jsonable(v) for k, v in result.details.items()},
            })
            return EXIT_INFEASIBLE
        qc = result
        jsonio.write_json(out / "certificate.json", {
            "M": {p: m.tolist() for p, m in qc.M.items()},
            "Q": {p: m.tolist() for p, m in qc.Q.items()},
            "eta": dict(qc.eta),
            "mu": dict(qc.mu),
            "lambda_max": qc.lambda_max,
        })
    elif mode == "verify":
        c = jsonio._require(lcfg, "certificate", "lmi")
        try:
            qc = QuadraticCertificate(
                M={p: np.array(m, dtype=float) for p, m in c["M"].items()},
                Q={p: np.array(m, dtype=float) for p, m in c["Q"].items()},
                eta=c["eta"], mu=c["mu"],
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(str(e), field="lmi.certificate") from e
    else:
        raise ConfigError(f"unknown lmi mode {mode!r}", field="lmi.mode")

    flow = {}
    for p in sorted(model.A):
        ok, top = check_flow_lmi(model, qc, p)
        flow[p] = {"ok": bool(ok), "max_eig": top}
    jump = {}
    for pair in sorted(q_set.pairs):
        ok, top = check_jump_lmi(model, qc, pair)
        jump[f"{pair[0]}->{pair[1]}"] = {"ok": bool(ok), "max_eig": top}
    rates = [
        {"kind": r.kind, "where": r.mode, "lhs": r.lhs, "rhs": r.rhs, "margin": r.margin}
        for r in check_rate_conditions(qc, partition, dwell, q_set)
    ]
    jsonio.write_json(out / "verdict.json", {"flow": flow, "jump": jump, "rates": rates})
    all_ok = all(v["ok"] for v in flow.values()) and all(v["ok"] for v in jump.values()) \
        and not rates
    return EXIT_OK if all_ok else EXIT_VIOLATIONS


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return float(v)
    if isinstance(v, tuple):
        return list(v)
    return v


_COMMANDS = {
    "simulate": cmd_simulate,
    "certify": cmd_certify,
    "construct": cmd_construct,
    "bound": cmd_bound,
    "lmi": cmd_lmi,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="isscert",
        description="Simulate impulsive switched systems and certify input-to-state stability.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True)
        s.add_argument("--out", default=".")
        s.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)
    try:
        cfg = jsonio.load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
        return _COMMANDS[args.command](cfg, out, seed)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except StepTooLargeError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
