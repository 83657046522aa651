"""Command-line entry point: ``approxevt <command> [--config FILE] [flags]``.

Reports are JSON with the inputs echoed (defaults filled in), exact
rational outputs as ``"p/q"`` strings, the guarantee being claimed and a
``timestamp`` block, the only part that varies between identical runs.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import sys
import time
from fractions import Fraction

import numpy as np

from . import adp, brouwer, dp, evt, funcspace, mollify, optctrl, problems
from .creal import format_rational
from .errors import ApproxEVTError, ConfigInvalid
from .metric import BoxSpace

COMMANDS = ("net", "evt", "optctrl", "dp-vi", "policy-relaxed", "adp-vi", "adp-pi", "heydari", "mollify", "brouwer")
DEFAULT_K = {"net": 4, "evt": 4, "optctrl": 2, "dp-vi": 16, "policy-relaxed": 2, "adp-vi": 1000,
             "adp-pi": 1000, "heydari": 1000, "mollify": 8, "brouwer": 4}
TOP_KEYS = ("schema", "command", "k", "cap", "workers", "problem", "output")

fr = format_rational


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _members_csv(grid, members) -> str:
    header = ["member"] + ["f(" + " ".join(fr(c) for c in p) + ")" for p in grid]
    return _csv(header, [[i] + [fr(v) for v in f.values] for i, f in enumerate(members)])


def _pwl_csv(f) -> str:
    dim = len(f.grid[0])
    return _csv([f"x{j}" for j in range(dim)] + ["value"], [[fr(c) for c in p] + [fr(v)] for p, v in zip(f.grid, f.values)])


class LinearPolicy:
    def __init__(self, gain):
        self.gain = Fraction(gain)
        self.lip = abs(self.gain)

    def __call__(self, x):
        return (self.gain * x[0],)


# --- commands -----------------------------------------------------------------


def cmd_net(cfg):
    d = problems.merged(problems.FUNCSPACE_DEFAULTS, cfg["problem"], "problem")
    sp = problems.function_space(d)
    net = funcspace.enumerate_net(sp, cfg["k"], cfg["cap"])
    k = cfg["k"]
    result = {"net_size": len(net), "precision": fr(net.precision), "grid": [[fr(c) for c in p] for p in net.grid],
              "value_step": fr(net.delta)}
    cert = {"claim": "every f in F lies within precision of some member (sup metric)",
            "precision": fr(net.precision), "target": fr(Fraction(1, k)), "holds": net.precision <= Fraction(1, k)}
    return d, result, cert, lambda: _members_csv(net.grid, net.members)


def cmd_evt(cfg):
    d = problems.merged(problems.EVT_DEFAULTS, cfg["problem"], "problem")
    sp = problems.function_space({key: d[key] for key in problems.FUNCSPACE_DEFAULTS})
    J = problems.functional(d["functional"], sp)
    k = cfg["k"]
    if d["mode"] == "inf":
        r = evt.approx_inf(J, sp, k, cfg["cap"], cfg["workers"])
        claim = "J[f_j] - 1/k <= J[f] for every f in F"
    elif d["mode"] == "sup":
        r = evt.approx_sup(J, sp, k, cfg["cap"], cfg["workers"])
        claim = "J[f_j] + 1/k >= J[f] for every f in F"
    else:
        raise ConfigInvalid("problem.mode must be inf or sup")
    result = r.to_dict()
    result["net_precision"] = fr(r.precision)
    cert = {"claim": claim, "value_at_precision_8k": fr(r.value), "slack": fr(Fraction(1, k))}
    return d, result, cert, lambda: _pwl_csv(r.function)


def cmd_optctrl(cfg):
    p, pspace, d = problems.oc_problem(cfg["problem"])
    k = cfg["k"]
    if d["task"] == "integrate":
        steps = problems.natural(d["steps"], "problem.steps")
        u = LinearPolicy(problems.rational(d["gain"], "problem.gain"))
        tr = optctrl.integrate(p, u, steps)
        result = {"steps": steps, "endpoint": [fr(c) for c in tr.states[-1]]}
        cert = {"claim": "|computed state - exact state| <= error_bound at every node", "error_bound": fr(tr.error_bound)}
        return d, result, cert, tr.to_csv
    if d["task"] == "cost":
        u = LinearPolicy(problems.rational(d["gain"], "problem.gain"))
        v = optctrl.cost(p, None, u).approx(k)
        result = {"cost": fr(v)}
        cert = {"claim": "|cost - J[u]| <= 1/k", "slack": fr(Fraction(1, k))}
        steps = optctrl.steps_for_precision(p, u.lip, k)
        return d, result, cert, lambda: optctrl.integrate(p, u, steps).to_csv()
    r = optctrl.optimize_policy(p, pspace, k, workers=cfg["workers"])
    result = r.to_dict()
    cert = {"claim": "J[u*] - 1/k <= J[u] for every policy in the policy space",
            "value_at_precision_8k": fr(r.value), "slack": fr(Fraction(1, k))}
    steps = optctrl.steps_for_precision(p, r.function.lip, k)
    return d, result, cert, lambda: optctrl.integrate(p, r.function, steps).to_csv()


def _vi(p, d, k):
    X = p.X
    h = problems.rational(d["grid_radius"], "problem.grid_radius")
    V0 = dp.ValueTable.on(X, h, lambda x: 0, 0)
    return dp.value_iteration(p, V0, problems.rational(d["eps"], "problem.eps"), k)


def cmd_dp_vi(cfg):
    p, _, d = problems.dp_problem(cfg["problem"])
    res = _vi(p, d, cfg["k"])
    result = {"steps": res.steps, "initial_gap": fr(res.initial_gap), "slack": fr(res.slack),
              "values": [fr(v) for v in res.table.values], "lip": fr(res.table.lip)}
    cert = {"claim": "sup |V_n - V*| <= bound", "bound": fr(res.bound), "eps": d["eps"],
            "steps_rule": "least n with gamma^n/(1-gamma) (initial_gap + slack) <= eps"}
    return d, result, cert, res.table.to_csv


def cmd_policy_relaxed(cfg):
    p, pspace, d = problems.dp_problem(cfg["problem"])
    res = _vi(p, d, cfg["k"])
    r = dp.relaxed_policy_opt(p, res.table, pspace, cfg["k"], cfg["cap"], cfg["workers"])
    result = r.to_dict()
    result["vi_steps"] = res.steps
    cert = {"claim": "J[u*] + 1/k >= J[u] for every policy in the policy space",
            "value_at_precision_8k": fr(r.value), "slack": fr(Fraction(1, cfg["k"]))}
    return d, result, cert, lambda: _pwl_csv(r.function)


def _adp_summary(res, vals):
    P = adp.riccati_root(vals["a"], vals["b"], vals["q"], vals["R"])
    fit = res.quadratic_coefficient()
    return {"iterations": res.iterations, "value_coefficient": repr(fit), "riccati_root": repr(float(P)),
            "coefficient_error": repr(float(abs(fit - P))), "hjb_residual": repr(res.residual)}


def cmd_adp_vi(cfg):
    p, vals, d = problems.adp_problem(cfg["problem"])
    tol = float(problems.rational(d["tol"], "problem.tol"))
    res = adp.vi_run(p, tol, problems.natural(d["max_iter"], "problem.max_iter"), cfg["k"],
                     problems.rational(d["grid_step"], "problem.grid_step"))
    cert = {"claim": "grid-sup change of the last sweep <= tol", "tol": repr(tol),
            "last_change": repr(res.trace[-1].change)}
    return d, _adp_summary(res, vals), cert, lambda: adp.trace_csv(res.trace)


def cmd_adp_pi(cfg):
    p, vals, d = problems.adp_problem(cfg["problem"])
    tol = float(problems.rational(d["tol"], "problem.tol"))
    res = adp.pi_run(p, problems.u0_policy(problems.rational(d["u0_gain"], "problem.u0_gain")),
                     problems.natural(d["horizon"], "problem.horizon"), tol, cfg["k"],
                     problems.rational(d["grid_step"], "problem.grid_step"),
                     problems.natural(d["max_iter"], "problem.max_iter"))
    cert = {"claim": "sup policy change of the last improvement <= tol", "tol": repr(tol),
            "last_change": repr(res.trace[-1].change)}
    return d, _adp_summary(res, vals), cert, lambda: adp.trace_csv(res.trace)


def cmd_heydari(cfg):
    p, vals, d = problems.adp_problem(cfg["problem"])
    tol = float(problems.rational(d["tol"], "problem.tol"))
    vi = adp.vi_run(p, tol, problems.natural(d["max_iter"], "problem.max_iter"), cfg["k"],
                    problems.rational(d["grid_step"], "problem.grid_step"))
    x = float(problems.rational(d["x"], "problem.x"))
    fd = None if d["fd_step"] is None else float(problems.rational(d["fd_step"], "problem.fd_step"))
    h = adp.heydari_iterate(p, vi.value, [x], [float(problems.rational(d["u_init"], "problem.u_init"))],
                            problems.natural(d["iters"], "problem.iters"), fd,
                            float(problems.rational(d["relaxation"], "problem.relaxation")))
    exact = problems.riccati_gain(vals) * x
    result = {"control": [repr(float(c)) for c in h.control], "contraction_ratio": repr(float(h.ratio)),
              "iterations": h.iterations, "analytic_fixed_point": repr(float(exact)),
              "error": repr(float(abs(float(h.control[0]) - exact)))}
    cert = {"claim": "|u - F[u]| at the returned control", "residual": repr(h.residual)}
    trace = _csv(["quantity", "value"], [[key, v] for key, v in result.items() if key != "control"])
    return d, result, cert, lambda: trace


def cmd_mollify(cfg):
    d = problems.merged(problems.MOLLIFY_DEFAULTS, cfg["problem"], "problem")
    if d["function"] not in problems.FUNCTIONS:
        raise ConfigInvalid(f"problem.function must be one of {sorted(problems.FUNCTIONS)}")
    L = problems.rational(d["lip"], "problem.lip")
    dom = problems.space(d["domain"], "problem.domain")
    if not isinstance(dom, BoxSpace) or dom.dim != 1:
        raise ConfigInvalid("mollify built-ins need a 1D interval")
    k = cfg["k"]
    f = problems.FUNCTIONS[d["function"]](L)
    m = mollify.mollify(f, k, problems.natural(d["quad_points"], "problem.quad_points"), lip=L, domain=dom)
    n = problems.natural(d["samples"], "problem.samples", 2)
    lo, hi = dom.lower[0] + Fraction(1, k), dom.upper[0] - Fraction(1, k)
    xs = [lo + (hi - lo) * Fraction(i, n - 1) for i in range(n)]
    vals = [m((x,)) for x in xs]
    err = max(abs(v - f((x,))) for v, x in zip(vals, xs))
    slope = max(abs(vals[i + 1] - vals[i]) / (xs[i + 1] - xs[i]) for i in range(n - 1))
    integral, int_err = m.kernel.integral(2 * m.kernel.quad_points + 1)
    result = {"sup_error": fr(err), "max_difference_quotient": fr(slope), "quad_tol": fr(m.quad_tol),
              "kernel_integral_check": fr(integral), "kernel_quad_tol": fr(m.kernel.quad_tol)}
    cert = {"claim": "sup |f_k - f| <= L/k + 2 quad_tol on the samples",
            "lhs": fr(err), "rhs": fr(L / k + 2 * m.quad_tol), "holds": err <= L / k + 2 * m.quad_tol}
    rows = [[fr(x), fr(v)] for x, v in zip(xs, vals)]
    return d, result, cert, lambda: _csv(["x", "f_k"], rows)


BROUWER_DEFAULTS = {"one_index": 2**20 + 1, "low": 4, "high": 2**22, "horizon": 20}


def cmd_brouwer(cfg):
    d = problems.merged(BROUWER_DEFAULTS, cfg["problem"], "problem")
    idx = d["one_index"]
    if idx is not None:
        problems.natural(idx, "problem.one_index")
    rep = brouwer.demo(idx, problems.natural(d["low"], "problem.low"), problems.natural(d["high"], "problem.high"),
                       problems.natural(d["horizon"], "problem.horizon"), cfg["k"])
    cert = {"claim": "two-well values agree within 2/k across precisions", "gap": rep["two_well_gap"],
            "tolerance": rep["two_well_tolerance"], "holds": rep["two_well_agree"]}
    rows = [[r["precision"], r["policy"][0], r["cost"]] for r in rep["runs"]]
    out = (d, rep, cert, lambda: _csv(["precision", "u", "cost"], rows))
    return out + (brouwer.demo_text(rep),)


HANDLERS = {
    "net": cmd_net, "evt": cmd_evt, "optctrl": cmd_optctrl, "dp-vi": cmd_dp_vi,
    "policy-relaxed": cmd_policy_relaxed, "adp-vi": cmd_adp_vi, "adp-pi": cmd_adp_pi,
    "heydari": cmd_heydari, "mollify": cmd_mollify, "brouwer": cmd_brouwer,
}


# --- plumbing -------------------------------------------------------------------


def load_config(command: str, path, flags) -> dict:
    raw = {}
    if path is not None:
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigInvalid(f"cannot read config {path}: {e}") from None
    problems.check_keys(raw, TOP_KEYS, "config")
    if raw.get("schema", 1) != 1:
        raise ConfigInvalid(f"unsupported schema {raw.get('schema')!r}")
    if raw.get("command", command) != command:
        raise ConfigInvalid(f"config is for {raw.get('command')!r}, not {command!r}")
    out = raw.get("output", {})
    problems.check_keys(out, ("path", "format"), "config.output")
    cfg = {
        "k": raw.get("k", DEFAULT_K[command]),
        "cap": raw.get("cap", 400_000_000),
        "workers": raw.get("workers", 1),
        "problem": raw.get("problem", {}),
        "path": out.get("path"),
        "format": out.get("format", "json"),
    }
    for key in ("k", "cap", "workers"):
        if getattr(flags, key) is not None:
            cfg[key] = getattr(flags, key)
    if flags.output is not None:
        cfg["path"] = flags.output
    if flags.format is not None:
        cfg["format"] = flags.format
    for key in ("k", "cap", "workers"):
        problems.natural(cfg[key], key)
    if cfg["format"] not in ("json", "csv", "text"):
        raise ConfigInvalid("output.format must be json, csv or text")
    return cfg


def run(command: str, cfg: dict) -> tuple[dict, str]:
    """Run one command; returns the report and the text to emit."""
    t0 = time.perf_counter()
    out = HANDLERS[command](cfg)
    echoed, result, cert, export = out[:4]
    text = out[4] if len(out) > 4 else None
    report = {
        "schema": 1,
        "command": command,
        "inputs": {"k": cfg["k"], "cap": cfg["cap"], "workers": cfg["workers"], "problem": echoed},
        "result": result,
        "certificate": cert,
        "timestamp": {
            "utc": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "wall_seconds": round(time.perf_counter() - t0, 3),
        },
    }
    fmt = cfg["format"]
    if fmt == "csv":
        body = export()
    elif fmt == "text" and text is not None:
        body = text + "\n"
    else:
        body = json.dumps(report, indent=2, sort_keys=True, default=_jsonable) + "\n"
    return report, body


def _jsonable(v):
    if isinstance(v, Fraction):
        return fr(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return repr(float(v))
    raise TypeError(f"not serializable: {type(v).__name__}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="approxevt", description="Approximate optimal control by net search.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file (schema 1)")
        sp.add_argument("--k", type=int, help="precision parameter (overrides config)")
        sp.add_argument("--cap", type=int, help="enumeration cap")
        sp.add_argument("--workers", type=int, help="worker threads for net evaluation")
        sp.add_argument("--output", help="write the report here instead of stdout")
        sp.add_argument("--format", choices=("json", "csv", "text"))
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.command, args.config, args)
        _, body = run(args.command, cfg)
    except ApproxEVTError as e:
        err = {"error": type(e).__name__, "message": str(e), "exit_code": e.exit_code}
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        return e.exit_code
    except Exception as e:  # noqa: BLE001 - report anything else as a generic failure
        err = {"error": type(e).__name__, "message": str(e), "exit_code": 1}
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        return 1
    if cfg["path"]:
        with open(cfg["path"], "w") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)
    return 0


if __name__ == "__main__":
    sys.exit(main())
