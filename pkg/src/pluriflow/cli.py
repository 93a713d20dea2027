"""Command-line front end: check, flow, verify, catalog, sweep."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import almostabelian as aa
from . import catalog, engine, nilflow, verification
from .brackets import LieBracket, jacobi_residual
from .hermitian import HermitianFrame, is_skt_general
from .serialize import dumps_json, format_float, write_csv


def _load_input(spec: str):
    """Resolve an input spec: 'catalog:NAME' or a JSON file path.

    Returns ('almost_abelian', AlmostAbelianData) or ('nilpotent', (bracket, frame)).
    """
    if spec.startswith("catalog:"):
        entry = catalog.get_entry(spec[len("catalog:") :])
        return entry.kind, entry.data
    try:
        with open(spec) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise SystemExit(f"cannot read input {spec!r}: {exc}")
    except json.JSONDecodeError as exc:
        raise SystemExit(f"{spec}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}")
    try:
        if "a" in obj and "A" in obj:
            return "almost_abelian", aa.AlmostAbelianData.from_json_dict(obj)
        if "dim" in obj and "entries" in obj:
            mu = LieBracket.from_json_dict(obj)
            frame = HermitianFrame.pairwise(mu.dim)
            return "nilpotent", (mu, frame)
    except (ValueError, KeyError, TypeError) as exc:
        raise SystemExit(f"{spec}: schema violation: {exc}")
    raise SystemExit(f"{spec}: not a recognized input (need a/v/A/J1 or dim/entries keys)")


def _check_almost_abelian(data: aa.AlmostAbelianData, tol: float) -> dict:
    verdict = aa.skt_verdict(data)
    out = {
        "dim": data.dim,
        "skt": {
            "is_skt": verdict.is_skt,
            "k": verdict.k,
            "normality_defect": verdict.normality_defect,
            "residual_lemma": verdict.residual_lemma,
            "spectrum": [[float(z.real), float(z.imag)] for z in verdict.spectrum],
        },
    }
    if verdict.is_skt:
        cert = aa.soliton_certificate(data, tol)
        report = aa.classify(data)
        out["soliton"] = {
            "kind": cert.kind.value,
            "alpha": cert.alpha,
            "residual": cert.residual,
            "eigen_lambda": cert.eigen_lambda,
        }
        out["classification"] = {
            "case": report.table_case,
            "k": report.k,
            "unimodular": report.unimodular,
            "predicted_T": report.predicted_T,
            "predicted_limit": report.predicted_limit,
            "soliton_type_at_limit": report.soliton_type_at_limit.value,
        }
    return out


def _check_nilpotent(mu: LieBracket, frame: HermitianFrame, tol: float) -> dict:
    ok, res = is_skt_general(mu, frame, tol)
    out = {
        "dim": mu.dim,
        "jacobi_residual": jacobi_residual(mu),
        "skt": {"is_skt": ok, "dc_residual": res},
    }
    try:
        split = nilflow.NilpotentSplitting.from_bracket(mu, frame)
        cert = nilflow.soliton_limit_certificate(mu, frame, split=split)
        out["soliton"] = {"alpha": cert.alpha, "residual": cert.residual}
        p = nilflow.p_endomorphism_nil(split)
        out["tr_P"] = float(np.trace(p))
    except ValueError as exc:
        out["note"] = str(exc)
    return out


def cmd_check(args) -> int:
    kind, data = _load_input(args.input)
    if kind == "almost_abelian":
        out = _check_almost_abelian(data, args.tol)
        is_skt = out["skt"]["is_skt"]
    else:
        out = _check_nilpotent(*data, args.tol)
        is_skt = out["skt"]["is_skt"]
    sys.stdout.write(dumps_json({"input": args.input, **out}))
    if args.require_skt and not is_skt:
        return 2
    return 0


def cmd_flow(args) -> int:
    kind, data = _load_input(args.input)
    samples = np.linspace(0.0, args.horizon, args.samples) if args.samples else None
    if kind == "almost_abelian":
        mode = {"unnormalized": aa.UNNORMALIZED, "normalized": aa.A_NORM_FIXED}[args.mode]
        cfg = engine.IntegratorConfig(
            rel_tol=args.rel_tol, abs_tol=args.abs_tol, sample_times=samples, blowup_norm=1e6
        )
        traj = aa.integrate_reduced_flow(data, mode, args.horizon, cfg)
    else:
        mu, frame = data
        norm = {"unnormalized": "none", "normalized": "unit_norm"}[args.mode]
        cfg = engine.IntegratorConfig(
            rel_tol=args.rel_tol,
            abs_tol=args.abs_tol,
            sample_times=samples,
            fixedpoint_norm=1e-10 if norm == "unit_norm" else 0.0,
        )
        traj = nilflow.integrate_nil_flow(mu, frame, args.horizon, norm, cfg)
    cols = traj.diagnostics()
    raw = traj.raw
    text = write_csv(args.out if args.out else sys.stdout, cols)
    t_event, kind_event = raw.events[-1]
    summary = f"terminal {kind_event} at t={format_float(t_event)}"
    if raw.blowup is not None:
        summary += f" T_est={format_float(raw.blowup.t_est)}"
    if kind == "nilpotent" and kind_event == engine.FIXED_POINT:
        nu = traj.flow.decode(raw.final_state)
        cert = nilflow.soliton_limit_certificate(nu, traj.flow.split.frame, split=traj.flow.split)
        summary += f" soliton_residual={format_float(cert.residual)}"
    summary += f" accepted={raw.n_accepted} rejected={raw.n_rejected}"
    print(summary, file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    if args.suite == "appendix":
        rep = verification.suite_appendix(seed=args.seed)
    elif args.suite == "identities":
        rep = verification.suite_identities(seed=args.seed)
    else:
        rep = verification.suite_table1()
    sys.stdout.write(dumps_json({"suite": args.suite, **rep}))
    return 0 if rep["ok"] else 1


def cmd_catalog(args) -> int:
    rows = []
    for name in catalog.catalog_names():
        entry = catalog.get_entry(name)
        rows.append({"name": name, "kind": entry.kind, "expected": entry.expected})
    sys.stdout.write(dumps_json(rows))
    return 0


def _sweep_one(name: str) -> tuple:
    entry = catalog.get_entry(name)
    if entry.kind == "almost_abelian":
        out = _check_almost_abelian(entry.data, 1e-8)
    else:
        out = _check_nilpotent(*entry.data, 1e-9)
    return name, out


def cmd_sweep(args) -> int:
    names = catalog.catalog_names()
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = dict(pool.map(_sweep_one, names))
    else:
        results = dict(map(_sweep_one, names))
    out = {name: results[name] for name in names}  # deterministic order
    sys.stdout.write(dumps_json(out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pluriflow", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="algebraic SKT/soliton/classification checks")
    c.add_argument("input", help="JSON file or catalog:NAME")
    c.add_argument("--tol", type=float, default=1e-8)
    c.add_argument("--require-skt", action="store_true", help="exit 2 if the input is not SKT")
    c.set_defaults(fn=cmd_check)

    f = sub.add_parser("flow", help="integrate a flow and emit trajectory CSV")
    f.add_argument("input", help="JSON file or catalog:NAME")
    f.add_argument("--mode", choices=["unnormalized", "normalized"], default="unnormalized")
    f.add_argument("--horizon", type=float, default=100.0)
    f.add_argument("--samples", type=int, default=0, help="number of dense sample times (0: accepted steps)")
    f.add_argument("--rel-tol", type=float, default=1e-10)
    f.add_argument("--abs-tol", type=float, default=1e-12)
    f.add_argument("--out", help="CSV output path (default: stdout)")
    f.set_defaults(fn=cmd_flow)

    v = sub.add_parser("verify", help="run a randomized verification suite")
    v.add_argument("--suite", choices=["appendix", "identities", "table1"], required=True)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--jobs", type=int, default=1)
    v.set_defaults(fn=cmd_verify)

    g = sub.add_parser("catalog", help="list built-in example structures")
    g.set_defaults(fn=cmd_catalog)

    s = sub.add_parser("sweep", help="run checks over the whole catalog")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(fn=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
