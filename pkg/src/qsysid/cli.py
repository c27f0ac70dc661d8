"""Command line front end: ``qsysid <command> --input FILE [...]``.

Exit status is 0 when the analysis succeeds with a positive verdict, 2 when
it succeeds with a negative one (not controllable, not infecting,
inequivalent, not identifiable, fit failed) and 1 on errors.
"""

from __future__ import annotations

import argparse
import datetime
import json
import platform
import sys

import numpy as np
import scipy

from qsysid import __version__
from qsysid._kernels import BACKEND
from qsysid.dynamics import record
from qsysid.equivalence import (
    EquivalenceResult,
    commutant,
    equivalence_certificate,
    identifiability_report,
    moments_equal,
)
from qsysid.estimator import (
    EstimationProblem,
    EstimatorConfig,
    Experiment,
    design_experiments,
    estimate,
    simulate_experiments,
)
from qsysid.infection import (
    infect,
    build_system,
    minimal_infecting_set,
    verify_infection_controllability,
)
from qsysid.io import (
    SCHEMA_VERSION,
    SchemaError,
    couplings_to_json,
    decode_matrix,
    encode_matrix,
    load_json,
    parse_known,
    parse_schedule,
    parse_system,
    parse_topology,
)
from qsysid.lie import TAU_RANK, is_controllable

COMMANDS = (
    "controllability",
    "equivalence",
    "commutant",
    "identifiability",
    "infect",
    "minimal-set",
    "simulate",
    "estimate",
)

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2


class AnalysisError(Exception):
    pass


def _single_input(args) -> dict:
    if not args.input or len(args.input) != 1:
        raise AnalysisError(f"{args.command} takes exactly one --input file")
    return load_json(args.input[0])


def cmd_controllability(args):
    system = parse_system(_single_input(args))
    tol = args.tol if args.tol is not None else TAU_RANK
    rep = is_controllable(system, tol)
    result = {
        "controllable": rep.controllable,
        "dimension": rep.dimension,
        "full_dimension": rep.full_dimension,
        "closure_depth": rep.basis.closure_depth,
    }
    verdict = "controllable" if rep.controllable else "not controllable"
    return verdict, rep.controllable, result, {"tau_rank": tol}


def _witness_json(res: EquivalenceResult):
    w = res.witness
    if w is None:
        return None
    out = {"kind": w.kind, "alpha": list(w.alpha), "detail": w.detail, "violation": w.violation}
    if w.observable is not None:
        out["observable"] = w.observable
    return out


def cmd_equivalence(args):
    if args.input and len(args.input) == 2:
        doc_a, doc_b = load_json(args.input[0]), load_json(args.input[1])
    else:
        doc = _single_input(args)
        if "system" not in doc or "system_hat" not in doc:
            raise SchemaError("equivalence input needs 'system' and 'system_hat'")
        doc_a, doc_b = doc["system"], doc["system_hat"]
    sys_a = parse_system(doc_a, "system")
    sys_b = parse_system(doc_b, "system_hat")
    tol = args.tol if args.tol is not None else 1e-8
    lmax = args.lmax if args.lmax is not None else 6
    mom = moments_equal(sys_a, sys_b, lmax, tol)
    cert = equivalence_certificate(sys_a, sys_b, tol)
    result = {
        "moments": {
            "equal": mom.equal,
            "max_length": lmax,
            "terms_checked": mom.terms_checked,
            "witness": None
            if mom.witness is None
            else {"observable": mom.witness[0], "alpha": list(mom.witness[1]), "values": list(mom.values)},
        },
        "certificate": {
            "equivalent": cert.equivalent,
            "witness": _witness_json(cert),
        },
    }
    if cert.certificate is not None:
        c = cert.certificate
        result["certificate"]["residual"] = c.residual
        result["certificate"]["pairing"] = [list(a) for a, _ in c.pairing]
        result["certificate"]["unitary"] = None if c.unitary is None else encode_matrix(c.unitary)
    verdict = "equivalent" if cert.equivalent else "inequivalent"
    return verdict, cert.equivalent, result, {"tol": tol, "lmax": lmax}


def cmd_commutant(args):
    doc = _single_input(args)
    ops_doc = doc.get("operators") if isinstance(doc, dict) else None
    if not ops_doc:
        raise SchemaError("operators: missing or empty")
    ops = [decode_matrix(m, f"operators[{j}]") for j, m in enumerate(ops_doc)]
    cb = commutant(ops)
    result = {
        "dimension": cb.dim,
        "residual_gauge_dim": cb.residual_gauge_dim,
        "basis": [encode_matrix(B) for B in cb.basis],
    }
    return f"residual gauge dimension {cb.residual_gauge_dim}", True, result, {}


def cmd_identifiability(args):
    doc = _single_input(args)
    sys_doc = doc.get("system", doc)
    system = parse_system(sys_doc)
    known = parse_known(doc.get("known"), system)
    rep = identifiability_report(system, known)
    result = {
        "residual_gauge_dim": rep.residual_gauge_dim,
        "fully_identifiable": rep.fully_identifiable,
        "n_known": rep.n_known,
        "commutant_basis": None
        if rep.commutant is None
        else [encode_matrix(B) for B in rep.commutant.basis],
    }
    verdict = "fully identifiable" if rep.fully_identifiable else (
        f"identifiable up to a {rep.residual_gauge_dim}-parameter unitary family"
    )
    return verdict, rep.fully_identifiable, result, {}


def cmd_infect(args):
    topo = parse_topology(_single_input(args))
    trace = infect(topo)
    result = {
        "infecting": trace.complete,
        "steps": [list(s) for s in trace.steps],
        "final_infected": sorted(trace.final_infected),
    }
    if trace.complete and topo.is_connected() and topo.measured_node is not None and topo.n_nodes > 1:
        ver = verify_infection_controllability(topo, args.tol if args.tol is not None else TAU_RANK)
        result["controllability"] = {
            "controllable": ver.controllable,
            "closure_dim": ver.closure_dim,
            "full_dim": ver.full_dim,
            "ladder": ver.ladder,
        }
    verdict = "infecting" if trace.complete else "not infecting"
    return verdict, trace.complete, result, {}


def cmd_minimal_set(args):
    topo = parse_topology(_single_input(args))
    C = minimal_infecting_set(topo)
    result = {"minimal_set": sorted(C), "size": len(C)}
    return f"minimal infecting set of size {len(C)}", True, result, {}


def cmd_simulate(args):
    doc = _single_input(args)
    if "system" in doc:
        system = parse_system(doc["system"], "system")
    elif "topology" in doc:
        system = build_system(parse_topology(doc["topology"], "topology"))
    else:
        raise SchemaError("simulate input needs 'system' or 'topology'")
    schedule = parse_schedule(doc.get("schedule", {"segments": []}))
    times = doc.get("sample_times", [schedule.total_duration])
    noise = float(doc.get("noise_std", 0.0))
    rng = np.random.default_rng(args.seed)
    rec = record(system, schedule, times, noise_std=noise, rng=rng)
    result = {"times": rec.times.tolist(), "values": rec.values.tolist(), "noise_std": noise}
    return "simulated", True, result, {}


def cmd_estimate(args):
    doc = _single_input(args)
    if isinstance(doc, dict) and "topology" not in doc and "edges" in doc:
        doc = {"topology": doc}
    topo = parse_topology(_require_key(doc, "topology"), "topology")
    rng = np.random.default_rng(args.seed)
    truth = None
    if "experiments" in doc:
        exps = []
        for j, ex in enumerate(doc["experiments"]):
            sch = parse_schedule(ex.get("schedule", {}), f"experiments[{j}].schedule")
            times = np.asarray(ex["sample_times"], dtype=float)
            vals = ex.get("values")
            exps.append(Experiment(sch, times, None if vals is None else np.asarray(vals, dtype=float)))
        if any(e.values is None for e in exps):
            exps = simulate_experiments(topo, exps, float(doc.get("noise_std", 0.0)), rng)
            truth = dict(topo.couplings)
    else:
        design = doc.get("design", {})
        exps = simulate_experiments(
            topo, design_experiments(topo, rng, **design), float(doc.get("noise_std", 0.0)), rng
        )
        truth = dict(topo.couplings)
    config = EstimatorConfig(**doc.get("config", {}))
    if args.tol is not None:
        config.tau_fit = args.tol
    problem = EstimationProblem(topo, exps, truth=truth)
    res = estimate(problem, seed=args.seed, config=config)
    result = {
        "couplings": couplings_to_json(res.couplings),
        "residual": res.residual,
        "success": res.success,
        "iterations": res.iterations,
        "starts_run": res.starts_run,
        "method": res.method,
        "gauge_distance_to_truth": res.gauge_distance_to_truth,
    }
    verdict = "fit converged" if res.success else "fit did not reach tolerance"
    return verdict, res.success, result, {"tau_fit": config.tau_fit}


def _require_key(doc, key):
    if not isinstance(doc, dict) or key not in doc:
        raise SchemaError(f"{key}: missing")
    return doc[key]


HANDLERS = {
    "controllability": cmd_controllability,
    "equivalence": cmd_equivalence,
    "commutant": cmd_commutant,
    "identifiability": cmd_identifiability,
    "infect": cmd_infect,
    "minimal-set": cmd_minimal_set,
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsysid", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--input", action="append", help="input JSON file (repeatable)")
    parser.add_argument("--tol", type=float, default=None, help="tolerance override")
    parser.add_argument("--lmax", type=int, default=None, help="moment word length (equivalence)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--output", default=None, help="write the JSON report here")
    parser.add_argument("--format", choices=("json", "text"), default="text")
    return parser


def provenance(args, tolerances: dict) -> dict:
    return {
        "seed": args.seed,
        "tolerances": tolerances,
        "inputs": list(args.input or []),
        "versions": {
            "qsysid": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "kernel_backend": BACKEND,
    }


def render_text(report: dict) -> str:
    lines = [f"qsysid {report['command']}: {report['verdict']}"]
    res = report.get("result") or {}
    for key, val in res.items():
        if isinstance(val, (bool, int, float, str)) or val is None:
            lines.append(f"  {key}: {val}")
    if report.get("error"):
        lines.append(f"  error: {report['error']}")
    return "\n".join(lines)


def run(argv=None) -> tuple[int, dict, argparse.Namespace]:
    """Parse ``argv``, run the analysis, and return ``(exit_code, report, args)``."""
    args = build_parser().parse_args(argv)
    if args.tol is not None and not args.tol > 0:
        raise SystemExit("--tol must be positive")
    report = {"schema_version": SCHEMA_VERSION, "command": args.command}
    try:
        verdict, positive, result, tols = HANDLERS[args.command](args)
    except (SchemaError, AnalysisError, OSError, json.JSONDecodeError, ValueError, RuntimeError) as exc:
        code = EXIT_ERROR
        report.update(verdict="error", error=f"{type(exc).__name__}: {exc}", result=None)
        tols = {}
    else:
        code = EXIT_OK if positive else EXIT_NEGATIVE
        report.update(verdict=verdict, result=result)
    report["exit_code"] = code
    report["provenance"] = provenance(args, tols)
    report["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return code, report, args


def main(argv=None) -> int:
    code, report, args = run(argv)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    print(text if args.format == "json" else render_text(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
