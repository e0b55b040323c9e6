"""Command-line driver: file I/O, generators, verification campaigns, reports.

Exit codes
----------
``decompose``   0 success; 2 the input is not a CP isometry (or violates the
                isometry hypothesis numerically); 1 I/O or schema error.
``canonicity``  0 canonical; 3 the comonoid laws fail; 4 laws pass but a Choi
                rank exceeds 1 -- the one outcome the underlying theory rules
                out, kept as a loud, dedicated code so it can never be silent.
``verify``      0 all trials pass; 1 configuration error; 5 any trial failed
                (the first failing seed is printed for reproduction).
``eval``        0 success; 1 parse or evaluation error (with source position).
``gen``         0 success; 1 infeasible parameters.

Reports are JSON-first (``--format text`` renders a human view) and
deterministic: identical flags and seed give byte-identical output when
``--no-timestamp`` is passed.  Campaign trial ``i`` draws its generator
from ``derive_seed(base_seed, i)`` (a SHA-256 mix); for the theorem1 and
theorem2 campaigns, ``cpmkit gen --seed <trial seed>`` regenerates the
failing instance exactly.

The environment variable ``CPMKIT_TOL`` overrides the default absolute
tolerance; the ``--tol`` flag overrides both.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from .cpm import (
    CPMap,
    choi_distance,
    choi_embed,
    cpmap_from_json,
    cpmap_to_json,
    double,
    pure_proportionality,
    purify,
)
from .dsl import (
    DiagramSyntaxError,
    DimensionMismatchError,
    UnboundNameError,
    Environment,
    check_equation,
    environment_from_json,
    evaluate,
    parse,
)
from .frobenius import (
    LawsFailedError,
    ProportionalityError,
    canonicity_check,
    canonicity_to_json,
    classical_structure,
    comonoid_from_json,
    comonoid_to_json,
    copy_pair,
    matrix_algebra_structure,
    mixture_structure,
    proof_trace,
    proof_trace_to_json,
)
from .isometry import (
    GramBlockError,
    NotIsometryError,
    ReshapeNotIsometryError,
    decompose,
    decompose_oracle,
    decomposition_to_json,
    dilation_gram_residual,
    environment_gram,
    random_cp_isometry,
    reconstruction,
)
from .tensor import CpmkitError, Tolerance, haar_isometry, matrix_to_json

__all__ = [
    "main",
    "entrypoint",
    "derive_seed",
    "run_theorem1_campaign",
    "run_theorem2_campaign",
    "run_purity_campaign",
]

DESK_SCALE_CAP = 64  # largest in*out (or n^2) the desk-scale policy admits

_DEFAULT_DIMS = {
    "theorem1": ((2, 2, 1), (2, 4, 2), (2, 6, 3), (3, 6, 2), (4, 8, 2)),
    "theorem2": ((2,), (3,), (4,), (5,), (6,), (7,), (8,)),
    "purity-principle": ((2, 4, 3),),
}


def derive_seed(base_seed: int, index: int) -> int:
    """Stable per-trial seed: SHA-256 of ``base_seed:index``, folded to 63 bits."""
    digest = hashlib.sha256(f"{base_seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big") % (2 ** 63)


# --- campaigns --------------------------------------------------------------

def _blocks(q: np.ndarray, gap: float = 1e-6) -> list[list[int]]:
    groups: list[list[int]] = []
    for i in range(len(q)):
        if groups and q[groups[-1][-1]] - q[i] <= gap:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _span_projector(vs) -> np.ndarray:
    cols = np.stack([choi_embed(v) for v in vs], axis=1)
    cols = cols / np.linalg.norm(cols, axis=0)
    return cols @ cols.conj().T


def _run_campaign(kind: str, trial_fn, trials: int, dims, seed: int, tol: Tolerance) -> dict:
    results = []
    for i in range(trials):
        shape = dims[i % len(dims)]
        trial_seed = derive_seed(seed, i)
        record = {"trial": i, "seed": trial_seed, "shape": list(shape)}
        try:
            record.update(trial_fn(shape, trial_seed, tol))
        except (CpmkitError, ValueError) as exc:
            record.update({"pass": False, "residuals": {}, "error": str(exc)})
        results.append(record)
    return _aggregate(kind, results, seed, trials, dims)


def _theorem1_trial(shape, trial_seed: int, tol: Tolerance) -> dict:
    in_dim, out_dim, terms = shape
    f, q_true, v_true = random_cp_isometry(in_dim, out_dim, terms, trial_seed)
    checks = {}
    dg = decompose(f, tol)
    dc = decompose_oracle(f, tol)
    checks["sum_q_sq"] = abs(float(np.sum(dg.q ** 2)) - 1.0)
    checks["orthogonality"] = dg.orthogonality_residual
    checks["reconstruction"] = dg.reconstruction_residual
    if len(dg.q) == len(dc.q):
        checks["route_q_agreement"] = float(np.max(np.abs(dg.q - dc.q)))
    else:
        checks["route_q_agreement"] = float("inf")
    checks["route_choi_agreement"] = choi_distance(reconstruction(dg), reconstruction(dc))
    p = purify(f)
    eg = environment_gram(p, tol)
    checks["dilation_gram_identity"] = dilation_gram_residual(p, eg.g)
    well_separated = len(q_true) == 1 or float(np.min(q_true[:-1] - q_true[1:])) > 1e-3
    if well_separated and len(dg.q) == len(q_true):
        checks["ground_truth_q"] = float(np.max(np.abs(dg.q - q_true)))
        span = 0.0
        for blk in _blocks(q_true):
            p_rec = _span_projector([dg.v[b] for b in blk])
            p_true = _span_projector([v_true[b] for b in blk])
            span = max(span, float(np.linalg.norm(p_rec - p_true)))
        checks["ground_truth_span"] = span
    ok = (
        checks["sum_q_sq"] <= 1e-9
        and checks["orthogonality"] <= 1e-8
        and checks["reconstruction"] <= 1e-8
        and checks["route_q_agreement"] <= 1e-8
        and checks["route_choi_agreement"] <= 1e-9
        and checks["dilation_gram_identity"] <= 1e-9 * in_dim
        and checks.get("ground_truth_q", 0.0) <= 1e-8
        and checks.get("ground_truth_span", 0.0) <= 1e-7
    )
    return {"pass": bool(ok), "residuals": checks}


def _theorem2_trial(shape, trial_seed: int, tol: Tolerance) -> dict:
    (n,) = shape
    basis = haar_isometry(n, n, trial_seed)
    structure = classical_structure(basis, tol)
    rep = canonicity_check(structure, tol)
    checks = {
        "max_law_residual": rep.laws.max_residual,
        "delta_choi_rank": rep.delta_choi_rank,
        "epsilon_choi_rank": rep.epsilon_choi_rank,
        "extraction_residual": rep.extraction_residual,
    }
    trace_ok = False
    if rep.laws_pass:
        try:
            tr = proof_trace(structure, tol)
            checks["unit_sum_l"] = abs(float(np.dot(tr.q, tr.l_row)) - 1.0)
            checks["unit_sum_r"] = abs(float(np.dot(tr.q, tr.r_row)) - 1.0)
            checks["l_vs_r"] = float(np.max(np.abs(tr.l_row - tr.r_row)))
            checks["min_r"] = float(np.min(tr.r_row))
            checks["witness_residual"] = max(
                res for (_, _, res) in tr.dagger_witnesses.values()
            )
            trace_ok = (
                checks["unit_sum_l"] <= 1e-8
                and checks["unit_sum_r"] <= 1e-8
                and checks["l_vs_r"] <= 1e-8
                and checks["min_r"] > 1e-10
                and checks["witness_residual"] <= 1e-8
            )
        except (LawsFailedError, ProportionalityError) as exc:
            checks["trace_error"] = str(exc)
    ok = (
        rep.laws.max_residual <= 1e-9
        and rep.canonical
        and rep.delta_choi_rank == 1
        and rep.epsilon_choi_rank == 1
        and rep.extraction_residual is not None
        and rep.extraction_residual <= 1e-9
        and trace_ok
    )
    return {
        "pass": bool(ok),
        "laws_pass_but_impure": bool(rep.laws_pass and not rep.canonical),
        "residuals": checks,
    }


def _purity_trial(shape, trial_seed: int, tol: Tolerance) -> dict:
    in_dim, out_dim, terms = shape
    rng = np.random.default_rng(trial_seed)
    base = rng.standard_normal((out_dim, in_dim)) + 1j * rng.standard_normal((out_dim, in_dim))
    weights = rng.exponential(size=terms)
    weights = weights / weights.sum()
    recovered = np.array([
        pure_proportionality(CPMap([np.sqrt(p) * base]), double(base), tol)
        for p in weights
    ])
    checks = {
        "sum_p": abs(float(recovered.sum()) - 1.0),
        "component_error": float(np.max(np.abs(recovered - weights))),
    }
    ok = checks["sum_p"] <= 1e-9 and checks["component_error"] <= 1e-9
    return {"pass": bool(ok), "residuals": checks}


def run_theorem1_campaign(trials: int, dims, seed: int, tol: Tolerance) -> dict:
    """Randomized decomposition suite; trial ``i`` uses shape ``dims[i % len(dims)]``.

    Per trial: plant a random CP isometry, decompose by both routes, and
    check every decomposition invariant, cross-route agreement, the
    dilation/Gram identity, and (when the planted coefficients are well
    separated) ground-truth recovery.  A trial that raises is recorded as
    a failure with the error message; the campaign always completes.
    """
    return _run_campaign("theorem1", _theorem1_trial, trials, dims, seed, tol)


def run_theorem2_campaign(trials: int, dims, seed: int, tol: Tolerance) -> dict:
    """Randomized comonoid suite over random-basis copy structures.

    Per trial: build the copy structure of a Haar-random basis, require
    every law residual at 1e-9, a canonical verdict with both Choi ranks
    1, faithful extraction, and all proof-trace identities.  A trial that
    passed the laws with an impure component is flagged as
    ``laws_pass_but_impure`` -- the outcome the campaign exists to rule out.
    """
    return _run_campaign("theorem2", _theorem2_trial, trials, dims, seed, tol)


def run_purity_campaign(trials: int, dims, seed: int, tol: Tolerance) -> dict:
    """Recover planted proportionality coefficients of pure summands.

    Per trial: draw a pure map, split it into ``terms`` scaled copies with
    simplex weights, and require the recovered coefficients to match and
    to sum to one within 1e-9.
    """
    return _run_campaign("purity-principle", _purity_trial, trials, dims, seed, tol)


_CAMPAIGNS = {
    "theorem1": run_theorem1_campaign,
    "theorem2": run_theorem2_campaign,
    "purity-principle": run_purity_campaign,
}


def _sanitize(obj):
    # keep reports strict JSON: non-finite floats become strings
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def _aggregate(kind: str, results: list, seed: int, trials: int, dims) -> dict:
    results = sorted(results, key=lambda r: r["trial"])
    worst: dict = {}
    for rec in results:
        for key, val in rec["residuals"].items():
            if isinstance(val, (int, float)):
                worst[key] = max(worst.get(key, 0.0), float(val))
    failed = [r for r in results if not r["pass"]]
    return {
        "campaign": kind,
        "seed": seed,
        "trials": trials,
        "dims": [list(d) for d in dims],
        "passed": len(results) - len(failed),
        "failed": len(failed),
        "first_failing_seed": failed[0]["seed"] if failed else None,
        "max_residuals": worst,
        "results": results,
    }


# --- option plumbing --------------------------------------------------------

def _tolerance(args) -> Tolerance:
    atol = 1e-9
    env = os.environ.get("CPMKIT_TOL")
    if env:
        atol = float(env)
    if getattr(args, "tol", None) is not None:
        atol = args.tol
    rank_rel = getattr(args, "rank_rel", None)
    return Tolerance(atol=atol, rank_rel=rank_rel if rank_rel is not None else 1e-10)


def _load_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _emit(report: dict, args) -> None:
    report = _sanitize(report)
    if not getattr(args, "no_timestamp", False):
        report = dict(report)
        report["generated_at"] = datetime.now(timezone.utc).isoformat()
    if getattr(args, "format", "json") == "text":
        text = "\n".join(_render_text(report)) + "\n"
    else:
        text = json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"
    out = getattr(args, "out", None) or getattr(args, "report", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render_text(obj, prefix: str = "") -> list:
    lines = []
    if isinstance(obj, dict):
        for key in sorted(obj):
            val = obj[key]
            if isinstance(val, (dict, list)):
                lines.append(f"{prefix}{key}:")
                lines.extend(_render_text(val, prefix + "  "))
            else:
                lines.append(f"{prefix}{key}: {val}")
    elif isinstance(obj, list):
        for i, val in enumerate(obj):
            if isinstance(val, (dict, list)):
                lines.append(f"{prefix}- [{i}]")
                lines.extend(_render_text(val, prefix + "  "))
            else:
                lines.append(f"{prefix}- {val}")
    else:
        lines.append(f"{prefix}{obj}")
    return lines


def _fail(message: str, code: int) -> int:
    print(f"cpmkit: {message}", file=sys.stderr)
    return code


# --- subcommands ------------------------------------------------------------

def _cmd_decompose(args) -> int:
    tol = _tolerance(args)
    try:
        f = cpmap_from_json(_load_json(args.infile), tol)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        return _fail(f"cannot load CP map: {exc}", 1)
    try:
        if args.route == "gram":
            report = decomposition_to_json(decompose(f, tol))
        elif args.route == "choi":
            report = decomposition_to_json(decompose_oracle(f, tol))
        else:
            dg = decompose(f, tol)
            dc = decompose_oracle(f, tol)
            q_res = (
                float(np.max(np.abs(dg.q - dc.q)))
                if len(dg.q) == len(dc.q) else float("inf")
            )
            report = {
                "route": "both",
                "gram": decomposition_to_json(dg),
                "choi": decomposition_to_json(dc),
                "cross_route_q_residual": q_res,
                "cross_route_choi_residual": choi_distance(reconstruction(dg), reconstruction(dc)),
            }
    except (NotIsometryError, GramBlockError, ReshapeNotIsometryError) as exc:
        return _fail(str(exc), 2)
    _emit(report, args)
    return 0


def _cmd_canonicity(args) -> int:
    tol = _tolerance(args)
    try:
        comonoid = comonoid_from_json(_load_json(args.infile), tol)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        return _fail(f"cannot load comonoid: {exc}", 1)
    rep = canonicity_check(comonoid, tol)
    report = canonicity_to_json(rep)
    if args.trace:
        if rep.laws_pass:
            try:
                report["trace"] = proof_trace_to_json(proof_trace(comonoid, tol))
            except (LawsFailedError, ProportionalityError) as exc:
                report["trace"] = None
                _emit(report, args)
                return _fail(f"trace failed on a law-passing comonoid: {exc}", 4)
        else:
            report["trace"] = None
    _emit(report, args)
    if rep.canonical:
        return 0
    if not rep.laws_pass:
        return _fail(f"comonoid laws failed: max residual {rep.laws.max_residual:.3e}", 3)
    return _fail(
        "laws passed but a Choi rank exceeds 1: "
        f"ranks ({rep.delta_choi_rank}, {rep.epsilon_choi_rank})",
        4,
    )


def _parse_dims(text: str, kind: str):
    groups = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        entry = tuple(int(x) for x in part.split(","))
        groups.append(entry)
    if not groups:
        raise ValueError("dims must be nonempty")
    if kind == "theorem2":
        flat = []
        for entry in groups:
            flat.extend((n,) for n in entry)
        groups = flat
    for entry in groups:
        if kind == "theorem2":
            (n,) = entry
            if n < 1 or n * n > DESK_SCALE_CAP:
                raise ValueError(f"dimension {n} outside desk scale (n^2 <= {DESK_SCALE_CAP})")
        else:
            if len(entry) != 3:
                raise ValueError(f"expected in,out,terms triples, got {entry}")
            in_dim, out_dim, terms = entry
            if min(entry) < 1 or in_dim * out_dim > DESK_SCALE_CAP:
                raise ValueError(
                    f"shape {entry} outside desk scale (in*out <= {DESK_SCALE_CAP})"
                )
    return tuple(groups)


def _cmd_verify(args) -> int:
    tol = _tolerance(args)
    try:
        if args.trials < 1:
            raise ValueError("trials must be >= 1")
        dims = (
            _parse_dims(args.dims, args.campaign)
            if args.dims else _DEFAULT_DIMS[args.campaign]
        )
    except ValueError as exc:
        return _fail(f"bad campaign configuration: {exc}", 1)
    report = _CAMPAIGNS[args.campaign](args.trials, dims, args.seed, tol)
    _emit(report, args)
    if report["failed"]:
        return _fail(
            f"{report['failed']} trial(s) failed; first failing seed {report['first_failing_seed']}",
            5,
        )
    return 0


def _read_expression(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        content = fh.read()
    try:
        obj = json.loads(content)
    except json.JSONDecodeError:
        return content.strip()
    if isinstance(obj, dict) and "expr" in obj:
        return obj["expr"]
    raise ValueError(f"{path} is JSON but not an expression file")


def _cmd_eval(args) -> int:
    tol = _tolerance(args)
    try:
        env = (
            environment_from_json(_load_json(args.env), tol)
            if args.env else Environment(bindings={})
        )
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        return _fail(f"cannot load environment: {exc}", 1)
    try:
        equation = None
        if args.file:
            with open(args.file, "r", encoding="utf-8") as fh:
                content = fh.read()
            try:
                obj = json.loads(content)
            except json.JSONDecodeError:
                obj = None
            if isinstance(obj, dict) and {"lhs", "rhs"} <= obj.keys():
                equation = (obj["lhs"], obj["rhs"])
            elif isinstance(obj, dict) and "expr" in obj:
                source = obj["expr"]
            elif isinstance(obj, dict):
                raise ValueError(
                    f"{args.file} is JSON but neither an equation ('lhs'/'rhs') "
                    "nor an expression ('expr') file"
                )
            else:
                source = content.strip()
        else:
            source = args.expr
        if equation is None and args.against:
            equation = (source, _read_expression(args.against))
        if equation is not None:
            check = check_equation(equation[0], equation[1], env, tol)
            _emit({"ok": check.ok, "residual": check.residual}, args)
            return 0
        result = evaluate(parse(source), env, tol)
        _emit(cpmap_to_json(result), args)
        return 0
    except (DiagramSyntaxError, UnboundNameError, DimensionMismatchError) as exc:
        return _fail(str(exc), 1)
    except (OSError, ValueError) as exc:
        return _fail(str(exc), 1)


def _cmd_gen(args) -> int:
    tol = _tolerance(args)
    try:
        sidecar = None
        if args.what == "classical":
            basis = haar_isometry(args.n, args.n, args.seed)
            structure = classical_structure(basis, tol)
            instance = comonoid_to_json(structure)
            d, e = copy_pair(basis, tol)
            sidecar = {"basis": matrix_to_json(basis),
                       "d": matrix_to_json(d), "e": matrix_to_json(e)}
        elif args.what == "matrix-algebra":
            structure = matrix_algebra_structure(args.n)
            instance = comonoid_to_json(structure)
        elif args.what == "mixture":
            rng = np.random.default_rng(args.seed)
            b1 = haar_isometry(args.n, args.n, rng)
            b2 = haar_isometry(args.n, args.n, rng)
            structure = mixture_structure(b1, b2, args.w, tol)
            instance = comonoid_to_json(structure)
            sidecar = {"basis1": matrix_to_json(b1), "basis2": matrix_to_json(b2),
                       "w": args.w}
        else:  # cp-isometry
            f, q, v = random_cp_isometry(args.in_dim, args.out_dim, args.terms, args.seed)
            instance = cpmap_to_json(f)
            sidecar = {"q": [float(x) for x in q], "v": [matrix_to_json(vi) for vi in v]}
    except (ValueError, CpmkitError) as exc:
        return _fail(f"cannot generate instance: {exc}", 1)
    if args.out:
        _emit(instance, args)
        if sidecar is not None:
            with open(args.out + ".truth.json", "w", encoding="utf-8") as fh:
                json.dump(sidecar, fh, indent=2, sort_keys=True)
                fh.write("\n")
    else:
        payload = {"instance": instance}
        if sidecar is not None:
            payload["ground_truth"] = sidecar
        _emit(payload, args)
    return 0


# --- argument parsing ---------------------------------------------------------

def _add_common(sub, out_flag: str = "--out") -> None:
    sub.add_argument("--tol", type=float, default=None,
                     help="absolute tolerance (default 1e-9; CPMKIT_TOL also applies)")
    sub.add_argument("--rank-rel", type=float, default=None,
                     help="relative eigenvalue cutoff for numerical rank (default 1e-10)")
    sub.add_argument(out_flag, dest="out" if out_flag == "--out" else "report",
                     default=None, help="write the report here instead of stdout")
    sub.add_argument("--format", choices=("json", "text"), default="json")
    sub.add_argument("--no-timestamp", action="store_true",
                     help="omit generated_at (used for byte-identical reports)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpmkit",
        description="Completely positive maps: decomposition, comonoid canonicity, diagram evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="decompose a CP isometry into orthogonal pure isometries")
    p.add_argument("--in", dest="infile", required=True, help="CP map JSON file")
    p.add_argument("--route", choices=("gram", "choi", "both"), default="gram")
    _add_common(p)
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("canonicity", help="check whether a comonoid is canonical")
    p.add_argument("--in", dest="infile", required=True, help="comonoid JSON file")
    p.add_argument("--trace", action="store_true", help="include the full proof trace")
    _add_common(p)
    p.set_defaults(func=_cmd_canonicity)

    p = sub.add_parser("verify", help="run a randomized verification campaign")
    p.add_argument("--campaign", choices=tuple(_CAMPAIGNS), required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dims", default=None,
                   help="semicolon-separated shapes: 'in,out,terms;...' or 'n;...'")
    _add_common(p, out_flag="--report")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("eval", help="evaluate a diagram expression or check an equation")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--expr", default=None, help="expression text")
    group.add_argument("--file", default=None,
                       help="expression file, or equation JSON {'lhs', 'rhs'}")
    p.add_argument("--env", default=None, help="environment JSON file")
    p.add_argument("--against", default=None,
                   help="file with a second expression to compare against")
    _add_common(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("gen", help="generate instances (with ground truth where applicable)")
    p.add_argument("--what", choices=("classical", "matrix-algebra", "cp-isometry", "mixture"),
                   required=True)
    p.add_argument("--n", type=int, default=2, help="dimension for comonoid generators")
    p.add_argument("--in-dim", dest="in_dim", type=int, default=2)
    p.add_argument("--out-dim", dest="out_dim", type=int, default=4)
    p.add_argument("--terms", type=int, default=2)
    p.add_argument("--w", type=float, default=0.5, help="mixture weight")
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=_cmd_gen)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CpmkitError as exc:
        return _fail(str(exc), 1)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
