"""Batch command-line interface.

Every analysis in the library is exposed as one subcommand taking a tensor
file (or ``examples/NAME`` for a built-in example) and printing a report,
human readable by default or a deterministic JSON document under ``--json``.

Exit codes: 0 = verdict computed (including negative verdicts); 1 = usage
or parse error; 2 = numerical failure where a structural guarantee was
expected.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import canonical, mpdo, rfp_general, rfp_pure
from .examples import example, example_names
from .fileio import TensorFormatError, parse_tensor, serialize_tensor
from .rfp_general import fit_algebra, vertical_cf
from .tensors import MpdoTensor, MpvTensor, open_chain_vectors

__all__ = ["main", "run"]

COMMANDS = (
    "canon", "cfii", "bnt", "gauge", "equiv", "inject", "rfp-pure", "flow",
    "parent", "entropy", "validate", "zcl", "purify", "prfp", "mutual-info",
    "simple", "gsnnch", "channels", "vcf", "algebra", "fusion", "rfp-mpdo",
    "decompose", "fib-rank", "decorrelate", "example",
)


class UsageError(Exception):
    pass


def _clean(obj):
    """Convert numpy containers to JSON-friendly plain Python values."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.complexfloating, complex)):
        z = complex(obj)
        return [z.real, z.imag]
    return obj


def _load(spec: str, p: float | None):
    """Resolve a tensor argument: a file path, or examples/NAME."""
    if os.path.exists(spec):
        return parse_tensor(spec)
    name = spec
    if spec.startswith("examples/"):
        name = spec[len("examples/") :]
    try:
        return example(name, p) if name == "zcl-no-sal" else example(name)
    except KeyError:
        pass
    raise UsageError(f"no such file or built-in example: {spec}")


def _mpv(t, command: str) -> MpvTensor:
    if not isinstance(t, MpvTensor):
        raise UsageError(f"{command} expects an mpv tensor")
    return t


def _mpdo(t, command: str) -> MpdoTensor:
    if not isinstance(t, MpdoTensor):
        raise UsageError(f"{command} expects an mpdo tensor")
    return t


def _round(x: float, digits: int = 12) -> float | None:
    """Round residuals for the report so JSON output is platform-stable;
    non-finite values become null."""
    x = float(x)
    if not np.isfinite(x):
        return None
    return float(f"{x:.{digits}g}")


# ---------------------------------------------------------------------------
# per-command report builders; each returns (verdicts, residuals, exit_code)


def _cmd_canon(t, args):
    t = _mpv(t, "canon")
    dec = canonical.canonical_form(t, tol=args.tol)
    v = {
        "blocks": len(dec.blocks),
        "bnt_size": len(dec.bnt),
        "blocking_factor": dec.blocking_factor,
        "weights": _clean(np.asarray(dec.weights)),
        "block_dims": [b.D for b in dec.bnt],
    }
    return v, {}, 0


def _cmd_cfii(t, args):
    t = _mpv(t, "cfii")
    a2, lams, dec = canonical.to_cfii(t, tol=args.tol)
    return (
        {"blocks": len(dec.blocks), "lambdas": _clean(np.asarray(lams)), "D": a2.D},
        {},
        0,
    )


def _cmd_bnt(t, args):
    t = _mpv(t, "bnt")
    dec = canonical.canonical_form(t, tol=args.tol)
    return (
        {
            "bnt_size": len(dec.bnt),
            "dims": [b.D for b in dec.bnt],
            "blocking_factor": dec.blocking_factor,
        },
        {},
        0,
    )


def _cmd_gauge(t, args):
    a = _mpv(t, "gauge")
    b = _mpv(_load(args.tensor2, args.p), "gauge")
    res = canonical.find_gauge(a, b, tol=args.tol)
    v = {"found": res.found, "phase": _round(res.phase) if res.found else None}
    return v, {"gauge": _round(res.residual)}, 0


def _cmd_equiv(t, args):
    a = _mpv(t, "equiv")
    b = _mpv(_load(args.tensor2, args.p), "equiv")
    res = canonical.fundamental_theorem_check(a, b, tol=args.tol)
    return {"verdict": res.verdict, "detail": res.detail}, {}, 0


def _cmd_inject(t, args):
    t = _mpv(t, "inject")
    rep = canonical.is_injective(t, tol=args.tol)
    v = {
        "injective": rep.injective,
        "length": rep.length,
        "rank": rep.rank,
        "target_rank": rep.target_rank,
    }
    return v, {}, 0


def _cmd_rfp_pure(t, args):
    t = _mpv(t, "rfp-pure")
    verdict, residual = rfp_pure.is_rfp_pure(t, tol=args.tol)
    return {"rfp": verdict}, {"fixed_point": _round(residual)}, 0


def _cmd_flow(t, args):
    t = _mpv(t, "flow")
    res = rfp_pure.renormalization_flow(t, tol=args.tol)
    v = {"converged": res.converged, "steps": res.steps}
    r = {"final": _round(res.residuals[-1]) if res.residuals else 0.0}
    return v, r, 0


def _cmd_parent(t, args):
    t = _mpv(t, "parent")
    res = rfp_pure.parent_hamiltonian(t, L=max(args.lmax, 2), tol=args.tol)
    v = {
        "commuting": res.commuting,
        "parent": res.parent,
        "L": res.L,
        "ground_dims": _clean(res.ground_dims),
        "expected_dims": _clean(res.expected_dims),
    }
    return v, {"commutator": _round(res.commutator_norm)}, 0


def _cmd_entropy(t, args):
    t = _mpv(t, "entropy")
    profile, sal = rfp_pure.entropy_profile_pure(t, n=args.n or 6, tol=max(args.tol, 1e-8))
    return {"entropies": [_round(s) for s in profile], "sal": sal}, {}, 0


def _cmd_validate(t, args):
    m = _mpdo(t, "validate")
    res = mpdo.validate_mpdo(m, tol=args.tol)
    v = {"positive": res.positive}
    r = {
        "hermitian": _round(max(res.hermitian_residuals.values())),
        "min_eigenvalue": _round(min(res.min_eigenvalues.values())),
    }
    return v, r, 0


def _cmd_zcl(t, args):
    if isinstance(t, MpdoTensor):
        zcl, scale, traced = mpdo.is_zcl_mixed(t, tol=args.tol)
        dev = float(np.max(np.abs(traced @ traced - scale * traced)))
        dev /= max(float(np.max(np.abs(traced))), 1e-300)
        return {"zcl": bool(zcl), "scale": _round(scale.real)}, {"idempotency": _round(dev)}, 0
    cid, r1 = rfp_pure.is_cid(t, tol=args.tol)
    lo, r2 = rfp_pure.is_locally_orthogonal(t, tol=args.tol)
    v = {"zcl": bool(cid and lo), "cid": cid, "locally_orthogonal": lo}
    return v, {"cid": _round(r1), "local_orthogonality": _round(r2)}, 0


def _cmd_purify(t, args):
    m = _mpdo(t, "purify")
    res = mpdo.purify(m, tol=args.tol)
    v = {
        "success": res.success,
        "route": res.route,
        "ancilla_dim": res.ancilla_dim,
        "normalized_only": res.normalized_only,
        "obstruction": res.obstruction,
    }
    return v, {}, 0 if res.success else 2


def _cmd_prfp(t, args):
    m = _mpdo(t, "prfp")
    verdict, pur, witness = mpdo.is_prfp(m, tol=args.tol)
    v = {"prfp": bool(verdict), "route": pur.route}
    return v, {"fixed_point": _round(witness)}, 0


def _cmd_mutual_info(t, args):
    m = _mpdo(t, "mutual-info")
    res = mpdo.mutual_info_profile(m, n=args.n or 6, tol=args.tol)
    v = {
        "n": res.n,
        "entropies": [_round(s, 10) for s in res.entropies],
        "mutual_info": [_round(x, 10) for x in res.mutual_info],
        "bound": _round(res.bound, 10),
        "sal": res.sal,
    }
    return v, {}, 0


def _cmd_simple(t, args):
    m = _mpdo(t, "simple")
    res = mpdo.is_simple(m, tol=args.tol)
    return {"simple": res.simple, "nilpotent_blocks": _clean(res.nilpotent_blocks)}, {}, 0


def _cmd_gsnnch(t, args):
    m = _mpdo(t, "gsnnch")
    res = mpdo.extract_gsnnch(m, tol=args.tol)
    v = {
        "applicable": res.applicable,
        "sal": bool(res.sal),
        "zcl": bool(res.zcl_flag),
        "labels": _clean(res.labels),
        "splits": _clean(res.splits),
        "primitive": bool(res.primitive),
        "rank_one": bool(res.rank_one),
        "t_matrix": _clean(res.t),
    }
    return v, {"rank_one_witness": _round(res.rank_one_witness)}, 0


def _cmd_channels(t, args):
    if isinstance(t, MpdoTensor):
        try:
            ch = mpdo.build_ts_channels(mpdo.extract_gsnnch(t, tol=args.tol), tol=args.tol)
        except (ValueError, ArithmeticError) as exc:
            return {"channels": False, "reason": str(exc)}, {}, 2
        v = {
            "channels": bool(ch.identities_ok),
            "trace_preserving": bool(ch.trace_preserving),
            "completely_positive": bool(ch.completely_positive),
        }
        r = {k: _round(x) for k, x in ch.identity_residuals.items()}
        return v, r, 0 if ch.identities_ok else 2
    try:
        ch = mpdo.ts_channels_pure(t, tol=args.tol)
    except (ValueError, ArithmeticError) as exc:
        return {"channels": False, "reason": str(exc)}, {}, 2
    v = {
        "channels": bool(ch.identities_ok),
        "trace_preserving": bool(ch.trace_preserving),
        "completely_positive": bool(ch.completely_positive),
        "scale": _round(ch.scale),
    }
    r = {k: _round(x) for k, x in ch.identity_residuals.items()}
    return v, r, 0 if ch.identities_ok else 2


def _cmd_vcf(t, args):
    m = _mpdo(t, "vcf")
    v = vertical_cf(m, tol=args.tol)
    out = {
        "labels": len(v.labels),
        "weights": [_clean(np.round(mu, 12)) for mu in v.mus],
        "block_dims": [b.D for b in v.bnt],
    }
    return out, {"reassembly": _round(v.residual)}, 0


def _cmd_algebra(t, args):
    m = _mpdo(t, "algebra")
    alg = fit_algebra(vertical_cf(m, tol=args.tol), l_max=args.lmax, tol=args.tol)
    v = {
        "verdict": alg.verdict,
        "closed": alg.closed,
        "l_independent": alg.l_independent,
        "integer_coefficients": alg.integer_coefficients,
        "idempotent": alg.idempotent_ok,
        "l_values": _clean(alg.l_values),
        "m": _clean(np.round(alg.m, 12)),
        "c_first": _clean(np.round(alg.c[alg.l_values[0]].real, 12)) if alg.c else None,
        "chi": {f"{a},{b},{c}": _clean(np.round(x, 12)) for (a, b, c), x in alg.chi.items()},
    }
    return v, {k: _round(x) for k, x in alg.residuals.items()}, 0


def _cmd_fusion(t, args):
    m = _mpdo(t, "fusion")
    v = vertical_cf(m, tol=args.tol)
    table = {}
    worst = 0.0
    for a in range(len(v.labels)):
        for b in range(len(v.labels)):
            fus = rfp_general.fusion_isometry(v, a, b, tol=args.tol)
            table[f"{a},{b}"] = {str(c): _clean(np.round(x, 12)) for c, x in fus.chi.items()}
            worst = max(worst, fus.residual)
    return {"fusion": table}, {"worst_split": _round(worst)}, 0


def _cmd_rfp_mpdo(t, args):
    m = _mpdo(t, "rfp-mpdo")
    rep = rfp_general.is_rfp_mpdo(m, l_max=args.lmax, tol=args.tol)
    v = {"rfp": bool(rep), "reason": rep.reason}
    r = {}
    if rep.algebra is not None:
        r = {k: _round(x) for k, x in rep.algebra.residuals.items()}
    return v, r, 0


def _cmd_decompose(t, args):
    if isinstance(t, MpdoTensor):
        try:
            dec = rfp_general.projector_gibbs_decomposition(
                t, n_check=max(args.n or 4, 3), l_max=args.lmax, tol=args.tol
            )
        except ValueError as exc:
            return {"decomposed": False, "reason": str(exc)}, {}, 0
        v = {
            "decomposed": dec.verdict == "ok",
            "verdict": dec.verdict,
            "weights": _clean(np.round(dec.weights, 12)),
        }
        return v, {k: _round(x) for k, x in dec.residuals.items()}, 0
    dec = rfp_pure.rfp_decompose(t, tol=args.tol)
    v = {
        "blocks": len(dec.lambdas),
        "lambdas": [_clean(np.round(l, 12)) for l in dec.lambdas],
    }
    return v, {"isometry": _round(dec.isometry_residual)}, 0


def _cmd_fib_rank(t, args):
    n = args.n if args.n is not None else 4
    out = rfp_general.fibonacci_rank(n)
    ranks = [rfp_general.fibonacci_rank(k)["closed_form"] for k in range(1, n + 1)]
    geo = rfp_general.matches_geometric_rank(ranks)
    v = {
        "n": n,
        "rank": out["closed_form"],
        "ranks": ranks,
        "brute_force": out.get("brute_force"),
        "geometric_fit": geo,
    }
    return v, {}, 0


def _cmd_decorrelate(t, args):
    a = _mpv(t, "decorrelate")
    x_len = max(args.n if args.n is not None else 1, 1)
    vecs = open_chain_vectors(a, x_len + 2)
    q, r = np.linalg.qr(vecs.conj().T)
    keep = np.abs(np.diag(r)) > max(args.tol, 1e-10) * max(np.abs(np.diag(r)).max(), 1e-300)
    basis = q[:, keep].conj().T
    res = rfp_pure.decorrelation_check(basis, (a.d, a.d**x_len, a.d), tol=args.tol)
    v = {
        "decorrelated": res.decorrelated,
        "commuting": res.commuting,
        "projector_identity": res.projector_identity,
        "x_sites": x_len,
    }
    return v, {"deviation": _round(res.deviation), "commutator": _round(res.commutator)}, 0


def _cmd_example(t, args):
    # positional argument is the example name; print its serialized form
    name = args.tensor
    if name.startswith("examples/"):
        name = name[len("examples/") :]
    tensor = example(name, args.p) if name == "zcl-no-sal" else example(name)
    sys.stdout.write(serialize_tensor(tensor, {"name": name}))
    return None, None, 0


_HANDLERS = {
    "canon": _cmd_canon,
    "cfii": _cmd_cfii,
    "bnt": _cmd_bnt,
    "gauge": _cmd_gauge,
    "equiv": _cmd_equiv,
    "inject": _cmd_inject,
    "rfp-pure": _cmd_rfp_pure,
    "flow": _cmd_flow,
    "parent": _cmd_parent,
    "entropy": _cmd_entropy,
    "validate": _cmd_validate,
    "zcl": _cmd_zcl,
    "purify": _cmd_purify,
    "prfp": _cmd_prfp,
    "mutual-info": _cmd_mutual_info,
    "simple": _cmd_simple,
    "gsnnch": _cmd_gsnnch,
    "channels": _cmd_channels,
    "vcf": _cmd_vcf,
    "algebra": _cmd_algebra,
    "fusion": _cmd_fusion,
    "rfp-mpdo": _cmd_rfp_mpdo,
    "decompose": _cmd_decompose,
    "fib-rank": _cmd_fib_rank,
    "decorrelate": _cmd_decorrelate,
    "example": _cmd_example,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mpvkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "fib-rank":
            p.add_argument("tensor", nargs="?", default=None, help="ignored")
        else:
            p.add_argument("tensor", help="tensor file or examples/NAME")
        if name in ("gauge", "equiv"):
            p.add_argument("tensor2", help="second tensor file or examples/NAME")
        p.add_argument("--n", type=int, default=None, help="ring size / region length")
        p.add_argument("--lmax", type=int, default=6, help="maximum block length")
        p.add_argument("--tol", type=float, default=1e-10, help="tolerance")
        p.add_argument("--p", type=float, default=None, help="example parameter")
        p.add_argument("--json", action="store_true", help="structured report")
        p.add_argument("--seed", type=int, default=None, help="seed recorded in the report")
    return parser


def _emit(report: dict, as_json: bool, elapsed: float) -> None:
    if as_json:
        sys.stdout.write(json.dumps(report, sort_keys=True, separators=(",", ":")) + "\n")
        return
    print(f"command: {report['command']}")
    for key in ("inputs", "verdicts", "residuals"):
        if report.get(key):
            print(f"{key}:")
            for k, v in report[key].items():
                print(f"  {k}: {v}")
    print(f"elapsed: {elapsed:.3f}s")


def run(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    t0 = time.time()
    try:
        if args.command == "example":
            _cmd_example(None, args)
            return 0
        tensor = None if args.command == "fib-rank" else _load(args.tensor, args.p)
        if args.seed is not None:
            np.random.seed(args.seed % (2**32))
        verdicts, residuals, code = _HANDLERS[args.command](tensor, args)
    except (UsageError, TensorFormatError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    inputs = {"tensor": args.tensor, "lmax": args.lmax, "tol": args.tol}
    if args.n is not None:
        inputs["n"] = args.n
    if args.p is not None:
        inputs["p"] = args.p
    if args.seed is not None:
        inputs["seed"] = args.seed
    if getattr(args, "tensor2", None):
        inputs["tensor2"] = args.tensor2
    report = {
        "schema": 1,
        "command": args.command,
        "inputs": inputs,
        "verdicts": verdicts,
        "residuals": residuals,
    }
    _emit(report, args.json, time.time() - t0)
    return code


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
