"""Command-line front end: scenario runner over JSON inputs with
machine-readable reports.

Exit codes: 0 for any completed run (negative mathematical verdicts are
successful computations), 2 for invalid input, 3 for an uncertified solve.
Reports are deterministic given (inputs, seed, tolerances); only the
timing field varies between runs.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__, dualsys, gallery, linalg, opsys, quotient, tensor
from .errors import InvalidInputError, OpsyskitError, SolverFailure
from .linalg import TolerancePolicy

COMMANDS = (
    "check-kernel",
    "quotient-norms",
    "quotient-cones",
    "cp-check",
    "dual-compare",
    "tensor-min",
    "tensor-max",
    "nuclearity-probe",
    "embedding-check",
    "gallery",
)


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read JSON input {path}: {exc}") from exc


def _jsonable(obj):
    """Best-effort conversion of report payloads to plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return linalg.matrix_to_json(np.atleast_2d(obj))
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, (bool, int, float, str)) or obj is None:
        return obj
    if hasattr(obj, "__dict__"):
        return {
            k: _jsonable(v) for k, v in vars(obj).items() if not k.startswith("_")
        }
    return repr(obj)


def _system_from_file(path: str) -> opsys.ConcreteOperatorSystem:
    obj = _load_json(path)
    try:
        return opsys.ConcreteOperatorSystem.from_json(obj)
    except (KeyError, ValueError, OpsyskitError) as exc:
        raise InvalidInputError(f"bad system file {path}: {exc}") from exc


def _kernel_mats_from_file(path: str, S: opsys.ConcreteOperatorSystem):
    obj = _load_json(path)
    try:
        return [linalg.blocks_from_json(b, S.shape) for b in obj["basis"]]
    except (KeyError, ValueError, OpsyskitError) as exc:
        raise InvalidInputError(f"bad kernel file {path}: {exc}") from exc


def _element_from_file(path: str, S: opsys.ConcreteOperatorSystem):
    obj = _load_json(path)
    try:
        return opsys.SystemElement(S, linalg.blocks_from_json(obj["matrix"], S.shape))
    except (KeyError, ValueError, OpsyskitError) as exc:
        raise InvalidInputError(f"bad element file {path}: {exc}") from exc


def run_scenario(args) -> dict:
    """Execute one scenario and return the report dictionary."""
    tol = TolerancePolicy(
        psd_tol=args.tol if args.tol else 1e-9,
        bisect_tol=max(args.tol, 1e-8) if args.tol else 1e-8,
        feas_margin=max(args.tol, 1e-7) if args.tol else 1e-7,
    )
    t0 = time.perf_counter()
    verdicts: dict = {}
    anchor = None

    if args.command == "gallery":
        if args.gallery is None:
            raise InvalidInputError("gallery runs need --gallery <key>")
        if args.gallery not in gallery.GALLERY_KEYS:
            raise InvalidInputError(
                f"unknown gallery key {args.gallery!r}; "
                f"available: {', '.join(gallery.GALLERY_KEYS)}"
            )
        anchor = args.gallery
        verdicts = gallery.build_gallery_report(
            args.gallery, n=args.n, seed=args.seed, tol=tol
        )
    elif args.command == "check-kernel":
        S = _system_from_file(_need(args.input, "--input"))
        mats = _kernel_mats_from_file(_need(args.kernel, "--kernel"), S)
        J = quotient.is_kernel(S, mats, tol)
        verdicts = {
            "verdict": J.verdict,
            "kernel_dim": J.dim,
            "witness": None
            if J.verdict != "NOT_KERNEL"
            else linalg.blocks_to_json(J.certificate["witness"], S.shape),
            "num_states": len(J.certificate.get("states", [])),
        }
    elif args.command in ("quotient-norms", "quotient-cones"):
        S = _system_from_file(_need(args.input, "--input"))
        mats = _kernel_mats_from_file(_need(args.kernel, "--kernel"), S)
        x = _element_from_file(_need(args.element, "--element"), S)
        J = quotient.is_kernel(S, mats, tol)
        Q = quotient.QuotientSystem(J)
        if args.command == "quotient-norms":
            osy, osy_res = quotient.osy_norm(Q, x, tol, with_certificate=True)
            osp, cert = quotient.osp_norm(Q, x, tol, with_certificate=True)
            verdicts = {
                "kernel_verdict": J.verdict,
                "osy": osy,
                "osy_interval": [
                    max(0.0, -osy_res.value_hi),
                    max(0.0, -osy_res.value_lo),
                ],
                "osp": osp,
                "osp_interval": [cert["result"].value_lo, cert["result"].value_hi],
                "optimizing_coefficients": cert["coeffs"].tolist(),
            }
        else:
            c = quotient.c_cone_contains(Q, x, args.level, tol)
            d = quotient.d_cone_contains(Q, x, args.level, tol)
            verdicts = {
                "kernel_verdict": J.verdict,
                "level": args.level,
                "closure_member": c.member,
                "eps_star": c.eps_star,
                "algebraic_member": d.member,
                "algebraic_margin": d.margin,
            }
    elif args.command == "cp-check":
        S = _system_from_file(_need(args.input, "--input"))
        obj = _load_json(_need(args.map, "--map"))
        phi = dualsys.CPMap.from_json(obj, S)
        v = dualsys.cp_check(phi, tol)
        verdicts = {
            "is_cp": v.is_cp,
            "path": v.info.get("path"),
            "witness_value": None if v.witness is None else v.witness[2],
        }
    elif args.command == "dual-compare":
        S = _system_from_file(_need(args.input, "--input"))
        rep = dualsys.bidual_compare(
            S, levels=(1, 2), num_samples=args.n or 20, rng=args.seed, tol=tol
        )
        verdicts = rep
    elif args.command in ("tensor-min", "tensor-max"):
        S = _system_from_file(_need(args.input, "--input"))
        T = _system_from_file(_need(args.right, "--right"))
        TS = tensor.TensorSystem(S, T, "MIN" if args.command == "tensor-min" else "MAX")
        obj = _load_json(_need(args.element, "--element"))
        u = TS.element_from_kron(linalg.matrix_from_json(obj["matrix"]))
        if args.command == "tensor-min":
            verdicts = {"min_member": tensor.min_membership(TS, u, tol)}
        else:
            v = tensor.max_membership(TS, u, k=args.level, tol=tol, rng=args.seed)
            verdicts = {
                "status": v.status,
                "level": v.level,
                "certificate": _jsonable(v.certificate),
            }
    elif args.command == "nuclearity-probe":
        S = _system_from_file(_need(args.input, "--input"))
        T = _system_from_file(_need(args.right, "--right"))
        rep = tensor.nuclearity_gap_probe(
            S, T, levels=(1, args.level), budget=args.n or 5, rng=args.seed, tol=tol
        )
        verdicts = rep
    elif args.command == "embedding-check":
        S = _system_from_file(_need(args.input, "--input"))
        ideal = [int(i) for i in (args.ideal_blocks or "").split(",") if i != ""]
        if not ideal:
            raise InvalidInputError("embedding-check needs --ideal-blocks i,j,...")
        rep = quotient.quotient_embedding_check(
            S, ideal, levels=(1, 2), rng=args.seed, tol=tol
        )
        verdicts = {
            "verdict": rep.verdict,
            "witness": None
            if rep.witness is None
            else linalg.blocks_to_json(rep.witness, S.shape),
            "witness_eps_star": rep.witness_eps_star,
            "samples_checked": rep.samples_checked,
        }
    else:
        raise InvalidInputError(f"unknown command {args.command!r}")

    return {
        "scenario": {
            "command": args.command,
            "gallery": args.gallery,
            "n": args.n,
            "level": args.level,
            "seed": args.seed,
            "tol": args.tol,
        },
        "verdicts": _jsonable(verdicts),
        "paper_anchor": anchor,
        "timing_seconds": round(time.perf_counter() - t0, 6),
        "version": __version__,
    }


def _need(value, flag):
    if value is None:
        raise InvalidInputError(f"this command needs {flag}")
    return value


def emit_report(report: dict, fmt: str = "json") -> bytes:
    """Render a report: stable-key-ordered JSON or a short markdown digest."""
    if fmt == "json":
        return (json.dumps(report, indent=2, sort_keys=True) + "\n").encode()
    if fmt != "markdown":
        raise InvalidInputError(f"unknown format {fmt!r}")
    lines = [f"# opsyskit report: {report['scenario']['command']}"]
    if report.get("paper_anchor"):
        lines.append(f"anchor: **{report['paper_anchor']}**")
    lines.append("")
    verd = report.get("verdicts", {})

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k in sorted(obj):
                walk(f"{prefix}{k}.", obj[k])
        elif isinstance(obj, list) and len(obj) > 6:
            lines.append(f"- {prefix[:-1]}: [{len(obj)} entries]")
        else:
            lines.append(f"- {prefix[:-1]}: {obj}")

    walk("", verd)
    lines.append("")
    lines.append(f"_version {report['version']}, {report['timing_seconds']}s_")
    return ("\n".join(lines) + "\n").encode()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="opsyskit",
        description="Quotients, kernels, duals, and tensor cones of "
        "finite-dimensional operator systems.",
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", help="system JSON file")
    p.add_argument("--right", help="right tensor factor system JSON file")
    p.add_argument("--kernel", help="kernel JSON file")
    p.add_argument("--element", help="element JSON file")
    p.add_argument("--map", help="linear map JSON file")
    p.add_argument("--gallery", help="gallery key")
    p.add_argument("--ideal-blocks", help="comma-separated ambient block indices")
    p.add_argument("--n", type=int, default=1, help="size / sample parameter")
    p.add_argument("--level", type=int, default=1, help="matrix or hierarchy level")
    p.add_argument("--tol", type=float, default=None, help="tolerance override")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized probes")
    p.add_argument("--format", choices=("json", "markdown"), default="json")
    p.add_argument("--out", help="write the report here instead of stdout")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = run_scenario(args)
    except InvalidInputError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except OpsyskitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    payload = emit_report(report, args.format)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.buffer.write(payload)
    return 0


if __name__ == "__main__":
    sys.exit(main())
