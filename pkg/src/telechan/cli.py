"""Command-line front end.

Every subcommand builds a JSON-serializable report; ``--format table`` only
re-renders that report. Exit codes: 0 pass, 1 a check failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .channel import apply, apply_to_half, spectrum_of
from .entanglement import (
    concurrence,
    entanglement_bound_check,
    entanglement_of_formation,
    is_ppt,
    min_pt_eigenvalue,
)
from .metrics import (
    MetricReport,
    canonicalize_resource,
    capacity_bound_check,
    entswap_success,
    singlet_fraction,
    teleport_success,
)
from .protocol_sim import correction_unitaries, swap, teleport
from .states import (
    DensityMatrix,
    StateError,
    bell_basis,
    bell_diagonal,
    random_pure,
    random_state,
    state_from_source,
    state_to_dict,
)
from .tensor_core import max_abs_diff

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
SEED_ENV = "TELECHAN_SEED"


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    resource: str | None = None
    input: str | None = None
    dim: int = 2
    samples: int = 10_000
    seed: int = 0
    tolerance: float = 1e-10
    output: str | None = None
    format: str = "json"
    inject_fault: bool = False

    def __post_init__(self):
        if self.samples < 1:
            raise InputError("--samples must be at least 1")
        if self.dim < 2:
            raise InputError("--dim must be at least 2")
        if not self.tolerance > 0:
            raise InputError("--tolerance must be positive")


def _load(source: str | None, dim: int, what: str, default: str | None = None) -> DensityMatrix:
    source = source or default
    if source is None:
        raise InputError(f"--{what} is required")
    try:
        return state_from_source(source, dim)
    except StateError as exc:
        raise InputError(f"invalid {what} state, {exc}") from exc


def _resource(cfg: RunConfig) -> DensityMatrix:
    chi = _load(cfg.resource, cfg.dim, "resource", default="bell")
    if len(chi.dims) != 2 or chi.dims[0] != chi.dims[1]:
        raise InputError(f"resource must be a d x d pair, got dims {list(chi.dims)}")
    return chi


def _labels(basis) -> list:
    return [list(lab) if isinstance(lab, tuple) else lab for lab in basis.labels]


def _branches(result) -> list[dict]:
    return [
        {
            "outcome": b.outcome_index,
            "probability": b.probability,
            "flagged": b.flagged,
            "conditional_state": None if b.flagged else state_to_dict(b.conditional_state),
        }
        for b in result.branches
    ]


def cmd_spectrum(cfg: RunConfig) -> tuple[dict, int]:
    chi = _resource(cfg)
    basis = bell_basis(chi.dims[0])
    spec = spectrum_of(chi, basis)
    canon, k = canonicalize_resource(chi, basis)
    report = {
        "command": "spectrum",
        "dim": spec.dim,
        "labels": _labels(basis),
        "probs": spec.probs.tolist(),
        "singlet_fraction": singlet_fraction(chi, basis),
        "canonical": {
            "relabeling": _labels(basis)[k],
            "probs": spectrum_of(canon, basis).probs.tolist(),
        },
    }
    if spec.dim == 2:
        report["concurrence"] = concurrence(chi)
    return report, EXIT_OK


def cmd_teleport(cfg: RunConfig) -> tuple[dict, int]:
    chi = _resource(cfg)
    d = chi.dims[0]
    rho = _load(cfg.input, d, "input", default="ket:0")
    if rho.dims != (d,):
        raise InputError(f"input must be a single {d}-level state, got dims {list(rho.dims)}")
    result = teleport(rho, chi)
    closed = apply(spectrum_of(chi), rho)
    dev = max_abs_diff(result.averaged_output.matrix, closed.matrix)
    report = {
        "command": "teleport",
        "dim": d,
        "branches": _branches(result),
        "averaged_output": state_to_dict(result.averaged_output),
        "closed_form_output": state_to_dict(closed),
        "max_deviation": dev,
        "passed": dev < cfg.tolerance,
    }
    return report, EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_swap(cfg: RunConfig) -> tuple[dict, int]:
    chi = _resource(cfg)
    d = chi.dims[0]
    gamma = _load(cfg.input, d, "input", default="bell")
    if gamma.dims != (d, d):
        raise InputError(f"input must be a {d} x {d} pair, got dims {list(gamma.dims)}")
    result = swap(gamma, chi)
    closed = apply_to_half(spectrum_of(chi), gamma)
    dev = max_abs_diff(result.averaged_output.matrix, closed.matrix)
    report = {
        "command": "swap",
        "dim": d,
        "branches": _branches(result),
        "averaged_output": state_to_dict(result.averaged_output),
        "closed_form_output": state_to_dict(closed),
        "max_deviation": dev,
        "passed": dev < cfg.tolerance,
    }
    return report, EXIT_OK if report["passed"] else EXIT_FAIL


def run_verify(
    dim: int, samples: int, seed: int, tolerance: float = 1e-10, inject_fault: bool = False
) -> dict:
    """Protocol simulation against the closed-form channel on random pairs.

    Even-numbered samples use a Haar-random pure input, odd ones a full-rank
    mixed input; resources are full-rank Hilbert-Schmidt random states.
    ``inject_fault`` exchanges two correction unitaries as a negative control.
    """
    basis = bell_basis(dim)
    corrections = list(correction_unitaries(basis))
    if inject_fault:
        corrections[1], corrections[2] = corrections[2], corrections[1]
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_prob = 0.0
    for s in range(samples):
        rho = random_pure((dim,), rng).density() if s % 2 == 0 else random_state((dim,), rng)
        chi = random_state((dim, dim), rng)
        result = teleport(rho, chi, basis, corrections=corrections)
        closed = apply(spectrum_of(chi, basis), rho, basis)
        worst = max(worst, max_abs_diff(result.averaged_output.matrix, closed.matrix))
        worst_prob = max(worst_prob, abs(result.probabilities.sum() - 1.0))
    return {
        "command": "verify",
        "dim": dim,
        "samples": samples,
        "seed": seed,
        "tolerance": tolerance,
        "fault_injected": inject_fault,
        "max_deviation": worst,
        "max_probability_sum_error": worst_prob,
        "passed": worst < tolerance,
    }


def cmd_verify(cfg: RunConfig) -> tuple[dict, int]:
    report = run_verify(cfg.dim, cfg.samples, cfg.seed, cfg.tolerance, cfg.inject_fault)
    return report, EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_metrics(cfg: RunConfig) -> tuple[dict, int]:
    chi = _resource(cfg)
    basis = bell_basis(chi.dims[0])
    f = teleport_success(chi, basis, cfg.samples, cfg.seed)
    bound = capacity_bound_check(chi, basis, cfg.samples, cfg.seed)
    canon, _ = canonicalize_resource(chi, basis)
    fplus = MetricReport(
        "entswap_success",
        entswap_success(chi, basis),
        details={"canonical_value": entswap_success(canon, basis)},
    )
    if math.isinf(fplus.value):
        fplus.notes.append("singlet fraction is zero; relative entropy diverges")
    cbar = MetricReport(
        "mean_capacity",
        bound.details["mean_capacity"],
        stderr=bound.details["mean_capacity_stderr"],
        samples=cfg.samples,
        seed=cfg.seed,
    )
    report = {
        "command": "metrics",
        "dim": basis.dim,
        "probs": spectrum_of(chi, basis).probs.tolist(),
        "metrics": [m.to_dict() for m in (f, fplus, cbar, bound)],
        "passed": bound.details["passed"],
    }
    return report, EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_bound(cfg: RunConfig) -> tuple[dict, int]:
    chi = _resource(cfg)
    if chi.dims != (2, 2):
        raise InputError("bound is defined for two-qubit resources")
    spec = spectrum_of(chi)
    rng = np.random.default_rng(cfg.seed)
    separable = bool(spec.probs.max() <= 0.5 + 1e-12)
    worst_margin = math.inf
    worst_pt = math.inf
    max_eof = 0.0
    violations = 0
    ppt_failures = 0
    for _ in range(cfg.samples):
        gamma = random_pure((2, 2), rng).density()
        check = entanglement_bound_check(gamma, spec)
        worst_margin = min(worst_margin, check["margin"])
        max_eof = max(max_eof, check["eof_output"])
        violations += not check["passed"]
        if separable:
            out = apply_to_half(spec, gamma)
            worst_pt = min(worst_pt, min_pt_eigenvalue(out.matrix, out.dims))
            ppt_failures += not is_ppt(out)
    report = {
        "command": "bound",
        "probs": spec.probs.tolist(),
        "samples": cfg.samples,
        "seed": cfg.seed,
        "eof_comparator": entanglement_of_formation(bell_diagonal(np.sort(spec.probs)[::-1])),
        "max_output_eof": max_eof,
        "worst_margin": worst_margin,
        "violations": violations,
        "separable_channel": separable,
        "passed": violations == 0 and ppt_failures == 0,
    }
    if separable:
        report["min_pt_eigenvalue"] = worst_pt
        report["ppt_failures"] = ppt_failures
    return report, EXIT_OK if report["passed"] else EXIT_FAIL


COMMANDS = {
    "spectrum": cmd_spectrum,
    "teleport": cmd_teleport,
    "swap": cmd_swap,
    "verify": cmd_verify,
    "metrics": cmd_metrics,
    "bound": cmd_bound,
}


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _finite(o):
    if isinstance(o, float) and not math.isfinite(o):
        return "inf" if o > 0 else ("-inf" if o < 0 else "nan")
    if isinstance(o, dict):
        return {k: _finite(v) for k, v in o.items()}
    if isinstance(o, list):
        return [_finite(v) for v in o]
    return o


def to_json(report: dict) -> str:
    return json.dumps(_finite(report), indent=2, default=_default) + "\n"


def _flatten(prefix: str, value, rows: list) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(value, list) and value and isinstance(value[0], dict):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, value))


def render_table(report_json: str) -> str:
    """Two-column text rendering of a JSON report."""
    rows: list = []
    _flatten("", json.loads(report_json), rows)
    rows = [(k, v) for k, v in rows if not k.endswith((".matrix", ".vector"))]
    width = max(len(k) for k, _ in rows)
    lines = []
    for k, v in rows:
        if isinstance(v, float):
            text = f"{v:.10g}"
        elif isinstance(v, list):
            text = "[" + ", ".join(f"{x:.6g}" if isinstance(x, float) else str(x) for x in v) + "]"
        else:
            text = str(v)
        lines.append(f"{k.ljust(width)}  {text}")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="telechan",
        description="Teleportation through mixed resources as a depolarizing channel.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__name__.removeprefix("cmd_"))
        p.add_argument("--resource", help="preset or JSON state file (default: bell)")
        p.add_argument("--input", help="input state preset or file")
        p.add_argument("--dim", type=int, default=2)
        p.add_argument("--samples", type=int, default=10_000)
        p.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
        p.add_argument("--tolerance", type=float, default=1e-10)
        p.add_argument("--output", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "table"), default="json")
        p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    return parser


def _seed(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise InputError(f"{SEED_ENV} must be an integer, got {env!r}") from exc


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            resource=args.resource,
            input=args.input,
            dim=args.dim,
            samples=args.samples,
            seed=_seed(args.seed),
            tolerance=args.tolerance,
            output=args.output,
            format=args.format,
            inject_fault=args.inject_fault,
        )
        report, code = COMMANDS[cfg.command](cfg)
    except (InputError, ValueError) as exc:
        print(f"telechan: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = to_json(report)
    if cfg.format == "table":
        text = render_table(text)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
