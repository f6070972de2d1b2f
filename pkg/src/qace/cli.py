"""Command-line front end.

Commands write CSV (or JSON) to ``--out`` or standard output. Exit codes:
0 success, 1 I/O failure, 2 usage error, 3 validation error, 4 numerical
convergence failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Iterable, Sequence

import numpy as np

from qace import classical
from qace.closed_forms import MBQC_FAMILIES, closed_form_mbqc
from qace.engine import AveragingConfig, ace_gate, ace_mbqc, ace_teleport
from qace.linalg import ConvergenceError, InvalidStateError, NotHermitianError
from qace.quantum import GateValidationError, concurrence, family_state, load_gate, projector, standard_gate
from qace.sampling import (
    SeededRng,
    ginibre_mixed_two_qubit,
    haar_pure_two_qubit,
    random_local_gate,
    random_product_state,
)

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_CONVERGENCE = 4

TABLE1_GATES = ("SWAP", "CNOT", "CZ", "B", "SQRT_SWAP")
STATE_KINDS = ("pure", "mixed", "product")
DEFAULT_KINDS = {"mbqc": "pure", "teleport": "pure,mixed"}

_FAMILY_ALIASES = {"CP": "C'", "CPP": "C''", "C_PRIME": "C'", "C_DPRIME": "C''"}


def fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _json_num(x):
    return None if x is None else float(fmt(x))


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument parsing


def parse_eps_grid(text: str) -> np.ndarray:
    """``start:stop:num`` (inclusive linspace) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            grid = np.linspace(float(start), float(stop), int(num))
        else:
            grid = np.array([float(t) for t in text.split(",") if t.strip()])
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse epsilon grid {text!r}") from None
    if grid.size == 0 or np.any(~np.isfinite(grid)) or np.any(grid < 0) or np.any(grid > 1):
        raise argparse.ArgumentTypeError("epsilon grid values must lie in [0, 1]")
    return grid


def _family(text: str) -> str:
    key = text.upper()
    return _FAMILY_ALIASES.get(key, key)


def _add_averaging(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("averaging")
    g.add_argument("--method", choices=["quadrature", "mc"], default="quadrature")
    g.add_argument("--phi-nodes", type=int, default=64)
    g.add_argument("--theta-nodes", type=int, default=32)
    g.add_argument("--mc-samples", type=int, default=100_000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--pair-mode", choices=["antipodal", "independent"], default="antipodal")
    g.add_argument("--workers", type=int, default=1)


def _add_output(p: argparse.ArgumentParser, default_format: str) -> None:
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=["csv", "json"], default=default_format)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qace", description="Quantum average causal effect toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table1", help="ACE of the benchmark two-qubit gates")
    _add_averaging(p)
    _add_output(p, "csv")

    for name, help_text in (
        ("mbqc-sweep", "MBQC ACE along a resource-state family"),
        ("teleport-sweep", "teleportation ACE along a resource-state family"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--family", type=_family, required=True)
        p.add_argument("--eps-grid", type=parse_eps_grid, default=np.linspace(0.0, 1.0, 51))
        _add_averaging(p)
        _add_output(p, "csv")

    p = sub.add_parser("scatter", help="concurrence vs ACE for random states")
    p.add_argument("--scenario", choices=["mbqc", "teleport"], required=True)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--kinds", default=None, help="comma list of pure, mixed, product (cycled over rows)")
    _add_averaging(p)
    _add_output(p, "csv")

    p = sub.add_parser("gate-ace", help="ACE of a gate read from a JSON file")
    p.add_argument("matrix_file")
    _add_averaging(p)
    _add_output(p, "json")

    p = sub.add_parser("classical", help="classical ACE quantifiers of a causal model file")
    p.add_argument("model_file")
    p.add_argument("--a0", type=int, default=0)
    p.add_argument("--a1", type=int, default=1)
    _add_output(p, "json")
    return parser


def config_from_args(args: argparse.Namespace) -> AveragingConfig:
    try:
        return AveragingConfig(
            method=args.method,
            phi_nodes=args.phi_nodes,
            theta_nodes=args.theta_nodes,
            mc_samples=args.mc_samples,
            seed=args.seed,
            pair_mode=args.pair_mode,
            workers=args.workers,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------
# commands: each returns (header, rows) or a JSON document


def cmd_table1(cfg: AveragingConfig) -> tuple[list[str], list[list]]:
    rows = []
    for name in TABLE1_GATES:
        est = ace_gate(standard_gate(name), cfg)
        rows.append([name, est.value, est.error_estimate, est.method])
    local = random_local_gate(SeededRng(cfg.seed).child(0))
    est = ace_gate(local, cfg)
    rows.append(["LOCAL", est.value, est.error_estimate, est.method])
    return ["name", "ace_value", "error_estimate", "method"], rows


def cmd_mbqc_sweep(family: str, grid: np.ndarray, cfg: AveragingConfig) -> tuple[list[str], list[list]]:
    if family not in MBQC_FAMILIES:
        raise UsageError(f"unknown MBQC family {family!r}; expected one of {', '.join(MBQC_FAMILIES)}")
    rho = np.array([family_state(family, e) for e in grid])
    conc = np.atleast_1d(concurrence(rho))
    num = np.atleast_1d(ace_mbqc(rho, cfg).value)
    closed = np.atleast_1d(closed_form_mbqc(family, grid))
    rows = [[e, c, v, f, abs(v - f)] for e, c, v, f in zip(grid, conc, num, closed)]
    return ["epsilon", "concurrence", "ace_numeric", "ace_closed_form", "abs_diff"], rows


TELEPORT_FAMILIES = {"F": "F_SCHMIDT", "F_SCHMIDT": "F_SCHMIDT", "F_MBQC": "F"}


def cmd_teleport_sweep(family: str, grid: np.ndarray, cfg: AveragingConfig) -> tuple[list[str], list[list]]:
    key = TELEPORT_FAMILIES.get(family, family)
    if key not in MBQC_FAMILIES and key != "F_SCHMIDT":
        raise UsageError(f"unknown family {family!r}")
    rho = np.array([family_state(key, e) for e in grid])
    conc = np.atleast_1d(concurrence(rho))
    num = np.atleast_1d(ace_teleport(rho, cfg).value)
    rows = [[e, c, v] for e, c, v in zip(grid, conc, num)]
    return ["epsilon", "concurrence", "ace_numeric"], rows


def _parse_kinds(text: str) -> list[str]:
    kinds = [k.strip().lower() for k in text.split(",") if k.strip()]
    bad = [k for k in kinds if k not in STATE_KINDS]
    if not kinds or bad:
        raise UsageError(f"state kinds must be drawn from {', '.join(STATE_KINDS)}, got {text!r}")
    return kinds


def scatter_states(n: int, kinds: Sequence[str], seed: int) -> tuple[np.ndarray, list[str]]:
    """Row i has kind ``kinds[i % len(kinds)]``; each kind draws from its own stream."""
    labels = [kinds[i % len(kinds)] for i in range(n)]
    rho = np.empty((n, 4, 4), dtype=complex)
    root = SeededRng(seed)
    for kind in dict.fromkeys(kinds):
        idx = [i for i, k in enumerate(labels) if k == kind]
        rng = root.child(STATE_KINDS.index(kind))
        if kind == "pure":
            rho[idx] = projector(haar_pure_two_qubit(rng, len(idx)))
        elif kind == "mixed":
            rho[idx] = ginibre_mixed_two_qubit(rng, len(idx))
        else:
            rho[idx] = random_product_state(rng, len(idx))
    return rho, labels


def cmd_scatter(scenario: str, n: int, kinds: Sequence[str], cfg: AveragingConfig) -> tuple[list[str], list[list]]:
    if n < 1:
        raise UsageError("--n must be at least 1")
    rho, labels = scatter_states(n, kinds, cfg.seed)
    conc = np.atleast_1d(concurrence(rho))
    fn = ace_mbqc if scenario == "mbqc" else ace_teleport
    val = np.atleast_1d(fn(rho, cfg).value)
    rows = [[i, c, v, k] for i, (c, v, k) in enumerate(zip(conc, val, labels))]
    return ["index", "concurrence", "ace_value", "state_kind"], rows


def cmd_gate_ace(path: str, cfg: AveragingConfig) -> dict:
    gate = load_gate(path)
    est = ace_gate(gate, cfg)
    return {"name": gate.name, "ace_value": _json_num(est.value), "error_estimate": _json_num(est.error_estimate)}


def cmd_classical(path: str, a0: int, a1: int) -> dict:
    model = classical.load_model(path)
    for a in (a0, a1):
        if not 0 <= a < model.n_a:
            raise UsageError(f"intervention value {a} outside the alphabet of size {model.n_a}")
    p0 = classical.interventional(model, a0)
    p1 = classical.interventional(model, a1)
    obs = {}
    for label, a in (("a0", a0), ("a1", a1)):
        try:
            obs[label] = [_json_num(x) for x in classical.observational(model, a)]
        except classical.ZeroProbabilityError:
            obs[label] = None
    return {
        "a0": a0,
        "a1": a1,
        "observational": obs,
        "interventional": {"a0": [_json_num(x) for x in p0], "a1": [_json_num(x) for x in p1]},
        "ace_binary": _json_num(classical.ace_binary(p1, p0)) if model.n_b == 2 else None,
        "ace_max": _json_num(classical.ace_max(p1, p0)),
        "ace_tvd": _json_num(classical.ace_tvd(p1, p0)),
    }


# ---------------------------------------------------------------------------
# output


def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def render_table_json(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    out = []
    for row in rows:
        rec = {}
        for key, x in zip(header, row):
            if isinstance(x, (float, np.floating)):
                rec[key] = _json_num(x)
            elif isinstance(x, np.integer):
                rec[key] = int(x)
            else:
                rec[key] = x
        out.append(rec)
    return json.dumps(out, indent=2) + "\n"


def _write(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def run(args: argparse.Namespace) -> str:
    if args.command == "classical":
        doc = cmd_classical(args.model_file, args.a0, args.a1)
        if args.format != "json":
            raise UsageError("classical only supports --format json")
        return json.dumps(doc, indent=2) + "\n"

    cfg = config_from_args(args)
    if args.command == "gate-ace":
        doc = cmd_gate_ace(args.matrix_file, cfg)
        if args.format == "csv":
            return render_csv(list(doc), [list(doc.values())])
        return json.dumps(doc, indent=2) + "\n"

    if args.command == "table1":
        header, rows = cmd_table1(cfg)
    elif args.command == "mbqc-sweep":
        header, rows = cmd_mbqc_sweep(args.family, args.eps_grid, cfg)
    elif args.command == "teleport-sweep":
        header, rows = cmd_teleport_sweep(args.family, args.eps_grid, cfg)
    else:
        kinds = _parse_kinds(args.kinds or DEFAULT_KINDS[args.scenario])
        header, rows = cmd_scatter(args.scenario, args.n, kinds, cfg)
    return render_csv(header, rows) if args.format == "csv" else render_table_json(header, rows)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = run(args)
        _write(text, args.out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"qace: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (
        GateValidationError,
        classical.ModelValidationError,
        InvalidStateError,
        NotHermitianError,
        ValueError,
    ) as exc:
        print(f"qace: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConvergenceError as exc:
        print(f"qace: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"qace: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
