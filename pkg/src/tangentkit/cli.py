"""Command-line front end.

Subcommands: solve, flow, bracket, commute, expm, geodesic, exp, verify.
Exit codes: 0 success / all laws pass, 1 law failure, 2 usage error,
3 evaluation or integration error.  Outputs are deterministic for a fixed
seed: identical argv produce byte-identical bytes.

A config file of ``key=value`` lines (keys are the long flag names without
the leading dashes, ``#`` starts a comment) can stand in for flags via
``--config``; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import dsl
from .dynamics import (
    DEFAULT_CONFIG,
    Connection,
    DynamicalSystem,
    IntegratorConfig,
    MaxStepsExceeded,
    StepSizeCollapse,
    augment_time,
    commuting_flows_check,
    expm,
    geodesic_flow,
    integrate,
)
from .fields import LawCheck, LinearityError, VectorField, lie_bracket, matrix_of
from .jets import EvaluationDomainError, primal_value
from .kernel import ShapeError, Space, TrivialBundle, VerticalityViolation
from .reports import emit_report
from .rig import e_map, exp_flow
from .sampling import DEFAULT_SEED
from .verify import run_suite

__all__ = ["main", "dispatch"]

EXIT_OK = 0
EXIT_LAW_FAILURE = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(ValueError):
    pass


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="tangentkit",
        description="define vector fields, solve them, and verify the laws they satisfy",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def shared(p, vf2=False):
        p.add_argument("--dim", type=int, help="state dimension n")
        p.add_argument("--vf", help="field components, e.g. 'x2; -x1'")
        if vf2:
            p.add_argument("--vf2", help="second field components")
        p.add_argument("--time-dependent", action="store_true",
                       help="allow t in --vf (solved on the clock-augmented state)")
        p.add_argument("--t", type=float, help="target time")
        p.add_argument("--x0", help="comma-separated initial state")
        p.add_argument("--grid", type=int, default=None,
                       help="trajectory rows / time-grid points per axis")
        p.add_argument("--tol", type=float, default=None, help="law tolerance")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--out", help="write output to this path instead of stdout")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--config", help="key=value file supplying defaults for flags")
        p.add_argument("--rk4-h", type=float, default=None,
                       help="use fixed-step RK4 with this step instead of RK45")

    p = sub.add_parser("solve", help="integrate a field and print the final state")
    shared(p)
    p = sub.add_parser("flow", help="integrate a field and emit the trajectory")
    shared(p)
    p = sub.add_parser("bracket", help="evaluate the bracket of two fields at x0")
    shared(p, vf2=True)
    p.add_argument("--as-matrix", action="store_true",
                   help="print the bracket's matrix when it is linear")
    p = sub.add_parser("commute", help="check the commuting-flows laws for two fields")
    shared(p, vf2=True)
    p = sub.add_parser("expm", help="print the matrix exponential of --matrix")
    shared(p)
    p.add_argument("--matrix", help="rows separated by ';', entries by ','")
    p = sub.add_parser("geodesic", help="integrate a geodesic from (x, u)")
    shared(p)
    p.add_argument("--christoffel",
                   help="correction components over x1..xn (position) and "
                        "x{n+1}..x{2n} (velocity)")
    p = sub.add_parser("exp", help="evaluate e(t), or the scaling flow with --dim/--x0")
    shared(p)
    p = sub.add_parser("verify", help="run a law suite and emit its JSON report")
    shared(p)
    p.add_argument("--suite",
                   choices=("kernel", "vf", "curve", "flows", "rig", "action", "all"),
                   default="all")
    p.add_argument("--quick", action="store_true",
                   help="smaller sample counts (same laws, same seeding)")
    return top


def _apply_config_file(args: argparse.Namespace, argv: list[str]) -> None:
    """Fill unset flags from a key=value file; flags given on argv win."""
    if not getattr(args, "config", None):
        return
    explicit = {a.split("=")[0].lstrip("-").replace("-", "_")
                for a in argv if a.startswith("--")}
    try:
        text = open(args.config, "r", encoding="utf-8").read()
    except OSError as e:
        raise UsageError(f"--config: cannot read {args.config}: {e}") from e
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"--config: line {lineno} is not key=value")
        key, value = line.split("=", 1)
        key = key.strip().replace("-", "_")
        value = value.strip()
        if not hasattr(args, key):
            raise UsageError(f"--config: unknown key {key!r}")
        if key in explicit:
            continue
        current = getattr(args, key)
        if isinstance(current, bool) or value in ("true", "false"):
            setattr(args, key, value == "true")
        elif key in ("dim", "seed", "grid"):
            setattr(args, key, int(value))
        elif key in ("t", "tol", "rk4_h"):
            setattr(args, key, float(value))
        else:
            setattr(args, key, value)


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _parse_x0(text: str, expected: int | None = None) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as e:
        raise UsageError(f"--x0: {e}") from e
    if expected is not None and len(values) != expected:
        raise UsageError(f"--x0 expected {expected} values, got {len(values)}")
    return values


def _parse_matrix(text: str) -> np.ndarray:
    try:
        rows = [
            [float(v) for v in row.split(",")]
            for row in text.split(";")
            if row.strip() != ""
        ]
    except ValueError as e:
        raise UsageError(f"--matrix: {e}") from e
    if not rows or any(len(r) != len(rows) for r in rows):
        raise UsageError("--matrix must be square")
    return np.array(rows)


def _field(args) -> VectorField:
    _require(args, "dim", "vf")
    return VectorField.from_expr(args.vf, args.dim)


def _integrator(args) -> IntegratorConfig:
    if getattr(args, "rk4_h", None):
        return IntegratorConfig(method="rk4", h=args.rk4_h)
    return DEFAULT_CONFIG


def _system(args) -> DynamicalSystem:
    _require(args, "dim", "vf")
    if args.time_dependent:
        spec = dsl.parse(args.vf, args.dim, time_dependent=True)
        if spec.n_components != args.dim:
            raise UsageError(f"--vf needs {args.dim} components")
        return augment_time(spec)
    return DynamicalSystem(Space(args.dim), _field(args))


def _emit(args, payload: bytes, stdout) -> None:
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(payload)
    else:
        stdout.write(payload.decode("utf-8"))


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=2) + "\n").encode("utf-8")


def _trajectory_csv(system, t, x0, steps, cfg, project_to=None) -> bytes:
    n = project_to or system.vector_field.space.dim
    lines = ["t," + ",".join(f"x{i + 1}" for i in range(n))]
    for k in range(steps + 1):
        tk = t * k / steps if steps else t
        state = integrate(system, tk, x0, cfg)[:n]
        lines.append(repr(tk) + "," + ",".join(repr(v) for v in state))
    return ("\n".join(lines) + "\n").encode("utf-8")


def _cmd_solve(args, stdout) -> int:
    _require(args, "t", "x0")
    system = _system(args)
    cfg = _integrator(args)
    x0 = _parse_x0(args.x0, args.dim)
    if args.format == "csv":
        payload = _trajectory_csv(system, args.t, x0, args.grid or 100, cfg,
                                  project_to=args.dim)
        _emit(args, payload, stdout)
        return EXIT_OK
    state = integrate(system, args.t, x0, cfg)[: args.dim]
    payload = _json_bytes({"t": args.t, "state": state})
    _emit(args, payload, stdout)
    return EXIT_OK


def _cmd_flow(args, stdout) -> int:
    if args.format is None:
        args.format = "csv"
    return _cmd_solve(args, stdout)


def _cmd_bracket(args, stdout) -> int:
    _require(args, "dim", "vf", "vf2")
    v1 = VectorField.from_expr(args.vf, args.dim)
    v2 = VectorField.from_expr(args.vf2, args.dim)
    bracket = lie_bracket(v1, v2)
    out = {}
    if args.x0 is not None:
        x0 = _parse_x0(args.x0, args.dim)
        out["x0"] = x0
        out["bracket"] = [primal_value(v) for v in bracket.vhat(x0)]
    if args.as_matrix:
        out["matrix"] = matrix_of(bracket).tolist()
    if not out:
        raise UsageError("--x0 (or --as-matrix) is required")
    _emit(args, _json_bytes(out), stdout)
    return EXIT_OK


def _cmd_commute(args, stdout) -> int:
    _require(args, "dim", "vf", "vf2")
    v1 = VectorField.from_expr(args.vf, args.dim)
    v2 = VectorField.from_expr(args.vf2, args.dim)
    tol = args.tol if args.tol is not None else 1e-6
    cfg = _integrator(args)
    kwargs = {}
    if args.grid:
        if args.grid < 2:
            raise UsageError("--grid needs at least 2 points")
        kwargs["times"] = tuple(
            -2.0 + 4.0 * k / (args.grid - 1) for k in range(args.grid)
        )
    laws = commuting_flows_check(
        v1, v2, tol=tol, seed=args.seed, cfg=cfg, **kwargs
    )
    payload = emit_report(laws, args.seed, {"tol": tol, **cfg.describe()})
    _emit(args, payload, stdout)
    return EXIT_OK if all(c.passed for c in laws) else EXIT_LAW_FAILURE


def _cmd_expm(args, stdout) -> int:
    _require(args, "matrix")
    A = _parse_matrix(args.matrix)
    if args.t is not None:
        A = args.t * A
    _emit(args, _json_bytes({"expm": expm(A).tolist()}), stdout)
    return EXIT_OK


def _cmd_geodesic(args, stdout) -> int:
    _require(args, "dim", "christoffel", "t", "x0")
    n = args.dim
    spec = dsl.parse(args.christoffel, 2 * n)
    if spec.n_components != n:
        raise UsageError(f"--christoffel needs {n} components")
    conn = Connection(n, dsl.compile_spec(spec))
    cfg = _integrator(args)
    flow = geodesic_flow(conn, cfg)
    x0 = _parse_x0(args.x0, 2 * n)
    if args.format == "csv":
        steps = args.grid or 100
        lines = ["t," + ",".join(f"x{i + 1}" for i in range(2 * n))]
        for k in range(steps + 1):
            tk = args.t * k / steps if steps else args.t
            state = [primal_value(v) for v in flow.evaluate(tk, x0)]
            lines.append(repr(tk) + "," + ",".join(repr(v) for v in state))
        _emit(args, ("\n".join(lines) + "\n").encode("utf-8"), stdout)
        return EXIT_OK
    state = [primal_value(v) for v in flow.evaluate(args.t, x0)]
    from .dynamics import acceleration_residual

    resid = acceleration_residual(flow, [x0], times=(args.t,))
    payload = _json_bytes(
        {"t": args.t, "state": state, "acceleration_residual": resid}
    )
    _emit(args, payload, stdout)
    return EXIT_OK


def _cmd_exp(args, stdout) -> int:
    _require(args, "t")
    cfg = _integrator(args)
    if args.dim:
        _require(args, "x0")
        x0 = _parse_x0(args.x0, args.dim)
        flow = exp_flow(TrivialBundle(0, args.dim), cfg)
        state = [primal_value(v) for v in flow.evaluate(args.t, x0)]
        _emit(args, _json_bytes({"t": args.t, "state": state}), stdout)
        return EXIT_OK
    e = e_map(cfg)
    value = primal_value(e([args.t])[0])
    _emit(args, _json_bytes({"t": args.t, "e": value}), stdout)
    return EXIT_OK


def _cmd_verify(args, stdout) -> int:
    cfg = _integrator(args)
    laws = run_suite(args.suite, seed=args.seed, cfg=cfg, quick=args.quick)
    if args.tol is not None:
        laws = [
            LawCheck(c.law, c.max_residual <= args.tol, c.max_residual, c.witness, c.seed)
            for c in laws
        ]
    payload = emit_report(
        laws, args.seed, {"suite": args.suite, "quick": args.quick, **cfg.describe()}
    )
    _emit(args, payload, stdout)
    return EXIT_OK if all(c.passed for c in laws) else EXIT_LAW_FAILURE


_COMMANDS = {
    "solve": _cmd_solve,
    "flow": _cmd_flow,
    "bracket": _cmd_bracket,
    "commute": _cmd_commute,
    "expm": _cmd_expm,
    "geodesic": _cmd_geodesic,
    "exp": _cmd_exp,
    "verify": _cmd_verify,
}


def dispatch(argv: list[str], stdout=None) -> int:
    """Run one command; returns the exit code (output goes to ``stdout``)."""
    stdout = stdout if stdout is not None else sys.stdout
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        _apply_config_file(args, argv)
        return _COMMANDS[args.command](args, stdout)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (dsl.ExprSyntaxError, dsl.UnknownIdentifier, dsl.ArityError, ShapeError) as e:
        print(f"invalid input: {e}", file=sys.stderr)
        return EXIT_USAGE
    except StepSizeCollapse as e:
        print(f"integration failed: step size collapse near t={e.t_reached:.3f}",
              file=sys.stderr)
        return EXIT_NUMERIC
    except MaxStepsExceeded as e:
        print(f"integration failed: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (
        EvaluationDomainError,
        VerticalityViolation,
        LinearityError,
        OverflowError,
    ) as e:
        print(f"evaluation failed: {e}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
