"""Command-line front end.

Exit codes: 0 every check passed, 1 a check failed (or the integrator /
expansion failed), 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Sequence

from . import analysis, core, dynamics
from .core import PhaseState, SystemParams
from .errors import CrossCheckError, DegreeLimitError, IntegrationError, NoClosureError
from .symbolic import (
    FACTOR_ODE,
    HAMILTONIAN_SYSTEM,
    DeformationSpec,
    PhasePolynomial,
    deformation_residual,
    general_J3,
    match_paper_case,
    momentum_degree,
    verify_constancy,
    verify_evolution,
    verify_moduli,
)
from .symbolic.constants import DEFAULT_DEGREE_LIMIT, constant_set

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# parsing helpers


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


@dataclass
class RunConfig:
    params: SystemParams
    state: PhaseState | None
    seed: int
    options: dict = field(default_factory=dict)


def _config(args: argparse.Namespace, need_state: bool = False) -> RunConfig:
    strengths = args.strengths if args.strengths is not None else (0.0,) * len(args.ratios)
    try:
        params = SystemParams(args.omega, args.ratios, strengths)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    state = None
    if getattr(args, "x", None) is not None or getattr(args, "p", None) is not None:
        if args.x is None or args.p is None:
            raise ConfigError("--x and --p must be given together")
        state = PhaseState(args.x, args.p)
        if state.dof != params.dof:
            raise ConfigError("initial state does not match the number of ratios")
        for i, (k, x) in enumerate(zip(params.strengths, state.positions)):
            if k != 0 and x == 0:
                raise ConfigError(f"initial state is singular: x{i + 1} = 0 with k{i + 1} = {k}")
    elif need_state:
        raise ConfigError("an initial state (--x, --p) is required")
    return RunConfig(params, state, args.seed, vars(args))


def _params_json(params: SystemParams) -> dict:
    return {"omega0": params.omega0, "ratios": list(params.ratios), "strengths": list(params.strengths)}


def _check(name: str, passed: bool, residual: float = 0.0, details=None) -> dict:
    return {"name": name, "status": "pass" if passed else "fail", "residual": residual, "details": details}


def _emit_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=False)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _exact_checks(report) -> list[dict]:
    rows = []
    for r in report:
        details = r.details or None
        residual = 0.0
        if not r.passed and r.residual is not None:
            residual = None
            details = str(r.residual)[:2000]
        rows.append(_check(f"{report.title}: {r.name}", r.passed, residual, details))
    return rows


# ---------------------------------------------------------------------------
# verify


def _deformation_checks(dof: int) -> list[dict]:
    x = PhasePolynomial.generator(dof, "x1")
    k = PhasePolynomial.generator(dof, "k1")
    f = k * x**-2
    rows = []
    res = deformation_residual(DeformationSpec(f, FACTOR_ODE))
    rows.append(_check("deformation: x F' + 2F = 0 for F = k1/x1^2", res.is_zero()))
    res = deformation_residual(DeformationSpec((f, f / 2), HAMILTONIAN_SYSTEM))
    rows.append(
        _check(
            "deformation: (h, V) = (k1/x1^2, k1/(2 x1^2)) solves both conditions",
            all(r.is_zero() for r in res),
        )
    )
    return rows


def _numeric_checks(cfg: RunConfig, samples: int) -> list[dict]:
    params = cfg.params
    rows = []
    points = analysis.sample_points(params, samples, cfg.seed)
    n = params.dof

    # brackets of the constants with H
    worst = 0.0
    h = analysis.ObservableRef("hamiltonian")
    for state in points:
        for i in range(n):
            for j in range(n):
                for ref in (analysis.re_M(i, j), analysis.im_M(i, j)):
                    b = analysis.poisson_bracket_num(ref, h, params, state)
                    worst = max(worst, abs(b) / max(analysis.bracket_scale(ref, h, params, state), 1e-300))
    rows.append(_check("numeric: {Re/Im M_ij, H3} = 0", worst < 1e-10, worst))

    # moduli identity
    worst = 0.0
    for state in points:
        for i in range(n):
            m = core.deformed_factor(params, state, i)
            e = core.energy_i(params, state, i)
            rhs = 4 * (e * e - params.strengths[i] * params.ratios[i] ** 2 * params.omega0**2)
            worst = max(worst, abs(m.modulus2 - rhs) / max(1.0, abs(rhs), 4 * e * e))
    rows.append(_check("numeric: |M_i|^2 = 4(E_i^2 - k_i n_i^2 w0^2)", worst < 1e-12, worst))

    if n == 2:
        worst = max(analysis.prop2_check(params, s).worst() for s in points)
        rows.append(_check("numeric: Re/Im(M_xy) and J3 brackets with E_x", worst < 1e-9, worst))

    state0 = cfg.state or points[0]
    period = math.pi / params.omega0 if any(params.strengths) else 2 * math.pi / params.omega0
    traj = dynamics.integrate(params, state0, 10 * period, 1e-12)
    drift = dynamics.drift_report(params, traj)
    worst = drift.worst_relative()
    rows.append(_check("numeric: conservation drift over 10 periods", worst < 1e-8, worst, drift.as_dict()))
    try:
        t = dynamics.closure_time(params, state0)
        ratio = period / t
        ok = abs(ratio - round(ratio)) < 1e-6 and round(ratio) >= 1
        rows.append(_check("numeric: orbit closure divides the common period", ok, 0.0, {"closure_time": t}))
    except NoClosureError as exc:
        rows.append(_check("numeric: orbit closure divides the common period", False, None, str(exc)))
    return rows


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = _config(args)
    params = cfg.params
    want_all = args.all or not (args.symbolic or args.numeric or args.case)
    do_symbolic = want_all or args.symbolic
    do_numeric = want_all or args.numeric
    if do_numeric and any(k < 0 for k in params.strengths):
        raise ConfigError("numeric checks need non-negative strengths")
    case = None
    if args.case:
        try:
            case = core.get_case(args.case)
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
        if case.ratios != params.ratios:
            raise ConfigError(f"case {args.case} needs --ratios {','.join(map(str, case.ratios))}")
    elif want_all:
        case = core.case_for_ratios(params.ratios)
    if args.samples < 1:
        raise ConfigError("--samples must be at least 1")

    checks: list[dict] = []
    if do_symbolic:
        try:
            checks += _exact_checks(verify_constancy(params.ratios, args.degree_limit))
            checks += _exact_checks(verify_evolution(params.ratios, args.degree_limit))
            checks += _exact_checks(verify_moduli(params.ratios, args.degree_limit))
        except DegreeLimitError as exc:
            checks.append(_check("symbolic expansion", False, None, str(exc)))
        checks += _deformation_checks(params.dof)
    if case is not None:
        checks += _exact_checks(match_paper_case(case.case_id))
    if do_numeric:
        try:
            checks += _numeric_checks(cfg, args.samples)
        except (IntegrationError, CrossCheckError) as exc:
            checks.append(_check("numeric", False, None, str(exc)))

    payload = {"params": _params_json(params), "seed": cfg.seed, "checks": checks}
    _emit_json(payload, args.out)
    return EXIT_OK if all(c["status"] == "pass" for c in checks) else EXIT_FAIL


# ---------------------------------------------------------------------------
# trajectory


def trajectory_columns(params: SystemParams) -> list[str]:
    n = params.dof
    cols = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]
    return cols + list(dynamics.standard_observables(params))


def cmd_trajectory(args: argparse.Namespace) -> int:
    cfg = _config(args, need_state=True)
    params = cfg.params
    if any(k < 0 for k in params.strengths):
        raise ConfigError("negative strengths are rejected for integration")
    if not args.t_end > 0:
        raise ConfigError("--t-end must be positive")
    if args.stride is not None and not args.stride > 0:
        raise ConfigError("--stride must be positive")
    if not args.tolerance > 0:
        raise ConfigError("--tolerance must be positive")
    stride = args.stride if args.stride is not None else args.t_end / 1000.0
    try:
        traj = dynamics.integrate(params, cfg.state, args.t_end, args.tolerance, stride=stride)
    except IntegrationError as exc:
        print(json.dumps({"error": str(exc)}))
        return EXIT_FAIL
    observables = dynamics.standard_observables(params)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(trajectory_columns(params))
    for k, state in enumerate(traj.states()):
        row = [traj.times[k], *state.positions, *state.momenta]
        row += [fn(params, state) for fn in observables.values()]
        writer.writerow([repr(float(v)) for v in row])
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    drift = dynamics.drift_report(params, traj, observables)
    summary = {"samples": len(traj), "t_end": args.t_end, "max_rel_drift": drift.worst_relative(),
               "drift": {name: d.max_rel for name, d in drift.items()}}
    print(json.dumps(summary))
    return EXIT_OK


# ---------------------------------------------------------------------------
# expand


def cmd_expand(args: argparse.Namespace) -> int:
    ratios = args.ratios
    if len(ratios) != 2 or any(n < 1 for n in ratios):
        raise ConfigError("expand takes two positive ratios, e.g. --ratios 2,1")
    try:
        cs = constant_set(ratios, args.degree_limit)
        gen = general_J3(ratios, args.degree_limit)
    except DegreeLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    m = cs.M_pair(0, 1)
    print(f"ratios: {ratios[0]}:{ratios[1]}")
    print(f"lambda: {gen.lam}")
    print(f"I3 = ({gen.i3_normalizer})/w0 * Im(K_12)")
    print(f"I3: {gen.I3}")
    print(f"J3: {gen.J3}")
    print(f"Re(M_12) [momentum degree {momentum_degree(m.re)}]: {m.re}")
    print(f"Im(M_12) [momentum degree {momentum_degree(m.im)}]: {m.im}")
    status = EXIT_OK
    if args.check_paper:
        case = core.case_for_ratios(ratios)
        if case is None:
            print("case check: no registered case for these ratios")
        else:
            report = match_paper_case(case.case_id)
            print(report.summary())
            status = EXIT_OK if report.passed else EXIT_FAIL
    return status


# ---------------------------------------------------------------------------
# independence


def cmd_independence(args: argparse.Namespace) -> int:
    cfg = _config(args)
    params = cfg.params
    if args.samples < 1:
        raise ConfigError("--samples must be at least 1")
    n = params.dof
    if args.fradkin:
        if any(r != 1 for r in params.ratios) or any(params.strengths):
            raise ConfigError("--fradkin needs all ratios 1 and all strengths 0")
        base = analysis.fradkin_set(n)
        extra = [analysis.ObservableRef("im_Kij", (0, 1))] if n > 1 else []
        name = "Fradkin set"
    else:
        base = analysis.canonical_set(n)
        extra = [analysis.re_M(0, 1)] if n > 1 else []
        name = "canonical set"
    target = 2 * n - 1
    points = analysis.sample_points(params, args.samples, cfg.seed)
    checks = []
    try:
        rep = analysis.independence_rank(params, base, points, expected=target)
        ok = rep.min_rank == target and rep.max_rank == target
        checks.append(_check(f"{name} rank = {target}", ok, 0.0, rep.to_dict()))
        if extra:
            aug = analysis.independence_rank(params, base + extra, points)
            ok = aug.max_rank <= target
            checks.append(_check(f"augmented {name} rank <= {target}", ok, 0.0, aug.to_dict()))
    except CrossCheckError as exc:
        checks.append(_check("gradient cross-check", False, None, str(exc)))
    payload = {"params": _params_json(params), "seed": cfg.seed, "checks": checks}
    _emit_json(payload, args.out)
    return EXIT_OK if all(c["status"] == "pass" for c in checks) else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ratosc",
        description="Exact and numeric checks for the rational oscillator with centrifugal terms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def system_flags(p, need_ratios=True):
        p.add_argument("--ratios", type=_int_list, required=need_ratios, help="e.g. 2,1")
        p.add_argument("--strengths", type=_float_list, default=None, help="e.g. 1.0,0.5 (default zeros)")
        p.add_argument("--omega", type=float, default=1.0, help="base frequency w0")
        p.add_argument("--seed", type=int, default=0)

    def state_flags(p):
        p.add_argument("--x", type=_float_list, default=None, help="initial positions")
        p.add_argument("--p", type=_float_list, default=None, help="initial momenta")

    v = sub.add_parser("verify", help="run exact and numeric verification suites")
    system_flags(v)
    state_flags(v)
    v.add_argument("--all", action="store_true")
    v.add_argument("--symbolic", action="store_true")
    v.add_argument("--numeric", action="store_true")
    v.add_argument("--case", choices=sorted(core.CASES), default=None)
    v.add_argument("--samples", type=int, default=20)
    v.add_argument("--degree-limit", type=int, default=DEFAULT_DEGREE_LIMIT)
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("trajectory", help="integrate and export a CSV trajectory")
    system_flags(t)
    state_flags(t)
    t.add_argument("--t-end", type=float, required=True)
    t.add_argument("--tolerance", type=float, default=1e-12)
    t.add_argument("--stride", type=float, default=None, help="output spacing (default t_end/1000)")
    t.add_argument("--out", default=None)
    t.set_defaults(func=cmd_trajectory)

    e = sub.add_parser("expand", help="print Re/Im(M_xy), lambda and J3")
    e.add_argument("--ratios", type=_int_list, required=True)
    e.add_argument("--check-paper", action="store_true")
    e.add_argument("--degree-limit", type=int, default=DEFAULT_DEGREE_LIMIT)
    e.set_defaults(func=cmd_expand)

    i = sub.add_parser("independence", help="functional-independence rank test")
    system_flags(i)
    i.add_argument("--samples", type=int, default=100)
    i.add_argument("--fradkin", action="store_true")
    i.add_argument("--out", default=None)
    i.set_defaults(func=cmd_independence)
    return parser


_LIST_FLAGS = ("--strengths", "--x", "--p")


def _glue_negative_lists(argv: list[str]) -> list[str]:
    """Turn ``--strengths -1,0`` into ``--strengths=-1,0`` so argparse accepts it."""
    out, k = [], 0
    while k < len(argv):
        arg = argv[k]
        if arg in _LIST_FLAGS and k + 1 < len(argv) and argv[k + 1].startswith("-"):
            out.append(f"{arg}={argv[k + 1]}")
            k += 2
        else:
            out.append(arg)
            k += 1
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(_glue_negative_lists(argv))
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
