"""Command-line front end.

Every subcommand resolves a :class:`RunConfig` from an optional JSON file
plus flag overrides (flags win), validates it, and writes its outputs to
``--out``.  Exit codes: 0 pass, 1 criterion failed, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .cfunction import c_function, plancherel_density
from .dispersive import Phase, maximal_with_refinement, propagate
from .errors import CalibrationError, ConfigError, DomainError, NumericalError, PreconditionError
from .experiments import (
    ExperimentReport,
    build_counterexample,
    calibrated_evaluator,
    convergence_run,
    counterexample_family,
    counterexample_grid,
    CounterexampleSpec,
    maximal_ratio_run,
    oscillatory_bound_check,
    pitt_check,
    sharpness_run,
    _jsonable,
)
from .geometry import SpaceParams
from .spectral import RadialGrid, RadialProfile, SpectralGrid, isft, sft, write_csv
from .spherical import DEFAULT_R0, SphericalEvaluator, phi_far_main, phi_near_main

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


@dataclass
class RunConfig:
    """Resolved parameters of one command invocation."""

    space: List[int] = field(default_factory=lambda: [0, 2])
    a: float = 0.5
    beta: float = 0.1
    N_list: List[int] = field(default_factory=lambda: [16, 32, 64, 128, 256])
    epsilon: float = 0.1
    epsilon_list: List[float] = field(default_factory=lambda: [-1.0, 0.0, 1.0])
    lambdas: List[float] = field(default_factory=lambda: [1.0])
    s_max: float = 12.0
    s_count: int = 241
    lambda_max: Optional[float] = None
    t: float = 0.5
    t_count: int = 256
    t_min: float = 1e-4
    t_steps: int = 8
    R: float = 1.0
    phase: str = "power_law"
    sigma: float = 0.5
    alpha: float = 0.25
    x_min: float = 0.01
    x_max: float = 100.0
    x_count: int = 41
    panels: int = 16
    tol: float = 1e-6
    roundtrip: bool = False
    refine: bool = False
    out: str = "."
    threads: Optional[int] = None
    format: str = "csv"

    def validate(self) -> "RunConfig":
        try:
            if len(self.space) != 2:
                raise ConfigError("space", "expected two integers MV,MZ")
            self.space_params()
        except PreconditionError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("space", str(exc)) from exc
        checks = [
            ("a", 0 < self.a < 1, "must lie in (0, 1)"),
            ("beta", self.beta >= 0, "must be >= 0"),
            ("epsilon", 0 < self.epsilon < 0.5, "must lie in (0, 1/2)"),
            ("N_list", len(self.N_list) > 0, "must not be empty"),
            ("N_list", all(int(n) == n and n >= 2 for n in self.N_list), "entries must be integers >= 2"),
            ("N_list", all(y > x for x, y in zip(self.N_list, self.N_list[1:])), "must be strictly ascending"),
            ("lambdas", len(self.lambdas) > 0 and all(math.isfinite(v) for v in self.lambdas),
             "must be a non-empty list of finite values"),
            ("s_max", self.s_max > 0, "must be > 0"),
            ("s_count", self.s_count >= 2, "must be >= 2"),
            ("lambda_max", self.lambda_max is None or self.lambda_max > 0, "must be > 0"),
            ("t", 0 < self.t < 1, "must lie in (0, 1)"),
            ("t_count", self.t_count >= 1, "must be >= 1"),
            ("t_min", 0 < self.t_min < 1, "must lie in (0, 1)"),
            ("t_steps", self.t_steps >= 1, "must be >= 1"),
            ("R", self.R > 0, "must be > 0"),
            ("phase", self.phase in ("power_law", "shifted_power_law"), "must be power_law or shifted_power_law"),
            ("sigma", self.sigma > 0, "must be > 0"),
            ("alpha", 0 <= self.alpha < 0.5, "must lie in [0, 1/2)"),
            ("x_min", 0 < self.x_min < self.x_max, "need 0 < x_min < x_max"),
            ("x_count", self.x_count >= 1, "must be >= 1"),
            ("panels", self.panels >= 1, "must be >= 1"),
            ("tol", self.tol > 0, "must be > 0"),
            ("threads", self.threads is None or self.threads >= 1, "must be >= 1"),
            ("format", self.format in ("csv", "json"), "must be csv or json"),
        ]
        for name, ok, message in checks:
            if not ok:
                raise ConfigError(name, f"{message} (got {getattr(self, name)!r})")
        return self

    def space_params(self) -> SpaceParams:
        return SpaceParams(int(self.space[0]), int(self.space[1]))

    def make_phase(self) -> Phase:
        if self.phase == "power_law":
            return Phase.power_law(self.a)
        return Phase.shifted_power_law(self.a, self.space_params().Q ** 2 / 4)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


# -- argument parsing ----------------------------------------------------------


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text):
    out = []
    for v in text.split(","):
        if v.strip():
            value = float(v)
            if value != int(value):
                raise argparse.ArgumentTypeError(f"{v!r} is not an integer")
            out.append(int(value))
    return out


def _space(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected MV,MZ")
    try:
        return [int(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected two integers MV,MZ") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


COMMANDS = {
    "eval-phi": "spherical functions and their near/far main terms on a radius grid",
    "c-function": "c-function and Plancherel density on a frequency list",
    "transform": "spherical transform of a Gaussian profile (optionally round-tripped)",
    "propagate": "propagated Gaussian profile u(s, t)",
    "maximal": "maximal-function ratios over the counterexample family",
    "sharpness": "Sobolev scaling and linearized-propagator norms of the counterexample family",
    "oscillatory": "uniform bound for the oscillatory integral",
    "convergence": "sup |u(t) - f| on a ball as t decreases",
    "pitt": "weighted Fourier inequality on the line for smooth bumps",
}

# flag -> RunConfig field
_FLAG_FIELDS = {
    "a": "a", "beta": "beta", "N": "N_list", "epsilon": "epsilon", "epsilon_list": "epsilon_list",
    "space": "space", "lam": "lambdas", "s_max": "s_max", "s_count": "s_count", "lambda_max": "lambda_max",
    "t": "t", "t_count": "t_count", "R": "R", "phase": "phase", "sigma": "sigma", "alpha": "alpha",
    "x_count": "x_count", "panels": "panels", "tol": "tol", "roundtrip": "roundtrip", "refine": "refine",
    "out": "out", "threads": "threads", "format": "format",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common options")
    g.add_argument("--config", metavar="PATH", help="JSON file with RunConfig fields; flags override it")
    g.add_argument("--out", metavar="DIR", help="output directory (created if missing)")
    g.add_argument("--threads", type=int, metavar="K", help="cap on BLAS/OpenMP worker threads")
    g.add_argument("--format", choices=["csv", "json"], help="table format")
    g.add_argument("--space", type=_space, metavar="MV,MZ", help="space parameters, e.g. 0,2")
    g.add_argument("--a", type=float, help="phase degree a in (0, 1)")
    g.add_argument("--beta", type=float, help="Sobolev regularity")
    g.add_argument("--N", type=_int_list, metavar="N1,N2,...", help="frequency scales of the family")
    g.add_argument("--epsilon", type=float, help="annulus parameter")
    g.add_argument("--lambda", dest="lam", type=_float_list, metavar="L1,L2,...", help="frequencies")
    g.add_argument("--s-max", dest="s_max", type=float, help="largest radius")
    g.add_argument("--s-count", dest="s_count", type=int, help="number of radii for eval-phi")
    g.add_argument("--lambda-max", dest="lambda_max", type=float, help="spectral truncation")
    g.add_argument("--t", type=float, help="time in (0, 1)")
    g.add_argument("--t-count", dest="t_count", type=int, help="size of the maximal-function t grid")
    g.add_argument("--R", type=float, help="ball radius")
    g.add_argument("--phase", choices=["power_law", "shifted_power_law"])
    g.add_argument("--sigma", type=float, help="width of the Gaussian test profile exp(-s^2/(2 sigma^2))")
    g.add_argument("--alpha", type=float, help="weight exponent for pitt")
    g.add_argument("--epsilon-list", dest="epsilon_list", type=_float_list, metavar="E1,E2,...")
    g.add_argument("--x-count", dest="x_count", type=int, help="points in the log x grid for oscillatory")
    g.add_argument("--panels", type=int, help="Gauss panels across the counterexample window")
    g.add_argument("--tol", type=float, help="round-trip tolerance for transform")
    g.add_argument("--roundtrip", action="store_true", default=None, help="transform: also invert and compare")
    g.add_argument("--refine", action="store_true", default=None, help="maximal: report t-grid refinement")

    parser = _Parser(prog="damekricci", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    for name, help_text in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def resolve_config(args) -> RunConfig:
    cfg = RunConfig()
    known = {f.name for f in dataclasses.fields(RunConfig)}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be a JSON object")
        for key, value in data.items():
            if key not in known:
                raise ConfigError(key, "unknown configuration field")
            setattr(cfg, key, value)
    for flag, name in _FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, name, value)
    return cfg.validate()


# -- output helpers ----------------------------------------------------------------


def _write_table(path_stem, cfg, columns, rows):
    """rows: list of tuples matching columns; None becomes an empty cell."""
    if cfg.format == "json":
        path = path_stem + ".json"
        payload = {"config": cfg.as_dict(), "columns": columns,
                   "rows": [dict(zip(columns, r)) for r in rows]}
        with open(path, "w", newline="\n") as fh:
            fh.write(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
        return path
    path = path_stem + ".csv"
    with open(path, "w", newline="\n") as fh:
        fh.write("# config: " + json.dumps(_jsonable(cfg.as_dict()), sort_keys=True) + "\n")
        fh.write(",".join(columns) + "\n")
        for r in rows:
            fh.write(",".join("" if v is None else ("%.17g" % v if isinstance(v, float) else str(v))
                              for v in r) + "\n")
    return path


def _write_plot(path, cfg, body):
    with open(path, "w", newline="\n") as fh:
        fh.write("# config: " + json.dumps(_jsonable(cfg.as_dict()), sort_keys=True) + "\n")
        fh.write("set datafile separator ','\nset key autotitle columnhead\n")
        fh.write(body.rstrip("\n") + "\n")


def _write_report(cfg, report: ExperimentReport, stem):
    report.inputs = dict(report.inputs, config=cfg.as_dict())
    report.write_json(os.path.join(cfg.out, stem + "_report.json"))
    if cfg.format == "csv":
        report.write_csv(os.path.join(cfg.out, stem + ".csv"), config=cfg.as_dict())
    status = "PASS" if report.passed else "FAIL"
    print(f"{stem}: {status} ({report.criterion})")
    return EXIT_PASS if report.passed else EXIT_FAIL


def _lambda_max(cfg, fallback):
    return cfg.lambda_max if cfg.lambda_max is not None else fallback


def _gaussian_profile(cfg, lambda_max):
    rgrid = RadialGrid.for_frequency(cfg.s_max, lambda_max)
    sigma = cfg.sigma
    return RadialProfile.from_function(rgrid, lambda s: np.exp(-s ** 2 / (2 * sigma ** 2)))


def _gaussian_lambda_max(cfg):
    # transform of exp(-s^2/(2 sigma^2)) decays like exp(-sigma^2 lambda^2/2); 1e-16 by 8.6/sigma
    return _lambda_max(cfg, 9.0 / cfg.sigma)


def _fmt_lambda(v):
    return ("%g" % v).replace("+", "")


# -- commands --------------------------------------------------------------------


def cmd_eval_phi(cfg: RunConfig) -> int:
    space = cfg.space_params()
    ev = SphericalEvaluator(space)
    s = np.linspace(0.0, cfg.s_max, cfg.s_count)
    written = []
    for lam in cfg.lambdas:
        values = ev.phi(lam, s)
        rows = []
        for si, v in zip(s, values):
            near = float(phi_near_main(space, lam, si)) if 0 < si <= DEFAULT_R0 else None
            far = float(phi_far_main(space, lam, si)) if si > DEFAULT_R0 and lam != 0 else None
            rows.append((float(si), float(v), near, far))
        written.append(_write_table(os.path.join(cfg.out, f"phi_lambda={_fmt_lambda(lam)}"), cfg,
                                    ["s", "phi", "near_main", "far_main"], rows))
    if cfg.format == "csv":
        plots = ", ".join(f"'{os.path.basename(p)}' using 1:2 with lines" for p in written)
        _write_plot(os.path.join(cfg.out, "phi.gp"), cfg, f"set xlabel 's'\nplot {plots}\n")
    print("\n".join(written))
    return EXIT_PASS


def cmd_c_function(cfg: RunConfig) -> int:
    space = cfg.space_params()
    rows = []
    for lam in cfg.lambdas:
        if lam == 0:
            raise ConfigError("lambdas", "c(lambda) has a pole at 0")
        c = c_function(space, lam)
        rows.append((float(lam), c.real, c.imag, abs(c), float(plancherel_density(space, lam))))
    path = _write_table(os.path.join(cfg.out, "c_function"), cfg,
                        ["lambda", "c_re", "c_im", "abs_c", "plancherel_density"], rows)
    print(path)
    return EXIT_PASS


def cmd_transform(cfg: RunConfig) -> int:
    space = cfg.space_params()
    lam_max = _gaussian_lambda_max(cfg)
    ev = calibrated_evaluator(space)
    profile = _gaussian_profile(cfg, lam_max)
    sgrid = SpectralGrid.for_radius(lam_max, cfg.s_max)
    spectrum = sft(ev, profile, sgrid)
    summary = {"config": cfg.as_dict(), "inversion_constant": ev.space.inversion_constant}
    code = EXIT_PASS
    if cfg.format == "csv":
        write_csv(os.path.join(cfg.out, "spectrum.csv"), spectrum, config=_jsonable(cfg.as_dict()))
    if cfg.roundtrip:
        back = isft(ev, spectrum, profile.grid)
        err = float(np.max(np.abs(back.values - profile.values)))
        summary["roundtrip_max_abs_error"] = err
        summary["pass"] = err <= cfg.tol
        print(f"roundtrip max |isft(sft f) - f| = {err:.3e} (tol {cfg.tol:g})")
        code = EXIT_PASS if err <= cfg.tol else EXIT_FAIL
    summary["spectrum"] = {"node": spectrum.lambdas, "value_re": spectrum.values.real,
                           "value_im": spectrum.values.imag, "weight": spectrum.grid.weights} \
        if cfg.format == "json" else "spectrum.csv"
    with open(os.path.join(cfg.out, "transform.json"), "w", newline="\n") as fh:
        fh.write(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    return code


def cmd_propagate(cfg: RunConfig) -> int:
    space = cfg.space_params()
    lam_max = _gaussian_lambda_max(cfg)
    ev = calibrated_evaluator(space)
    profile = _gaussian_profile(cfg, lam_max)
    spectrum = sft(ev, profile, SpectralGrid.for_radius(lam_max, cfg.s_max))
    u = propagate(ev, spectrum, cfg.make_phase(), cfg.t, profile.grid)
    rows = [(float(s), float(f.real), float(v.real), float(v.imag), float(abs(v)))
            for s, f, v in zip(profile.radii, profile.values, u.values)]
    path = _write_table(os.path.join(cfg.out, "propagate"), cfg, ["s", "f", "u_re", "u_im", "u_abs"], rows)
    if cfg.format == "csv":
        _write_plot(os.path.join(cfg.out, "propagate.gp"), cfg,
                    "set xlabel 's'\nplot 'propagate.csv' using 1:2 with lines, '' using 1:5 with lines\n")
    print(path)
    return EXIT_PASS


def cmd_maximal(cfg: RunConfig) -> int:
    space = cfg.space_params()
    ev = calibrated_evaluator(space)
    family = counterexample_family(space, cfg.a, cfg.N_list, cfg.epsilon, cfg.beta, cfg.panels)
    t_grid = np.geomspace(1e-4, 1 - 1e-4, cfg.t_count)
    report = maximal_ratio_run(space, cfg.a, cfg.beta, family, cfg.R, ev, cfg.make_phase(), t_grid)
    code = _write_report(cfg, report, "maximal")
    if cfg.refine:
        rows = []
        monotone = True
        for N, spectrum in family:
            grid = RadialGrid.for_frequency(cfg.R, spectrum.grid.lambda_max, nodes_per_period=16)
            _, trace = maximal_with_refinement(ev, spectrum, cfg.make_phase(), grid, cfg.R, t_grid)
            monotone &= all(b >= a for a, b in zip(trace.norms, trace.norms[1:]))
            rows += [(int(N), int(c), float(v)) for c, v in zip(trace.t_counts, trace.norms)]
        _write_table(os.path.join(cfg.out, "maximal_refinement"), cfg, ["N", "t_count", "ball_norm"], rows)
        print(f"refinement norms monotone: {monotone}")
        if not monotone:
            code = EXIT_FAIL
    if cfg.format == "csv":
        _write_plot(os.path.join(cfg.out, "maximal.gp"), cfg,
                    "set logscale x\nset xlabel 'N'\nset ylabel 'ratio'\n"
                    "plot 'maximal.csv' using 1:5 with linespoints, '' using 1:6 with linespoints\n")
    return code


def cmd_sharpness(cfg: RunConfig) -> int:
    space = cfg.space_params()
    report = sharpness_run(space, cfg.a, cfg.beta, cfg.N_list, cfg.epsilon, panels=cfg.panels)
    code = _write_report(cfg, report, "sharpness")
    if cfg.format == "csv":
        last = report.per_point[-1]
        target = cfg.beta - cfg.a / 4
        anchor = last["sobolev_norm"] / last["N"] ** target
        _write_plot(os.path.join(cfg.out, "sharpness.gp"), cfg,
                    "set logscale xy\nset xlabel 'N'\nset ylabel 'Sobolev norm of f_N'\n"
                    f"plot 'sharpness.csv' using 1:2 with linespoints, "
                    f"{anchor!r}*x**({target!r}) title 'slope beta - a/4'\n")
    return code


def cmd_oscillatory(cfg: RunConfig) -> int:
    N_list = cfg.N_list if cfg.N_list != RunConfig().N_list else [16, 32, 64, 128, 256, 512]
    x_grid = np.geomspace(cfg.x_min, cfg.x_max, cfg.x_count)
    report = oscillatory_bound_check(cfg.a, cfg.beta, N_list, cfg.epsilon_list, x_grid)
    code = _write_report(cfg, report, "oscillatory")
    table = {}
    for row in report.per_point:
        key = (row["epsilon"], row["N"])
        table[key] = max(table.get(key, 0.0), row["ratio"])
    _write_table(os.path.join(cfg.out, "oscillatory_sup"), cfg, ["epsilon", "N", "sup_ratio"],
                 [(e, int(n), v) for (e, n), v in sorted(table.items())])
    if cfg.format == "csv":
        _write_plot(os.path.join(cfg.out, "oscillatory.gp"), cfg,
                    "set logscale x\nset xlabel 'x'\nset ylabel '|I| / (|x|^-c1 + |x|^-c2)'\n"
                    "plot 'oscillatory.csv' using 3:5 with points\n")
    return code


def cmd_convergence(cfg: RunConfig) -> int:
    space = cfg.space_params()
    ev = calibrated_evaluator(space)
    N = cfg.N_list[0]
    spec = CounterexampleSpec(space, cfg.a, N, cfg.epsilon, cfg.beta)
    spectrum = build_counterexample(spec, counterexample_grid(spec, cfg.panels))
    t_seq = np.geomspace(cfg.t, cfg.t_min, cfg.t_steps)
    report = convergence_run(space, cfg.a, cfg.beta, spectrum, t_seq, cfg.R, ev, cfg.make_phase())
    code = _write_report(cfg, report, "convergence")
    if cfg.format == "csv":
        _write_plot(os.path.join(cfg.out, "convergence.gp"), cfg,
                    "set logscale xy\nset xlabel 't'\nset ylabel 'sup |u(t) - f|'\n"
                    "plot 'convergence.csv' using 1:2 with linespoints\n")
    return code


def cmd_pitt(cfg: RunConfig) -> int:
    bumps = [(1.5, 0.5 / 2 ** k) for k in range(5)]
    report = pitt_check(bumps, cfg.alpha)
    return _write_report(cfg, report, "pitt")


HANDLERS = {
    "eval-phi": cmd_eval_phi,
    "c-function": cmd_c_function,
    "transform": cmd_transform,
    "propagate": cmd_propagate,
    "maximal": cmd_maximal,
    "sharpness": cmd_sharpness,
    "oscillatory": cmd_oscillatory,
    "convergence": cmd_convergence,
    "pitt": cmd_pitt,
}


def _run(cfg: RunConfig, command: str) -> int:
    os.makedirs(cfg.out, exist_ok=True)
    if cfg.threads is None:
        return HANDLERS[command](cfg)
    from threadpoolctl import threadpool_limits

    with threadpool_limits(limits=cfg.threads):
        return HANDLERS[command](cfg)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return _run(cfg, args.command)
    except (ConfigError, PreconditionError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, CalibrationError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
