"""Command-line front end.

    python -m udsim rate --d 4 --trajectory uniform --a 6 --omega 2.3 --dtau inf
    python -m udsim sweep --target rate --axis omega=lin:0.5:4:5 --axis a=1,2,3

Every subcommand takes its parameters as ``--key value`` flags and, with
``--config FILE``, from a flat ``key = value`` file.  Flags win over the file
and every override is recorded in the output's metadata.  Output is CSV
(17 significant digits, one ``# meta`` comment line first) or JSON with a
``meta`` envelope.

Exit codes: 0 success, 2 configuration error, 3 numerical failure (for a
sweep: at least one error row; the table itself is still complete).
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np

from . import __version__
from . import errors as E

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
MAX_AXES = 3

TRAJECTORIES = ("inertial", "static", "uniform", "truncated", "asymptotic")


class ConfigError(Exception):
    """Bad configuration; the message names the offending key."""


# -- parameter schema -------------------------------------------------------------


def _real(text: str) -> float:
    return float(text)


def _integer(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(f"{text!r} is not an integer")
    return int(value)


def _text(text: str) -> str:
    return str(text).strip()


@dataclass(frozen=True)
class Param:
    parse: Callable[[str], Any]
    default: Any
    help: str = ""
    choices: Optional[tuple] = None
    lo: Optional[float] = None
    hi: Optional[float] = None
    positive: bool = False

    @property
    def numeric(self) -> bool:
        return self.parse in (_real, _integer)

    def convert(self, key: str, raw) -> Any:
        try:
            value = self.parse(raw) if isinstance(raw, str) else raw
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: cannot parse {raw!r}") from None
        if self.choices is not None and value not in self.choices:
            raise ConfigError(f"{key}: {value!r} is not one of {', '.join(self.choices)}")
        if self.lo is not None and not self.lo <= value <= self.hi:
            raise ConfigError(f"{key}: {value} is outside the valid range "
                              f"{self.lo:g}-{self.hi:g}")
        if self.positive and not value > 0:
            raise ConfigError(f"{key}: must be positive, got {value}")
        return value


COMMON = {
    "format": Param(_text, "csv", "output format", choices=("csv", "json")),
    "output": Param(_text, "-", "output path ('-' for stdout)"),
    "workers": Param(_integer, 1, "worker processes for sweeps", positive=True),
    "seed": Param(_integer, 0, "seed (Monte-Carlo oracle only)"),
    "rel_tol": Param(_real, 1e-9, "relative quadrature tolerance", positive=True),
    "abs_tol": Param(_real, 1e-13, "absolute quadrature tolerance", positive=True),
    "plot": Param(_text, "", "directory for report figures (needs matplotlib)"),
}

WORLDLINE = {
    "d": Param(_integer, 4, "spacetime dimension", lo=2, hi=6),
    "trajectory": Param(_text, "uniform", "worldline kind", choices=TRAJECTORIES),
    "a": Param(_real, 1.0, "proper acceleration"),
    "velocity": Param(_real, 0.0, "speed along x1 (inertial)"),
    "x": Param(_real, 0.0, "offset along x1"),
    "tau2": Param(_real, math.inf, "end of acceleration (truncated)"),
    "width": Param(_real, 1.0, "ramp width (asymptotic)"),
    "ir_mass": Param(_real, 1.0, "infrared mass of the d=2 kernel", positive=True),
}

DETECTOR = {
    "omega": Param(_real, 2.3, "bare oscillator frequency", positive=True),
    "gamma": Param(_real, 1e-3, "damping rate (coupling)"),
    "m0": Param(_real, 1.0, "oscillator mass", positive=True),
    "lambda0": Param(_real, 20.0, "switch-on cutoff parameter"),
    "lambda1": Param(_real, 20.0, "running cutoff parameter"),
}

SCHEMAS: dict[str, dict[str, Param]] = {
    "rate": {**WORLDLINE,
             "omega": Param(_real, 1.0, "detector gap"),
             "tau": Param(_real, 0.0, "switch-off time"),
             "dtau": Param(_real, math.inf, "switching window (inf = eternal)", positive=True)},
    "probability": {**WORLDLINE,
                    "d": Param(_integer, 4, "spacetime dimension", lo=2, hi=4),
                    "omega": Param(_real, 1.0, "detector gap"),
                    "tau0": Param(_real, 0.0, "plateau start"),
                    "tau": Param(_real, 10.0, "plateau end"),
                    "delta": Param(_real, 1.0, "ramp duration", positive=True),
                    "coupling": Param(_real, 1.0, "coupling constant"),
                    "matrix_element": Param(_real, 1.0, "|<0|Q|omega>|")},
    "rho11": {**DETECTOR,
              "a": Param(_real, 6.0, "proper acceleration (0 = inertial)"),
              "eta_min": Param(_real, 0.0, "first grid time"),
              "eta_max": Param(_real, 5000.0, "last grid time", positive=True),
              "n": Param(_integer, 2000, "grid points", positive=True)},
    "teleport": {**DETECTOR,
                 "gamma": Param(_real, 0.02, "damping rate (coupling)"),
                 "a": Param(_real, 1.0, "Rob's proper acceleration", positive=True),
                 "b": Param(_real, 2.0, "inverse of Alice's distance", positive=True),
                 "r1": Param(_real, 1.0, "resource squeezing"),
                 "r2": Param(_real, 5.0, "measurement squeezing"),
                 "alpha_re": Param(_real, 1.0, "input coherent amplitude (real part)"),
                 "alpha_im": Param(_real, 0.5, "input coherent amplitude (imaginary part)"),
                 "foliation": Param(_text, "minkowski", "collapse slice",
                                    choices=("minkowski", "quasi-rindler")),
                 "mode": Param(_text, "pseudo", "displacement timing",
                               choices=("pseudo", "physical")),
                 "tau2": Param(_real, math.inf, "end of Rob's acceleration"),
                 "t_min": Param(_real, 0.0, "first measurement time"),
                 "t_max": Param(_real, 20.0, "last measurement time"),
                 "n": Param(_integer, 400, "measurement times", positive=True),
                 "samples": Param(_integer, 0, "Monte-Carlo check samples per point (0 = off)")},
}

# Each subcommand emits these columns (after any sweep axes).  This is a
# documented contract pinned by the test-suite.
SERIES_COLUMNS = {
    "rate": ["value", "integral", "error_estimate", "boundary.constant", "boundary.window",
             "boundary.tail_oscillatory", "boundary.tail_counterterm"],
    "probability": ["probability", "response"],
    "rho11": ["eta", "rho11", "rho11_perturbative", "q2", "p2", "pq"],
    "teleport": ["t1", "tau_a", "tau_b", "f_av", "e_n", "e_n_signed", "tau_adv",
                 "f_av_mc", "f_av_mc_stderr"],
}
POINT_COLUMNS = {
    "rate": SERIES_COLUMNS["rate"],
    "probability": SERIES_COLUMNS["probability"],
    "rho11": ["rho11", "rho11_perturbative", "temperature"],
    "teleport": ["f_av_final", "e_n_final", "n_peaks", "t_half", "t_de", "late_spacing"],
}
FAILURE_COLUMN = "failure"


def schema_for(subcommand: str, target: Optional[str] = None) -> dict[str, Param]:
    if subcommand == "sweep":
        if target not in SCHEMAS:
            raise ConfigError(f"target: must be one of {', '.join(SCHEMAS)}")
        return {**COMMON, **SCHEMAS[target]}
    return {**COMMON, **SCHEMAS[subcommand]}


# -- configuration ---------------------------------------------------------------


@dataclass
class RunConfig:
    subcommand: str
    values: dict
    target: Optional[str] = None
    axes: tuple = ()  # ((name, (v0, v1, ...)), ...)
    overridden: Optional[dict] = None
    config_file: Optional[str] = None

    def __getitem__(self, key):
        return self.values[key]

    def meta(self) -> dict:
        out = {
            "version": __version__,
            "subcommand": self.subcommand,
            "config": {k: _jsonable(v) for k, v in self.values.items()},
        }
        if self.target:
            out["target"] = self.target
        if self.axes:
            out["axes"] = {name: [_jsonable(v) for v in vals] for name, vals in self.axes}
        if self.config_file:
            out["config_file"] = self.config_file
        if self.overridden:
            out["overridden"] = self.overridden
        return out


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, np.generic):
        return v.item()
    return v


def read_config_file(path: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {num}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key in out:
            raise ConfigError(f"{key}: given twice in {path}")
        out[key] = value
    return out


def parse_axis(name: str, spec: str, param: Param) -> tuple:
    """``v1,v2,...``, ``lin:start:stop:num`` or ``log:start:stop:num``."""
    spec = spec.strip()
    try:
        if spec.startswith(("lin:", "log:")):
            kind, start, stop, num = spec.split(":")
            num = _integer(num)
            if num < 1:
                raise ValueError
            if kind == "lin":
                raw = np.linspace(float(start), float(stop), num)
            else:
                if not (float(start) > 0 and float(stop) > 0):
                    raise ValueError
                raw = np.geomspace(float(start), float(stop), num)
            values = tuple(float(v) for v in raw)
        else:
            values = tuple(v.strip() for v in spec.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"axis.{name}: cannot parse {spec!r}") from None
    if not values:
        raise ConfigError(f"axis.{name}: empty axis")
    return tuple(param.convert(name, v) for v in values)


def parse_config(argv=None) -> RunConfig:
    """Resolve flags and an optional config file into a validated RunConfig.

    Raises :class:`ConfigError` (or exits through argparse with status 2).
    """
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    sub = ns.pop("subcommand")
    config_file = ns.pop("config", None)
    flag_axes = ns.pop("axis", None) or []
    flags = {k: v for k, v in ns.items() if v is not None}

    file_values = read_config_file(config_file) if config_file else {}
    file_axes = {k[5:]: v for k, v in file_values.items() if k.startswith("axis.")}
    file_values = {k: v for k, v in file_values.items() if not k.startswith("axis.")}
    if file_axes and sub != "sweep":
        raise ConfigError(f"axis.{next(iter(file_axes))}: axes are only valid for sweep")

    target = None
    if sub == "sweep":
        target = flags.pop("target", None) or file_values.pop("target", None)
        if target is None:
            raise ConfigError("target: sweep needs a target subcommand")
    schema = schema_for(sub, target)

    for key in file_values:
        if key not in schema:
            raise ConfigError(f"{key}: unknown key for {target or sub}")
    for key in flags:
        if key not in schema:
            raise ConfigError(f"{key}: not a parameter of {target or sub}")

    values, overridden = {}, {}
    for key, param in schema.items():
        if key in flags:
            values[key] = param.convert(key, flags[key])
            if key in file_values:
                overridden[key] = {"file": file_values[key], "flag": flags[key]}
        elif key in file_values:
            values[key] = param.convert(key, file_values[key])
        else:
            values[key] = param.default

    axes = dict(file_axes)
    for item in flag_axes:
        if "=" not in item:
            raise ConfigError(f"axis: expected name=values, got {item!r}")
        name, spec = (part.strip() for part in item.split("=", 1))
        if name in axes:
            overridden[f"axis.{name}"] = {"file": axes[name], "flag": spec}
        axes[name] = spec
    if len(axes) > MAX_AXES:
        raise ConfigError(f"axis: at most {MAX_AXES} sweep axes, got {len(axes)}")
    parsed_axes = []
    for name, spec in axes.items():
        param = schema.get(name)
        if param is None or name in COMMON or not param.numeric:
            raise ConfigError(f"axis.{name}: not a numeric parameter of {target}")
        parsed_axes.append((name, parse_axis(name, spec, param)))
    if sub == "sweep" and not parsed_axes:
        raise ConfigError("axis: sweep needs at least one axis")

    cfg = RunConfig(sub, values, target, tuple(parsed_axes), overridden or None, config_file)
    if sub != "sweep":
        _precheck(cfg)
    return cfg


def _precheck(cfg: RunConfig) -> None:
    """Catch parameter combinations the constructors reject, before any work."""
    try:
        if cfg.subcommand in ("rate", "probability"):
            build_worldline(cfg.values)
        elif cfg.subcommand == "teleport":
            build_scenario(cfg.values)
            if cfg["t_max"] < cfg["t_min"]:
                raise ValueError("t_max must not be below t_min")
        elif cfg.subcommand == "rho11" and cfg["a"] < 0:
            raise ValueError("a must be non-negative")
    except (ValueError, E.UdsimError) as exc:
        raise ConfigError(f"{cfg.subcommand} parameters: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="udsim", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"udsim {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)
    for name in (*SCHEMAS, "sweep"):
        sp = subs.add_parser(name, help=f"{name} table")
        sp.add_argument("--config", help="flat key = value file; flags win")
        keys: dict[str, Param] = dict(COMMON)
        if name == "sweep":
            sp.add_argument("--target", choices=tuple(SCHEMAS))
            sp.add_argument("--axis", action="append",
                            help="name=v1,v2,... | name=lin:a:b:n | name=log:a:b:n")
            for schema in SCHEMAS.values():
                for k, p in schema.items():
                    keys.setdefault(k, p)
        else:
            keys.update(SCHEMAS[name])
        for key, param in keys.items():
            opts = [f"--{key}"]
            if "_" in key:
                opts.append(f"--{key.replace('_', '-')}")
            sp.add_argument(*opts, dest=key, default=None, metavar="VALUE",
                            help=param.help + (f" (default {param.default})"
                                               if name != "sweep" else ""))
    return parser


# -- evaluation --------------------------------------------------------------------


def build_worldline(v: dict):
    from . import worldline as wl

    kind, d = v["trajectory"], v["d"]
    if kind == "inertial":
        return wl.Inertial(v["velocity"], v["x"], d)
    if kind == "static":
        return wl.StaticAt(v["x"], d)
    if kind == "uniform":
        return wl.UniformAcceleration(v["a"], v["x"], d)
    if kind == "truncated":
        return wl.TruncatedUniform(v["a"], v["tau2"], v["x"], d)
    return wl.AsymptoticUniform(v["a"], v["width"], v["x"], d)


def _kernel(v: dict):
    from .field_kernel import WightmanKernel

    return WightmanKernel(2, ir_mass=v["ir_mass"]) if v["d"] == 2 else WightmanKernel(v["d"])


def build_params(v: dict):
    from .detector_dynamics import DetectorParams

    return DetectorParams.from_bare(v["omega"], v["gamma"], m0=v["m0"],
                                    lambda0=v["lambda0"], lambda1=v["lambda1"])


def build_scenario(v: dict, times=(0.0,)):
    from .teleport import TeleportScenario

    return TeleportScenario(a=v["a"], b=v["b"], r1=v["r1"], r2=v["r2"],
                            alpha=complex(v["alpha_re"], v["alpha_im"]), gamma=v["gamma"],
                            omega=v["omega"], m0=v["m0"], lambda0=v["lambda0"],
                            lambda1=v["lambda1"], foliation=v["foliation"], times=times,
                            tau2=v["tau2"], mode=v["mode"])


def _rate(v: dict) -> list[dict]:
    from .response import transition_rate

    res = transition_rate(v["d"], build_worldline(v), v["omega"], v["tau"], v["dtau"],
                          kernel=_kernel(v), rel_tol=v["rel_tol"], abs_tol=v["abs_tol"])
    row = {"value": res.value, "integral": res.integral, "error_estimate": res.error_estimate}
    for key, val in res.boundary_terms.items():
        row[f"boundary.{key}"] = val
    return [row]


def _probability(v: dict) -> list[dict]:
    from .response import response_function, transition_probability
    from .switching import SwitchingFunction

    chi = SwitchingFunction(v["tau0"], v["tau"], v["delta"])
    F = response_function(v["d"], chi, build_worldline(v), v["omega"], kernel=_kernel(v),
                          rel_tol=max(v["rel_tol"], 1e-8), abs_tol=v["abs_tol"])
    return [{"probability": transition_probability(F, v["coupling"], v["matrix_element"]),
             "response": F}]


def _rho11_history(v: dict):
    from .detector_dynamics import perturbative_rho11, rho11_history

    p = build_params(v)
    grid = np.linspace(v["eta_min"], v["eta_max"], v["n"])
    hist = rho11_history(p, v["a"], grid)
    pert = np.asarray(perturbative_rho11(p, v["a"], grid), dtype=float) * np.ones_like(grid)
    return p, hist, pert


def _rho11(v: dict) -> list[dict]:
    _, hist, pert = _rho11_history(v)
    s = hist.series
    return [{"eta": hist.eta[i], "rho11": hist.rho11[i], "rho11_perturbative": pert[i],
             "q2": s.Q[i, 0, 0], "p2": s.P[i, 0, 0], "pq": s.R[i, 0, 0]}
            for i in range(len(hist.eta))]


def _teleport_series(v: dict):
    from .teleport import run

    times = tuple(np.linspace(v["t_min"], v["t_max"], v["n"]))
    scenario = build_scenario(v, times)
    return scenario, run(scenario)


def _teleport(v: dict, meta: Optional[dict] = None) -> list[dict]:
    from .teleport import _ab_series, _with_input, fidelity_monte_carlo

    scenario, ser = _teleport_series(v)
    if meta is not None:
        meta["markers"] = {k: _json_value(x) for k, x in _teleport_markers(ser).items()}
        meta["markers"]["peaks_t"] = [float(t) for t in
                                      (ser.markers.peaks_t if ser.markers else [])]
        meta.update({f"run.{k}": _jsonable(x) for k, x in ser.meta.items()})
    rows = []
    for i in range(len(ser)):
        rows.append({"t1": ser.t1[i], "tau_a": ser.tau_a[i], "tau_b": ser.tau_b[i],
                     "f_av": ser.f_av[i], "e_n": ser.e_n[i], "e_n_signed": ser.e_n_signed[i],
                     "tau_adv": None if ser.tau_adv is None else ser.tau_adv[i]})
    if v["samples"] > 0:
        # the same joint states the closed form used, re-evaluated by sampling
        eps = scenario.epsilon if ser.tau_adv is not None else 0.0
        pairs = np.stack([ser.tau_a, ser.tau_b + eps], axis=1)
        states = _ab_series(scenario, pairs)
        for i, row in enumerate(rows):
            mean, err = fidelity_monte_carlo(scenario, _with_input(scenario, states.state(i)),
                                             samples=v["samples"], seed=v["seed"] + i)
            row["f_av_mc"], row["f_av_mc_stderr"] = mean, err
    return rows


def _teleport_markers(ser) -> dict:
    m = ser.markers
    return {"f_av_final": ser.f_av[-1], "e_n_final": ser.e_n[-1],
            "n_peaks": None if m is None else len(m.peaks_t),
            "t_half": None if m is None else m.t_half,
            "t_de": None if m is None else m.t_de,
            "late_spacing": None if m is None else m.late_spacing}


SERIES = {"rate": _rate, "probability": _probability, "rho11": _rho11, "teleport": _teleport}


def evaluate_point(target: str, v: dict) -> dict:
    """Scalar observables of one sweep point."""
    if target in ("rate", "probability"):
        return SERIES[target](v)[0]
    if target == "rho11":
        from .detector_dynamics import effective_temperature

        p, hist, pert = _rho11_history(v)
        s = hist.series
        temp = effective_temperature((s.Q[-1, 0, 0], s.P[-1, 0, 0], s.R[-1, 0, 0]), p)
        return {"rho11": hist.rho11[-1], "rho11_perturbative": pert[-1], "temperature": temp}
    _, ser = _teleport_series(v)
    return _teleport_markers(ser)


NUMERICAL = (E.NonConvergence, E.SingularInterior, E.NullSeparation, E.DegenerateMeasurement,
             E.UncertaintyViolation, E.PoorFit, E.NoIntersection, E.UnderSampled,
             ArithmeticError, FloatingPointError, np.linalg.LinAlgError)


def _sweep_task(task):
    target, values = task
    try:
        return evaluate_point(target, values), None
    except (E.UdsimError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def run_sweep(cfg: RunConfig, evaluate: Callable = _sweep_task) -> tuple[list[str], list[dict]]:
    """Cartesian product of the axes, rows in lexicographic axis order (first
    axis slowest) whatever order the workers finish in.  Failing points become
    error rows."""
    names = [name for name, _ in cfg.axes]
    points = list(itertools.product(*(vals for _, vals in cfg.axes)))
    tasks = [(cfg.target, {**cfg.values, **dict(zip(names, pt))}) for pt in points]
    if cfg["workers"] > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg["workers"]) as pool:
            results = list(pool.map(evaluate, tasks))
    else:
        results = [evaluate(t) for t in tasks]
    columns = names + POINT_COLUMNS[cfg.target] + [FAILURE_COLUMN]
    rows = []
    for pt, (obs, failure) in zip(points, results):
        row = dict(zip(names, pt))
        row.update(obs or {})
        row[FAILURE_COLUMN] = failure or ""
        rows.append(row)
    return columns, rows


# -- output ------------------------------------------------------------------------


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def render_csv(columns: list[str], rows: list[dict], meta: dict) -> str:
    import csv
    import io

    buf = io.StringIO()
    buf.write("# meta " + json.dumps(meta, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(c)) for c in columns])
    return buf.getvalue()


def _json_value(v):
    if v is None or isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, (bool, np.bool_)):
        return int(v)
    v = float(v)
    return v if math.isfinite(v) else repr(v)


def render_json(columns: list[str], rows: list[dict], meta: dict) -> str:
    body = {"meta": meta, "columns": columns,
            "rows": [{c: _json_value(row.get(c)) for c in columns} for row in rows]}
    return json.dumps(body, indent=1) + "\n"


def execute(cfg: RunConfig) -> tuple[list[str], list[dict], dict, int]:
    """Run a configuration; returns (columns, rows, meta, exit code)."""
    meta = cfg.meta()
    if cfg.subcommand == "sweep":
        columns, rows = run_sweep(cfg)
        failures = sum(1 for r in rows if r[FAILURE_COLUMN])
        meta["failed_points"] = failures
        return columns, rows, meta, EXIT_NUMERIC if failures else EXIT_OK
    if cfg.subcommand == "teleport":
        rows = _teleport(cfg.values, meta)
    else:
        rows = SERIES[cfg.subcommand](cfg.values)
    columns = list(SERIES_COLUMNS[cfg.subcommand])
    if cfg.subcommand == "teleport" and cfg["samples"] <= 0:
        columns = columns[:-2]
    return columns, rows, meta, EXIT_OK


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"udsim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # argparse already printed its diagnostic
        return int(exc.code or 0)

    if cfg["plot"]:
        try:
            from . import plotting

            plotting.require_matplotlib()
        except ImportError as exc:
            print(f"udsim: configuration error: plot: {exc}", file=sys.stderr)
            return EXIT_CONFIG

    try:
        columns, rows, meta, code = execute(cfg)
    except NUMERICAL as exc:
        print(f"udsim: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (E.UdsimError, ValueError) as exc:
        print(f"udsim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    text = (render_json if cfg["format"] == "json" else render_csv)(columns, rows, meta)
    if cfg["output"] == "-":
        sys.stdout.write(text)
    else:
        with open(cfg["output"], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    if cfg["plot"]:
        from . import plotting

        for path in plotting.report(cfg.subcommand if cfg.target is None else cfg.target,
                                    columns, rows, meta, cfg["plot"],
                                    axes=[name for name, _ in cfg.axes]):
            print(f"udsim: wrote {path}", file=sys.stderr)
    if code == EXIT_NUMERIC:
        print(f"udsim: {meta.get('failed_points')} sweep point(s) failed", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
