"""Command-line front end for the ring solver.

Five subcommands cover the standard reports:

- ``phase-diagram``: rasterize the (theta, g1) plane.
- ``solve``: full single-point report (minima, labels, currents,
  winding, excitation spectrum) as JSON.
- ``current-sweep``: ring and subring currents along a theta sweep.
- ``scaling``: gap curves and power-law fits next to a phase boundary.
- ``census``: superradiant phase counts per ring size.

Exit codes: 0 success, 2 bad arguments, 3 solver failure, 4 I/O
failure.  Failures print a machine-parsable JSON object on stderr.
Numbers accept a ``pi`` suffix (``0.49pi``, ``-pi``); grids are written
``MIN:MAX:COUNT``.  A ``--config`` file holds flat ``key=value`` lines
with the same spellings as the long flags; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import bogoliubov, criticality, meanfield, normal_phase, observables
from .errors import (
    AmbiguousWindingError,
    ConvergenceError,
    PairingError,
    SingularDenominatorError,
    WindingUndefinedError,
)
from .model import RingParameters


class _UsageError(Exception):
    """Raised instead of argparse's SystemExit so main() owns the exit code."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def parse_scalar(text: str) -> float:
    """Parse a float, allowing a trailing ``pi`` factor ("0.5pi", "-pi")."""
    s = str(text).strip().lower()
    factor = 1.0
    if s.endswith("pi"):
        factor = math.pi
        s = s[:-2].strip()
        if s in ("", "+"):
            s = "1"
        elif s == "-":
            s = "-1"
    try:
        return factor * float(s)
    except ValueError:
        raise ValueError(f"cannot parse number {text!r}") from None


def parse_grid(text: str) -> np.ndarray:
    """Parse a linear grid written ``MIN:MAX:COUNT``."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ValueError(f"grid {text!r} is not of the form MIN:MAX:COUNT")
    lo, hi = parse_scalar(parts[0]), parse_scalar(parts[1])
    try:
        count = int(parts[2])
    except ValueError:
        raise ValueError(f"grid count {parts[2]!r} is not an integer") from None
    if count < 2:
        raise ValueError("grid needs at least 2 points")
    return np.linspace(lo, hi, count)


def parse_log_grid(text: str) -> np.ndarray:
    """Parse a geometric grid written ``MIN:MAX:COUNT`` (both ends > 0)."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ValueError(f"grid {text!r} is not of the form MIN:MAX:COUNT")
    lo, hi = parse_scalar(parts[0]), parse_scalar(parts[1])
    try:
        count = int(parts[2])
    except ValueError:
        raise ValueError(f"grid count {parts[2]!r} is not an integer") from None
    if count < 2:
        raise ValueError("grid needs at least 2 points")
    if lo <= 0 or hi <= lo:
        raise ValueError("log grid needs 0 < MIN < MAX")
    return np.geomspace(lo, hi, count)


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"cannot parse boolean {text!r}")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved settings for one command invocation."""

    command: str
    n: int
    omega: float
    delta: float
    hop: float
    theta: float
    g1: float
    theta_grid: np.ndarray
    g1_grid: np.ndarray
    seed: int
    jobs: int
    format: str
    out: str | None
    plot: bool
    side: str
    window: np.ndarray
    halve_window: bool
    n_min: int
    n_max: int


_DEFAULTS = {
    "N": "6",
    "omega": "1",
    "delta": "50",
    "hop": "0.05",
    "theta": "0",
    "g1": "0.7",
    "grid_theta": "-pi:pi:201",
    "grid_g1": "0.3:0.8:101",
    "seed": "0",
    "jobs": "1",
    "format": None,
    "out": None,
    "plot": False,
    "side": "both",
    "window": "1e-4:1e-2:16",
    "halve_window": False,
    "n_min": "3",
    "n_max": "12",
}

_TABLE_COMMANDS = ("phase-diagram", "current-sweep", "census")


def read_config_file(path: str) -> dict[str, str]:
    """Read flat ``key=value`` lines; blank lines and ``#`` comments skip."""
    entries: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            entries[key.strip()] = value.strip()
    return entries


def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value settings file")
    common.add_argument("--N", dest="N", help="number of cavities")
    common.add_argument("--omega", help="cavity frequency")
    common.add_argument("--delta", help="qubit splitting")
    common.add_argument("--hop", help="hopping amplitude J")
    common.add_argument("--theta", help="hopping phase (accepts a pi suffix)")
    common.add_argument("--g1", help="dimensionless coupling g1")
    common.add_argument("--grid-theta", dest="grid_theta", help="theta grid MIN:MAX:COUNT")
    common.add_argument("--grid-g1", dest="grid_g1", help="g1 grid MIN:MAX:COUNT")
    common.add_argument("--seed", help="random seed")
    common.add_argument("--jobs", help="parallel workers for sweeps")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--out", help="output file (default: stdout)")

    parser = _Parser(prog="rabiring", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    plotable = argparse.ArgumentParser(add_help=False)
    plotable.add_argument(
        "--plot",
        action="store_const",
        const=True,
        help="also render a PNG figure next to --out",
    )

    sub.add_parser(
        "phase-diagram",
        parents=[common, plotable],
        help="rasterize phase labels and observables over (theta, g1)",
    )
    sub.add_parser(
        "solve",
        parents=[common],
        help="single-point minima, labels, currents, winding, spectrum",
    )
    sub.add_parser(
        "current-sweep",
        parents=[common, plotable],
        help="ring and subring currents along a theta sweep",
    )
    scaling = sub.add_parser(
        "scaling",
        parents=[common, plotable],
        help="gap curves and critical-exponent fits at a boundary",
    )
    scaling.add_argument("--side", choices=("below", "above", "both"))
    scaling.add_argument("--window", help="reduced-coupling grid MIN:MAX:COUNT (geometric)")
    scaling.add_argument(
        "--halve-window",
        dest="halve_window",
        action="store_const",
        const=True,
        help="also fit on the lower half of the window",
    )
    census = sub.add_parser(
        "census",
        parents=[common],
        help="superradiant phase counts per ring size",
    )
    census.add_argument("--n-min", dest="n_min", help="smallest ring size")
    census.add_argument("--n-max", dest="n_max", help="largest ring size")
    return parser


def _resolve(command: str, settings: dict) -> RunConfig:
    fmt = settings["format"]
    if fmt is None:
        fmt = "csv" if command in _TABLE_COMMANDS else "json"
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {fmt!r}")
    side = settings["side"]
    if side not in ("below", "above", "both"):
        raise ValueError(f"side must be below, above or both, got {side!r}")
    n_min = int(settings["n_min"])
    n_max = int(settings["n_max"])
    if n_min < 3 or n_max < n_min:
        raise ValueError("census needs 3 <= n-min <= n-max")
    return RunConfig(
        command=command,
        n=int(settings["N"]),
        omega=parse_scalar(settings["omega"]),
        delta=parse_scalar(settings["delta"]),
        hop=parse_scalar(settings["hop"]),
        theta=parse_scalar(settings["theta"]),
        g1=parse_scalar(settings["g1"]),
        theta_grid=parse_grid(settings["grid_theta"]),
        g1_grid=parse_grid(settings["grid_g1"]),
        seed=int(settings["seed"]),
        jobs=int(settings["jobs"]),
        format=fmt,
        out=settings["out"],
        plot=_parse_bool(settings["plot"]),
        side=side,
        window=parse_log_grid(settings["window"]),
        halve_window=_parse_bool(settings["halve_window"]),
        n_min=n_min,
        n_max=n_max,
    )


def parse_run_config(argv=None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None)
    settings = dict(_DEFAULTS)
    if config_path is not None:
        for key, value in read_config_file(config_path).items():
            canonical = key.replace("-", "_")
            if canonical not in _DEFAULTS:
                raise ValueError(f"unknown config key {key!r}")
            settings[canonical] = value
    for key, value in args.items():
        if value is not None:
            settings[key] = value
    return _resolve(command, settings)


def _fmt(x: float) -> str:
    return "%.12g" % (float(x) + 0.0)


def _jsonable(x):
    x = float(x) + 0.0
    return x if math.isfinite(x) else None


def _dump_json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _dump_csv(header: list[str], rows: list[list[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def _write_text(out: str | None, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _figure_path(cfg: RunConfig) -> str:
    if cfg.out is None:
        raise ValueError("--plot needs --out so the figure has a place to go")
    return os.path.splitext(cfg.out)[0] + ".png"


def _base_params(cfg: RunConfig, theta: float = 0.0, g1: float = 0.0) -> RingParameters:
    return RingParameters(
        n=cfg.n,
        omega=cfg.omega,
        delta=cfg.delta,
        hop=cfg.hop,
        theta=theta,
        g1=g1,
    )


def _cmd_phase_diagram(cfg: RunConfig) -> None:
    params = _base_params(cfg)
    cells = criticality.phase_diagram(
        params, cfg.theta_grid, cfg.g1_grid, seed=cfg.seed, jobs=cfg.jobs
    )
    if cfg.format == "csv":
        header = ["theta", "g1", "label", "A4", "B2", "I", "I135", "I246"]
        rows = [
            [
                _fmt(c.theta),
                _fmt(c.g1),
                c.label_text,
                _fmt(c.a4),
                _fmt(c.b2),
                _fmt(c.current),
                _fmt(c.odd_subring),
                _fmt(c.even_subring),
            ]
            for c in cells
        ]
        text = _dump_csv(header, rows)
    else:
        text = _dump_json(
            [
                {
                    "theta": c.theta,
                    "g1": c.g1,
                    "label": c.label_text,
                    "A4": _jsonable(c.a4),
                    "B2": _jsonable(c.b2),
                    "I": _jsonable(c.current),
                    "I135": _jsonable(c.odd_subring),
                    "I246": _jsonable(c.even_subring),
                }
                for c in cells
            ]
        )
    _write_text(cfg.out, text)
    if cfg.plot:
        from . import plots

        plots.render_phase_diagram(cells, _figure_path(cfg))


def _minimum_entry(params: RingParameters, report) -> dict:
    config = report.config
    entry = {
        "a": [float(x) for x in config.a],
        "b": [float(x) for x in config.b],
        "energy": _jsonable(report.energy),
        "residual_norm": _jsonable(report.residual_norm),
        "label": report.label.text(),
        "momentum_index": report.label.momentum_index,
        "chirality": report.label.chirality,
        "iterations": report.iterations,
        "seed_origin": report.seed_origin,
        "current": _jsonable(observables.ring_current(config)),
    }
    if params.n == 6:
        odd, even = observables.subring_currents(config)
        entry["odd_subring"] = _jsonable(odd)
        entry["even_subring"] = _jsonable(even)
    else:
        entry["odd_subring"] = None
        entry["even_subring"] = None
    try:
        entry["winding"] = observables.winding_number(observables.spin_vectors(config))
        entry["winding_status"] = "ok"
    except WindingUndefinedError:
        entry["winding"] = None
        entry["winding_status"] = "undefined"
    except AmbiguousWindingError:
        entry["winding"] = None
        entry["winding_status"] = "ambiguous"
    try:
        spectrum = bogoliubov.excitation_spectrum(
            bogoliubov.bilinear_matrix(params, config)
        )
        entry["excitations"] = [_jsonable(e) for e in spectrum.energies]
        entry["stable"] = bool(spectrum.stable)
        entry["zero_modes"] = int(spectrum.zero_modes)
        entry["spectrum_status"] = "ok"
    except PairingError:
        entry["excitations"] = None
        entry["stable"] = None
        entry["zero_modes"] = None
        entry["spectrum_status"] = "pairing-failure"
    return entry


def _cmd_solve(cfg: RunConfig) -> None:
    if cfg.format == "csv":
        raise ValueError("solve reports json only")
    params = _base_params(cfg, theta=cfg.theta, g1=cfg.g1)
    result = meanfield.minimize_energy(
        params, meanfield.MinimizeStrategy(seed=cfg.seed)
    )
    if not result.minima:
        raise ConvergenceError(
            f"no stationary minimum converged at theta={params.theta}, g1={params.g1}"
        )
    payload = {
        "N": params.n,
        "omega": params.omega,
        "delta": params.delta,
        "hop": params.hop,
        "theta": params.theta,
        "g1": params.g1,
        "seed": cfg.seed,
        "n_starts": result.n_starts,
        "n_converged": result.n_converged,
        "n_minima": len(result.minima),
        "n_ground": len(result.ground_family()),
        "minima": [_minimum_entry(params, m) for m in result.minima],
    }
    _write_text(cfg.out, _dump_json(payload))


def _cmd_current_sweep(cfg: RunConfig) -> None:
    params = _base_params(cfg, g1=cfg.g1)
    points = criticality.current_sweep(params, cfg.theta_grid, seed=cfg.seed)
    if cfg.format == "csv":
        header = ["theta", "I", "I135", "I246"]
        rows = [
            [_fmt(p.theta), _fmt(p.current), _fmt(p.odd_subring), _fmt(p.even_subring)]
            for p in points
        ]
        text = _dump_csv(header, rows)
    else:
        text = _dump_json(
            [
                {
                    "theta": p.theta,
                    "I": _jsonable(p.current),
                    "I135": _jsonable(p.odd_subring),
                    "I246": _jsonable(p.even_subring),
                }
                for p in points
            ]
        )
    _write_text(cfg.out, text)
    if cfg.plot:
        from . import plots

        plots.render_current_sweep(points, _figure_path(cfg))


def _fit_entry(fit) -> dict:
    return {
        "gamma": _jsonable(fit.gamma),
        "log_prefactor": _jsonable(fit.log_prefactor),
        "r_squared": _jsonable(fit.r_squared),
        "n_points": fit.n_points,
        "window": [_jsonable(fit.window[0]), _jsonable(fit.window[1])],
    }


def _cmd_scaling(cfg: RunConfig) -> None:
    if cfg.format == "csv":
        raise ValueError("scaling reports json only")
    params = _base_params(cfg, theta=cfg.theta)
    classification = normal_phase.classify_theta(params)
    sides = ("below", "above") if cfg.side == "both" else (cfg.side,)
    payload = {
        "theta": params.theta,
        "g1c": _jsonable(classification.g1c),
        "soft_momentum_index": int(
            round(abs(classification.k_star) * params.n / (2.0 * math.pi))
        ),
        "sides": {},
    }
    rendered = []
    for side in sides:
        curve = criticality.gap_curve(params, params.theta, side, deltas=cfg.window)
        fit = criticality.fit_exponent(curve)
        entry = _fit_entry(fit)
        entry["points"] = [
            [_jsonable(d), _jsonable(e)] for d, e in zip(curve.deltas, curve.eps1)
        ]
        if cfg.halve_window:
            halved = criticality.fit_exponent(
                curve, window=criticality.halved_window(curve)
            )
            entry["halved"] = _fit_entry(halved)
        payload["sides"][side] = entry
        rendered.append((curve, fit, side))
    _write_text(cfg.out, _dump_json(payload))
    if cfg.plot:
        from . import plots

        plots.render_scaling(rendered, _figure_path(cfg))


def _cmd_census(cfg: RunConfig) -> None:
    ratio = cfg.hop / cfg.omega
    counts = [
        (n, *normal_phase.phase_census(n, ratio))
        for n in range(cfg.n_min, cfg.n_max + 1)
    ]
    if cfg.format == "csv":
        header = ["N", "CSR", "FSR", "AFSR"]
        rows = [[str(n), str(c), str(f), str(a)] for n, c, f, a in counts]
        text = _dump_csv(header, rows)
    else:
        text = _dump_json(
            [
                {"N": n, "CSR": c, "FSR": f, "AFSR": a}
                for n, c, f, a in counts
            ]
        )
    _write_text(cfg.out, text)


_HANDLERS = {
    "phase-diagram": _cmd_phase_diagram,
    "solve": _cmd_solve,
    "current-sweep": _cmd_current_sweep,
    "scaling": _cmd_scaling,
    "census": _cmd_census,
}


def _emit_error(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        cfg = parse_run_config(argv)
        _HANDLERS[cfg.command](cfg)
        return 0
    except _UsageError as exc:
        return _emit_error(2, "bad-arguments", str(exc))
    except ValueError as exc:
        return _emit_error(2, "bad-arguments", str(exc))
    except (ConvergenceError, PairingError, SingularDenominatorError) as exc:
        return _emit_error(3, "solver-failure", str(exc))
    except OSError as exc:
        return _emit_error(4, "io-failure", str(exc))


if __name__ == "__main__":
    sys.exit(main())
