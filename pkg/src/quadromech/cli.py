"""Command-line front end: ``quadromech <spectrum|steady|stability|map|evolve>``.

Exit codes: 0 success, 1 configuration or validation error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_file, params_from_config, resolve
from .dynamics import integrate_adiabatic, integrate_fluctuations, integrate_full
from .errors import InvalidParams, NumericalError, QuadromechError
from .linearization import drift_matrix, noise_vector, routh_hurwitz
from .model import SystemParams
from .steady_state import PrescribedDisplacement, SelfConsistent, residuals, solve_adiabatic, solve_full
from .transmission import SweepAxis, spectrum_arrays, sweep_grid

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


class SweepResult:
    """Tabular command output with a metadata header."""

    def __init__(self, columns: Sequence[str], rows: list[tuple], config: dict, command: str, status: Optional[dict] = None):
        self.columns = list(columns)
        self.rows = rows
        self.config = config
        self.command = command
        self.status = status or {}
        self.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")

    def metadata(self) -> dict:
        return {
            "version": __version__,
            "command": self.command,
            "timestamp": self.timestamp,
            "status": self.status,
            "config": self.config,
        }

    def to_csv(self) -> str:
        lines = [f"# quadromech v{__version__}", "# " + json.dumps(self.metadata(), sort_keys=False)]
        lines.append(",".join(self.columns))
        lines.extend(",".join(format_value(v) for v in row) for row in self.rows)
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        body = {
            "metadata": self.metadata(),
            "columns": self.columns,
            "rows": [[_json_value(v) for v in row] for row in self.rows],
        }
        return json.dumps(body, indent=1) + "\n"


def format_value(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v).replace(",", ";").replace("\n", " ")


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def csv_body(text: str) -> str:
    """Everything after the two metadata lines."""
    return text.split("\n", 2)[2]


def worker_count() -> int:
    env = os.environ.get("QUADROMECH_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"QUADROMECH_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ConfigError("QUADROMECH_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def solve_mode(cfg: dict):
    s = cfg["steady"]
    if s["mode"] == "prescribed":
        return PrescribedDisplacement(s["Q_s"])
    return SelfConsistent(s["initial_Q"])


def _complex(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def steady_dict(params: SystemParams, state) -> dict:
    res = residuals(params, state)
    return {
        "a_s": _complex(state.a_s),
        "e_s": _complex(state.e_s),
        "b_s": _complex(state.b_s),
        "X_s": state.X_s,
        "P_s": state.P_s,
        "Q_s": state.Q_s,
        "Pm_s": state.Pm_s,
        "effective_delta": state.effective_delta,
        "mode": type(state.mode).__name__,
        "iterations": state.iterations,
        "residuals": [float(r) for r in res],
        "residual_norm": float(np.linalg.norm(res)),
    }


# ---------------------------------------------------------------- commands


def cmd_spectrum(cfg: dict, at: Optional[str] = None) -> SweepResult:
    params = params_from_config(cfg)
    sw = cfg["sweep"]
    axis = SweepAxis(sw["axis"])
    if at is not None:
        key, _, raw = at.partition("=")
        if key.strip() != axis.value:
            raise ConfigError(f"--at key {key!r} does not match sweep axis {axis.value!r}")
        try:
            x = np.array([float(raw)])
        except ValueError:
            raise ConfigError(f"--at value {raw!r} is not a number") from None
    else:
        try:
            x = sweep_grid(sw["start"], sw["stop"], sw["n_points"])
        except InvalidParams as exc:
            raise ConfigError(str(exc)) from None
    amp, intensity = spectrum_arrays(params, axis, x, sw["Q_s_squared"])
    amp, intensity = np.atleast_1d(amp), np.atleast_1d(intensity)
    rows = [(float(v), float(a.real), float(a.imag), float(t)) for v, a, t in zip(x, amp, intensity)]
    return SweepResult(["sweep_value", "re_amplitude", "im_amplitude", "intensity"], rows, cfg, "spectrum")


def cmd_steady(cfg: dict) -> dict:
    params = params_from_config(cfg)
    mode = solve_mode(cfg)
    s = cfg["steady"]
    full = solve_full(params, mode, tol=s["tol"], max_iter=s["max_iter"])
    adiabatic = solve_adiabatic(params, mode, tol=s["tol"])
    return {"full": steady_dict(params, full), "adiabatic": steady_dict(params, adiabatic)}


def cmd_stability(cfg: dict) -> dict:
    params = params_from_config(cfg)
    state = solve_adiabatic(params, solve_mode(cfg), tol=cfg["steady"]["tol"])
    drift = drift_matrix(params, state)
    report = routh_hurwitz(params, state, drift)
    return {
        "steady": steady_dict(params, state),
        "drift": {
            "m": drift.m.tolist(),
            "delta_tilde": drift.delta_tilde,
            "omega_tilde": drift.omega_tilde,
            "G": drift.G,
        },
        "report": report.to_dict(),
    }


MAP_COLUMNS = ["x", "y", "verdict_hurwitz", "verdict_eigen", "marginal", "agreement", "max_re_lambda", "error"]


def _map_point(task) -> tuple:
    cfg, x_axis, x, y_axis, y = task
    try:
        base = dict(cfg["params"])
        base[x_axis] = x
        base[y_axis] = y
        params = SystemParams(**base)
        state = solve_adiabatic(params, solve_mode(cfg), tol=cfg["steady"]["tol"])
        r = routh_hurwitz(params, state)
        return (x, y, r.verdict_hurwitz, r.verdict_eigen, r.marginal, r.agreement, r.max_real, "")
    except QuadromechError as exc:
        return (x, y, None, None, None, None, None, f"{type(exc).__name__}: {exc}")


def cmd_map(cfg: dict, workers: Optional[int] = None) -> SweepResult:
    mp = cfg["map"]
    if mp["x_axis"] == mp["y_axis"]:
        raise ConfigError("map.x_axis and map.y_axis must differ")
    try:
        xs = sweep_grid(mp["x_start"], mp["x_stop"], mp["x_n"])
        ys = sweep_grid(mp["y_start"], mp["y_stop"], mp["y_n"])
    except InvalidParams as exc:
        raise ConfigError(str(exc)) from None
    # row-major: y outer, x inner
    tasks = [(cfg, mp["x_axis"], float(x), mp["y_axis"], float(y)) for y in ys for x in xs]
    workers = worker_count() if workers is None else workers
    if workers <= 1:
        rows = [_map_point(t) for t in tasks]
    else:
        chunk = max(1, math.ceil(len(tasks) / (4 * workers)))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_map_point, tasks, chunksize=chunk))
    failed = sum(1 for r in rows if r[-1])
    result = SweepResult(MAP_COLUMNS, rows, cfg, "map", {"failed_points": failed})
    if failed == len(rows):
        raise AllPointsFailed(result)
    return result


class AllPointsFailed(NumericalError):
    def __init__(self, result: SweepResult):
        super().__init__("every map point failed")
        self.result = result


def cmd_evolve(cfg: dict) -> SweepResult:
    params = params_from_config(cfg)
    ev, ini = cfg["evolve"], cfg["initial"]
    fixed = ev["fixed_dt"] if ev["fixed_dt"] > 0 else None
    kw = dict(t_end=ev["t_end"], dt_max=ev["dt_max"], tol=ev["tol"], fixed_dt=fixed)
    try:
        if ev["model"] == "full":
            init = (complex(ini["a_re"], ini["a_im"]), complex(ini["b_re"], ini["b_im"]), complex(ini["e_re"], ini["e_im"]))
            traj = integrate_full(params, init, **kw)
        elif ev["model"] == "adiabatic":
            traj = integrate_adiabatic(params, (complex(ini["a_re"], ini["a_im"]), ini["Q"], ini["P"]), **kw)
        else:
            state = solve_adiabatic(params, solve_mode(cfg), tol=cfg["steady"]["tol"])
            M = drift_matrix(params, state)
            nz = cfg["noise"]
            N = noise_vector(params, [nz["in_Xa"], nz["in_Pa"], nz["in_Q"], nz["in_P"]])
            traj = integrate_fluctuations(M, N, [ini["dXa"], ini["dPa"], ini["dQ"], ini["dP"]], **kw)
    except InvalidParams as exc:
        raise ConfigError(str(exc)) from None
    rows = [(float(t), *map(float, y)) for t, y in zip(traj.t, traj.y)]
    status = {"diverged": traj.diverged, "t_stop": traj.t_stop}
    return SweepResult(["t", *traj.labels], rows, cfg, "evolve", status)


# ---------------------------------------------------------------- plotting


def write_plot(result: SweepResult, path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    cols = result.columns
    if result.command == "spectrum":
        x = [r[0] for r in result.rows]
        ax.plot(x, [r[3] for r in result.rows], lw=1.2)
        ax.set_xlabel(result.config["sweep"]["axis"])
        ax.set_ylabel("transmission intensity")
    elif result.command == "evolve":
        t = [r[0] for r in result.rows]
        for j, name in enumerate(cols[1:], start=1):
            ax.plot(t, [r[j] for r in result.rows], lw=1.0, label=name)
        ax.set_xlabel("t")
        ax.legend(fontsize=7)
    else:
        rows = [r for r in result.rows if r[6] is not None]
        for y in sorted({r[1] for r in rows}):
            pts = [(r[0], r[6]) for r in rows if r[1] == y]
            ax.plot(*zip(*pts), lw=0.8)
        ax.axhline(0.0, color="k", lw=0.5)
        ax.set_xlabel(result.config["map"]["x_axis"])
        ax.set_ylabel("max Re(lambda)")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="dotted-key config file (TOML or JSON)")
    common.add_argument("--preset", choices=["fig1", "fig2", "fig3"])
    common.add_argument("--curve", type=int, default=1, help="curve index within a preset (1-based)")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--plot", metavar="FILE.svg")

    parser = argparse.ArgumentParser(prog="quadromech", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"quadromech {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("spectrum", parents=[common], help="transmission spectrum sweep")
    sp.add_argument("--at", metavar="AXIS=VALUE", help="evaluate a single point of the sweep axis")
    sub.add_parser("steady", parents=[common], help="mean-field steady states")
    sub.add_parser("stability", parents=[common], help="drift matrix and Routh-Hurwitz report")
    sub.add_parser("map", parents=[common], help="2-D stability map")
    sub.add_parser("evolve", parents=[common], help="time evolution")
    return parser


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        file_data = load_file(args.config) if args.config else None
        cfg = resolve(file_data, args.overrides, args.preset, args.curve)
        fmt = args.format or cfg["output"]["format"]
        out = args.out or cfg["output"]["path"] or None
        if args.command in ("steady", "stability"):
            if args.format == "csv":
                raise ConfigError(f"{args.command} output is JSON only")
            body = cmd_steady(cfg) if args.command == "steady" else cmd_stability(cfg)
            meta = {"version": __version__, "command": args.command,
                    "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"), "config": cfg}
            _emit(json.dumps({"metadata": meta, **body}, indent=1) + "\n", out)
            return EXIT_OK
        if args.command == "spectrum":
            result = cmd_spectrum(cfg, args.at)
        elif args.command == "map":
            result = cmd_map(cfg)
        else:
            result = cmd_evolve(cfg)
        _emit(result.to_csv() if fmt == "csv" else result.to_json(), out)
        if args.plot:
            write_plot(result, args.plot)
        return EXIT_OK
    except ConfigError as exc:
        print(f"quadromech: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AllPointsFailed as exc:
        _emit(exc.result.to_csv(), args.out)
        print(f"quadromech: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InvalidParams as exc:
        print(f"quadromech: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ZeroDivisionError, FloatingPointError) as exc:
        print(f"quadromech: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"quadromech: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
