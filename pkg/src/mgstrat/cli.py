"""``mgstrat``: command-line front end.

Subcommands: ``solve-lambda`` (tabulate cheat-proof switch-rate means),
``payoff-table`` (stay/switch winning probabilities at the solved rate),
``simulate`` (one crowd run, optionally with derived statistics),
``sweep`` (inefficiency versus epsilon over many seeds), and
``kpr`` (convergence of the ranked-restaurant cyclic strategy).

Every run resolves flags over config-file values over built-in defaults
into a manifest, then writes its outputs into one directory: data as CSV
whose first lines are ``#`` comments embedding the manifest hash, plus
``manifest.json`` and ``summary.json`` whose first key is that same hash.
Outputs are byte-deterministic: same subcommand, parameters, and package
version give identical files, whatever the output directory.

Exit codes: 0 success, 2 usage error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .engine import MODE_BASELINE, MODE_STRATEGY, StrategyConfig, derive_rng, run
from .kpr import kpr_run
from .payoff import expected_payoffs
from .solver import NumericError, solve_lambda
from .stats import (
    c_autocorrelation,
    delta_histogram,
    episode_lengths,
    inefficiency_eta,
    s_autocorrelation,
)

__all__ = ["RunManifest", "parse_config", "dispatch", "main", "cli_entry", "OUTDIR_ENV"]

OUTDIR_ENV = "MGSTRAT_OUTDIR"

_DEFAULTS: dict[str, dict[str, Any]] = {
    "solve-lambda": {"delta_max": 10, "tolerance": 1e-10},
    "payoff-table": {"delta_max": 50},
    "simulate": {
        "n": 2001,
        "epsilon": 0.5,
        "steps": 10000,
        "seed": 1,
        "wait_t": 0,
        "reset_prefactor": 0.5,
        "mode": MODE_STRATEGY,
        "record_choices": False,
        "stats": False,
        "burn_in": 0,
        "tau_max": 100,
    },
    "sweep": {
        "n": 2001,
        "epsilons": "0.1:0.9:0.1",
        "seeds": 20,
        "steps": 10000,
        "seed": 1,
        "wait_t": 0,
        "reset_prefactor": 0.5,
        "burn_in": 0,
    },
    "kpr": {"n": 64, "seeds": 200, "max_steps": 10000, "seed": 1},
}


@dataclass(frozen=True)
class RunManifest:
    """Fully resolved description of one CLI run.

    The hash covers everything that determines output bytes -- subcommand,
    parameters, package version, output names -- and deliberately not the
    output directory, so the same run lands identical files anywhere.
    """

    subcommand: str
    params: dict[str, Any]
    seed: int | None
    version: str
    outputs: tuple[str, ...]
    outdir: Path

    def canonical(self) -> str:
        payload = {
            "subcommand": self.subcommand,
            "params": self.params,
            "seed": self.seed,
            "version": self.version,
            "outputs": list(self.outputs),
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()[:16]

    def document(self) -> dict[str, Any]:
        return {
            "manifest_hash": self.digest(),
            "subcommand": self.subcommand,
            "params": self.params,
            "seed": self.seed,
            "version": self.version,
            "outputs": list(self.outputs),
        }


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mgstrat",
        description="Win-stay/lose-shift minority-game strategy toolkit.",
    )
    parser.add_argument(
        "--version", action="version", version=f"mgstrat {__version__}"
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=Path, help="JSON file of key/value settings")
        p.add_argument(
            "--outdir",
            type=Path,
            help=f"output directory (default: ${OUTDIR_ENV} or ./out)",
        )

    p = sub.add_parser("solve-lambda", help="tabulate cheat-proof switch-rate means")
    add_common(p)
    p.add_argument("--delta-max", dest="delta_max", type=int)
    p.add_argument("--tolerance", type=float)

    p = sub.add_parser(
        "payoff-table", help="stay/switch winning probabilities at the solved rate"
    )
    add_common(p)
    p.add_argument("--delta-max", dest="delta_max", type=int)

    p = sub.add_parser("simulate", help="run the two-restaurant crowd simulation")
    add_common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--wait-t", dest="wait_t", type=int)
    p.add_argument("--reset-prefactor", dest="reset_prefactor", type=float)
    p.add_argument("--mode", choices=["strategy", "baseline", "random-baseline"])
    p.add_argument(
        "--record-choices", dest="record_choices", action="store_const", const=True
    )
    p.add_argument("--stats", action="store_const", const=True)
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--tau-max", dest="tau_max", type=int)

    p = sub.add_parser("sweep", help="inefficiency versus epsilon over many seeds")
    add_common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--epsilons", type=str, help="start:stop:step or comma list")
    p.add_argument("--seeds", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--wait-t", dest="wait_t", type=int)
    p.add_argument("--reset-prefactor", dest="reset_prefactor", type=float)
    p.add_argument("--burn-in", dest="burn_in", type=int)

    p = sub.add_parser("kpr", help="ranked-restaurant cyclic-strategy convergence")
    add_common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--seeds", type=int)
    p.add_argument("--max-steps", dest="max_steps", type=int)
    p.add_argument("--seed", type=int)

    return parser


def _load_config_file(path: Path, allowed: Iterable[str]) -> dict[str, Any]:
    allowed = set(allowed)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ValueError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValueError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ValueError(f"config file {path} must hold a JSON object")
    out: dict[str, Any] = {}
    for key, value in raw.items():
        norm = str(key).replace("-", "_")
        if norm not in allowed:
            raise ValueError(f"config file {path}: unknown key {key!r}")
        out[norm] = value
    return out


def _parse_epsilons(raw: Any) -> list[float]:
    if isinstance(raw, (list, tuple)):
        values = [float(v) for v in raw]
    else:
        text = str(raw)
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError(
                    f"epsilons range must be start:stop:step, got {text!r}"
                )
            start, stop, step_size = (float(p) for p in parts)
            if step_size <= 0:
                raise ValueError(f"epsilons step must be positive, got {step_size}")
            count = int(math.floor((stop - start) / step_size + 1e-9)) + 1
            values = [start + i * step_size for i in range(max(count, 0))]
        else:
            values = [float(p) for p in text.split(",") if p.strip()]
    if not values:
        raise ValueError(f"epsilons resolves to an empty list: {raw!r}")
    return [round(v, 12) for v in values]


def _require_int(params: dict[str, Any], key: str, minimum: int) -> int:
    value = params[key]
    if isinstance(value, bool) or value != int(value):
        raise ValueError(f"{key} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{key} must be at least {minimum}, got {value}")
    params[key] = value
    return value


def _require_bool(params: dict[str, Any], key: str) -> bool:
    value = params[key]
    if not isinstance(value, bool):
        raise ValueError(f"{key} must be true or false, got {value!r}")
    return value


def _validate(subcommand: str, params: dict[str, Any]) -> dict[str, Any]:
    if "delta_max" in params:
        _require_int(params, "delta_max", 1)
    if "tolerance" in params:
        tolerance = float(params["tolerance"])
        if not (tolerance > 0.0):
            raise ValueError(f"tolerance must be positive, got {params['tolerance']}")
        params["tolerance"] = tolerance
    if "n" in params:
        n = _require_int(params, "n", 1)
        if subcommand != "kpr" and n % 2 == 0:
            raise ValueError(f"n must be odd, got {n}")
    if "epsilon" in params:
        epsilon = float(params["epsilon"])
        if not (0.0 <= epsilon <= 1.0):
            raise ValueError(f"epsilon must lie in [0, 1], got {params['epsilon']}")
        params["epsilon"] = epsilon
    if "epsilons" in params:
        values = _parse_epsilons(params["epsilons"])
        for v in values:
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"epsilons entries must lie in [0, 1], got {v}")
        params["epsilons"] = values
    if "steps" in params:
        _require_int(params, "steps", 1)
    if "max_steps" in params:
        _require_int(params, "max_steps", 1)
    if "seed" in params:
        if isinstance(params["seed"], bool) or params["seed"] != int(params["seed"]):
            raise ValueError(f"seed must be an integer, got {params['seed']!r}")
        params["seed"] = int(params["seed"])
    if "seeds" in params:
        _require_int(params, "seeds", 1)
    if "wait_t" in params:
        _require_int(params, "wait_t", 0)
    if "burn_in" in params:
        _require_int(params, "burn_in", 0)
    if "tau_max" in params:
        _require_int(params, "tau_max", 1)
    if "reset_prefactor" in params:
        prefactor = float(params["reset_prefactor"])
        if not (prefactor > 0.0):
            raise ValueError(
                f"reset_prefactor must be positive, got {params['reset_prefactor']}"
            )
        params["reset_prefactor"] = prefactor
    if "mode" in params:
        mode = {"baseline": MODE_BASELINE}.get(params["mode"], params["mode"])
        if mode not in (MODE_STRATEGY, MODE_BASELINE):
            raise ValueError(f"mode must be strategy or baseline, got {params['mode']!r}")
        params["mode"] = mode
    if "record_choices" in params:
        _require_bool(params, "record_choices")
    if "stats" in params:
        if _require_bool(params, "stats"):
            # C(tau) needs the per-agent record, so --stats implies it.
            params["record_choices"] = True
    if subcommand == "simulate":
        if params["burn_in"] >= params["steps"]:
            raise ValueError(
                f"burn_in must be smaller than steps, got {params['burn_in']}"
            )
        if params["stats"] and params["tau_max"] >= params["steps"]:
            raise ValueError(
                f"tau_max must be smaller than steps, got {params['tau_max']}"
            )
    return params


def _planned_outputs(subcommand: str, params: dict[str, Any]) -> list[str]:
    data = {
        "solve-lambda": ["lambda_table.csv"],
        "payoff-table": ["payoff_table.csv"],
        "simulate": ["trajectory.csv"],
        "sweep": ["sweep.csv"],
        "kpr": ["kpr_runs.csv"],
    }[subcommand]
    if subcommand == "simulate" and params["stats"]:
        data += ["delta_hist.csv", "s_autocorr.csv", "c_autocorr.csv"]
    return data + ["manifest.json", "summary.json"]


def parse_config(
    argv: Sequence[str] | None = None, config_file: str | Path | None = None
) -> RunManifest:
    """Resolve argv (and an optional config file) into a RunManifest.

    Precedence: command-line flags beat config-file values beat built-in
    defaults.  An explicit ``--config`` flag beats the ``config_file``
    argument.  Raises ValueError naming the offending key on bad input;
    argparse itself exits with code 2 on malformed flags.
    """
    parser = _build_parser()
    namespace = parser.parse_args(argv)
    subcommand = namespace.subcommand
    defaults = _DEFAULTS[subcommand]
    params = dict(defaults)
    config_path = namespace.config or (Path(config_file) if config_file else None)
    if config_path is not None:
        params.update(_load_config_file(config_path, defaults))
    for key in defaults:
        flag_value = getattr(namespace, key, None)
        if flag_value is not None:
            params[key] = flag_value
    params = _validate(subcommand, params)
    outdir = namespace.outdir or Path(os.environ.get(OUTDIR_ENV) or "out")
    return RunManifest(
        subcommand=subcommand,
        params=params,
        seed=params.get("seed"),
        version=__version__,
        outputs=tuple(_planned_outputs(subcommand, params)),
        outdir=Path(outdir),
    )


def _format_value(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def _write_csv(
    path: Path, manifest: RunManifest, columns: Sequence[str], rows: Iterable[Sequence[Any]]
) -> None:
    lines = [
        f"# mgstrat {manifest.subcommand} v{manifest.version}",
        f"# manifest: {manifest.digest()}",
        ",".join(columns),
    ]
    lines.extend(",".join(_format_value(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, document: dict[str, Any]) -> None:
    path.write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")


def _strategy_config(params: dict[str, Any], epsilon: float | None = None) -> StrategyConfig:
    return StrategyConfig(
        n=params["n"],
        epsilon=params["epsilon"] if epsilon is None else epsilon,
        wait_t=params["wait_t"],
        reset_prefactor=params["reset_prefactor"],
        seed=params["seed"],
        mode=params.get("mode", MODE_STRATEGY),
    )


def _run_solve_lambda(manifest: RunManifest, outdir: Path) -> dict[str, Any]:
    params = manifest.params
    rows = []
    for delta in range(1, params["delta_max"] + 1):
        lam = solve_lambda(delta, params["tolerance"])
        rows.append((delta, lam, lam - delta))
    _write_csv(outdir / "lambda_table.csv", manifest, ["delta", "lambda", "gap"], rows)
    return {
        "rows": len(rows),
        "gap_at_delta_max": rows[-1][2],
        "asymptotic_gap": 1.0 / 6.0,
    }


def _run_payoff_table(manifest: RunManifest, outdir: Path) -> dict[str, Any]:
    params = manifest.params
    rows = []
    worst_sum_error = 0.0
    for delta in range(1, params["delta_max"] + 1):
        lam = solve_lambda(delta)
        q = expected_payoffs(delta, lam)
        worst_sum_error = max(worst_sum_error, abs(q.thin_stay + q.crowd_stay - 1.0))
        rows.append(
            (delta, lam, q.thin_stay, q.thin_switch, q.crowd_stay, q.crowd_switch)
        )
    _write_csv(
        outdir / "payoff_table.csv",
        manifest,
        ["delta", "lambda", "thin_stay", "thin_switch", "crowd_stay", "crowd_switch"],
        rows,
    )
    return {"rows": len(rows), "max_stay_sum_error": worst_sum_error}


def _run_simulate(manifest: RunManifest, outdir: Path) -> dict[str, Any]:
    params = manifest.params
    config = _strategy_config(params)
    trajectory = run(config, params["steps"], record_choices=params["record_choices"])
    reset_marks = set(trajectory.reset_days)
    _write_csv(
        outdir / "trajectory.csv",
        manifest,
        ["day", "delta", "minority_side", "reset"],
        (
            (t, int(trajectory.deltas[t]), int(trajectory.minority_side[t]), int(t in reset_marks))
            for t in range(trajectory.days)
        ),
    )
    results: dict[str, Any] = {
        "eta": inefficiency_eta(trajectory, burn_in=params["burn_in"]),
        "days": trajectory.days,
        "resets": len(trajectory.reset_days),
        "delta_min": int(trajectory.deltas.min()),
        "delta_max": int(trajectory.deltas.max()),
    }
    episodes = episode_lengths(trajectory)
    if episodes:
        results["episodes"] = {
            "count": len(episodes),
            "mean": float(np.mean(episodes)),
            "median": float(np.median(episodes)),
            "max": int(np.max(episodes)),
        }
    if params["stats"]:
        hist = delta_histogram(trajectory, burn_in=params["burn_in"])
        _write_csv(
            outdir / "delta_hist.csv",
            manifest,
            ["delta", "frequency"],
            sorted(hist.items()),
        )
        s_acf = s_autocorrelation(trajectory, params["tau_max"])
        _write_csv(
            outdir / "s_autocorr.csv",
            manifest,
            ["lag", "value"],
            list(enumerate(s_acf)),
        )
        c_acf = c_autocorrelation(trajectory.choice_matrix, params["tau_max"])
        _write_csv(
            outdir / "c_autocorr.csv",
            manifest,
            ["lag", "value"],
            list(enumerate(c_acf)),
        )
        results["c_at_tau_max"] = float(c_acf[-1])
    return results


def _run_sweep(manifest: RunManifest, outdir: Path) -> dict[str, Any]:
    params = manifest.params
    rows = []
    means = []
    for i, epsilon in enumerate(params["epsilons"]):
        config = _strategy_config(params, epsilon=epsilon)
        etas = np.empty(params["seeds"])
        for j in range(params["seeds"]):
            stream = derive_rng(params["seed"], i, j)
            trajectory = run(config, params["steps"], rng=stream)
            etas[j] = inefficiency_eta(trajectory, burn_in=params["burn_in"])
        mean = float(etas.mean())
        stderr = (
            float(etas.std(ddof=1) / math.sqrt(params["seeds"]))
            if params["seeds"] > 1
            else 0.0
        )
        rows.append((epsilon, mean, stderr, params["seeds"]))
        means.append(mean)
    _write_csv(
        outdir / "sweep.csv", manifest, ["epsilon", "eta_mean", "eta_stderr", "seeds"], rows
    )
    increases = sum(1 for a, b in zip(means, means[1:]) if b > a)
    return {
        "points": len(rows),
        "eta_min": min(means),
        "eta_max": max(means),
        "monotone_increasing_fraction": (
            increases / (len(means) - 1) if len(means) > 1 else 1.0
        ),
    }


def _run_kpr(manifest: RunManifest, outdir: Path) -> dict[str, Any]:
    params = manifest.params
    rows = []
    convergence_days = []
    for index in range(params["seeds"]):
        stream = derive_rng(params["seed"], index)
        result = kpr_run(params["n"], params["max_steps"], stream)
        day = -1 if result.convergence_day is None else result.convergence_day
        if day >= 0:
            convergence_days.append(day)
        rows.append((index, day, result.utilization[-1]))
    _write_csv(
        outdir / "kpr_runs.csv",
        manifest,
        ["seed_index", "convergence_day", "final_utilization"],
        rows,
    )
    results: dict[str, Any] = {
        "seeds": params["seeds"],
        "converged": len(convergence_days),
        "unconverged": params["seeds"] - len(convergence_days),
    }
    if convergence_days:
        results["mean_convergence_day"] = float(np.mean(convergence_days))
        results["median_convergence_day"] = float(np.median(convergence_days))
        results["max_convergence_day"] = int(np.max(convergence_days))
    return results


_RUNNERS: dict[str, Callable[[RunManifest, Path], dict[str, Any]]] = {
    "solve-lambda": _run_solve_lambda,
    "payoff-table": _run_payoff_table,
    "simulate": _run_simulate,
    "sweep": _run_sweep,
    "kpr": _run_kpr,
}


def dispatch(manifest: RunManifest) -> int:
    """Run the manifest's subcommand and write all of its outputs."""
    outdir = manifest.outdir
    outdir.mkdir(parents=True, exist_ok=True)
    results = _RUNNERS[manifest.subcommand](manifest, outdir)
    _write_json(outdir / "manifest.json", manifest.document())
    _write_json(
        outdir / "summary.json",
        {
            "manifest_hash": manifest.digest(),
            "subcommand": manifest.subcommand,
            "results": results,
        },
    )
    for name in manifest.outputs:
        print(f"wrote {outdir / name}")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    try:
        manifest = parse_config(argv)
    except SystemExit as exc:  # argparse has already printed its message
        code = exc.code
        return code if isinstance(code, int) else 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return dispatch(manifest)
    except NumericError as exc:
        print(f"numeric failure in {exc.__class__.__module__}: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def cli_entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    cli_entry()
