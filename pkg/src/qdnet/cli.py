"""Command line front end: one subcommand per experiment, each writing
columnar results (CSV or JSON), rendered figures, and a JSON run manifest
that pins every resolved setting.  `qdnet rerun manifest.json` replays a
manifest and reproduces the result files byte for byte.

Settings resolve flag > config file > default.  The config file is plain
key=value lines using the flag names (hyphens or underscores).

Exit codes: 0 success, 2 invalid flag or config values, 3 missing or
malformed input files, 4 step budget exhausted without a solution.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .bandit import BETA_GRID, NanoDmConfig, SlotMachines, build_nanodm, compare
from .cnf import DimacsError, load_dimacs
from .figures import (
    bench_figure,
    efficiency_figure,
    nor_figure,
    profile_figure,
    selection_figure,
    trace_figure,
)
from .io import (
    bench_table,
    efficiency_table,
    nor_table,
    profile_table,
    read_config,
    selection_table,
    solve_table,
    trajectory_table,
    write_table,
)
from .model import ControlPattern, build_standard_network
from .ring_nor import NorRunConfig, run_nor
from .sat import NanoPsConfig, WalkSatConfig, benchmark, nanops_solve, walksat_solve
from .simulate import IntegratorConfig, evolve, transfer_profile

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_BUDGET = 4


# -- settings ----------------------------------------------------------------


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _floats(text: str):
    values = tuple(float(tok) for tok in text.split(",") if tok.strip())
    if not values:
        raise ValueError("expected at least one number")
    return values


def _float_or_floats(text: str):
    values = _floats(text)
    return values[0] if len(values) == 1 else values


def _bits(text: str):
    if not text or set(text) - {"0", "1"}:
        raise ValueError(f"expected a 0/1 string, got {text!r}")
    return tuple(int(c) for c in text)


def _pattern(text: str):
    """One control pattern: level ids joined by '+', or 'unblocked'."""
    if text.strip().lower() == "unblocked":
        return ()
    ids = tuple(sorted(tok.strip() for tok in text.split("+") if tok.strip()))
    if not ids:
        raise ValueError(f"expected level ids or 'unblocked', got {text!r}")
    return ids


def _patterns(text: str):
    return tuple(_pattern(tok) for tok in text.split(",") if tok.strip())


def _paths(text) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(str(p) for p in text)
    return tuple(tok for tok in text.split(":") if tok)


def _text(value) -> str:
    """Canonical config-file form of a scalar (inverse of the plain casts)."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _floats_text(values) -> str:
    if isinstance(values, tuple):
        return ",".join(repr(float(v)) for v in values)
    return repr(float(values))


def _pattern_text(ids) -> str:
    return "+".join(ids) if ids else "unblocked"


def _patterns_text(patterns) -> str:
    return ",".join(_pattern_text(p) for p in patterns)


@dataclass(frozen=True)
class Setting:
    key: str
    cast: object
    default: object
    help: str
    positional: bool = False
    nargs: object = None
    choices: tuple = ()
    text: object = _text  # value -> canonical config string (inverse of cast)

    @property
    def flag(self) -> str:
        return self.key if self.positional else "--" + self.key.replace("_", "-")


COMMON = [
    Setting("seed", int, 0, "master seed; per-trial streams derive from it"),
    Setting("format", str, "csv", "result table format", choices=("csv", "json")),
    Setting("figures", _bool, True, "also render PNG figures"),
]

INTEGRATOR = [
    Setting("dt", float, 0.1, "integration step, ps"),
    Setting("horizon", float, 10_000.0, "evolution horizon, ps"),
]

SETTINGS = {
    "profile": [
        Setting("dots", int, 4, "number of destination dots"),
        Setting("gain", float, 1.0, "observation gain applied to yields"),
        Setting("patterns", _patterns, None,
                "control patterns, e.g. 'unblocked,l1,l1+l3'; default all subsets",
                text=_patterns_text),
        Setting("trace_pattern", _pattern, None,
                "also write the time-resolved trajectory under this pattern",
                text=_pattern_text),
        *INTEGRATOR,
        *COMMON,
    ],
    "nor": [
        Setting("dots", int, 4, "ring size"),
        Setting("gain", float, 1.0, "observation gain"),
        Setting("cycles", int, 30, "cycles per trial"),
        Setting("trials", int, 1000, "independent trials"),
        Setting("window", int, 5, "cycles per displayed average window"),
        Setting("start", _bits, None, "initial outputs as bits, default all zeros",
                text=lambda bits: "".join(map(str, bits))),
        *INTEGRATOR,
        *COMMON,
    ],
    "sat": [
        Setting("path", str, None, "DIMACS CNF file", positional=True),
        Setting("p", _float_or_floats, 0.1,
                "radiation asymmetry, one value or per-reservoir list",
                text=_floats_text),
        Setting("budget", int, 100_000, "step budget"),
        Setting("trace", _bool, False, "record and plot the reservoir trace"),
        *COMMON,
    ],
    "walksat": [
        Setting("path", str, None, "DIMACS CNF file", positional=True),
        Setting("budget", int, 100_000, "flip budget"),
        *COMMON,
    ],
    "bandit": [
        Setting("pa", float, 0.2, "machine A reward probability"),
        Setting("pb", float, 0.8, "machine B reward probability"),
        Setting("d", int, 50, "controller displacement per update"),
        Setting("plays", int, 1000, "plays per sample"),
        Setting("samples", int, 1000, "Monte Carlo samples"),
        Setting("beta_grid", _floats, tuple(BETA_GRID),
                "softmax temperatures searched on a held-out stream",
                text=_floats_text),
        Setting("coupling_ps", float, 100.0, "inter-dot coupling time, ps"),
        Setting("relax_ps", float, 10.0, "sublevel relaxation time, ps"),
        Setting("m1_lifetime_ps", float, 1000.0, "decision-level radiative lifetime, ps"),
        Setting("l1_lifetime_ps", float, 1000.0, "drain-level radiative lifetime, ps"),
        *INTEGRATOR,
        *COMMON,
    ],
    "bench": [
        Setting("paths", _paths, None, "CNF files and/or directories of .cnf files",
                positional=True, nargs="+", text=lambda v: ":".join(v)),
        Setting("trials", int, 100, "trials per instance per solver"),
        Setting("budget", int, 100_000, "step budget per trial"),
        Setting("p", float, 0.1, "radiation asymmetry for nanops"),
        Setting("solvers", lambda s: tuple(tok for tok in s.split(",") if tok),
                ("nanops", "walksat"), "comma-separated solver list",
                text=lambda v: ",".join(v)),
        *COMMON,
    ],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdnet",
        description="Energy-transfer network experiments: transfer profiles, "
                    "ring NOR, SAT solving, bandit decisions, benchmarks.",
        epilog="Exit codes: 0 ok, 2 bad flag/config values, 3 bad input files, "
               "4 budget exhausted.",
    )
    parser.add_argument("--version", action="version", version=f"qdnet {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    for name, settings in SETTINGS.items():
        sub = subs.add_parser(name, help=f"run the {name} experiment")
        for s in settings:
            text = s.help if s.default is None else f"{s.help} (default {s.text(s.default)})"
            if s.positional:
                sub.add_argument(s.flag, nargs=s.nargs, help=text)
            elif s.cast is _bool:
                sub.add_argument(s.flag, action=argparse.BooleanOptionalAction,
                                 default=None, help=text)
            elif s.choices:
                sub.add_argument(s.flag, default=None, choices=s.choices, help=text)
            else:
                sub.add_argument(s.flag, default=None, help=text)
        sub.add_argument("--out", default=".", help="output directory (default .)")
        sub.add_argument("--config", default=None, help="key=value settings file")

    rerun = subs.add_parser("rerun", help="replay a run manifest bitwise")
    rerun.add_argument("manifest", help="manifest JSON written by a previous run")
    rerun.add_argument("--out", default=".", help="output directory (default .)")
    return parser


def resolve_settings(settings, args, file_config: dict) -> dict:
    """Fold flag > config file > default, casting text from either source."""
    known = {s.key for s in settings}
    for key in file_config:
        if key.replace("-", "_") not in known:
            raise ValueError(f"unknown config key {key!r}")
    resolved = {}
    for s in settings:
        value = getattr(args, s.key, None)
        if value is None:
            for key in (s.key, s.key.replace("_", "-")):
                if key in file_config:
                    value = file_config[key]
                    break
        if value is None:
            resolved[s.key] = s.default
            continue
        if isinstance(value, (str, list)):
            value = s.cast(value)
        if s.choices and value not in s.choices:
            raise ValueError(f"{s.key} must be one of {s.choices}, got {value!r}")
        resolved[s.key] = value
    return resolved


# -- experiment drivers ------------------------------------------------------


def _integrator(cfg: dict) -> IntegratorConfig:
    return IntegratorConfig(dt=cfg["dt"], horizon=cfg["horizon"])


def _emit(out_dir: Path, stem: str, header, rows, cfg: dict) -> str:
    ext = "json" if cfg["format"] == "json" else "csv"
    path = out_dir / f"{stem}.{ext}"
    write_table(path, header, rows, cfg["format"])
    return path.name


def cmd_profile(cfg: dict, out_dir: Path):
    network = build_standard_network(cfg["dots"])
    blockable = sorted({ch.dest for ch in network.relaxations})
    patterns = None
    if cfg["patterns"] is not None:
        for ids in cfg["patterns"]:
            unknown = set(ids) - set(blockable)
            if unknown:
                raise ValueError(f"unknown level ids {sorted(unknown)}; blockable: {blockable}")
        patterns = [ControlPattern(frozenset(ids)) for ids in cfg["patterns"]]
    profile = transfer_profile(network, patterns=patterns, gain=cfg["gain"],
                               config=_integrator(cfg))
    header, rows = profile_table(profile)
    outputs = [_emit(out_dir, "profile", header, rows, cfg)]
    figures = []
    if cfg["figures"]:
        figures.append(Path(profile_figure(profile, out_dir / "profile.png")).name)
    if cfg["trace_pattern"] is not None:
        traj = evolve(network, ControlPattern(frozenset(cfg["trace_pattern"])), _integrator(cfg))
        h, r = trajectory_table(traj)
        outputs.append(_emit(out_dir, "trajectory", h, r, cfg))
    print(f"profile: {len(profile.entries)} patterns x {len(profile.destinations)} dots")
    return outputs, figures, EXIT_OK


def cmd_nor(cfg: dict, out_dir: Path):
    network = build_standard_network(cfg["dots"])
    profile = transfer_profile(network, gain=cfg["gain"], config=_integrator(cfg))
    start = cfg["start"] if cfg["start"] is not None else (0,) * cfg["dots"]
    run_config = NorRunConfig(
        num_dots=cfg["dots"], gain=cfg["gain"], cycles=cfg["cycles"],
        trials=cfg["trials"], initial_x=start, seed=cfg["seed"],
        avg_window=cfg["window"],
    )
    stats = run_nor(run_config, profile)
    header, rows = nor_table(stats)
    outputs = [_emit(out_dir, "nor", header, rows, cfg)]
    figures = []
    if cfg["figures"]:
        figures.append(Path(nor_figure(stats, out_dir / "nor.png")).name)
    print(f"nor: correct-solution ratio {stats.correct_ratio[-1]:.3f} "
          f"at cycle {int(stats.cycles[-1])}")
    return outputs, figures, EXIT_OK


def cmd_sat(cfg: dict, out_dir: Path):
    formula = load_dimacs(cfg["path"])
    result = nanops_solve(
        formula,
        NanoPsConfig(p=cfg["p"], max_steps=cfg["budget"], seed=cfg["seed"]),
        record_trace=cfg["trace"],
    )
    header, rows = solve_table(result)
    outputs = [_emit(out_dir, "sat", header, rows, cfg)]
    figures = []
    if cfg["trace"] and cfg["figures"] and result.trace is not None:
        figures.append(Path(trace_figure(result.trace, formula.num_vars,
                                         out_dir / "sat_trace.png")).name)
    if result.solved:
        print(f"satisfied in {result.steps} steps")
        print("assignment: " + " ".join(map(str, result.assignment)))
        return outputs, figures, EXIT_OK
    print(f"budget of {cfg['budget']} steps exhausted without a solution", file=sys.stderr)
    return outputs, figures, EXIT_BUDGET


def cmd_walksat(cfg: dict, out_dir: Path):
    formula = load_dimacs(cfg["path"])
    result = walksat_solve(formula, WalkSatConfig(max_steps=cfg["budget"], seed=cfg["seed"]))
    header, rows = solve_table(result)
    outputs = [_emit(out_dir, "walksat", header, rows, cfg)]
    if result.solved:
        print(f"satisfied in {result.steps} flips")
        print("assignment: " + " ".join(map(str, result.assignment)))
        return outputs, [], EXIT_OK
    print(f"budget of {cfg['budget']} flips exhausted without a solution", file=sys.stderr)
    return outputs, [], EXIT_BUDGET


def cmd_bandit(cfg: dict, out_dir: Path):
    model = build_nanodm(NanoDmConfig(
        coupling_ps=cfg["coupling_ps"], relax_ps=cfg["relax_ps"],
        m1_lifetime_ps=cfg["m1_lifetime_ps"], l1_lifetime_ps=cfg["l1_lifetime_ps"],
        integrator=_integrator(cfg),
    ))
    machines = SlotMachines(p_a=cfg["pa"], p_b=cfg["pb"])
    comparison = compare(
        model, [machines], plays=cfg["plays"], samples=cfg["samples"],
        d=cfg["d"], beta_grid=cfg["beta_grid"], seed=cfg["seed"],
    )[0]
    h1, r1 = efficiency_table(comparison)
    h2, r2 = selection_table(model)
    outputs = [
        _emit(out_dir, "efficiency", h1, r1, cfg),
        _emit(out_dir, "selection", h2, r2, cfg),
    ]
    figures = []
    if cfg["figures"]:
        figures.append(Path(efficiency_figure(comparison, out_dir / "efficiency.png")).name)
        figures.append(Path(selection_figure(model, out_dir / "selection.png")).name)
    print(f"bandit: nanodm {comparison.nanodm.final_rate:.4f} vs softmax "
          f"{comparison.softmax.final_rate:.4f} (beta {comparison.beta:g}) "
          f"after {cfg['plays']} plays")
    return outputs, figures, EXIT_OK


def _collect_instances(paths) -> list:
    files = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            files.extend(sorted(path.glob("*.cnf")))
        elif path.exists():
            files.append(path)
        else:
            raise OSError(f"no such file or directory: {path}")
    if not files:
        raise OSError("no .cnf instances found under the given paths")
    return [(path.stem, load_dimacs(path)) for path in files]


def cmd_bench(cfg: dict, out_dir: Path):
    instances = _collect_instances(cfg["paths"])
    rows = benchmark(instances, trials=cfg["trials"], budget=cfg["budget"],
                     p=cfg["p"], seed=cfg["seed"], solvers=cfg["solvers"])
    header, table = bench_table(rows)
    outputs = [_emit(out_dir, "bench", header, table, cfg)]
    figures = []
    if cfg["figures"]:
        figures.append(Path(bench_figure(rows, out_dir / "bench.png")).name)
    for row in rows:
        print(f"{row.instance} {row.solver}: success {row.success_rate:.2f}, "
              f"mean {row.mean_steps:.1f} steps")
    return outputs, figures, EXIT_OK


COMMANDS = {
    "profile": cmd_profile,
    "nor": cmd_nor,
    "sat": cmd_sat,
    "walksat": cmd_walksat,
    "bandit": cmd_bandit,
    "bench": cmd_bench,
}

# Input paths are pinned absolute in manifests so a rerun is location-free.
PATH_KEYS = ("path", "paths")


def write_manifest(out_dir: Path, command: str, cfg: dict, outputs, figures) -> Path:
    manifest = {
        "subcommand": command,
        "version": __version__,
        "seed": cfg["seed"],
        "config": {s.key: s.text(cfg[s.key]) for s in SETTINGS[command]
                   if cfg[s.key] is not None},
        "outputs": list(outputs),
        "figures": list(figures),
    }
    path = out_dir / f"{command}-manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return path


def _pin_paths(cfg: dict) -> dict:
    for key in PATH_KEYS:
        if key in cfg and cfg[key] is not None:
            value = cfg[key]
            if isinstance(value, tuple):
                cfg[key] = tuple(str(Path(p).resolve()) for p in value)
            else:
                cfg[key] = str(Path(value).resolve())
    return cfg


def _run(command: str, cfg: dict, out_dir: Path) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs, figures, status = COMMANDS[command](cfg, out_dir)
    manifest = write_manifest(out_dir, command, cfg, outputs, figures)
    print(f"wrote {', '.join([*outputs, *figures, manifest.name])} in {out_dir}")
    return status


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "rerun":
        try:
            with open(args.manifest, "r", encoding="utf-8") as fh:
                manifest = json.load(fh)
            command = manifest["subcommand"]
            settings = SETTINGS[command]
            empty = argparse.Namespace()
            cfg = resolve_settings(settings, empty, manifest["config"])
        except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
            print(f"qdnet: cannot replay manifest: {exc}", file=sys.stderr)
            return EXIT_INPUT
        try:
            return _run(command, cfg, Path(args.out))
        except OSError as exc:
            print(f"qdnet: {exc}", file=sys.stderr)
            return EXIT_INPUT

    try:
        file_config = read_config(args.config) if args.config else {}
    except (OSError, ValueError) as exc:
        print(f"qdnet: bad config file: {exc}", file=sys.stderr)
        return EXIT_INPUT

    try:
        cfg = _pin_paths(resolve_settings(SETTINGS[args.command], args, file_config))
    except ValueError as exc:
        print(f"qdnet: invalid settings: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        return _run(args.command, cfg, Path(args.out))
    except (OSError, DimacsError) as exc:
        print(f"qdnet: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"qdnet: invalid settings: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
