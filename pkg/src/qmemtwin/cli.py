"""Command-line front end.

Exit codes: 0 success, 1 internal error, 2 configuration or compatibility
error. Data goes to ``--out`` (with a ``.manifest.json`` next to it) or to
standard output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import (
    FidelityConfig,
    MemoryChoice,
    MziConfig,
    TokenConfig,
    DETECTOR_KAPPA,
    DETECTOR_NB,
    run_fidelity_sweep,
    run_mzi,
    run_token,
    run_truncation_sweep,
)
from .io import FORMATS, render, write_output
from .memory import (
    IncompatibleModeError,
    TestParameters,
    UnknownMemoryError,
    load_memory_file,
    load_registry,
    registry_lookup,
)

_UNITS = {"wavelength": "nm", "bandwidth": "Hz", "lifetime": "s", "retrigger_time": "s"}


class ConfigError(Exception):
    """Bad user input; reported with exit code 2."""


def parse_sweep(text: str) -> list:
    """Parse ``value`` or ``start:stop:n[:log]`` into a list of floats."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) in (3, 4):
            start, stop, n = float(parts[0]), float(parts[1]), int(parts[2])
            if n < 1:
                raise ValueError
            if len(parts) == 4:
                if parts[3] != "log":
                    raise ValueError
                if start <= 0 or stop <= 0:
                    raise ConfigError(f"log sweep needs positive bounds: {text!r}")
                return [float(v) for v in np.geomspace(start, stop, n)]
            return [float(v) for v in np.linspace(start, stop, n)]
    except ValueError:
        pass
    raise ConfigError(f"bad sweep {text!r}; expected value or start:stop:n[:log]")


def parse_int_range(text: str) -> list:
    """``lo:hi`` inclusive, or a comma list of integers."""
    try:
        if ":" in text:
            lo, hi = (int(p) for p in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(p) for p in text.split(",")]
    except ValueError:
        raise ConfigError(f"bad integer range {text!r}") from None


def parse_input(text: str) -> tuple:
    """``single`` or ``coherent:<alpha>`` into ``(kind, alpha)``."""
    if text == "single":
        return "single_photon", 0.0
    if text.startswith("coherent:"):
        try:
            return "coherent", float(text.split(":", 1)[1])
        except ValueError:
            pass
    raise ConfigError(f"bad input {text!r}; expected single or coherent:<alpha>")


def _resolve_memory(args):
    """Return ``(memory choice or None, registry)`` from --memory / --memory-file."""
    if args.memory_file:
        registry, test = load_memory_file(args.memory_file)
    else:
        registry, test = load_registry(), None
    name = args.memory
    if name == "none":
        return None, registry
    if name == "Test":
        return MemoryChoice("Test", test or TestParameters()), registry
    registry_lookup(name, registry)
    return MemoryChoice(name), registry


# --- subcommands ----------------------------------------------------------------


def cmd_registry(args):
    registry = load_memory_file(args.memory_file)[0] if args.memory_file else load_registry()
    if args.action == "list":
        return "".join(f"{name}\n" for name in registry), None
    if not args.name:
        raise ConfigError("registry show needs a class name")
    spec = registry_lookup(args.name, registry)
    lines = []
    for key, value in spec.to_dict().items():
        unit = _UNITS.get(key, "")
        text = repr(value) if isinstance(value, float) else str(value)
        lines.append(f"{key:20s} {text:>14} {unit}".rstrip() + "\n")
    lines.append(f"{'eta_trans':20s} {spec.eta_trans!r:>14}\n")
    return "".join(lines), None


def cmd_mzi(args):
    kind, alpha = parse_input(args.input)
    choice, registry = _resolve_memory(args)
    if choice is None:
        raise ConfigError("the MZI needs a memory")
    if args.phases < 1:
        raise ConfigError("--phases must be at least 1")
    cfg = MziConfig(kind, alpha, choice, args.storage_time, tuple(np.linspace(0, 2 * np.pi, args.phases)),
                    args.trunc, not args.no_recombine, args.input_wavelength, args.input_bandwidth,
                    args.input_polarization)
    records = run_mzi(cfg, registry)
    if records[0].flags["truncation_warning"]:
        print(f"warning: coherent input tail mass {records[0].observables['tail_mass']:.3g} "
              f"exceeds 1e-06 at truncation {args.trunc}", file=sys.stderr)
    cols = ["phi", "n_A", "n_B", "oracle_n_A", "abs_err"]
    rows = [{c: r.row()[c] for c in cols} for r in records]
    obs = records[0].observables
    rows.append({"phi": "visibility", "n_A": obs["visibility"], "oracle_n_A": obs["oracle_visibility"],
                 "abs_err": abs(obs["visibility"] - obs["oracle_visibility"])})
    return rows, cols


def cmd_token(args):
    choice, registry = _resolve_memory(args)
    mus, times = parse_sweep(args.mu_emission), parse_sweep(args.storage_time)
    cfg = TokenConfig(choice, times[0], mus[0], args.detector_kappa, args.detector_nb, args.trunc)
    records = run_token(cfg, mus, times, registry)
    cols = ["memory", "mu_emission", "storage_time", "c0", "c1", "c_zz", "c_xx", "c", "above_threshold"]
    if choice is not None:
        cols.append("exceeds_retrigger")
    return [{c: r.row()[c] for c in cols} for r in records], cols


def cmd_truncation(args):
    kind, alpha = parse_input(args.input)
    choice, registry = _resolve_memory(args)
    if choice is None:
        raise ConfigError("the truncation study needs a memory")
    truncs = parse_int_range(args.trunc_range)
    records = run_truncation_sweep(choice, kind, truncs, alpha if kind == "coherent" else 0.0,
                                   args.storage_time, registry)
    cols = ["memory", "input", "truncation", "n_late", "delta", "converged", "converged_at"]
    return [{c: r.row()[c] for c in cols} for r in records], cols


def cmd_fidelity(args):
    kind, alpha = parse_input(args.input)
    registry = load_memory_file(args.memory_file)[0] if args.memory_file else load_registry()
    memories = tuple(args.memories.split(",")) if args.memories else None
    for name in memories or ():
        registry_lookup(name, registry)
    cfg = FidelityConfig(args.study, kind, alpha if kind == "coherent" else 1.0,
                         tuple(parse_sweep(args.grid)), args.kappa, args.trunc, memories)
    records = run_fidelity_sweep([cfg], registry)
    rows = [r.row() for r in records]
    return rows, list(rows[0]) if rows else None


# --- argument parsing -------------------------------------------------------------


def _output_flags(p):
    p.add_argument("--out", help="data file; a .manifest.json is written next to it")
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--memory-file", help="registry-format file with extra memories or a Test record")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmemtwin", description="Quantum memory digital twin")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("registry", help="list or show registry memories")
    p.add_argument("action", choices=("list", "show"))
    p.add_argument("name", nargs="?")
    p.add_argument("--memory-file")

    p = sub.add_parser("mzi", help="memory-in-one-arm interferometer fringe")
    p.add_argument("--memory", default="Lambda895")
    p.add_argument("--storage-time", type=float, default=0.0)
    p.add_argument("--input", default="single", help="single or coherent:<alpha>")
    p.add_argument("--trunc", type=int, default=3)
    p.add_argument("--phases", type=int, default=41)
    p.add_argument("--no-recombine", action="store_true")
    p.add_argument("--input-wavelength", type=float, help="nm; default matches the memory")
    p.add_argument("--input-bandwidth", type=float, default=0.0, help="Hz")
    p.add_argument("--input-polarization", help="default is the memory's first accepted one")
    _output_flags(p)

    p = sub.add_parser("token", help="quantum token correctness")
    p.add_argument("--memory", default="Lambda895", help="class name, Test, or none")
    p.add_argument("--mu-emission", default="1", help="value or start:stop:n[:log]")
    p.add_argument("--storage-time", default="0", help="value or start:stop:n[:log]")
    p.add_argument("--trunc", type=int, default=3)
    p.add_argument("--detector-kappa", type=float, default=DETECTOR_KAPPA)
    p.add_argument("--detector-nb", type=float, default=DETECTOR_NB)
    _output_flags(p)

    p = sub.add_parser("truncation", help="late-bin photon number against truncation")
    p.add_argument("--memory", default="Lambda895")
    p.add_argument("--input", default="single", help="single or coherent:<alpha>")
    p.add_argument("--trunc-range", default="1:8", help="lo:hi or comma list")
    p.add_argument("--storage-time", type=float, default=0.0)
    _output_flags(p)

    p = sub.add_parser("fidelity", help="fidelity studies")
    p.add_argument("--study", choices=("efficiency", "noise", "registry"), default="registry")
    p.add_argument("--input", default="coherent:1", help="single or coherent:<alpha>")
    p.add_argument("--grid", default="0:1:101", help="eta_int or n_bar_B sweep")
    p.add_argument("--kappa", type=float, default=0.5)
    p.add_argument("--trunc", type=int, default=5)
    p.add_argument("--memories", help="comma list for the registry study (default: all)")
    _output_flags(p)

    p = sub.add_parser("replay", help="re-run the configuration stored in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", help="override the recorded data path")
    return parser


COMMANDS = {
    "registry": cmd_registry,
    "mzi": cmd_mzi,
    "token": cmd_token,
    "truncation": cmd_truncation,
    "fidelity": cmd_fidelity,
}


def _manifest(args, out: Path) -> dict:
    config = {k: v for k, v in vars(args).items() if k != "out"}
    return {"tool": "qmemtwin", "version": __version__, "subcommand": args.command, "config": config,
            "outputs": {"data": str(out), "manifest": str(out) + ".manifest.json"}}


def _replay_args(manifest_file: str, out: str | None):
    manifest = json.loads(Path(manifest_file).read_text())
    args = argparse.Namespace(**manifest["config"])
    if args.command not in COMMANDS:
        raise ConfigError(f"manifest names unknown subcommand {args.command!r}")
    args.out = out or manifest["outputs"]["data"]
    return args


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            args = _replay_args(args.manifest, args.out)
        data, columns = COMMANDS[args.command](args)
        text = data if isinstance(data, str) else render(data, args.format, columns)
        out = getattr(args, "out", None)
        if out:
            write_output(text, out, _manifest(args, Path(out)))
        else:
            sys.stdout.write(text)
        return 0
    except (ConfigError, UnknownMemoryError, IncompatibleModeError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - reported, not hidden
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
