"""Command-line entry point.

Subcommands and their tabular outputs:

=================== ==================================================
wire-spectrum       index, energy (full BdG spectrum, ascending)
phase-diagram       mu, vx, gap, is_topological
majorana-splitting  length, splitting (fit of xi and R^2 in metadata)
flux-potential      phi1, phi2, potential (U / E_J on a square grid)
flux-splitting      q_ext, delta_even, delta_odd (signed splittings)
bell-stats          mu, count, frequency, born_probability
entangle, teleport  protocol trace (JSON by default)
=================== ==================================================

Exit codes: 0 success, 1 validation failure, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, bus_protocol, qsim
from .config import EXPERIMENTS, PROTOCOL_EXPERIMENTS, ConfigError, RunConfig, parse_config
from .flux_qubit import (
    ChargeConfiguration,
    NoDoubleWellError,
    find_minima,
    flux_qubit_splitting,
    potential_landscape,
    wkb_tunneling_amplitude,
)
from .io import Table, table_to_csv, table_to_json, trace_to_csv, trace_to_json
from .wire_model import (
    TrivialPhaseError,
    build_bdg_hamiltonian,
    coherence_length_fit,
    diagonalize,
    phase_diagram_scan,
    zero_mode_splitting_vs_length,
)

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def _linspace(r: dict) -> np.ndarray:
    return np.linspace(r["start"], r["stop"], r["num"])


def _wire_spectrum(cfg: RunConfig):
    spec = diagonalize(build_bdg_hamiltonian(cfg.wire))
    rows = [[k, float(e)] for k, e in enumerate(spec.eigenvalues)]
    result = {
        "gap": spec.gap,
        "zero_mode_splitting": spec.zero_mode_splitting,
        "zero_mode_ratio": spec.zero_mode_ratio,
        "has_zero_modes": spec.has_zero_modes,
    }
    return Table(["index", "energy"], rows), result


def _phase_diagram(cfg: RunConfig):
    pts = phase_diagram_scan(cfg.wire, _linspace(cfg.options["mu"]), _linspace(cfg.options["zeeman"]))
    rows = [[q.mu, q.zeeman, q.gap, q.is_topological] for q in pts]
    return Table(["mu", "vx", "gap", "is_topological"], rows), {}


def _majorana_splitting(cfg: RunConfig):
    samples = zero_mode_splitting_vs_length(cfg.wire, cfg.options["lengths"])
    result = {}
    if len(samples) >= 3:
        fit = coherence_length_fit(samples)
        result = {"xi": fit.xi, "r_squared": fit.r_squared, "prefactor": fit.prefactor}
    return Table(["length", "splitting"], [[L, e] for L, e in samples]), result


def _flux_potential(cfg: RunConfig):
    axis, _, grid = potential_landscape(cfg.flux, cfg.options["grid"])
    rows = [[float(a), float(b), float(grid[i, j])] for i, a in enumerate(axis) for j, b in enumerate(axis)]
    result = {}
    if cfg.flux.has_double_well and abs(cfg.flux.flux - 0.5) < 1e-12:
        m = find_minima(cfg.flux)
        result = {"phi_star": m.phi_star, "minima": [list(m.first), list(m.second)]}
    return Table(["phi1", "phi2", "potential"], rows), result


def _flux_splitting(cfg: RunConfig):
    t = wkb_tunneling_amplitude(cfg.flux)
    rows = []
    for q in _linspace(cfg.options["q_ext"]):
        q = float(q)
        rows.append([
            q,
            flux_qubit_splitting(t, ChargeConfiguration(0, q)),
            flux_qubit_splitting(t, ChargeConfiguration(1, q)),
        ])
    result = {"delta0": t.delta0, "action": t.action, "phi_star": t.phi_star}
    return Table(["q_ext", "delta_even", "delta_odd"], rows), result


def _bell_stats(cfg: RunConfig):
    d = bus_protocol.default_layout(cfg.flux)
    f = d.interferometer(cfg.options["flux_id"])
    amps = [(1.0, 0.0)] * d.num_qubits
    for q, st in zip(f.pair, cfg.options["state"]):
        amps[q] = st
    n = cfg.options["samples"]
    counts, born = bus_protocol.bell_statistics(d, f.flux_id, qsim.init_product_state(amps), n, cfg.seed)
    rows = [[mu, int(counts[mu]), counts[mu] / n, float(born[mu])] for mu in range(4)]
    return Table(["mu", "count", "frequency", "born_probability"], rows), {"pair": list(f.pair)}


def _entangle(cfg: RunConfig):
    o = cfg.options
    d = bus_protocol.default_layout(cfg.flux)
    trace, _ = bus_protocol.entangle_pair(d, o["flux_id"], o["psi_t"], o["psi_c"], rng_seed=cfg.seed, q_ext=o["q_ext"])
    return trace


def _teleport(cfg: RunConfig):
    o = cfg.options
    d = bus_protocol.default_layout(cfg.flux)
    trace, _ = bus_protocol.teleport(d, o["source"], o["target"], o["input"], rng_seed=cfg.seed, resource=o["resource"])
    return trace


_TABLES = {
    "wire-spectrum": _wire_spectrum,
    "phase-diagram": _phase_diagram,
    "majorana-splitting": _majorana_splitting,
    "flux-potential": _flux_potential,
    "flux-splitting": _flux_splitting,
    "bell-stats": _bell_stats,
}
_TRACES = {"entangle": _entangle, "teleport": _teleport}


def _precheck(subcommand: str, cfg: RunConfig):
    needs_qubit = subcommand in ("flux-splitting", "entangle", "teleport", "bell-stats")
    if needs_qubit and not cfg.flux.has_double_well:
        raise ConfigError(f"flux.e_j2: E_J2/E_J = {cfg.flux.ratio:.6g} must exceed 1/2 for a double well", "flux.e_j2")
    if subcommand == "flux-splitting" and abs(cfg.flux.flux - 0.5) > 1e-12:
        raise ConfigError("flux.flux: the tunneling splitting is defined at the degeneracy point 0.5", "flux.flux")
    if subcommand in ("entangle", "bell-stats"):
        fid = cfg.options["flux_id"]
        if fid not in (1, 2, 3):
            raise ConfigError(f"{subcommand.replace('-', '_')}.flux_id: must be 1, 2 or 3", "flux_id")
    if subcommand == "teleport":
        for k in ("source", "target"):
            if cfg.options[k] not in (0, 1, 2, 3):
                raise ConfigError(f"teleport.{k}: must be a qubit index 0..3", f"teleport.{k}")


def execute(subcommand: str, cfg: RunConfig, fmt: str | None = None) -> str:
    """Run one experiment and return the serialized output text."""
    if subcommand not in EXPERIMENTS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    _precheck(subcommand, cfg)
    fmt = fmt or cfg.format or ("json" if subcommand in PROTOCOL_EXPERIMENTS else "csv")
    meta = {"tool": "topobus", "version": __version__, "experiment": subcommand, "seed": cfg.seed, "config": cfg.echo}
    if subcommand in _TRACES:
        trace = _TRACES[subcommand](cfg)
        return trace_to_json(trace, meta) if fmt == "json" else trace_to_csv(trace, meta)
    table, result = _TABLES[subcommand](cfg)
    table.metadata = {**meta, "result": result}
    return table_to_json(table) if fmt == "json" else table_to_csv(table)


def run(subcommand: str, config: RunConfig, out: str | None = None, fmt: str | None = None) -> int:
    """Execute and write to ``out`` (or the config's output, or stdout); returns the exit code."""
    try:
        text = execute(subcommand, config, fmt)
    except (ConfigError, NoDoubleWellError, TrivialPhaseError) as exc:
        print(f"topobus: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - the exit-code contract covers everything else
        print(f"topobus: {subcommand} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    target = out or config.output
    try:
        if target:
            Path(target).write_text(text, encoding="utf-8", newline="")
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"topobus: cannot write output: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="topobus", description="Majorana wire, flux-qubit readout and parity-protocol experiments.")
    ap.add_argument("--version", action="version", version=f"topobus {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    for name in EXPERIMENTS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", metavar="PATH", help="YAML configuration file")
        sp.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
        sp.add_argument("--seed", type=int, help="RNG seed, overrides the config")
        sp.add_argument("--format", choices=("csv", "json"), help="output format")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8") if args.config else ""
        cfg = parse_config(text, args.subcommand)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("seed: must be a non-negative integer", "seed")
            cfg = replace(cfg, seed=args.seed, echo={**cfg.echo, "seed": args.seed})
    except ConfigError as exc:
        print(f"topobus: invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"topobus: cannot read config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(args.subcommand, cfg, args.out, args.format)


if __name__ == "__main__":
    sys.exit(main())
