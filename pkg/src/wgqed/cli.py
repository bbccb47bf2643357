"""Command-line entry point and the line-oriented config format.

A config file is plain text: one optional ``experiment KIND`` line, then
bracketed sections of ``key value [value ...]`` pairs.  ``#`` starts a
comment.  Example::

    experiment two_qubit_distance_sweep

    [model]
    kind gapless_chain
    length 125.66370614359172
    modes 800
    coupling 0.04

    [qubits]
    gaps 1.0 1.0
    positions 0.0

    [sweep]
    variable separation
    start 1.0
    stop 12.0
    samples 48

    [numerics]
    rtol 1e-9

    [output]
    directory out/sweep

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments import (
    EXPERIMENT_KINDS,
    ConfigError,
    ExperimentConfig,
    compare_schemes,
    run,
)

_LIST_KEYS = {"gaps", "positions", "modes_list", "bandwidth_list"}
_SECTIONS = ("model", "qubits", "sweep", "numerics", "output")


def parse_config(text: str, path: str = "<config>") -> ExperimentConfig:
    """Parse the structured text; errors carry the offending line number."""
    kind = None
    sections: dict[str, dict] = {name: {} for name in _SECTIONS}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in sections:
                raise ConfigError(f"{path}:{lineno}: unknown section [{name}]")
            current = name
            continue
        parts = line.split()
        if current is None:
            if parts[0] == "experiment" and len(parts) == 2:
                kind = parts[1]
                continue
            raise ConfigError(
                f"{path}:{lineno}: expected 'experiment KIND' or a [section] header"
            )
        key, values = parts[0], parts[1:]
        if not values:
            raise ConfigError(f"{path}:{lineno}: key '{key}' has no value")
        if key in _LIST_KEYS:
            sections[current][key] = values
        else:
            if len(values) != 1:
                raise ConfigError(f"{path}:{lineno}: key '{key}' takes a single value")
            sections[current][key] = values[0]
    outdir = Path(sections["output"].get("directory", "out"))
    return ExperimentConfig(
        kind=kind or "",
        model=sections["model"],
        qubits=sections["qubits"],
        sweep=sections["sweep"],
        numerics=sections["numerics"],
        outdir=outdir,
        raw_text=text,
    )


def load_config(path: Path) -> ExperimentConfig:
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))


def _add_common(sub):
    sub.add_argument("--config", required=True, type=Path, help="experiment config file")
    sub.add_argument("--out", type=Path, default=None, help="override the output directory")
    sub.add_argument("--threads", type=int, default=1, help="sweep-point worker count")
    sub.add_argument("--seed", type=int, default=0, help="reserved; no randomness yet")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wgqed",
        description="Photon-mediated qubit interactions in 1D media: experiment runner.",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for kind in EXPERIMENT_KINDS:
        sub = subs.add_parser(kind.replace("_", "-"), help=f"run a {kind} experiment")
        _add_common(sub)
    sub = subs.add_parser(
        "compare-schemes", help="error of each renormalization scheme against dynamics"
    )
    _add_common(sub)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    command = args.command.replace("-", "_")
    try:
        cfg = load_config(args.config)
        if command != "compare_schemes":
            if cfg.kind and cfg.kind != command:
                raise ConfigError(
                    f"config declares experiment '{cfg.kind}' but the subcommand "
                    f"is '{command}'"
                )
            cfg.kind = command
        elif not cfg.kind:
            raise ConfigError("compare-schemes needs an 'experiment' line in the config")
        if args.out is not None:
            cfg.outdir = args.out
        if command == "compare_schemes":
            compare_schemes(cfg, threads=args.threads)
        else:
            run(cfg, threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, ValueError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
