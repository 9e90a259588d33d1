"""``berrygyro`` command-line entry point.

Exit status: 0 on success, 2 for configuration errors (nothing written),
3 for numerical failures (nothing written).
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
import time

import numpy as np

from .. import __version__
from ..errors import BerryGyroError
from . import commands
from .config import ConfigError, load, preset
from .output import write_outputs

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
THREADS_ENV = "BERRYGYRO_THREADS"

log = logging.getLogger("berrygyro")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="berrygyro", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=[*commands.COMMANDS, "reproduce"])
    p.add_argument("--config", help="TOML run configuration (optional for reproduce)")
    p.add_argument("--out", help="output directory (default: [output].directory)")
    p.add_argument("--cd", choices=("on", "off"), default="on", help="counter-diabatic term for dynamics")
    p.add_argument("--figure", choices=sorted(commands.FIGURES), help="figure preset for reproduce")
    p.add_argument("--threads", type=int, help=f"worker threads (default ${THREADS_ENV} or 1)")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def _threads(arg: int | None) -> int:
    if arg is None:
        env = os.environ.get(THREADS_ENV, "1")
        try:
            arg = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV}={env!r} is not an integer") from None
    if arg < 1:
        raise ConfigError("--threads must be >= 1")
    return arg


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        workers = _threads(args.threads)
        if args.command == "reproduce":
            if args.figure is None:
                raise ConfigError("reproduce needs --figure")
            override = load(args.config) if args.config else None
            base = override.output.directory if override else "berrygyro-out"
            out_dir = args.out or os.path.join(base, f"fig{args.figure}")
            names = sorted({name for name, *_ in commands.FIGURES[args.figure]})
            echo = {"figure": args.figure, "presets": {}}
            for name in names:
                cfg = preset(name)
                if override is not None:
                    cfg = dataclasses.replace(cfg, sweep=override.sweep, grid=override.grid,
                                              noise=override.noise)
                echo["presets"][name] = cfg.to_dict()
            formats = ("csv", "json")
            job = lambda: commands.reproduce(args.figure, override, workers)  # noqa: E731
        else:
            if args.config is None:
                raise ConfigError(f"{args.command} needs --config")
            cfg = load(args.config)
            out_dir = args.out or cfg.output.directory
            echo = cfg.to_dict()
            if args.command == "dynamics":
                echo["cd"] = args.cd
            formats = cfg.output.formats
            fn = commands.COMMANDS[args.command]
            opts = {"include_cd": args.cd == "on"} if args.command == "dynamics" else {}
            job = lambda: fn(cfg, workers=workers, **opts)  # noqa: E731
    except ConfigError as exc:
        print(f"berrygyro: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    start = time.perf_counter()
    try:
        outputs, grid = job()
    except (BerryGyroError, OverflowError, np.linalg.LinAlgError) as exc:
        print(f"berrygyro: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    wall = time.perf_counter() - start
    checksums = write_outputs(out_dir, outputs, command=args.command, config=echo,
                              formats=formats, grid=grid, wall_clock_s=wall)
    for fname in sorted(checksums):
        print(os.path.join(out_dir, fname))
    return EXIT_OK


def main() -> None:
    sys.exit(run())
