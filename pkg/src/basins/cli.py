"""Command-line front end: ``basins render|verify|solve|trace``.

Exit codes: 0 success, 1 domain error (one-line diagnostic on stderr),
2 usage error.  ``--seed-config FILE`` reads ``key = value`` lines with
the same names as the long flags (plus ``command``); flags given on the
command line override the file.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .errors import BasinsError, ConfigParse

TASKS = ("a-of-b", "b-of-a")
COMMANDS = ("render", "verify", "solve", "trace")


class UsageError(Exception):
    pass


def _viewport(text: str) -> tuple[float, float, float, float]:
    parts = text.split(",")
    if len(parts) != 4:
        raise ValueError(f"viewport needs 4 comma-separated numbers, got {text!r}")
    vp = tuple(float(p) for p in parts)
    if not (vp[0] < vp[1] and vp[2] < vp[3]):
        raise ValueError(f"degenerate viewport {text!r}")
    return vp


def _size(text: str) -> tuple[int, int]:
    w, sep, h = text.lower().partition("x")
    if not sep:
        raise ValueError(f"size must look like WxH, got {text!r}")
    return int(w), int(h)


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise ValueError(f"expected a positive integer, got {text!r}")
    return n


def _positive_float(text: str) -> float:
    x = float(text)
    if not x > 0 or not math.isfinite(x):
        raise ValueError(f"expected a positive number, got {text!r}")
    return x


def _task(text: str) -> str:
    if text not in TASKS:
        raise ValueError(f"task must be one of {', '.join(TASKS)}")
    return text


# flag name -> (converter, commands that accept it); global flags use None
OPTIONS = {
    "workers": (_positive_int, None),
    "entry": (str, ("render", "verify", "trace")),
    "preset": (str, ("render", "trace")),
    "b": (float, ("render", "verify", "solve", "trace")),
    "a": (float, ("solve",)),
    "alpha": (float, ("render", "verify", "trace")),
    "ratio": (float, ("render", "verify", "trace")),
    "viewport": (_viewport, ("render", "trace")),
    "size": (_size, ("render", "trace")),
    "max-iter": (_positive_int, ("render", "verify", "trace")),
    "tile-size": (_positive_int, ("render", "trace")),
    "out": (str, ("render", "trace")),
    "report": (str, ("verify",)),
    "task": (_task, ("solve",)),
    "digits": (_positive_int, ("solve",)),
    "image": (str, ("trace",)),
    "tol": (_positive_float, ("trace",)),
    "radius": (_positive_float, ("trace",)),
}


@dataclass(frozen=True)
class Command:
    """A validated subcommand with its options (keys use underscores)."""

    name: str | None
    options: dict = field(default_factory=dict)


def _key(name: str) -> str:
    return name.replace("-", "_")


def _convert(name: str, text: str):
    conv = OPTIONS[name][0]
    try:
        return conv(text)
    except ValueError as exc:
        raise ValueError(f"--{name}: {exc}") from None


def load_config(path) -> Command:
    """Parse a UTF-8 ``key = value`` file; '#' starts a comment."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigParse(f"cannot read config {path}: {exc}", line=0) from exc
    name, opts = None, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().replace("_", "-"), value.strip()
        if not sep or not key:
            raise ConfigParse("expected key = value", line=lineno)
        if key == "command":
            if value not in COMMANDS:
                raise ConfigParse(f"unknown command {value!r}", line=lineno)
            name = value
            continue
        if key not in OPTIONS:
            raise ConfigParse(f"unknown key {key!r}", line=lineno)
        try:
            opts[_key(key)] = _convert(key, value)
        except ValueError as exc:
            raise ConfigParse(str(exc), line=lineno) from None
    return Command(name, opts)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--workers", default=argparse.SUPPRESS)
    common.add_argument("--seed-config", dest="seed_config", default=argparse.SUPPRESS)
    top = _Parser(prog="basins", description="Basins of attraction for meromorphic maps.", parents=[common])
    top.add_argument("--version", action="version", version=f"basins {__version__}")
    # the subcommand may come from the config, so options are accepted here too
    for name, (_, cmds) in OPTIONS.items():
        if cmds:
            top.add_argument(f"--{name}", dest=_key(name), default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    sub = top.add_subparsers(dest="command", parser_class=_Parser)
    helps = {
        "render": "classify a pixel grid and write a PPM plus metadata",
        "verify": "report constants, fixed points, singular-value fates and petals",
        "solve": "solve the a-b pairing of the first example",
        "trace": "trace the basin boundary of an image",
    }
    for cmd in COMMANDS:
        p = sub.add_parser(cmd, help=helps[cmd], parents=[common])
        for name, (_, cmds) in OPTIONS.items():
            if cmds and cmd in cmds:
                p.add_argument(f"--{name}", dest=_key(name), default=argparse.SUPPRESS)
    return top


def _join_values(argv: list[str]) -> list[str]:
    # "--viewport -100,300,..." would be read as a flag; bind values explicitly
    flags = {f"--{n}" for n in OPTIONS} | {"--seed-config"}
    out, k = [], 0
    while k < len(argv):
        tok = argv[k]
        if tok in flags and k + 1 < len(argv):
            out.append(f"{tok}={argv[k + 1]}")
            k += 2
        else:
            out.append(tok)
            k += 1
    return out


def _preset_fields(opts: dict) -> dict:
    from .render import PRESETS

    name = opts.get("preset")
    if name is None:
        return {}
    if name not in PRESETS:
        raise UsageError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return PRESETS[name]


def _job_from_options(opts: dict):
    from .catalog import ENTRY_IDS
    from .render import RenderJob

    base = _preset_fields(opts)
    entry = opts.get("entry", base.get("entry"))
    if entry is None:
        raise UsageError("--entry or --preset is required")
    if entry not in ENTRY_IDS:
        raise UsageError(f"unknown entry {entry!r}; choose from {', '.join(ENTRY_IDS)}")
    params = dict(base.get("params", {})) if entry == base.get("entry") else {}
    for k in ("b", "alpha", "ratio"):
        if k in opts:
            params[k] = opts[k]
    kw = {"entry": entry, "params": params}
    if "viewport" in opts or "viewport" in base:
        kw["viewport"] = opts.get("viewport", base.get("viewport"))
    if "size" in opts:
        kw["width"], kw["height"] = opts["size"]
    elif "width" in base:
        kw["width"], kw["height"] = base["width"], base["height"]
    for k in ("max_iter", "tile_size"):
        if k in opts:
            kw[k] = opts[k]
    try:
        return RenderJob(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def build_command(argv: list[str]) -> Command:
    """Parse and validate ``argv`` (config merged in) without computing anything."""
    ns = vars(_parser().parse_args(_join_values(list(argv))))
    cli_name = ns.pop("command", None)
    config = ns.pop("seed_config", None)
    seeded = load_config(config) if config else Command(None)
    name = cli_name or seeded.name
    if name is None:
        raise UsageError("no subcommand given")
    opts = dict(seeded.options)
    for k, v in ns.items():
        try:
            opts[k] = _convert(k.replace("_", "-"), v)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    for k in opts:
        cmds = OPTIONS[k.replace("_", "-")][1]
        if cmds is not None and name not in cmds:
            raise UsageError(f"option --{k.replace('_', '-')} does not apply to {name}")
    opts.setdefault("workers", int(os.environ.get("BASINS_WORKERS", "1")))

    if name == "render":
        if "out" not in opts:
            raise UsageError("render needs --out")
        opts["job"] = _job_from_options(opts)
    elif name == "verify":
        if "entry" not in opts:
            raise UsageError("verify needs --entry")
        from .catalog import ENTRY_IDS

        if opts["entry"] not in ENTRY_IDS:
            raise UsageError(f"unknown entry {opts['entry']!r}; choose from {', '.join(ENTRY_IDS)}")
        opts.setdefault("max_iter", 5000)
    elif name == "solve":
        task = opts.get("task")
        if task is None:
            raise UsageError("solve needs --task a-of-b or --task b-of-a")
        need = "b" if task == "a-of-b" else "a"
        if need not in opts:
            raise UsageError(f"--task {task} needs --{need}")
        opts.setdefault("digits", 8)
    elif name == "trace":
        if "tol" not in opts or "out" not in opts:
            raise UsageError("trace needs --tol and --out")
        if "image" not in opts:
            opts["job"] = _job_from_options(opts)
    return Command(name, opts)


# ---------------------------------------------------------------------------
# Subcommands


def truncate(x: float, digits: int) -> str:
    """``x`` cut (not rounded) to ``digits`` significant digits."""
    if x == 0 or not math.isfinite(x):
        return repr(x)
    d = digits - 1 - math.floor(math.log10(abs(x)))
    scale = 10.0**d
    y = math.trunc(x * scale) / scale
    return f"{y:.{max(d, 0)}f}"


def _cmd_render(cmd: Command, out) -> None:
    from .render import render, write_image

    img = render(cmd.options["job"], workers=cmd.options["workers"])
    write_image(img, cmd.options["out"])
    print(f"wrote {cmd.options['out']} ({img.width}x{img.height}, unresolved {img.unresolved_fraction():.4%})", file=out)


def _cmd_solve(cmd: Command, out) -> None:
    from .catalog import solve_a, solve_b

    o = cmd.options
    x = solve_a(o["b"]) if o["task"] == "a-of-b" else solve_b(o["a"])
    print(truncate(x, o["digits"]), file=out)


def _cmd_trace(cmd: Command, out) -> None:
    from .diagnostics import smallest_containment_T, trace_boundary, turning_constant, write_boundary
    from .errors import TooFewPoints
    from .render import read_image, render

    o = cmd.options
    img = read_image(o["image"]) if "image" in o else render(o["job"], workers=o["workers"])
    curve = trace_boundary(img, o["tol"])
    write_boundary(curve, o["out"])
    lines = [
        f"wrote {o['out']}",
        f"basin_pair: {curve.basin_pair[0]} {curve.basin_pair[1]}",
        f"chains: {len(curve.chains)}",
        f"points: {len(curve.all_points)}",
        f"coarse_points: {curve.n_coarse}",
        f"ambiguous_cells: {curve.ambiguous_cells}",
        f"containment_T: {smallest_containment_T(curve)}",
    ]
    if "radius" in o:
        for metric in ("euclidean", "chordal"):
            try:
                rep = turning_constant(curve, o["radius"], metric)
                lines.append(f"turning_constant[{metric}, R={o['radius']!r}]: {rep.constant!r}")
            except TooFewPoints as exc:
                lines.append(f"turning_constant[{metric}, R={o['radius']!r}]: n/a ({exc})")
    print("\n".join(lines), file=out)


def _cmd_verify(cmd: Command, out) -> None:
    from .report import verify_report

    o = cmd.options
    params = {k: o[k] for k in ("b", "alpha", "ratio") if k in o}
    text = verify_report(o["entry"], params, max_iter=o["max_iter"])
    if "report" in o:
        try:
            with open(o["report"], "a", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write report {o['report']}: {exc}") from exc
    out.write(text)


def run(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cmd = build_command(argv)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (UsageError, ConfigParse) as exc:
        print(f"usage error: {exc}", file=err)
        return 2
    handler = {"render": _cmd_render, "verify": _cmd_verify, "solve": _cmd_solve, "trace": _cmd_trace}[cmd.name]
    try:
        handler(cmd, out)
    except (BasinsError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=err)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


__all__ = ["Command", "build_command", "load_config", "main", "run", "truncate"]
