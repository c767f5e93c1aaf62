"""Readers and writers for every file the pipeline exchanges.

All files are plain text and start with ``# format: <name> v1``.  Floats
are written with ``repr`` (shortest exact round trip) except in model files,
which use 17 significant digits.  Writes go to a temporary file in the
target directory that is then renamed over the destination.

Formats
-------
profile   ``# vx=<f> vy=<f> wz=<f> duration=<f> repeats=<n>``, then the column
          header ``t,w1,w2,w3,w4`` and numeric rows.  Files named
          ``x=<vx>y=<vy>z=<wz>secs=<d>.csv`` may omit the metadata line.
script    column header ``duration,vx,vy,wz`` and rows.
trace     column header ``t,x,y,theta,vx,vy,wz,w1,w2,w3,w4`` and rows.
config    ``key = value`` lines, ``#`` comments.
model     see :func:`write_model`.
"""
from __future__ import annotations

import logging
import math
import os
import re
import tempfile
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .calibrator import LAYER_DIMS, MlpWeights, ProfileRecording, TrainConfig, TrainResult
from .kinematics import RobotGeometry, Twist
from .simulator import TRACE_COLUMNS, CommandScript, OdometryTrace, SimConfig

log = logging.getLogger(__name__)

PROFILE_COLUMNS = ("t", "w1", "w2", "w3", "w4")
SCRIPT_COLUMNS = ("duration", "vx", "vy", "wz")
MODEL_FORMAT = "mecanum-scurve-model"


class FormatError(ValueError):
    """A file does not follow its declared format."""

    def __init__(self, path, line: int | None, message: str):
        self.path = str(path)
        self.line = line
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {message}")


class HeaderError(FormatError):
    pass


class ColumnCountError(FormatError):
    pass


class NonMonotoneTimeError(FormatError):
    pass


class EmptyDataError(FormatError):
    pass


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _fmt(x: float) -> str:
    return repr(float(x))


def _read_lines(path) -> list[str]:
    with open(path, "r") as fh:
        return fh.read().splitlines()


def _check_format_line(path, lines, name):
    if not lines or not lines[0].startswith("# format:"):
        raise HeaderError(path, 1, f"missing '# format: {name} v1' line")
    declared = lines[0][len("# format:"):].split()
    if len(declared) != 2 or declared[0] != name or declared[1] != "v1":
        raise HeaderError(path, 1, f"expected format '{name} v1', found {' '.join(declared)!r}")


def _parse_table(path, lines, start, columns):
    """Parse a CSV block whose first non-comment line is the column header."""
    i = start
    while i < len(lines) and (not lines[i].strip() or lines[i].lstrip().startswith("#")):
        i += 1
    if i >= len(lines):
        raise HeaderError(path, i + 1, f"missing column header {','.join(columns)!r}")
    got = tuple(c.strip() for c in lines[i].split(","))
    if got != tuple(columns):
        raise HeaderError(path, i + 1, f"expected columns {','.join(columns)!r}, found {lines[i]!r}")
    rows = []
    for j in range(i + 1, len(lines)):
        text = lines[j].strip()
        if not text or text.startswith("#"):
            continue
        cells = text.split(",")
        if len(cells) != len(columns):
            raise ColumnCountError(path, j + 1, f"expected {len(columns)} values, found {len(cells)}")
        try:
            row = [float(c) for c in cells]
        except ValueError as exc:
            raise FormatError(path, j + 1, f"non-numeric value ({exc})") from None
        if not all(math.isfinite(v) for v in row):
            raise FormatError(path, j + 1, "non-finite value")
        rows.append((j + 1, row))
    if not rows:
        raise EmptyDataError(path, len(lines), "no data rows")
    return rows


def _table_text(name, columns, rows, preamble=()):
    out = [f"# format: {name} v1", *preamble, ",".join(columns)]
    out += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(out) + "\n"


def _check_increasing(path, rows, col=0):
    for (_, prev), (line, row) in zip(rows, rows[1:]):
        if not row[col] > prev[col]:
            raise NonMonotoneTimeError(path, line, f"time {row[col]!r} does not exceed {prev[col]!r}")


# ----------------------------------------------------------------------------
# profiles

_META_RE = re.compile(r"^#\s*(.*=.*)$")
_NAME_RE = re.compile(
    r"^x=(?P<vx>[-+0-9.eE]+)y=(?P<vy>[-+0-9.eE]+)z=(?P<wz>[-+0-9.eE]+)secs=(?P<d>[-+0-9.eE]+?)(\.csv)?$"
)


def profile_filename(command: Twist, duration: float) -> str:
    return f"x={command.vx!r}y={command.vy!r}z={command.wz!r}secs={float(duration)!r}.csv"


def _parse_filename_meta(path):
    m = _NAME_RE.match(Path(path).name)
    if not m:
        return None
    try:
        return dict(vx=float(m["vx"]), vy=float(m["vy"]), wz=float(m["wz"]), duration=float(m["d"]))
    except ValueError:
        return None


def write_profile(path, rec: ProfileRecording) -> Path:
    c = rec.command
    meta = (f"# vx={_fmt(c.vx)} vy={_fmt(c.vy)} wz={_fmt(c.wz)} "
            f"duration={_fmt(rec.duration)} repeats={rec.repeat_count}")
    rows = np.column_stack([rec.times, rec.wheels])
    return atomic_write(path, _table_text("profile", PROFILE_COLUMNS, rows, [meta]))


def load_profile(path) -> ProfileRecording:
    lines = _read_lines(path)
    _check_format_line(path, lines, "profile")
    meta, meta_line = None, None
    for i, line in enumerate(lines[1:], start=2):
        if not line.startswith("#"):
            break
        m = _META_RE.match(line)
        if m:
            meta, meta_line = {}, i
            for token in m.group(1).split():
                key, sep, value = token.partition("=")
                if not sep or not key:
                    raise HeaderError(path, i, f"malformed metadata token {token!r}")
                meta[key] = value
            break

    from_name = _parse_filename_meta(path)
    if meta is not None:
        try:
            vals = dict(vx=float(meta["vx"]), vy=float(meta["vy"]), wz=float(meta["wz"]),
                        duration=float(meta["duration"]))
            repeats = int(meta.get("repeats", "1"))
        except (KeyError, ValueError) as exc:
            raise HeaderError(path, meta_line, f"malformed metadata ({exc})") from None
        if from_name is not None and any(not math.isclose(from_name[k], vals[k]) for k in vals):
            log.warning("%s: file name disagrees with header metadata; using the header", path)
    elif from_name is not None:
        vals, repeats = from_name, 1
    else:
        raise HeaderError(path, 2, "no '# vx=.. vy=.. wz=.. duration=..' metadata and no parsable file name")

    rows = _parse_table(path, lines, 1, PROFILE_COLUMNS)
    _check_increasing(path, rows)
    data = np.array([r for _, r in rows])
    try:
        return ProfileRecording(Twist(vals["vx"], vals["vy"], vals["wz"]), vals["duration"],
                                data[:, 0], data[:, 1:5], repeats)
    except ValueError as exc:
        raise FormatError(path, meta_line, str(exc)) from None


# ----------------------------------------------------------------------------
# scripts and traces


def write_script(path, script: CommandScript) -> Path:
    rows = [(d, tw.vx, tw.vy, tw.wz) for d, tw in script]
    return atomic_write(path, _table_text("script", SCRIPT_COLUMNS, rows))


def load_script(path) -> CommandScript:
    lines = _read_lines(path)
    _check_format_line(path, lines, "script")
    rows = _parse_table(path, lines, 1, SCRIPT_COLUMNS)
    steps = []
    for line, (d, vx, vy, wz) in rows:
        if not d > 0:
            raise FormatError(path, line, "durations must be positive")
        steps.append((d, Twist(vx, vy, wz)))
    return CommandScript(steps)


def write_trace(path, trace: OdometryTrace) -> Path:
    return atomic_write(path, _table_text("trace", TRACE_COLUMNS, trace.as_array()))


def load_trace(path) -> OdometryTrace:
    lines = _read_lines(path)
    _check_format_line(path, lines, "trace")
    rows = _parse_table(path, lines, 1, TRACE_COLUMNS)
    _check_increasing(path, rows)
    return OdometryTrace.from_array([r for _, r in rows])


# ----------------------------------------------------------------------------
# model files


def write_model(path, w: MlpWeights) -> Path:
    """Write a model file.

    Grammar (one item per line, after the format line)::

        dims = 1,35,15,5
        omega_max = <float>
        seed = <int>
        val_loss = <float>
        train_loss = <float>
        W<i> = <rows>x<cols>: <row-major comma-separated floats>
        b<i> = <n>: <comma-separated floats>

    for layers ``i = 1..3``.  Floats carry 17 significant digits.
    """
    def g(x):
        return "%.17g" % float(x)

    out = [f"# format: {MODEL_FORMAT} v1",
           "dims = " + ",".join(str(d) for d in w.dims),
           f"omega_max = {g(w.omega_max)}",
           f"seed = {int(w.seed)}",
           f"val_loss = {g(w.val_loss)}",
           f"train_loss = {g(w.train_loss)}"]
    for i, (W, b) in enumerate(zip(w.weights, w.biases), start=1):
        out.append(f"W{i} = {W.shape[0]}x{W.shape[1]}: " + ",".join(g(v) for v in W.ravel()))
        out.append(f"b{i} = {b.size}: " + ",".join(g(v) for v in b))
    return atomic_write(path, "\n".join(out) + "\n")


def load_model(path) -> MlpWeights:
    lines = _read_lines(path)
    _check_format_line(path, lines, MODEL_FORMAT)
    entries: dict[str, tuple[int, str]] = {}
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise FormatError(path, i, "expected 'key = value'")
        entries[key.strip()] = (i, value.strip())

    def get(key):
        if key not in entries:
            raise FormatError(path, None, f"missing entry {key!r}")
        return entries[key]

    line, dims_txt = get("dims")
    try:
        dims = tuple(int(d) for d in dims_txt.split(","))
    except ValueError:
        raise FormatError(path, line, "malformed dims") from None
    if dims != LAYER_DIMS:
        raise FormatError(path, line, f"layer dimensions must be {LAYER_DIMS}, found {dims}")

    def array(key, shape):
        line, txt = get(key)
        spec, sep, body = txt.partition(":")
        if not sep:
            raise FormatError(path, line, "expected '<shape>: <values>'")
        try:
            declared = tuple(int(s) for s in spec.strip().split("x"))
            values = np.array([float(v) for v in body.split(",")])
        except ValueError:
            raise FormatError(path, line, "malformed array") from None
        if declared != shape or values.size != int(np.prod(shape)):
            raise FormatError(path, line, f"array {key} must have shape {shape}")
        return values.reshape(shape)

    weights, biases = [], []
    for i, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:]), start=1):
        weights.append(array(f"W{i}", (fan_out, fan_in)))
        biases.append(array(f"b{i}", (fan_out,)))
    try:
        return MlpWeights(
            weights, biases,
            omega_max=float(get("omega_max")[1]),
            seed=int(get("seed")[1]),
            val_loss=float(get("val_loss")[1]),
            train_loss=float(get("train_loss")[1]),
        )
    except ValueError as exc:
        raise FormatError(path, None, str(exc)) from None


def runs_path(model_path) -> Path:
    """Location of the per-seed training log written next to a model file."""
    model_path = Path(model_path)
    return model_path.with_name(model_path.name + ".runs.csv")


def write_fit_runs(path, result: TrainResult) -> Path:
    """Per-seed losses plus the train/validation target split."""
    out = ["# format: fit-runs v1",
           "# train_targets=" + ",".join(_fmt(t) for t in result.train_targets),
           "# val_targets=" + ",".join(_fmt(t) for t in result.val_targets),
           "seed,train_loss,val_loss,status"]
    for r in result.runs:
        status = "ok" if r.completed else "failed: " + (r.error or "").replace(",", ";")
        out.append(f"{r.seed},{_fmt(r.train_loss)},{_fmt(r.val_loss)},{status}")
    return atomic_write(path, "\n".join(out) + "\n")


def load_fit_runs(path) -> dict:
    lines = _read_lines(path)
    _check_format_line(path, lines, "fit-runs")
    info: dict = {"runs": []}
    for i, line in enumerate(lines[1:], start=2):
        if line.startswith("# ") and "=" in line:
            key, _, value = line[2:].partition("=")
            info[key] = np.array([float(v) for v in value.split(",") if v])
        elif line and not line.startswith(("#", "seed,")):
            cells = line.split(",", 3)
            if len(cells) != 4:
                raise ColumnCountError(path, i, "expected seed,train_loss,val_loss,status")
            info["runs"].append((int(cells[0]), float(cells[1]), float(cells[2]), cells[3]))
    return info


# ----------------------------------------------------------------------------
# run configuration

EXAMPLE_GEOMETRY = RobotGeometry(r=0.1, Lx=0.2, Ly=0.25)  # placeholder, not a real robot
_PATH_KEYS = ("profiles", "model", "script", "output")


@dataclass
class RunConfig:
    geometry: RobotGeometry = EXAMPLE_GEOMETRY
    sim: SimConfig = field(default_factory=SimConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    paths: dict[str, Path] = field(default_factory=dict)


def _coerce(value: str, like):
    if isinstance(like, bool):
        return value.lower() in ("1", "true", "yes", "on")
    if isinstance(like, int):
        return int(value)
    if isinstance(like, float) or like is None:
        return float(value)
    return value


def load_config(path) -> RunConfig:
    path = Path(path)
    lines = _read_lines(path)
    _check_format_line(path, lines, "config")
    raw: dict[str, tuple[int, str]] = {}
    for i, line in enumerate(lines[1:], start=2):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        key, sep, value = text.partition("=")
        if not sep or not key.strip():
            raise FormatError(path, i, "expected 'key = value'")
        raw[key.strip()] = (i, value.strip())

    defaults = RunConfig()
    geom_kw = dict(r=defaults.geometry.r, Lx=defaults.geometry.Lx, Ly=defaults.geometry.Ly)
    sim_kw = {f.name: getattr(defaults.sim, f.name) for f in fields(SimConfig)}
    sim_kw["dt"] = None
    train_kw = {f.name: getattr(defaults.train, f.name) for f in fields(TrainConfig)}
    paths = {}
    for key, (line, value) in raw.items():
        try:
            if key in geom_kw:
                geom_kw[key] = float(value)
            elif key.startswith("sim.") and key[4:] in sim_kw:
                k = key[4:]
                sim_kw[k] = value if k == "mode" else _coerce(value, sim_kw[k] if k != "dt" else None)
            elif key.startswith("train.") and key[6:] in train_kw:
                train_kw[key[6:]] = _coerce(value, train_kw[key[6:]])
            elif key in _PATH_KEYS:
                p = Path(value)
                paths[key] = p if p.is_absolute() else (path.parent / p).resolve()
            else:
                raise FormatError(path, line, f"unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(path, line, f"bad value for {key!r}: {exc}") from None
    try:
        return RunConfig(RobotGeometry(**geom_kw), SimConfig(**sim_kw), TrainConfig(**train_kw), paths)
    except ValueError as exc:
        raise FormatError(path, None, str(exc)) from None


def write_config(path, cfg: RunConfig) -> Path:
    out = ["# format: config v1", "# geometry [m]"]
    g = cfg.geometry
    out += [f"r = {_fmt(g.r)}", f"Lx = {_fmt(g.Lx)}", f"Ly = {_fmt(g.Ly)}", "", "# simulator"]
    for f in fields(SimConfig):
        v = getattr(cfg.sim, f.name)
        out.append(f"sim.{f.name} = {v if isinstance(v, (str, int)) else _fmt(v)}")
    out += ["", "# training"]
    for f in fields(TrainConfig):
        v = getattr(cfg.train, f.name)
        out.append(f"train.{f.name} = {v if isinstance(v, int) else _fmt(v)}")
    if cfg.paths:
        out += ["", "# paths (relative to this file)"]
        for k, v in cfg.paths.items():
            out.append(f"{k} = {v}")
    return atomic_write(path, "\n".join(out) + "\n")
