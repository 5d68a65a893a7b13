"""Flat key-value experiment configs and their canonical (manifest) rendering.

A config document has ``[section]`` headers and ``key = value`` lines; blank
lines and ``#`` comments are ignored.  Unknown sections or keys are errors,
never silently dropped.  ``render_config`` produces a canonical document
that parses back to an equal RunConfig, which is what run manifests are
made of: a manifest alone reproduces a run bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

from .dynamics import ModelParams
from .graph import GraphSpec

COMMANDS = ("simulate", "sweep", "gallery", "clusters", "classify")

DEFAULT_TOL = 1e-9
DEFAULT_MAX_PERIOD = 256


class ConfigError(ValueError):
    """Malformed or inconsistent configuration document."""


@dataclass(frozen=True)
class InitConfig:
    """Initial condition: synchronized, seeded-random, or explicit opinion file."""

    kind: str  # fs | random | file
    p0: float
    theta0: float | None = None
    path: str | None = None


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved description of one command invocation."""

    command: str
    graph: GraphSpec
    params: ModelParams
    init: InitConfig
    out: str
    seed: int = 0
    threads: int = 1
    # simulate / clusters
    steps: int | None = None
    stride: int | None = None
    # sweep
    sweep_param: str | None = None
    grid: tuple[float, ...] | None = None
    # gallery
    betas: tuple[float, ...] | None = None
    # sweep / gallery / classify
    transient: int | None = None
    tail: int | None = None
    tol: float = DEFAULT_TOL
    max_period: int = DEFAULT_MAX_PERIOD


def _parse_sections(text: str) -> dict[str, dict[str, str]]:
    sections: dict[str, dict[str, str]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name in sections:
                raise ConfigError(f"line {lineno}: duplicate section [{name}]")
            sections[name] = {}
            current = name
            continue
        if current is None:
            raise ConfigError(f"line {lineno}: key outside any section: {raw!r}")
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in sections[current]:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} in [{current}]")
        sections[current][key] = value
    return sections


class _Section:
    """One section's keys with typed, consume-and-complain access."""

    def __init__(self, name: str, data: dict[str, str]):
        self.name = name
        self.data = dict(data)

    def take(self, key: str, conv, required: bool = True, default=None):
        if key not in self.data:
            if required:
                raise ConfigError(f"section [{self.name}] is missing key {key!r}")
            return default
        raw = self.data.pop(key)
        try:
            return conv(raw)
        except ConfigError:
            raise
        except Exception:
            raise ConfigError(
                f"key {key!r} in [{self.name}]: cannot interpret {raw!r}"
            ) from None

    def finish(self) -> None:
        if self.data:
            extra = ", ".join(sorted(self.data))
            raise ConfigError(f"unknown key(s) in [{self.name}]: {extra}")


def _to_int(raw: str) -> int:
    return int(raw, 10)


def _to_float(raw: str) -> float:
    value = float(raw)
    if math.isnan(value) or math.isinf(value):
        raise ConfigError(f"value {raw!r} must be finite")
    return value


def _to_float_list(raw: str) -> tuple[float, ...]:
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if not parts:
        raise ConfigError("empty list")
    return tuple(_to_float(p) for p in parts)


def _existing_path(raw: str) -> str:
    if not Path(raw).is_file():
        raise ConfigError(f"path {raw!r} does not exist")
    return raw


def _parse_graph(sec: _Section) -> GraphSpec:
    kind = sec.take("kind", str)
    if kind == "complete":
        spec = GraphSpec(kind="complete", n=sec.take("n", _to_int))
    elif kind == "lattice":
        spec = GraphSpec(kind="lattice", side=sec.take("side", _to_int))
    elif kind == "random":
        spec = GraphSpec(
            kind="random",
            n=sec.take("n", _to_int),
            edge_prob=sec.take("edge_prob", _to_float),
            seed=sec.take("seed", _to_int),
        )
    elif kind == "edgelist":
        spec = GraphSpec(kind="edgelist", path=sec.take("path", _existing_path))
    else:
        raise ConfigError(
            f"graph kind must be complete, lattice, random or edgelist, got {kind!r}"
        )
    sec.finish()
    return spec


def _parse_params(sec: _Section) -> ModelParams:
    kwargs = {k: sec.take(k, _to_float) for k in ("beta", "gamma", "e_min", "e_max", "p_bar")}
    sec.finish()
    try:
        return ModelParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"section [params]: {exc}") from None


def _parse_init(sec: _Section) -> InitConfig:
    kind = sec.take("kind", str)
    p0 = sec.take("p0", _to_float)
    if kind == "fs":
        init = InitConfig(kind="fs", p0=p0, theta0=sec.take("theta0", _to_float))
    elif kind == "random":
        init = InitConfig(kind="random", p0=p0)
    elif kind == "file":
        init = InitConfig(kind="file", p0=p0, path=sec.take("path", _existing_path))
    else:
        raise ConfigError(f"init kind must be fs, random or file, got {kind!r}")
    sec.finish()
    return init


def _grid_from_section(sec: _Section) -> tuple[float, ...]:
    explicit = sec.take("grid", _to_float_list, required=False)
    start = sec.take("grid_start", _to_float, required=False)
    stop = sec.take("grid_stop", _to_float, required=False)
    step = sec.take("grid_step", _to_float, required=False)
    ranged = [v is not None for v in (start, stop, step)]
    if explicit is not None and any(ranged):
        raise ConfigError("give either grid or grid_start/grid_stop/grid_step, not both")
    if explicit is not None:
        return explicit
    if not all(ranged):
        raise ConfigError("sweep grid needs grid=... or all of grid_start/grid_stop/grid_step")
    if step <= 0:
        raise ConfigError(f"grid_step must be positive, got {step}")
    if stop < start:
        raise ConfigError("grid_stop must not be below grid_start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(start + i * step for i in range(count))


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a config document."""
    sections = _parse_sections(text)

    known = {"run", "graph", "params", "init"}
    run = _Section("run", sections.get("run", {}))
    if "run" not in sections:
        raise ConfigError("missing section [run]")
    command = run.take("command", str)
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {COMMANDS}, got {command!r}")
    out = run.take("out", str)
    seed = run.take("seed", _to_int, required=False, default=0)
    if not 0 <= seed < 2 ** 64:
        raise ConfigError(f"seed must be a 64-bit nonnegative integer, got {seed}")
    threads = run.take("threads", _to_int, required=False, default=1)
    if threads < 1:
        raise ConfigError(f"threads must be positive, got {threads}")
    run.finish()

    for name in ("graph", "params", "init"):
        if name not in sections:
            raise ConfigError(f"missing section [{name}]")
    graph = _parse_graph(_Section("graph", sections["graph"]))
    params = _parse_params(_Section("params", sections["params"]))
    init = _parse_init(_Section("init", sections["init"]))

    if command in ("sweep", "gallery") and init.kind == "file":
        raise ConfigError(f"command {command!r} needs init kind fs or random")

    cfg = RunConfig(
        command=command, graph=graph, params=params, init=init,
        out=out, seed=seed, threads=threads,
    )

    cmd_section = {"simulate": "simulate", "clusters": "simulate"}.get(command, command)
    known.add(cmd_section)
    unknown_sections = set(sections) - known
    if unknown_sections:
        names = ", ".join(f"[{s}]" for s in sorted(unknown_sections))
        raise ConfigError(f"section(s) {names} are not used by command {command!r}")
    if cmd_section not in sections:
        raise ConfigError(f"command {command!r} needs section [{cmd_section}]")
    sec = _Section(cmd_section, sections[cmd_section])

    if command in ("simulate", "clusters"):
        steps = sec.take("steps", _to_int)
        stride = sec.take("stride", _to_int, required=False, default=1)
        if steps < 0:
            raise ConfigError(f"steps must be nonnegative, got {steps}")
        if stride < 1:
            raise ConfigError(f"stride must be positive, got {stride}")
        cfg = replace(cfg, steps=steps, stride=stride)
    elif command == "sweep":
        sweep_param = sec.take("param", str)
        if sweep_param not in ("beta", "gamma", "p_bar"):
            raise ConfigError(
                f"sweep param must be beta, gamma or p_bar, got {sweep_param!r}"
            )
        grid = _grid_from_section(sec)
        cfg = replace(cfg, sweep_param=sweep_param, grid=grid,
                      **_tail_fields(sec))
    elif command == "gallery":
        betas = sec.take("betas", _to_float_list)
        cfg = replace(cfg, betas=betas, **_tail_fields(sec))
    elif command == "classify":
        cfg = replace(cfg, **_tail_fields(sec))
    sec.finish()
    return cfg


def _tail_fields(sec: _Section) -> dict:
    transient = sec.take("transient", _to_int)
    tail = sec.take("tail", _to_int)
    tol = sec.take("tol", _to_float, required=False, default=DEFAULT_TOL)
    max_period = sec.take("max_period", _to_int, required=False, default=DEFAULT_MAX_PERIOD)
    if transient < 0:
        raise ConfigError(f"transient must be nonnegative, got {transient}")
    if tail < 1:
        raise ConfigError(f"tail must be positive, got {tail}")
    if max_period < 1:
        raise ConfigError(f"max_period must be positive, got {max_period}")
    if tol <= 0:
        raise ConfigError(f"tol must be positive, got {tol}")
    return {"transient": transient, "tail": tail, "tol": tol, "max_period": max_period}


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def render_config(cfg: RunConfig) -> str:
    """Canonical document for ``cfg``; ``parse_config`` inverts it exactly."""
    lines = [
        "[run]",
        f"command = {cfg.command}",
        f"out = {cfg.out}",
        f"seed = {cfg.seed}",
        f"threads = {cfg.threads}",
        "",
        "[graph]",
        f"kind = {cfg.graph.kind}",
    ]
    if cfg.graph.kind == "complete":
        lines.append(f"n = {cfg.graph.n}")
    elif cfg.graph.kind == "lattice":
        lines.append(f"side = {cfg.graph.side}")
    elif cfg.graph.kind == "random":
        lines += [
            f"n = {cfg.graph.n}",
            f"edge_prob = {_fmt(cfg.graph.edge_prob)}",
            f"seed = {cfg.graph.seed}",
        ]
    elif cfg.graph.kind == "edgelist":
        lines.append(f"path = {cfg.graph.path}")
    lines += [
        "",
        "[params]",
        f"beta = {_fmt(cfg.params.beta)}",
        f"gamma = {_fmt(cfg.params.gamma)}",
        f"e_min = {_fmt(cfg.params.e_min)}",
        f"e_max = {_fmt(cfg.params.e_max)}",
        f"p_bar = {_fmt(cfg.params.p_bar)}",
        "",
        "[init]",
        f"kind = {cfg.init.kind}",
        f"p0 = {_fmt(cfg.init.p0)}",
    ]
    if cfg.init.kind == "fs":
        lines.append(f"theta0 = {_fmt(cfg.init.theta0)}")
    elif cfg.init.kind == "file":
        lines.append(f"path = {cfg.init.path}")

    if cfg.command in ("simulate", "clusters"):
        lines += [
            "",
            "[simulate]",
            f"steps = {cfg.steps}",
            f"stride = {cfg.stride}",
        ]
    elif cfg.command == "sweep":
        lines += [
            "",
            "[sweep]",
            f"param = {cfg.sweep_param}",
            "grid = " + ",".join(_fmt(v) for v in cfg.grid),
        ]
        lines += _render_tail(cfg)
    elif cfg.command == "gallery":
        lines += [
            "",
            "[gallery]",
            "betas = " + ",".join(_fmt(v) for v in cfg.betas),
        ]
        lines += _render_tail(cfg)
    elif cfg.command == "classify":
        lines += ["", "[classify]"]
        lines += _render_tail(cfg)
    return "\n".join(lines) + "\n"


def _render_tail(cfg: RunConfig) -> list[str]:
    return [
        f"transient = {cfg.transient}",
        f"tail = {cfg.tail}",
        f"tol = {_fmt(cfg.tol)}",
        f"max_period = {cfg.max_period}",
    ]
