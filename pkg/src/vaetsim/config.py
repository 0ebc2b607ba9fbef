"""Run configuration: YAML documents with strict validation and defaults.

A config names one task and the physical parameters; whatever is omitted
falls back to the package defaults (donor tunneling as the unit, alpha 1,
delta 8, nu 16.12, kappa 0.3, kbt 40, Fock dimension 50, accumulation
window 22.5, step 0.005).  Unknown keys are rejected with their full path
so typos cannot silently change a run.  ``vibration: null`` selects the
bare 4x4 dimer.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

import yaml

from .errors import ConfigError
from .model import DimerParams, DissipationParams, VibrationParams

TASKS = (
    "eigen",
    "ep",
    "trace-line",
    "dynamics",
    "lindblad",
    "sweep",
    "cut",
    "enhancement",
    "period",
)

DEFAULT_T_FINAL = 22.5
DEFAULT_DT = 0.005


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    step: float

    def values(self) -> list[float]:
        n = int(round((self.stop - self.start) / self.step))
        return [self.start + k * self.step for k in range(n + 1)]


@dataclass(frozen=True)
class AxisSpec(GridSpec):
    name: str = ""


@dataclass(frozen=True)
class DynamicsOptions:
    t_final: float = DEFAULT_T_FINAL
    dt: float = DEFAULT_DT


@dataclass(frozen=True)
class LindbladOptions:
    t_final: float = DEFAULT_T_FINAL
    dt: float = DEFAULT_DT
    method: str = "split"


@dataclass(frozen=True)
class SweepOptions:
    x: AxisSpec = AxisSpec(start=0.0, stop=1.2, step=0.005, name="gamma")
    y: AxisSpec = AxisSpec(start=4.0, stop=20.0, step=0.04, name="nu")
    t_final: float = DEFAULT_T_FINAL
    dt: float = DEFAULT_DT


@dataclass(frozen=True)
class CutOptions:
    map_csv: str = ""
    axis: str = "nu"
    value: float = 16.12


@dataclass(frozen=True)
class EnhancementOptions:
    gamma: GridSpec = GridSpec(start=0.0, stop=1.2, step=0.005)
    t_final: float = DEFAULT_T_FINAL
    dt: float = DEFAULT_DT


@dataclass(frozen=True)
class TraceLineOptions:
    alpha: GridSpec = GridSpec(start=0.0, stop=1.0, step=0.05)


@dataclass(frozen=True)
class PeriodOptions:
    gamma: GridSpec = GridSpec(start=0.5, stop=1.0, step=0.005)


@dataclass(frozen=True)
class EigenOptions:
    pass


@dataclass(frozen=True)
class EpOptions:
    pass


@dataclass(frozen=True)
class OutputOptions:
    basename: str = ""
    j_in_khz: float | None = None


_OPTION_TYPES = {
    "eigen": EigenOptions,
    "ep": EpOptions,
    "trace-line": TraceLineOptions,
    "dynamics": DynamicsOptions,
    "lindblad": LindbladOptions,
    "sweep": SweepOptions,
    "cut": CutOptions,
    "enhancement": EnhancementOptions,
    "period": PeriodOptions,
}


@dataclass(frozen=True)
class RunConfig:
    task: str
    dimer: DimerParams
    vibration: VibrationParams | None
    dissipation: DissipationParams | None
    options: object
    output: OutputOptions = OutputOptions()


def _require_mapping(obj, path: str) -> dict:
    if obj is None:
        return {}
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected a key-value section, got {type(obj).__name__}")
    return obj


def _pop_scalar(d: dict, key: str, path: str, kind, default):
    if key not in d:
        return default
    raw = d.pop(key)
    if kind is float and isinstance(raw, int) and not isinstance(raw, bool):
        raw = float(raw)
    if kind is float and not isinstance(raw, float):
        raise ConfigError(f"{path}.{key}: expected a number, got {raw!r}")
    if kind is int and (not isinstance(raw, int) or isinstance(raw, bool)):
        raise ConfigError(f"{path}.{key}: expected an integer, got {raw!r}")
    if kind is str and not isinstance(raw, str):
        raise ConfigError(f"{path}.{key}: expected a string, got {raw!r}")
    return raw


def _reject_unknown(d: dict, path: str):
    if d:
        raise ConfigError(f"{path}: unknown key(s) {sorted(d)}")


def _build_params(cls, d: dict, path: str):
    kwargs = {}
    for f in fields(cls):
        kind = int if f.name == "fock_dim" else float
        if f.name in d:
            kwargs[f.name] = _pop_scalar(d, f.name, path, kind, None)
    _reject_unknown(d, path)
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _build_grid(d, path: str, default: GridSpec, axis: bool = False):
    if d is None:
        return default
    d = dict(_require_mapping(d, path))
    start = _pop_scalar(d, "start", path, float, default.start)
    stop = _pop_scalar(d, "stop", path, float, default.stop)
    step = _pop_scalar(d, "step", path, float, default.step)
    name = _pop_scalar(d, "name", path, str, getattr(default, "name", "")) if axis else None
    _reject_unknown(d, path)
    if step <= 0:
        raise ConfigError(f"{path}.step: must be > 0, got {step}")
    if stop < start:
        raise ConfigError(f"{path}: stop {stop} below start {start}")
    if axis:
        return AxisSpec(start=start, stop=stop, step=step, name=name)
    return GridSpec(start=start, stop=stop, step=step)


def _build_options(task: str, d, path: str):
    d = dict(_require_mapping(d, path))
    if task == "eigen":
        _reject_unknown(d, path)
        return EigenOptions()
    if task == "ep":
        _reject_unknown(d, path)
        return EpOptions()
    if task == "trace-line":
        alpha = _build_grid(d.pop("alpha", None), f"{path}.alpha", TraceLineOptions().alpha)
        _reject_unknown(d, path)
        return TraceLineOptions(alpha=alpha)
    if task == "dynamics":
        opts = DynamicsOptions(
            t_final=_pop_scalar(d, "t_final", path, float, DEFAULT_T_FINAL),
            dt=_pop_scalar(d, "dt", path, float, DEFAULT_DT),
        )
        _reject_unknown(d, path)
        return opts
    if task == "lindblad":
        opts = LindbladOptions(
            t_final=_pop_scalar(d, "t_final", path, float, DEFAULT_T_FINAL),
            dt=_pop_scalar(d, "dt", path, float, DEFAULT_DT),
            method=_pop_scalar(d, "method", path, str, "split"),
        )
        if opts.method not in ("split", "rk4"):
            raise ConfigError(f"{path}.method: must be 'split' or 'rk4'")
        _reject_unknown(d, path)
        return opts
    if task == "sweep":
        default = SweepOptions()
        x = _build_grid(d.pop("x", None), f"{path}.x", default.x, axis=True)
        y = _build_grid(d.pop("y", None), f"{path}.y", default.y, axis=True)
        opts = SweepOptions(
            x=x,
            y=y,
            t_final=_pop_scalar(d, "t_final", path, float, DEFAULT_T_FINAL),
            dt=_pop_scalar(d, "dt", path, float, DEFAULT_DT),
        )
        if x.name == y.name:
            raise ConfigError(f"{path}: x and y sweep the same axis {x.name!r}")
        _reject_unknown(d, path)
        return opts
    if task == "cut":
        opts = CutOptions(
            map_csv=_pop_scalar(d, "map_csv", path, str, ""),
            axis=_pop_scalar(d, "axis", path, str, "nu"),
            value=_pop_scalar(d, "value", path, float, 16.12),
        )
        if not opts.map_csv:
            raise ConfigError(f"{path}.map_csv: required for the cut task")
        _reject_unknown(d, path)
        return opts
    if task == "enhancement":
        gamma = _build_grid(d.pop("gamma", None), f"{path}.gamma", EnhancementOptions().gamma)
        opts = EnhancementOptions(
            gamma=gamma,
            t_final=_pop_scalar(d, "t_final", path, float, DEFAULT_T_FINAL),
            dt=_pop_scalar(d, "dt", path, float, DEFAULT_DT),
        )
        _reject_unknown(d, path)
        return opts
    if task == "period":
        gamma = _build_grid(d.pop("gamma", None), f"{path}.gamma", PeriodOptions().gamma)
        _reject_unknown(d, path)
        return PeriodOptions(gamma=gamma)
    raise ConfigError(f"unknown task {task!r}; expected one of {TASKS}")


def config_from_dict(doc: dict, task: str | None = None) -> RunConfig:
    doc = dict(_require_mapping(doc, "config"))
    doc_task = doc.pop("task", None)
    if doc_task is not None and not isinstance(doc_task, str):
        raise ConfigError(f"task: expected a string, got {doc_task!r}")
    if task is None:
        task = doc_task
    elif doc_task is not None and doc_task != task:
        raise ConfigError(
            f"config names task {doc_task!r} but {task!r} was requested"
        )
    if task is None:
        raise ConfigError(f"no task given; expected one of {TASKS}")
    if task not in TASKS:
        raise ConfigError(f"unknown task {task!r}; expected one of {TASKS}")

    dimer = _build_params(DimerParams, dict(_require_mapping(doc.pop("dimer", None), "dimer")), "dimer")
    if "vibration" in doc and doc["vibration"] is None:
        doc.pop("vibration")
        vibration = None
    else:
        vibration = _build_params(
            VibrationParams,
            dict(_require_mapping(doc.pop("vibration", None), "vibration")),
            "vibration",
        )
    if "dissipation" in doc and doc["dissipation"] is None:
        doc.pop("dissipation")
        dissipation = None
    else:
        raw = doc.pop("dissipation", None)
        if raw is None and task != "lindblad":
            dissipation = None
        else:
            dissipation = _build_params(
                DissipationParams, dict(_require_mapping(raw, "dissipation")), "dissipation"
            )

    out_raw = dict(_require_mapping(doc.pop("output", None), "output"))
    output = OutputOptions(
        basename=_pop_scalar(out_raw, "basename", "output", str, ""),
        j_in_khz=_pop_scalar(out_raw, "j_in_khz", "output", float, None),
    )
    _reject_unknown(out_raw, "output")

    options = _build_options(task, doc.pop(task, None), task)
    _reject_unknown(doc, "config")

    if task == "lindblad" and dissipation is None:
        dissipation = DissipationParams()
    return RunConfig(
        task=task,
        dimer=dimer,
        vibration=vibration,
        dissipation=dissipation,
        options=options,
        output=output,
    )


def parse_config(text: str, task: str | None = None) -> RunConfig:
    """Parse and validate a YAML config document."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not well-formed YAML: {exc}") from exc
    if doc is None:
        doc = {}
    return config_from_dict(doc, task=task)


def config_to_dict(config: RunConfig) -> dict:
    doc = {"task": config.task, "dimer": asdict(config.dimer)}
    doc["vibration"] = None if config.vibration is None else asdict(config.vibration)
    if config.dissipation is not None:
        doc["dissipation"] = asdict(config.dissipation)
    if config.output != OutputOptions():
        doc["output"] = {
            k: v for k, v in asdict(config.output).items()
            if v not in ("", None)
        }
    opts = asdict(config.options)
    if opts:
        doc[config.task] = opts
    return doc


def serialize_config(config: RunConfig) -> str:
    """YAML text whose parse reproduces ``config`` exactly."""
    return yaml.safe_dump(config_to_dict(config), sort_keys=True)


def apply_overrides(doc: dict, overrides) -> dict:
    """Apply ``section.key=value`` strings onto a config dictionary."""
    doc = dict(doc)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw_value = item.split("=", 1)
        try:
            value = yaml.safe_load(raw_value)
        except yaml.YAMLError as exc:
            raise ConfigError(f"override {item!r}: bad value ({exc})") from exc
        parts = key.strip().split(".")
        if not all(parts):
            raise ConfigError(f"override {item!r}: empty key component")
        node = doc
        for part in parts[:-1]:
            nxt = node.get(part)
            if nxt is None:
                nxt = {}
                node[part] = nxt
            elif not isinstance(nxt, dict):
                raise ConfigError(
                    f"override {item!r}: {part} is not a section"
                )
            node = nxt
        node[parts[-1]] = value
    return doc
