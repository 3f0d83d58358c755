"""Run-configuration files: flat `key = value` text with `[section]` headers.

The format is parsed with a small line-tracking reader so every validation
error carries its line number. Numeric values in the [model] and [transport]
sections may be comma-separated lists; the sweep command crosses them with
the delay grid, every other command requires scalars.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .model import KineticParams, TransportParams

__all__ = ["RunConfig", "parse_config"]

_MODEL_KEYS = ("beta", "m", "s")
_TRANSPORT_KEYS = ("d11", "d22", "d21", "xi", "ell")
_DELAY_KEYS = ("tau", "tau_start", "tau_stop", "tau_count", "workers")
_SIM_KEYS = ("n_cells", "dt", "t_end", "record_every", "trace_every",
             "ic_mode", "ic_amplitude", "probe_x")
_OUTPUT_KEYS = ("dir",)
_SECTIONS = {
    "model": _MODEL_KEYS,
    "transport": _TRANSPORT_KEYS,
    "delay": _DELAY_KEYS,
    "simulation": _SIM_KEYS,
    "output": _OUTPUT_KEYS,
}


def _read_sections(path: str) -> dict[str, dict[str, tuple[str, int]]]:
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    current: str | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1].strip().lower()
                if current not in _SECTIONS:
                    raise ConfigError(f"unknown section [{current}]", lineno)
                sections.setdefault(current, {})
                continue
            if "=" not in line:
                raise ConfigError(f"expected `key = value`, got {line!r}", lineno)
            if current is None:
                raise ConfigError("key outside of any [section]", lineno)
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.lower()
            if key not in _SECTIONS[current]:
                raise ConfigError(f"unknown key {key!r} in [{current}]", lineno)
            if key in sections[current]:
                raise ConfigError(f"duplicate key {key!r} in [{current}]", lineno)
            sections[current][key] = (value, lineno)
    return sections


def _parse_float(value: str, lineno: int, key: str) -> float:
    try:
        x = float(value)
    except ValueError:
        raise ConfigError(f"{key}: {value!r} is not a number", lineno) from None
    if not math.isfinite(x):
        raise ConfigError(f"{key}: value must be finite", lineno)
    return x


def _parse_float_list(value: str, lineno: int, key: str) -> tuple[float, ...]:
    parts = [p.strip() for p in value.split(",") if p.strip()]
    if not parts:
        raise ConfigError(f"{key}: empty value", lineno)
    return tuple(_parse_float(p, lineno, key) for p in parts)


def _parse_int(value: str, lineno: int, key: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: {value!r} is not an integer", lineno) from None


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration.

    model/transport hold per-key value tuples (singletons unless the file
    lists sweep values); delay is either a single tau or a (start, stop,
    count) range.
    """

    model: dict[str, tuple[float, ...]]
    transport: dict[str, tuple[float, ...]]
    tau: float | None
    tau_range: tuple[float, float, int] | None
    workers: int = 1
    n_cells: int = 200
    dt: float | None = None
    t_end: float = 2000.0
    record_every: int | None = None
    trace_every: int | None = None
    ic_mode: int | None = None
    ic_amplitude: float = 0.1
    probe_x: float = 0.0
    out_dir: str | None = None

    def _scalar(self, section: str, values: dict[str, tuple[float, ...]],
                key: str) -> float:
        vs = values[key]
        if len(vs) != 1:
            raise ConfigError(
                f"[{section}] {key} lists {len(vs)} values; "
                "only the sweep command accepts value lists")
        return vs[0]

    def kinetic_params(self) -> KineticParams:
        return KineticParams(*(self._scalar("model", self.model, k)
                               for k in _MODEL_KEYS))

    def transport_params(self) -> TransportParams:
        return TransportParams(*(self._scalar("transport", self.transport, k)
                                 for k in _TRANSPORT_KEYS))

    def single_tau(self) -> float:
        if self.tau is None:
            raise ConfigError("this command needs a single tau in [delay]")
        return self.tau

    def taus(self) -> tuple[float, ...]:
        """Delay grid: the range when given, else the single value."""
        if self.tau_range is not None:
            start, stop, count = self.tau_range
            if count == 1:
                return (start,)
            step = (stop - start) / (count - 1)
            return tuple(start + i * step for i in range(count))
        return (self.single_tau(),)

    def parameter_grid(self):
        """Cross product over all listed model/transport values.

        Yields (KineticParams, TransportParams, varied) with `varied` the
        dict of keys that take more than one value in the file.
        """
        keys = list(_MODEL_KEYS) + list(_TRANSPORT_KEYS)
        pools = [self.model[k] for k in _MODEL_KEYS] \
            + [self.transport[k] for k in _TRANSPORT_KEYS]
        multi = {k for k, pool in zip(keys, pools) if len(pool) > 1}
        for combo in itertools.product(*pools):
            values = dict(zip(keys, combo))
            kin = KineticParams(values["beta"], values["m"], values["s"])
            tr = TransportParams(values["d11"], values["d22"], values["d21"],
                                 values["xi"], values["ell"])
            varied = {k: values[k] for k in multi}
            yield kin, tr, varied


def parse_config(path: str) -> RunConfig:
    """Parse and validate a configuration file.

    Raises ConfigError (with the offending line number where applicable) on
    unknown sections/keys, malformed numbers, missing required keys or an
    inconsistent delay block.
    """
    sections = _read_sections(path)

    for required in ("model", "transport", "delay"):
        if required not in sections:
            raise ConfigError(f"missing required section [{required}]")

    model = {}
    for key in _MODEL_KEYS:
        if key not in sections["model"]:
            raise ConfigError(f"missing key {key!r} in [model]")
        value, lineno = sections["model"][key]
        model[key] = _parse_float_list(value, lineno, key)
    transport = {}
    for key in _TRANSPORT_KEYS:
        if key not in sections["transport"]:
            raise ConfigError(f"missing key {key!r} in [transport]")
        value, lineno = sections["transport"][key]
        transport[key] = _parse_float_list(value, lineno, key)

    delay = sections["delay"]
    tau = None
    tau_range = None
    if "tau" in delay:
        if any(k in delay for k in ("tau_start", "tau_stop", "tau_count")):
            raise ConfigError("give either tau or a tau_start/stop/count range",
                              delay["tau"][1])
        tau = _parse_float(*delay["tau"], key="tau")
        if not tau > 0:
            raise ConfigError("tau must be positive", delay["tau"][1])
    else:
        missing = [k for k in ("tau_start", "tau_stop", "tau_count")
                   if k not in delay]
        if missing:
            raise ConfigError(f"delay block needs tau or the full range; "
                              f"missing {', '.join(missing)}")
        start = _parse_float(*delay["tau_start"], key="tau_start")
        stop = _parse_float(*delay["tau_stop"], key="tau_stop")
        count = _parse_int(*delay["tau_count"], key="tau_count")
        if count < 1:
            raise ConfigError("tau_count must be >= 1", delay["tau_count"][1])
        if not (start > 0 and stop >= start):
            raise ConfigError("need 0 < tau_start <= tau_stop",
                              delay["tau_start"][1])
        tau_range = (start, stop, count)
    workers = 1
    if "workers" in delay:
        workers = _parse_int(*delay["workers"], key="workers")
        if workers < 1:
            raise ConfigError("workers must be >= 1", delay["workers"][1])

    kwargs = {}
    sim = sections.get("simulation", {})
    if "n_cells" in sim:
        kwargs["n_cells"] = _parse_int(*sim["n_cells"], key="n_cells")
    if "dt" in sim:
        kwargs["dt"] = _parse_float(*sim["dt"], key="dt")
    if "t_end" in sim:
        kwargs["t_end"] = _parse_float(*sim["t_end"], key="t_end")
    if "record_every" in sim:
        kwargs["record_every"] = _parse_int(*sim["record_every"], key="record_every")
    if "trace_every" in sim:
        kwargs["trace_every"] = _parse_int(*sim["trace_every"], key="trace_every")
    if "ic_mode" in sim:
        kwargs["ic_mode"] = _parse_int(*sim["ic_mode"], key="ic_mode")
    if "ic_amplitude" in sim:
        kwargs["ic_amplitude"] = _parse_float(*sim["ic_amplitude"], key="ic_amplitude")
    if "probe_x" in sim:
        kwargs["probe_x"] = _parse_float(*sim["probe_x"], key="probe_x")
    out = sections.get("output", {})
    out_dir = out["dir"][0] if "dir" in out else None

    for key in _MODEL_KEYS:
        lineno = sections["model"][key][1]
        if any(v <= 0 for v in model[key]):
            raise ConfigError(f"{key} must be positive", lineno)
    for key in ("d11", "d22", "d21", "xi"):
        lineno = sections["transport"][key][1]
        if any(v < 0 for v in transport[key]):
            raise ConfigError(f"{key} must be nonnegative", lineno)
    lineno = sections["transport"]["ell"][1]
    if any(v <= 0 for v in transport["ell"]):
        raise ConfigError("ell must be positive", lineno)

    return RunConfig(model=model, transport=transport, tau=tau,
                     tau_range=tau_range, workers=workers, out_dir=out_dir,
                     **kwargs)
