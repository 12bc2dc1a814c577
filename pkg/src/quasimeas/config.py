"""Scenario configuration: TOML parsing, validation, and serialization.

A scenario file fully determines one run: observable, device orientation and
driving profile, outcome branch (or "sample"), initial state, integrator
settings, and seed.  Optional sections describe a parameter sweep or a
Stern-Gerlach apparatus.  Serialization uses repr floats, so every parse ->
dump -> parse cycle reproduces the values bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

import numpy as np

from .dynamics import DeviceConfig, IntegratorConfig
from .errors import ConfigError, DomainError
from .geometry import DeviceGeometry, is_admissible
from .potentials import InvertedMorse, PotentialProfile, SternGerlachTime, ZeroProfile
from .states import BlochVector, ObservableSpec, as_bloch
from .sterngerlach import SGConfig

SWEEP_VARIABLES = ("Theta", "theta", "g0", "kappa", "lambda", "n0")


@dataclass(frozen=True)
class SweepSpec:
    """One scenario field varied over an explicit grid."""

    variable: str
    values: tuple

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigError(
                f"sweep variable {self.variable!r} not in {SWEEP_VARIABLES}"
            )
        if len(self.values) == 0:
            raise ConfigError("sweep grid is empty")


@dataclass
class Scenario:
    """Validated description of one run (or sweep / ensemble of runs)."""

    name: str
    observable: ObservableSpec
    n0: BlochVector
    lam: int | str = 1  # +1, -1, or "sample"
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    seed: int = 0
    device: DeviceConfig | None = None
    sg: SGConfig | None = None
    sweep: SweepSpec | None = None

    def __post_init__(self):
        if self.lam not in (1, -1, "sample"):
            raise ConfigError(f'lambda must be 1, -1, or "sample", got {self.lam!r}')
        if self.device is None and self.sg is None:
            raise ConfigError("scenario needs a [device] or [sg] section")

    def branch_or_raise(self) -> int:
        if self.lam == "sample":
            raise ConfigError('this command requires a fixed branch, lambda is "sample"')
        return int(self.lam)


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"missing key {key!r} in {where}")
    return table[key]


def _profile_from_dict(d: dict) -> PotentialProfile:
    kind = _require(d, "kind", "[device.potential]")
    if kind == "inverted_morse":
        return InvertedMorse(
            g0_rate=float(_require(d, "g0_rate", "[device.potential]")),
            kappa=float(_require(d, "kappa", "[device.potential]")),
        )
    if kind == "sg_quadratic":
        return SternGerlachTime(
            prefactor_rate_per_s2=float(
                _require(d, "prefactor_rate_per_s2", "[device.potential]")
            ),
            t_end=float(d.get("t_end", 1e-4)),
            t_w=float(d.get("t_w", 5e-6)),
        )
    if kind == "zero":
        return ZeroProfile()
    raise ConfigError(f"unknown potential kind {kind!r}")


def _profile_to_dict(p: PotentialProfile) -> dict:
    if isinstance(p, InvertedMorse):
        return {"kind": "inverted_morse", "g0_rate": p.g0_rate, "kappa": p.kappa}
    if isinstance(p, SternGerlachTime):
        return {
            "kind": "sg_quadratic",
            "prefactor_rate_per_s2": p.prefactor_rate_per_s2,
            "t_end": p.t_end,
            "t_w": p.t_w,
        }
    if isinstance(p, ZeroProfile):
        return {"kind": "zero"}
    raise ConfigError(f"potential {type(p).__name__} is not serializable")


def scenario_from_dict(data: dict) -> Scenario:
    """Build and validate a Scenario from a parsed TOML table."""
    try:
        obs_t = _require(data, "observable", "scenario")
        spec = ObservableSpec(
            omega_rate=float(_require(obs_t, "omega_rate", "[observable]")),
            alpha=float(obs_t.get("alpha", 0.0)),
            beta_az=float(obs_t.get("beta_az", 0.0)),
        )
        n0 = as_bloch(np.asarray(_require(data, "n0", "scenario"), dtype=float))
        device = None
        if "device" in data:
            dev_t = data["device"]
            geom = DeviceGeometry(
                theta=float(_require(dev_t, "theta", "[device]")),
                Theta=float(_require(dev_t, "Theta", "[device]")),
                chart_branch=int(dev_t.get("chart_branch", 1)),
            )
            profile = _profile_from_dict(_require(dev_t, "potential", "[device]"))
            if not is_admissible(spec.alpha, geom.theta, geom.Theta):
                raise ConfigError(
                    f"(alpha={spec.alpha}, theta={geom.theta}, Theta={geom.Theta}) "
                    "is outside the admissible region"
                )
            device = DeviceConfig(geometry=geom, profile=profile)
        sg = None
        if "sg" in data:
            sg_t = data["sg"]
            sg = SGConfig(
                b_field=float(sg_t.get("b_field", SGConfig.b_field)),
                beta_grad=float(sg_t.get("beta_grad", SGConfig.beta_grad)),
                V=float(sg_t.get("V", SGConfig.V)),
                t_end=float(sg_t.get("t_end", SGConfig.t_end)),
                t_w=float(sg_t.get("t_w", SGConfig.t_w)),
            )
        integ = IntegratorConfig(**data.get("integrator", {}))
        sweep = None
        if "sweep" in data:
            sw = data["sweep"]
            values = _require(sw, "values", "[sweep]")
            if not isinstance(values, list):
                raise ConfigError("[sweep] values must be a list")
            sweep = SweepSpec(
                variable=str(_require(sw, "variable", "[sweep]")),
                values=tuple(
                    tuple(v) if isinstance(v, list) else v for v in values
                ),
            )
        return Scenario(
            name=str(_require(data, "name", "scenario")),
            observable=spec,
            n0=n0,
            lam=data.get("lambda", 1),
            integrator=integ,
            seed=int(data.get("seed", 0)),
            device=device,
            sg=sg,
            sweep=sweep,
        )
    except ConfigError:
        raise
    except (DomainError, TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc


def scenario_to_dict(sc: Scenario) -> dict:
    data: dict = {
        "name": sc.name,
        "lambda": sc.lam,
        "seed": sc.seed,
        "n0": [float(x) for x in sc.n0.vec],
        "observable": {
            "omega_rate": sc.observable.omega_rate,
            "alpha": sc.observable.alpha,
            "beta_az": sc.observable.beta_az,
        },
        "integrator": {
            "rtol": sc.integrator.rtol,
            "atol": sc.integrator.atol,
            "t_start": sc.integrator.t_start,
            "t_final": sc.integrator.t_final,
            "samples_per_decade": sc.integrator.samples_per_decade,
            "max_steps": sc.integrator.max_steps,
        },
    }
    if sc.device is not None:
        g = sc.device.geometry
        data["device"] = {
            "theta": g.theta,
            "Theta": g.Theta,
            "chart_branch": g.chart_branch,
            "potential": _profile_to_dict(sc.device.profile),
        }
    if sc.sg is not None:
        data["sg"] = {
            "b_field": sc.sg.b_field,
            "beta_grad": sc.sg.beta_grad,
            "V": sc.sg.V,
            "t_end": sc.sg.t_end,
            "t_w": sc.sg.t_w,
        }
    if sc.sweep is not None:
        data["sweep"] = {
            "variable": sc.sweep.variable,
            "values": [list(v) if isinstance(v, tuple) else v for v in sc.sweep.values],
        }
    return data


def _toml_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        # repr round-trips binary64; force a float-looking literal for TOML.
        s = repr(v)
        if "." not in s and "e" not in s and "inf" not in s and "nan" not in s:
            s += ".0"
        return s
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_scalar(x) for x in v) + "]"
    raise ConfigError(f"cannot serialize value of type {type(v).__name__}")


def dumps_toml(data: dict) -> str:
    """Serialize a nested dict of scalars/lists/tables to TOML text."""
    lines: list[str] = []

    def emit(table: dict, prefix: str):
        subtables = []
        for k, v in table.items():
            if isinstance(v, dict):
                subtables.append((k, v))
            else:
                lines.append(f"{k} = {_toml_scalar(v)}")
        for k, v in subtables:
            path = f"{prefix}.{k}" if prefix else k
            lines.append("")
            lines.append(f"[{path}]")
            emit(v, path)

    emit(data, "")
    return "\n".join(lines) + "\n"


def load_scenario(path) -> Scenario:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error in {path}: {exc}") from exc
    return scenario_from_dict(data)


def loads_scenario(text: str) -> Scenario:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}") from exc
    return scenario_from_dict(data)


def dump_scenario(sc: Scenario, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_toml(scenario_to_dict(sc)))


def dumps_scenario(sc: Scenario) -> str:
    return dumps_toml(scenario_to_dict(sc))
