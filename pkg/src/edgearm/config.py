"""Global configuration file: watcher periods, monitor sensitivity, rng seed,
backend selector, and daemon plumbing (state directory, API binding, simulated
world shape). The file is YAML and hot-reloadable: the watcher re-reads it on
every loop pass, so period and sensitivity changes take effect live.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import yaml

from .errors import ConfigInvalid

BACKENDS = ("simulated", "command-script")


@dataclass
class WatcherPeriods:
    files: float = 5.0
    infra: float = 5.0
    placement: float = 15.0
    commands: float = 2.0

    def validate(self) -> None:
        for name in ("files", "infra", "placement", "commands"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ConfigInvalid(f"watcher period {name!r} must be > 0 (or null to disable)")


@dataclass
class SimulationSettings:
    enabled: bool = True
    nodes: int = 15
    regions: int = 3
    seed: int = 42
    perturb: bool = False
    monitor_period: float = 5.0
    restructure_every: int = 10


@dataclass
class OrchestratorConfig:
    periods: WatcherPeriods = field(default_factory=WatcherPeriods)
    sensitivity: float = 0.1
    seed: int = 42
    backend: str = "simulated"
    hardware_unit: str = "MB"
    state_dir: str = ".edge-arm"
    api_host: str = "127.0.0.1"
    api_port: int = 8787
    simulation: SimulationSettings = field(default_factory=SimulationSettings)
    path: str | None = None
    _mtime: float | None = None

    def validate(self) -> None:
        self.periods.validate()
        if not 0 < self.sensitivity < 1:
            raise ConfigInvalid("sensitivity must be in (0, 1)")
        if self.backend not in BACKENDS:
            raise ConfigInvalid(f"backend must be one of {BACKENDS}")

    @property
    def report_path(self) -> str:
        return os.path.join(self.state_dir, "report.json")

    @property
    def script_path(self) -> str:
        return os.path.join(self.state_dir, "commands.sh")

    @property
    def registry_path(self) -> str:
        return os.path.join(self.state_dir, "registry.json")

    @property
    def pid_path(self) -> str:
        return os.path.join(self.state_dir, "watcher.pid")

    def reload_if_changed(self) -> bool:
        """Re-read the config file when its mtime moved; returns True on reload."""
        if self.path is None or not os.path.exists(self.path):
            return False
        mtime = os.path.getmtime(self.path)
        if self._mtime is not None and mtime == self._mtime:
            return False
        fresh = load_config(self.path)
        for name in (
            "periods",
            "sensitivity",
            "seed",
            "backend",
            "hardware_unit",
            "simulation",
        ):
            setattr(self, name, getattr(fresh, name))
        self._mtime = mtime
        return True


def _period(raw, default: float) -> float | None:
    if raw is None:
        return default
    if raw is False:
        return None  # YAML reads a bare `off` as boolean false
    if isinstance(raw, str) and raw.lower() in ("inf", "off", "disabled"):
        return None  # source disabled
    return float(raw)


def load_config(path: str | None = None) -> OrchestratorConfig:
    """Load the YAML config; a missing path yields all defaults."""
    config = OrchestratorConfig(path=path)
    if path is None:
        config.validate()
        return config
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh) or {}
    except FileNotFoundError:
        raise ConfigInvalid(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigInvalid(f"config is not valid YAML: {exc}")
    if not isinstance(doc, dict):
        raise ConfigInvalid("config top level must be a mapping")

    periods = doc.get("periods", {}) or {}
    config.periods = WatcherPeriods(
        files=_period(periods.get("files"), 5.0),
        infra=_period(periods.get("infra"), 5.0),
        placement=_period(periods.get("placement"), 15.0),
        commands=_period(periods.get("commands"), 2.0),
    )
    config.sensitivity = float(doc.get("sensitivity", 0.1))
    config.seed = int(doc.get("seed", 42))
    config.backend = str(doc.get("backend", "simulated"))
    config.hardware_unit = str(doc.get("hardware_unit", "MB"))
    config.state_dir = str(doc.get("state_dir", ".edge-arm"))
    api = doc.get("api", {}) or {}
    config.api_host = str(api.get("host", "127.0.0.1"))
    config.api_port = int(api.get("port", 8787))
    sim = doc.get("simulation", {}) or {}
    config.simulation = SimulationSettings(
        enabled=bool(sim.get("enabled", True)),
        nodes=int(sim.get("nodes", 15)),
        regions=int(sim.get("regions", 3)),
        seed=int(sim.get("seed", config.seed)),
        perturb=bool(sim.get("perturb", False)),
        monitor_period=float(sim.get("monitor_period", 5.0)),
        restructure_every=int(sim.get("restructure_every", 10)),
    )
    config._mtime = os.path.getmtime(path)
    config.validate()
    return config
