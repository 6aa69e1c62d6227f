"""System configuration: physical parameters, power budgets, profiles, file I/O.

All powers are stored in watts. dBm-valued literature defaults are converted
once, here, via ``dbm_to_watt``. Per-AP / per-user / per-RIS quantities are
stored as tuples sized to the respective counts; scalars given at construction
are broadcast.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

SCHEMA_VERSION = 1


def dbm_to_watt(p_dbm: float) -> float:
    """Convert a power level from dBm to watts."""
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watt_to_dbm(p_watt: float) -> float:
    """Convert a power level from watts to dBm."""
    if p_watt <= 0:
        raise ValueError("power must be positive to express in dBm")
    import math

    return 10.0 * math.log10(p_watt) + 30.0


def _broadcast(value, count: int, name: str) -> tuple:
    """Return `value` as a tuple of length `count`, broadcasting scalars."""
    if isinstance(value, (int, float)):
        return (float(value),) * count
    out = tuple(float(v) for v in value)
    if len(out) != count:
        raise ValueError(f"{name} must have {count} entries, got {len(out)}")
    return out


def _broadcast_int(value, count: int, name: str) -> tuple:
    if isinstance(value, int):
        return (value,) * count
    out = tuple(int(v) for v in value)
    if len(out) != count:
        raise ValueError(f"{name} must have {count} entries, got {len(out)}")
    return out


@dataclass(frozen=True)
class SystemConfig:
    """All physical and algorithmic parameters of one scenario.

    Defaults follow the standard full-scale parameter set; the number of AP
    antennas (16) and the per-AP power budget (30 dBm) have no stated source
    value and are explicitly flagged as tool defaults.
    """

    # carrier and band
    fc: float = 0.14e12
    bw: float = 5.0e9
    n_subcarriers: int = 4

    # node counts and array sizes
    n_aps: int = 3
    n_ap_antennas: int = 16  # flagged: not part of the published parameter set
    n_users: int = 4
    n_user_antennas: int = 4
    n_ris: int = 2
    n_ris_elements: int = 64

    # constraints
    min_rate: float = 0.1  # bit/s/Hz per user per subcarrier
    beta_max: float = 10.0  # amplitude bound (20 dB power gain)
    p_ap_max: tuple = 1.0  # W per AP; flagged: 30 dBm tool default
    p_ris_max: tuple = dbm_to_watt(20.0)  # W per RIS

    # efficiencies and propagation
    eta_ap: float = 0.9
    eta_ris: float = 0.8
    absorption: float = 6e-5  # molecular absorption coefficient (1/m)
    noise_density: float = dbm_to_watt(-174.0)  # W/Hz
    sigma2_ris: tuple | None = None  # W per RIS; None -> per-subcarrier noise power

    # DACs
    bits_per_ap: tuple = 1

    # static power
    p_ap_circuit: tuple = 0.0316  # W per AP antenna
    p_user_circuit: tuple = 0.1  # W per user
    p_backhaul: tuple = 0.825  # W per AP
    p_ris_switch: float = dbm_to_watt(-10.0)  # W per RIS element (control circuit)
    p_ris_bias: float = dbm_to_watt(-5.0)  # W per RIS element (DC bias)

    # objective and geometry
    kappa: float = 0.5
    user_distance: float = 5.0  # m, near edge of the user square
    ris_pos: tuple = ((5.0, 3.0, 6.0), (8.0, 3.0, 6.0))
    seed: int = 0

    def __post_init__(self):
        if self.fc <= 0 or self.bw <= 0:
            raise ValueError("fc and bw must be positive")
        if self.n_subcarriers < 1:
            raise ValueError("n_subcarriers must be >= 1")
        if self.n_aps < 2:
            raise ValueError("n_aps must be >= 2 (single-AP placement is undefined)")
        for name in ("n_ap_antennas", "n_users", "n_user_antennas"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.n_ris < 0 or self.n_ris_elements < 0:
            raise ValueError("RIS counts must be >= 0")
        if not 0.0 <= self.kappa <= 1.0:
            raise ValueError("kappa must lie in [0, 1]")
        if not 0.0 < self.eta_ap <= 1.0 or not 0.0 < self.eta_ris <= 1.0:
            raise ValueError("efficiencies must lie in (0, 1]")
        if self.beta_max <= 0:
            raise ValueError("beta_max must be positive")
        if self.min_rate < 0:
            raise ValueError("min_rate must be >= 0")
        if self.absorption < 0 or self.noise_density <= 0:
            raise ValueError("absorption must be >= 0 and noise_density > 0")

        set_ = object.__setattr__
        set_(self, "p_ap_max", _broadcast(self.p_ap_max, self.n_aps, "p_ap_max"))
        set_(self, "p_ris_max", _broadcast(self.p_ris_max, self.n_ris, "p_ris_max"))
        set_(self, "p_ap_circuit", _broadcast(self.p_ap_circuit, self.n_aps, "p_ap_circuit"))
        set_(self, "p_user_circuit", _broadcast(self.p_user_circuit, self.n_users, "p_user_circuit"))
        set_(self, "p_backhaul", _broadcast(self.p_backhaul, self.n_aps, "p_backhaul"))
        set_(self, "bits_per_ap", _broadcast_int(self.bits_per_ap, self.n_aps, "bits_per_ap"))
        if self.sigma2_ris is not None:
            set_(self, "sigma2_ris", _broadcast(self.sigma2_ris, self.n_ris, "sigma2_ris"))
        pos = tuple(tuple(float(c) for c in p) for p in self.ris_pos)
        if len(pos) != self.n_ris:
            raise ValueError(f"ris_pos must list {self.n_ris} positions, got {len(pos)}")
        if any(len(p) != 3 for p in pos):
            raise ValueError("each RIS position must have 3 coordinates")
        set_(self, "ris_pos", pos)

        if any(p <= 0 for p in self.p_ap_max):
            raise ValueError("p_ap_max entries must be positive")
        if any(p < 0 for p in self.p_ris_max):
            raise ValueError("p_ris_max entries must be >= 0")
        if any(b < 1 for b in self.bits_per_ap):
            raise ValueError("bits_per_ap entries must be >= 1")

    # ---- derived quantities ----

    @property
    def subcarrier_bandwidth(self) -> float:
        return self.bw / self.n_subcarriers

    @property
    def sampling_rate(self) -> float:
        """DAC sampling rate: twice the per-subcarrier bandwidth."""
        return 2.0 * self.subcarrier_bandwidth

    @property
    def noise_power(self) -> float:
        """Receiver thermal noise power per subcarrier (W)."""
        return self.noise_density * self.subcarrier_bandwidth

    @property
    def sigma2_ris_effective(self) -> tuple:
        """Per-RIS thermal noise power (W); defaults to the user noise power."""
        if self.sigma2_ris is not None:
            return self.sigma2_ris
        return (self.noise_power,) * self.n_ris

    def replace(self, **changes) -> "SystemConfig":
        """Return a copy with the given fields replaced (re-validated)."""
        return dataclasses.replace(self, **changes)


# ---- profiles ----

_DESK_OVERRIDES = dict(
    n_subcarriers=2,
    n_aps=2,
    n_ap_antennas=4,
    n_users=2,
    n_user_antennas=2,
    n_ris=2,
    n_ris_elements=16,
)

PROFILES = ("desk", "paper")


def default_config() -> SystemConfig:
    """Full-scale default scenario."""
    return SystemConfig()


def desk_config() -> SystemConfig:
    """Small scenario sized for CI and laptop runs."""
    return SystemConfig(**_DESK_OVERRIDES)


def profile_config(name: str) -> SystemConfig:
    if name == "desk":
        return desk_config()
    if name == "paper":
        return default_config()
    raise ValueError(f"unknown profile {name!r}; expected one of {PROFILES}")


# ---- file I/O ----

_FIELD_NAMES = tuple(f.name for f in dataclasses.fields(SystemConfig))


def config_to_dict(config: SystemConfig) -> dict:
    """Plain dict mirroring the field names exactly, plus schema_version."""
    out = {"schema_version": SCHEMA_VERSION}
    for name in _FIELD_NAMES:
        value = getattr(config, name)
        if isinstance(value, tuple):
            value = [list(v) if isinstance(v, tuple) else v for v in value]
        out[name] = value
    return out


def config_from_dict(data: dict) -> SystemConfig:
    data = dict(data)
    version = data.pop("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {version}; expected {SCHEMA_VERSION}")
    unknown = set(data) - set(_FIELD_NAMES)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {}
    for name, value in data.items():
        if isinstance(value, list):
            value = tuple(tuple(v) if isinstance(v, list) else v for v in value)
        kwargs[name] = value
    return SystemConfig(**kwargs)


def load_config(path) -> SystemConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))


def save_config(config: SystemConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(config), fh, indent=2, sort_keys=True)
        fh.write("\n")


def parse_override(text: str):
    """Parse a --set style 'key=value' override into (key, parsed value)."""
    if "=" not in text:
        raise ValueError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    key = key.strip()
    if key not in _FIELD_NAMES:
        raise ValueError(f"unknown config key {key!r}")
    return key, _parse_value(raw.strip())


def _parse_value(raw: str):
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    if low in ("none", "null"):
        return None
    if "," in raw:
        return tuple(_parse_value(part) for part in raw.split(","))
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    # every config field is numeric, a tuple, a bool, or None, so anything
    # still unparsed here cannot be a valid override value
    raise ValueError(f"cannot parse override value {raw!r}")


def apply_overrides(config: SystemConfig, overrides) -> SystemConfig:
    """Apply parsed (key, value) pairs onto a config, re-validating."""
    changes = {}
    for item in overrides:
        key, value = item if isinstance(item, tuple) else parse_override(item)
        changes[key] = value
    return config.replace(**changes) if changes else config
