"""Per-request energy model for the wearable authentication chain.

All computation is in joules, meters and bits.  Budgets quoted in W·hr
convert at 1 W·hr = 3600 J (see :func:`watt_hours`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from pathlib import Path

__all__ = [
    "Channel",
    "ConfigError",
    "EnergyBreakdown",
    "EnergyParams",
    "NodeActivity",
    "SensorType",
    "TeVariant",
    "lora_energy_per_bit",
    "node_energy",
    "energy_breakdown",
    "retries",
    "watt_hours",
]


class ConfigError(Exception):
    """A required parameter is missing or malformed."""


class Channel(str, enum.Enum):
    WBAN = "wban"
    HBC = "hbc"
    LORA = "lora"


class SensorType(str, enum.Enum):
    CAPACITIVE = "capacitive"
    OPTICAL = "optical"
    NONE = "none"  # hub/cloud roles: capture energy is always zero


class TeVariant(str, enum.Enum):
    HIGH_ACCURACY = "high_accuracy"
    LIGHTWEIGHT = "lightweight"


def watt_hours(x: float) -> float:
    """Convert an energy in W·hr to joules."""
    return x * 3600.0


@dataclass(frozen=True)
class EnergyParams:
    """Per-bit, per-capture and per-extraction energy constants plus node budgets.

    Defaults are the published figures for the system under study; any field
    can be overridden programmatically or through a flat key-value file
    (see :meth:`from_file`).
    """

    e_bit_wban: float = 10e-9          # J/bit, on-body radio
    e_bit_hbc: float = 79e-12          # J/bit, body-coupled link
    e_bit_lora_ref: float = 68e-6      # J/bit at the reference distance
    d_ref: float = 500.0               # m, LoRa reference distance
    e_bit_encrypt: float = 100e-12     # J/bit through the block cipher
    e_capture_capacitive: float = 22.3e-9   # J per image capture
    e_capture_optical: float = 66e-3        # J per image capture
    e_te_high: float = 2.94            # J per high-accuracy extraction
    e_te_light: float | None = None    # J per lightweight extraction (no published value)
    image_bits: int = 320256           # raw capture size
    template_bits: int = 1408          # encoded minutiae template size
    budget_rf_harvest: float = 3.6e-3  # J per hour (1 uW·hr)
    budget_coin_cell: float = 360.0    # J per charge (100 mW·hr)
    budget_hub_total: float = 16200.0  # J per charge (4.5 W·hr)
    hub_share: float = 0.10            # fraction of hub budget granted to authentication

    def __post_init__(self) -> None:
        positive = {
            "e_bit_wban": self.e_bit_wban,
            "e_bit_hbc": self.e_bit_hbc,
            "e_bit_lora_ref": self.e_bit_lora_ref,
            "e_bit_encrypt": self.e_bit_encrypt,
            "e_capture_capacitive": self.e_capture_capacitive,
            "e_capture_optical": self.e_capture_optical,
            "e_te_high": self.e_te_high,
        }
        for name, value in positive.items():
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        if self.e_te_light is not None and not self.e_te_light > 0:
            raise ValueError("e_te_light must be strictly positive when set")
        if not self.d_ref > 0:
            raise ValueError("d_ref must be positive")
        if not 0 < self.hub_share <= 1:
            raise ValueError("hub_share must lie in (0, 1]")
        if self.image_bits <= self.template_bits:
            raise ValueError("image_bits must exceed template_bits")
        for name in ("budget_rf_harvest", "budget_coin_cell", "budget_hub_total"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def hub_budget(self) -> float:
        """Joules of the hub battery dedicated to authentication."""
        return self.budget_hub_total * self.hub_share

    def capture_energy(self, sensor: SensorType) -> float:
        if sensor is SensorType.CAPACITIVE:
            return self.e_capture_capacitive
        if sensor is SensorType.OPTICAL:
            return self.e_capture_optical
        return 0.0

    def te_energy(self, variant: TeVariant) -> float:
        if variant is TeVariant.HIGH_ACCURACY:
            return self.e_te_high
        if self.e_te_light is None:
            raise ConfigError("e_te_light is not set; configure it to use the lightweight variant")
        return self.e_te_light

    def with_overrides(self, **kwargs) -> "EnergyParams":
        return replace(self, **kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "EnergyParams":
        """Load overrides from a flat ``key = value`` file (SI units, '#' comments)."""
        fields = {f: None for f in cls.__dataclass_fields__}
        overrides: dict[str, float | int] = {}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in fields:
                raise ConfigError(f"{path}:{lineno}: unknown parameter {key!r}")
            try:
                parsed: float | int = float(value.strip())
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad number {value.strip()!r}") from exc
            if key in ("image_bits", "template_bits"):
                parsed = int(parsed)
            overrides[key] = parsed
        try:
            return cls(**overrides)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class NodeActivity:
    """Countable work one node performs for a single authentication request."""

    captures: int = 0
    te_high: int = 0            # high-accuracy extraction runs
    te_light: int = 0           # lightweight extraction runs
    bits_rx: dict[Channel, int] = field(default_factory=dict)
    bits_tx: dict[Channel, int] = field(default_factory=dict)
    bits_encrypted: int = 0
    lora_distance: float | None = None  # m, required when LoRa bits are present

    def __post_init__(self) -> None:
        for name in ("captures", "te_high", "te_light", "bits_encrypted"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        for mapping in (self.bits_rx, self.bits_tx):
            for channel, bits in mapping.items():
                if bits < 0:
                    raise ValueError(f"negative bit count for {channel}")

    def merge(self, other: "NodeActivity") -> "NodeActivity":
        """Field-wise sum of two activities (distances must agree)."""
        if (self.lora_distance is not None and other.lora_distance is not None
                and self.lora_distance != other.lora_distance):
            raise ValueError("cannot merge activities with different LoRa distances")
        rx = dict(self.bits_rx)
        for ch, bits in other.bits_rx.items():
            rx[ch] = rx.get(ch, 0) + bits
        tx = dict(self.bits_tx)
        for ch, bits in other.bits_tx.items():
            tx[ch] = tx.get(ch, 0) + bits
        return NodeActivity(
            captures=self.captures + other.captures,
            te_high=self.te_high + other.te_high,
            te_light=self.te_light + other.te_light,
            bits_rx=rx,
            bits_tx=tx,
            bits_encrypted=self.bits_encrypted + other.bits_encrypted,
            lora_distance=self.lora_distance if self.lora_distance is not None else other.lora_distance,
        )


@dataclass(frozen=True)
class EnergyBreakdown:
    """Per-term decomposition of one node's per-request energy, in joules."""

    capture: float
    te: float
    comm: float
    encrypt: float

    @property
    def total(self) -> float:
        return self.capture + self.te + self.comm + self.encrypt


def lora_energy_per_bit(distance: float, params: EnergyParams) -> float:
    """Per-bit LoRa cost at ``distance`` meters; scales with the square of distance."""
    if not distance > 0:
        raise ValueError(f"distance must be positive, got {distance!r}")
    return params.e_bit_lora_ref * (distance / params.d_ref) ** 2


def _per_bit_cost(channel: Channel, direction: str, distance: float | None,
                  params: EnergyParams) -> float:
    if channel is Channel.WBAN:
        return params.e_bit_wban
    if channel is Channel.HBC:
        return params.e_bit_hbc
    # LoRa: receive happens at the unconstrained cloud and is not charged.
    if direction == "rx":
        return 0.0
    if distance is None:
        raise ValueError("LoRa bits present but no lora_distance given")
    return lora_energy_per_bit(distance, params)


def energy_breakdown(activity: NodeActivity, sensor: SensorType,
                     params: EnergyParams) -> EnergyBreakdown:
    """Decompose one node's per-request energy into capture/TE/comm/encrypt terms."""
    capture = activity.captures * params.capture_energy(sensor)
    te = 0.0
    if activity.te_high:
        te += activity.te_high * params.te_energy(TeVariant.HIGH_ACCURACY)
    if activity.te_light:
        te += activity.te_light * params.te_energy(TeVariant.LIGHTWEIGHT)
    comm = 0.0
    for direction, mapping in (("tx", activity.bits_tx), ("rx", activity.bits_rx)):
        for channel, bits in mapping.items():
            if bits:
                comm += bits * _per_bit_cost(Channel(channel), direction,
                                             activity.lora_distance, params)
    encrypt = activity.bits_encrypted * params.e_bit_encrypt
    return EnergyBreakdown(capture=capture, te=te, comm=comm, encrypt=encrypt)


def node_energy(activity: NodeActivity, sensor: SensorType, params: EnergyParams) -> float:
    """Total joules one node spends on a single authentication request."""
    return energy_breakdown(activity, sensor, params).total


def retries(available: float, per_request: float) -> float:
    """Number of requests an energy budget supports, as a real-valued ratio.

    Callers floor the value for per-charge counts and round per-hour rates
    for display; the raw ratio is returned here.
    """
    if not per_request > 0:
        raise ValueError(f"per_request must be positive, got {per_request!r}")
    if available < 0:
        raise ValueError(f"available must be non-negative, got {available!r}")
    return available / per_request
