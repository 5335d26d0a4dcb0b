"""Software model of the on-body link.

The body-coupled link carries Manchester-coded frames (the body passes only
AC, so the line code must be DC-balanced): an alternating preamble, a sync
word, a 16-bit byte length, the payload and a CRC-16/CCITT, all MSB-first.
The channel applies attenuation, mains hum and Gaussian noise; the receiver
decides each bit either from the two half-bit midpoint samples or from the
integrate-and-dump sums over each half bit.  The conventional on-body radio
is modelled as an error-free byte pipe (its cost lives in the energy model).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import signal as sp_signal

__all__ = [
    "SYNC_WORD",
    "PREAMBLE_BITS",
    "ChannelModel",
    "Waveform",
    "RxStats",
    "FramingError",
    "SyncError",
    "IntegrityError",
    "DecodeMode",
    "crc16_ccitt",
    "frame_data_bits",
    "encode_frame",
    "transmit",
    "highpass_bias",
    "decode_bits",
    "receive_decode",
    "eye_opening",
    "ber",
    "wban_transfer",
    "sweep_hum",
    "waveform_to_csv",
    "waveform_from_csv",
]

SYNC_WORD = 0xF3A5
PREAMBLE_BITS = (1, 0, 1, 0, 1, 0, 1, 0)
MAX_PAYLOAD = 0xFFFF  # length field is 16 bits of bytes


class FramingError(Exception):
    """Payload cannot be framed."""


class SyncError(Exception):
    """No complete frame found in the decoded bit stream."""


class IntegrityError(Exception):
    """Frame located but its checksum does not verify."""


class DecodeMode:
    DIRECT = "direct_sample"
    INTEGRATE_AND_DUMP = "integrate_and_dump"
    ALL = (DIRECT, INTEGRATE_AND_DUMP)


def _crc_table(poly: int = 0x1021) -> tuple[int, ...]:
    table = []
    for byte in range(256):
        crc = byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ poly if crc & 0x8000 else crc << 1) & 0xFFFF
        table.append(crc)
    return tuple(table)


_CRC_TABLE = _crc_table()


def crc16_ccitt(data: bytes, init: int = 0xFFFF) -> int:
    """CRC-16/CCITT (poly 0x1021, init 0xFFFF, no reflection)."""
    crc = init
    for byte in data:
        crc = ((crc << 8) & 0xFFFF) ^ _CRC_TABLE[(crc >> 8) ^ byte]
    return crc


@dataclass(frozen=True)
class ChannelModel:
    """Impairments of the body channel.

    Hum and noise amplitudes are relative to the received (attenuated)
    symbol amplitude.  Attenuation 0 models a dead link.
    """

    attenuation: float = 1.0
    hum_amplitude: float = 0.0
    hum_frequency: float = 60.0
    noise_sigma: float = 0.0
    highpass_cutoff: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.attenuation <= 1.0:
            raise ValueError("attenuation must lie in [0, 1]")
        if self.hum_amplitude < 0 or self.noise_sigma < 0:
            raise ValueError("impairment amplitudes must be non-negative")
        if self.hum_frequency <= 0:
            raise ValueError("hum frequency must be positive")

    @property
    def deterministic(self) -> bool:
        """True when the waveform does not depend on the noise generator."""
        return self.noise_sigma == 0.0


@dataclass(frozen=True)
class Waveform:
    """Sampled real-valued signal; ``bit_period`` is samples per data bit."""

    sample_rate: float
    samples: np.ndarray
    bit_period: int

    def __post_init__(self) -> None:
        if self.bit_period < 4 or self.bit_period % 2:
            raise ValueError("bit_period must be an even integer >= 4")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))


@dataclass(frozen=True)
class RxStats:
    n_bits: int
    eye_opening: float
    bit_errors: int | None = None
    ber: float | None = None


def frame_data_bits(payload: bytes) -> np.ndarray:
    """Frame field bits (before line coding) as a 0/1 uint8 array."""
    if len(payload) > MAX_PAYLOAD:
        raise FramingError(f"payload of {len(payload)} bytes exceeds {MAX_PAYLOAD}")
    length = len(payload).to_bytes(2, "big")
    crc = crc16_ccitt(length + payload).to_bytes(2, "big")
    body = SYNC_WORD.to_bytes(2, "big") + length + payload + crc
    return np.concatenate([
        np.array(PREAMBLE_BITS, dtype=np.uint8),
        np.unpackbits(np.frombuffer(body, dtype=np.uint8)),
    ])


def _manchester(bits: np.ndarray) -> np.ndarray:
    """0 -> (-1,+1), 1 -> (+1,-1); the symbol stream sums to zero exactly."""
    symbols = np.empty(bits.size * 2, dtype=np.int8)
    levels = np.where(bits.astype(bool), 1, -1).astype(np.int8)
    symbols[0::2] = levels
    symbols[1::2] = -levels
    return symbols


def encode_frame(payload: bytes) -> np.ndarray:
    """Manchester symbol stream (+1/-1 int8) for one frame."""
    return _manchester(frame_data_bits(payload))


def transmit(symbols: np.ndarray, bit_period: int, channel: ChannelModel,
             seed, sample_rate: float = 1_000_000.0) -> Waveform:
    """Expand symbols to samples and apply the channel impairments."""
    if bit_period < 4 or bit_period % 2:
        raise ValueError("bit_period must be an even integer >= 4")
    half = bit_period // 2
    clean = np.repeat(np.asarray(symbols, dtype=np.float64), half)
    t = np.arange(clean.size) / sample_rate
    rng = np.random.default_rng(seed)
    a = channel.attenuation
    received = a * clean
    if channel.hum_amplitude:
        received = received + a * channel.hum_amplitude * np.sin(
            2.0 * np.pi * channel.hum_frequency * t)
    if channel.noise_sigma:
        received = received + a * channel.noise_sigma * rng.standard_normal(clean.size)
    return Waveform(sample_rate=sample_rate, samples=received, bit_period=bit_period)


def highpass_bias(w: Waveform, cutoff: float) -> Waveform:
    """First-order high-pass; kills DC and mains hum, passes the signal band."""
    if not 0 < cutoff < w.sample_rate / 2:
        raise ValueError("cutoff must lie in (0, sample_rate/2)")
    b, a = sp_signal.butter(1, cutoff, btype="highpass", fs=w.sample_rate)
    return replace(w, samples=sp_signal.lfilter(b, a, w.samples))


def _bit_statistics(w: Waveform, mode: str) -> np.ndarray:
    """Per-bit decision statistic: first half minus second half of each bit."""
    bp = w.bit_period
    half = bp // 2
    n_bits = w.samples.size // bp
    if n_bits == 0:
        return np.zeros(0)
    halves = w.samples[:n_bits * bp].reshape(n_bits, 2, half)
    if mode == DecodeMode.DIRECT:
        stat = halves[:, :, half // 2]
    elif mode == DecodeMode.INTEGRATE_AND_DUMP:
        stat = halves.mean(axis=2)
    else:
        raise ValueError(f"unknown decode mode {mode!r}")
    return stat[:, 0] - stat[:, 1]


def decode_bits(w: Waveform, mode: str) -> tuple[np.ndarray, np.ndarray]:
    """Hard bit decisions and the underlying per-bit statistics."""
    stats = _bit_statistics(w, mode)
    return (stats > 0).astype(np.uint8), stats


def eye_opening(w: Waveform, mode: str) -> float:
    """min|statistic| / max|statistic| over all bits: 1 fully open, 0 closed."""
    stats = np.abs(_bit_statistics(w, mode))
    if stats.size == 0 or stats.max() == 0:
        return 0.0
    return float(stats.min() / stats.max())


def _find_frame(bits: np.ndarray) -> tuple[int, int]:
    """Offset of the first complete frame's sync word and its payload length."""
    sync = np.unpackbits(np.frombuffer(SYNC_WORD.to_bytes(2, "big"), dtype=np.uint8))
    if bits.size >= sync.size:
        windows = np.lib.stride_tricks.sliding_window_view(bits, sync.size)
        hits = np.nonzero((windows == sync).all(axis=1))[0]
    else:
        hits = np.array([], dtype=int)
    for pos in hits.tolist():
        after = pos + sync.size
        if after + 16 > bits.size:
            break
        length = int(np.packbits(bits[after:after + 16]).view(">u2")[0])
        end = after + 16 + 8 * length + 16
        if end <= bits.size:
            return pos, length
    raise SyncError("no complete frame found in the bit stream")


def receive_decode(w: Waveform, mode: str,
                   reference_bits: np.ndarray | None = None) -> tuple[bytes, RxStats]:
    """Demodulate, hunt for the sync word and verify the checksum.

    Raises :class:`SyncError` when no complete frame is present and
    :class:`IntegrityError` (payload withheld) when the CRC fails.
    """
    bits, stats = decode_bits(w, mode)
    abs_stats = np.abs(stats)
    eye = float(abs_stats.min() / abs_stats.max()) if stats.size and abs_stats.max() > 0 else 0.0
    errors: int | None = None
    rate: float | None = None
    if reference_bits is not None and reference_bits.size == bits.size:
        errors = int(np.count_nonzero(bits != reference_bits))
        rate = errors / bits.size if bits.size else 0.0
    rx_stats = RxStats(n_bits=int(bits.size), eye_opening=eye, bit_errors=errors, ber=rate)
    pos, length = _find_frame(bits)
    after = pos + 16
    frame_bytes = np.packbits(bits[after:after + 16 + 8 * length + 16]).tobytes()
    length_payload, crc = frame_bytes[:2 + length], frame_bytes[2 + length:2 + length + 2]
    if crc16_ccitt(length_payload) != int.from_bytes(crc, "big"):
        raise IntegrityError("frame checksum mismatch")
    return length_payload[2:], rx_stats


def ber(tx: np.ndarray, rx: np.ndarray) -> float:
    """Fraction of differing bits between two equal-length 0/1 sequences."""
    tx = np.asarray(tx)
    rx = np.asarray(rx)
    if tx.shape != rx.shape:
        raise ValueError(f"length mismatch: {tx.shape} vs {rx.shape}")
    if tx.size == 0:
        raise ValueError("empty bit sequences")
    return float(np.count_nonzero(tx != rx) / tx.size)


def wban_transfer(payload: bytes) -> bytes:
    """The conventional radio is an error-free pipe; energy is modelled elsewhere."""
    return bytes(payload)


def sweep_hum(payload: bytes, hum_amplitudes: list[float], channel: ChannelModel,
              bit_period: int, seed: int, modes: tuple[str, ...] = DecodeMode.ALL,
              sample_rate: float = 1_000_000.0) -> list[dict]:
    """BER and eye opening per decode mode over a hum-amplitude sweep.

    Both modes score the same seeded waveform at each sweep point.
    """
    reference = frame_data_bits(payload)
    symbols = _manchester(reference)
    records = []
    for idx, hum in enumerate(hum_amplitudes):
        cm = replace(channel, hum_amplitude=hum)
        w = transmit(symbols, bit_period, cm, seed=seed + idx, sample_rate=sample_rate)
        if cm.highpass_cutoff is not None:
            w = highpass_bias(w, cm.highpass_cutoff)
        for mode in modes:
            bits, _ = decode_bits(w, mode)
            records.append({
                "hum_amplitude": hum,
                "mode": mode,
                "ber": ber(reference, bits),
                "eye_opening": eye_opening(w, mode),
            })
    return records


def waveform_to_csv(w: Waveform) -> str:
    lines = ["index,value"]
    lines += [f"{i},{v!r}" for i, v in enumerate(w.samples.tolist())]
    return "\n".join(lines) + "\n"


def waveform_from_csv(text: str, sample_rate: float, bit_period: int) -> Waveform:
    rows = text.strip().splitlines()
    if not rows or rows[0] != "index,value":
        raise ValueError("expected 'index,value' header")
    values = [float(r.split(",")[1]) for r in rows[1:]]
    return Waveform(sample_rate=sample_rate, samples=np.array(values), bit_period=bit_period)
