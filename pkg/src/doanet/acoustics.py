"""Simulated acoustic environments.

Room geometry, uniform linear arrays, image-method room impulse
responses, far-field steering vectors, and isotropic diffuse noise
fields.  DOA is a 1-D angle in [0, 180] degrees measured from the array
axis; the array is horizontal and sources lie in the array plane.
"""

import json
import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.signal

from doanet import dsp, rng
from doanet._accel import rir_accumulate

__all__ = [
    "SPEED_OF_SOUND",
    "RoomConfig",
    "ArrayGeometry",
    "SourcePlacement",
    "Rir",
    "ula",
    "image_method_rir",
    "simulate_rir",
    "steering_vector",
    "diffuse_noise",
    "babble_like_noise",
    "write_rir",
    "read_rir",
]

SPEED_OF_SOUND = 343.0

_SINC_HALF_WIDTH = 40  # 81-tap windowed-sinc fractional delay
_DRIR_MAGIC = b"DRIR"
_DRIR_VERSION = 1


@dataclass(frozen=True)
class RoomConfig:
    """Shoebox room: dimensions in meters, reverberation time in seconds."""

    dimensions: tuple
    rt60: float
    speed_of_sound: float = SPEED_OF_SOUND

    def __post_init__(self):
        if len(self.dimensions) != 3 or any(d <= 0 for d in self.dimensions):
            raise ValueError("room dimensions must be three positive lengths")
        if self.rt60 < 0:
            raise ValueError("rt60 must be >= 0")

    def contains(self, point, margin=0.0):
        p = np.asarray(point)
        lo = margin
        return bool(
            np.all(p > lo) and np.all(p < np.asarray(self.dimensions) - lo)
        )


@dataclass
class ArrayGeometry:
    """Microphone positions (M, 3) plus the array axis used for DOA."""

    mic_positions: np.ndarray
    axis: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))

    def __post_init__(self):
        self.mic_positions = np.atleast_2d(
            np.asarray(self.mic_positions, dtype=np.float64)
        )
        if self.mic_positions.shape[0] < 2:
            raise ValueError("array needs at least 2 microphones")
        if self.mic_positions.shape[1] != 3:
            raise ValueError("mic positions must be 3-D points")
        self.axis = np.asarray(self.axis, dtype=np.float64)
        norm = np.linalg.norm(self.axis)
        if norm == 0:
            raise ValueError("array axis must be a nonzero vector")
        self.axis = self.axis / norm

    @property
    def num_mics(self):
        return self.mic_positions.shape[0]

    @property
    def center(self):
        return self.mic_positions.mean(axis=0)

    @property
    def aperture(self):
        diffs = self.mic_positions[-1] - self.mic_positions[0]
        return float(np.linalg.norm(diffs))

    def doa_direction(self, doa_deg):
        """Unit vector toward a source at the given DOA, in the array plane."""
        perp = np.cross([0.0, 0.0, 1.0], self.axis)
        norm = np.linalg.norm(perp)
        if norm < 1e-12:
            raise ValueError("vertical array axis: DOA plane is undefined")
        perp = perp / norm
        theta = np.radians(doa_deg)
        return np.cos(theta) * self.axis + np.sin(theta) * perp


@dataclass(frozen=True)
class SourcePlacement:
    """A source at (doa degrees, distance meters) relative to an array."""

    doa_deg: float
    distance: float

    def __post_init__(self):
        if not 0.0 <= self.doa_deg <= 180.0:
            raise ValueError("doa must be in [0, 180] degrees")
        if self.distance <= 0:
            raise ValueError("distance must be positive")

    def position(self, geometry):
        return geometry.center + self.distance * geometry.doa_direction(
            self.doa_deg
        )


@dataclass
class Rir:
    """Sampled room impulse response, one row of taps per microphone."""

    taps: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.taps = np.atleast_2d(np.asarray(self.taps, dtype=np.float64))

    @property
    def num_mics(self):
        return self.taps.shape[0]

    @property
    def num_taps(self):
        return self.taps.shape[1]


def ula(center, num_mics, spacing, axis=(1.0, 0.0, 0.0)):
    """Uniform linear array of ``num_mics`` mics, symmetric about center.

    Aperture is ``(num_mics - 1) * spacing``.
    """
    if num_mics < 2:
        raise ValueError("ULA needs at least 2 microphones")
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    center = np.asarray(center, dtype=np.float64)
    offsets = (np.arange(num_mics) - (num_mics - 1) / 2.0) * spacing
    return ArrayGeometry(center + offsets[:, None] * axis, axis=axis)


def _reflection_coefficient(room):
    """Uniform wall reflection coefficient from rt60 (Sabine inversion)."""
    if room.rt60 == 0:
        return 0.0
    lx, ly, lz = room.dimensions
    volume = lx * ly * lz
    surface = 2.0 * (lx * ly + lx * lz + ly * lz)
    alpha = 0.161 * volume / (surface * room.rt60)
    if alpha >= 1.0:
        raise ValueError(
            f"rt60 {room.rt60} s is shorter than this room can absorb "
            f"(Sabine absorption {alpha:.2f} >= 1)"
        )
    return float(np.sqrt(1.0 - alpha))


def default_rir_length(room, fs):
    """rt60 * fs * 1.2 rounded up, capped at one second of taps."""
    if room.rt60 == 0:
        diag = float(np.linalg.norm(room.dimensions))
        return int(np.ceil(diag / room.speed_of_sound * fs)) + 4 * _SINC_HALF_WIDTH
    return min(int(np.ceil(room.rt60 * fs * 1.2)), fs)


def _axis_images(source_d, length, mic_d, d_max):
    """Image coordinates and wall-hit counts along one room dimension."""
    n_max = int(np.ceil((d_max + length) / (2.0 * length))) + 1
    n = np.arange(-n_max, n_max + 1)
    coords = np.concatenate([2 * n * length + source_d, 2 * n * length - source_d])
    hits = np.concatenate([2 * np.abs(n), np.abs(n - 1) + np.abs(n)])
    keep = np.abs(coords - mic_d) <= d_max
    return coords[keep], hits[keep]


def image_method_rir(
    room, source, mic, fs, max_len=None, seed=0, jitter_m=0.0, highpass_hz=100.0
):
    """Image-method RIR between one source and one microphone.

    Uniform frequency-independent reflection coefficient derived from the
    room rt60 (Sabine inversion), fractional tap placement with an 81-tap
    windowed sinc, amplitude 1/(4*pi*d) per image.  Reverberant responses
    are high-passed at ``highpass_hz`` (all-positive reflection
    coefficients otherwise pile up a coherent near-DC tail that decays
    far slower than the target rt60); anechoic responses are returned as
    the bare fractional-delay pulse.  ``jitter_m`` optionally displaces
    reflected images by up to that many meters (seeded), a standard
    decorrelation trick for high-order images; 0 disables it.

    Returns a float64 tap array of length ``max_len``.
    """
    source = np.asarray(source, dtype=np.float64)
    mic = np.asarray(mic, dtype=np.float64)
    if not room.contains(source):
        raise ValueError(f"source position {source.tolist()} outside room")
    if not room.contains(mic):
        raise ValueError(f"mic position {mic.tolist()} outside room")
    if np.linalg.norm(source - mic) < 1e-9:
        raise ValueError("source and mic positions coincide")
    if max_len is None:
        max_len = default_rir_length(room, fs)
    c = room.speed_of_sound
    beta = _reflection_coefficient(room)
    d_max = (max_len - 1 + _SINC_HALF_WIDTH) / fs * c

    per_dim = [
        _axis_images(source[d], room.dimensions[d], mic[d], d_max)
        for d in range(3)
    ]
    cx, hx = per_dim[0]
    cy, hy = per_dim[1]
    cz, hz = per_dim[2]
    dx = cx[:, None, None] - mic[0]
    dy = cy[None, :, None] - mic[1]
    dz = cz[None, None, :] - mic[2]
    dist = np.sqrt(dx * dx + dy * dy + dz * dz)
    hits = (
        hx[:, None, None] + hy[None, :, None] + hz[None, None, :]
    ).astype(np.float64)
    dist = dist.reshape(-1)
    hits = hits.reshape(-1)
    if jitter_m > 0.0:
        gen = rng.generator(rng.derive_seed(seed, "rir-jitter"))
        shift = gen.uniform(-jitter_m, jitter_m, size=dist.shape)
        dist = np.where(hits > 0, np.maximum(dist + shift, 1e-3), dist)
    keep = (dist <= d_max) & (dist > 1e-9)
    if beta == 0.0:
        keep &= hits == 0
    dist = dist[keep]
    hits = hits[keep]
    amps = beta**hits / (4.0 * np.pi * dist)
    times = dist / c * fs
    h = rir_accumulate(times, amps, max_len, _SINC_HALF_WIDTH)
    if beta > 0.0 and highpass_hz > 0.0:
        sos = scipy.signal.butter(2, highpass_hz, "highpass", fs=fs, output="sos")
        h = scipy.signal.sosfilt(sos, h)
    return h


def simulate_rir(room, source, geometry, fs, max_len=None, seed=0, jitter_m=0.0):
    """Image-method RIR from one source to every mic of an array."""
    if max_len is None:
        max_len = default_rir_length(room, fs)
    taps = np.stack(
        [
            image_method_rir(room, source, mic, fs, max_len, seed, jitter_m)
            for mic in geometry.mic_positions
        ]
    )
    return Rir(taps, fs)


def steering_vector(geometry, doa_deg, freq, c=SPEED_OF_SOUND):
    """Far-field steering vector exp(-2j*pi*freq*tau_m) at one frequency.

    ``tau_m`` is the arrival delay of mic m relative to the array center
    for a plane wave from ``doa_deg``; every element has unit modulus.
    """
    if freq < 0:
        raise ValueError("frequency must be >= 0")
    u = geometry.doa_direction(doa_deg)
    tau = -(geometry.mic_positions - geometry.center) @ u / c
    return np.exp(-2j * np.pi * freq * tau)


def _fibonacci_sphere(n):
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    phi = i * np.pi * (3.0 - np.sqrt(5.0))
    r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def _random_rotation(gen):
    q, r = np.linalg.qr(gen.standard_normal((3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def _plane_wave_field(geometry, num_samples, fs, num_plane_waves, seed, shaping):
    """Superpose independent-noise plane waves from uniform sphere directions.

    Each wave carries an independent white Gaussian signal, delayed per
    microphone by the projection of the mic position on the wave
    direction.  ``shaping`` optionally multiplies every wave's spectrum
    by a magnitude response over the rfft frequency grid.
    """
    if num_plane_waves < 64:
        raise ValueError("num_plane_waves must be >= 64")
    if num_samples <= 0:
        raise ValueError("num_samples must be positive")
    gen = rng.generator(seed)
    directions = _fibonacci_sphere(num_plane_waves) @ _random_rotation(gen).T
    freqs = np.fft.rfftfreq(num_samples, 1.0 / fs)
    num_bins = freqs.size
    gains = None if shaping is None else shaping(freqs)

    positions = geometry.mic_positions
    acc = np.zeros((positions.shape[0], num_bins), dtype=np.complex128)
    chunk = max(1, 32 * 131072 // num_bins)
    for lo in range(0, num_plane_waves, chunk):
        dirs = directions[lo : lo + chunk]
        nw = dirs.shape[0]
        spectra = gen.standard_normal((nw, num_bins)) + 1j * gen.standard_normal(
            (nw, num_bins)
        )
        spectra[:, 0] = spectra[:, 0].real
        spectra[:, -1] = spectra[:, -1].real
        if gains is not None:
            spectra *= gains
        # delay of each mic for each wave: tau = (p . u) / c
        tau = positions @ dirs.T / SPEED_OF_SOUND  # (M, nw)
        for m in range(positions.shape[0]):
            phase = np.exp((-2j * np.pi) * tau[m][:, None] * freqs)
            acc[m] += (spectra * phase).sum(axis=0)
    samples = np.fft.irfft(acc, n=num_samples, axis=1)
    samples /= np.sqrt(np.mean(samples**2))
    return dsp.MultichannelSignal(samples, fs)


def diffuse_noise(geometry, num_samples, fs, num_plane_waves=512, seed=0):
    """Spherically isotropic diffuse white noise, deterministic per seed.

    Inter-mic coherence follows sin(2*pi*f*d/c) / (2*pi*f*d/c).
    """
    return _plane_wave_field(geometry, num_samples, fs, num_plane_waves, seed, None)


def babble_like_noise(
    geometry, num_samples, fs, num_plane_waves=512, seed=0, knee_hz=100.0
):
    """Diffuse noise with low-frequency emphasis (-3 dB/octave above the
    knee) to mimic the speech-band dominance of babble."""

    def shaping(freqs):
        return np.sqrt(knee_hz / np.maximum(freqs, knee_hz))

    return _plane_wave_field(
        geometry, num_samples, fs, num_plane_waves, seed, shaping
    )


def write_rir(path, rir, meta=None):
    """Write a RIR container: magic, version, M, fs, taps, float32 data.

    ``meta`` (room / DOA / distance details) goes to a JSON sidecar at
    ``<path>.json``.
    """
    path = str(path)
    data = rir.taps.astype("<f4")
    header = struct.pack(
        "<4sIIII",
        _DRIR_MAGIC,
        _DRIR_VERSION,
        rir.num_mics,
        int(rir.sample_rate),
        rir.num_taps,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes(order="C"))
    if meta is not None:
        with open(path + ".json", "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)


def read_rir(path):
    """Read a RIR from the binary container or a multichannel WAV.

    Returns (Rir, meta) where meta is the sidecar dict or None.
    """
    path = str(path)
    meta = None
    try:
        with open(path + ".json") as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        pass
    if path.lower().endswith(".wav"):
        sig = dsp.read_wav(path)
        return Rir(sig.samples, sig.sample_rate), meta
    with open(path, "rb") as fh:
        header = fh.read(20)
        if len(header) < 20:
            raise ValueError(f"truncated RIR file: {path}")
        magic, version, num_mics, fs, num_taps = struct.unpack("<4sIIII", header)
        if magic != _DRIR_MAGIC:
            raise ValueError(f"not a RIR container (bad magic): {path}")
        if version != _DRIR_VERSION:
            raise ValueError(f"unsupported RIR container version {version}: {path}")
        payload = fh.read()
    expected = num_mics * num_taps * 4
    if len(payload) != expected:
        raise ValueError(
            f"corrupt RIR file {path}: expected {expected} data bytes, "
            f"got {len(payload)}"
        )
    taps = np.frombuffer(payload, dtype="<f4").reshape(num_mics, num_taps)
    return Rir(taps.astype(np.float64), fs), meta
