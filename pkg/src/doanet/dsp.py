"""Primitive DSP: windows, STFT analysis, noise synthesis, SNR mixing,
convolution, and WAV I/O.

All functions are pure; multichannel audio is carried as a
:class:`MultichannelSignal` with a ``(channels, samples)`` array.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.io.wavfile
import scipy.signal

from doanet import rng

__all__ = [
    "MultichannelSignal",
    "Spectrogram",
    "hann_window",
    "stft",
    "white_noise",
    "mix_at_snr",
    "convolve",
    "read_wav",
    "write_wav",
]


@dataclass
class MultichannelSignal:
    """Time-domain audio, one row per channel.

    Attributes
    ----------
    samples : np.ndarray, shape (channels, num_samples)
    sample_rate : int, Hz
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.atleast_2d(np.asarray(self.samples))
        if self.samples.ndim != 2:
            raise ValueError("samples must be a (channels, num_samples) array")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    @property
    def num_channels(self):
        return self.samples.shape[0]

    @property
    def num_samples(self):
        return self.samples.shape[1]

    @property
    def duration(self):
        return self.num_samples / self.sample_rate


@dataclass
class Spectrogram:
    """One-sided STFT coefficients, indexed (channel, frame, bin).

    ``num_bins`` is ``frame_len // 2 + 1`` (up to Nyquist).
    """

    bins: np.ndarray
    frame_len: int
    hop: int
    sample_rate: int = field(default=0)

    def __post_init__(self):
        self.bins = np.asarray(self.bins)
        if self.bins.ndim != 3:
            raise ValueError("bins must be (channels, frames, bins)")
        if self.bins.shape[2] != self.frame_len // 2 + 1:
            raise ValueError(
                f"expected {self.frame_len // 2 + 1} bins for frame_len "
                f"{self.frame_len}, got {self.bins.shape[2]}"
            )

    @property
    def num_channels(self):
        return self.bins.shape[0]

    @property
    def num_frames(self):
        return self.bins.shape[1]

    @property
    def num_bins(self):
        return self.bins.shape[2]

    def bin_frequencies(self):
        """Center frequency of each bin, k * fs / frame_len."""
        return np.arange(self.num_bins) * self.sample_rate / self.frame_len


def hann_window(n):
    """Periodic Hann window of length ``n``: 0.5 - 0.5*cos(2*pi*i/n)."""
    if n < 2:
        raise ValueError("window length must be >= 2")
    i = np.arange(n)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * i / n)


def _window(kind, n):
    if kind == "hann":
        return hann_window(n)
    if kind in ("rect", "boxcar"):
        return np.ones(n)
    raise ValueError(f"unknown window kind: {kind!r}")


def stft(signal, frame_len, hop, window="hann"):
    """Short-time Fourier transform of a multichannel signal.

    Frames the signal with the given hop, applies the analysis window and
    computes a one-sided DFT per frame.  The trailing partial frame is
    dropped, so the number of frames is
    ``(num_samples - frame_len) // hop + 1``.

    Parameters
    ----------
    signal : MultichannelSignal
    frame_len : int
        DFT length in samples; must be a power of two.
    hop : int
        Frame advance in samples, 0 < hop <= frame_len.
    window : str
        "hann" (periodic) or "rect".

    Returns
    -------
    Spectrogram with ``frame_len // 2 + 1`` bins per frame.
    """
    if frame_len < 2 or frame_len & (frame_len - 1):
        raise ValueError("frame_len must be a power of two")
    if not 0 < hop <= frame_len:
        raise ValueError("hop must satisfy 0 < hop <= frame_len")
    n = signal.num_samples
    if n < frame_len:
        raise ValueError(
            f"insufficient samples: signal has {n}, one frame needs {frame_len}"
        )
    num_frames = (n - frame_len) // hop + 1
    win = _window(window, frame_len)
    # (channels, frames, frame_len) view via strided framing
    starts = np.arange(num_frames) * hop
    frames = np.lib.stride_tricks.sliding_window_view(
        signal.samples, frame_len, axis=1
    )[:, starts, :]
    bins = np.fft.rfft(frames * win, n=frame_len, axis=2)
    return Spectrogram(bins, frame_len, hop, signal.sample_rate)


def white_noise(num_samples, channels=1, seed=0):
    """Zero-mean unit-variance Gaussian noise, deterministic per seed."""
    if num_samples <= 0:
        raise ValueError("num_samples must be positive")
    gen = rng.generator(seed)
    samples = rng.normal_box_muller(gen, num_samples * channels)
    return MultichannelSignal(
        samples.reshape(channels, num_samples), sample_rate=1
    )


def _mean_power(samples):
    return float(np.mean(np.square(samples)))


def mix_at_snr(signal, noise, snr_db):
    """Add ``noise`` to ``signal`` rescaled for a target segment-level SNR.

    The noise is scaled so that ``10*log10(P_signal / P_noise)`` equals
    ``snr_db``, with powers measured over the full segment and averaged
    across channels.
    """
    if signal.num_channels != noise.num_channels:
        raise ValueError("channel count mismatch between signal and noise")
    if signal.num_samples != noise.num_samples:
        raise ValueError("length mismatch between signal and noise")
    p_sig = _mean_power(signal.samples)
    p_noise = _mean_power(noise.samples)
    if p_sig == 0.0:
        raise ValueError("undefined SNR: signal has zero power")
    if p_noise == 0.0:
        raise ValueError("undefined SNR: noise has zero power")
    scale = np.sqrt(p_sig / (p_noise * 10.0 ** (snr_db / 10.0)))
    return MultichannelSignal(
        signal.samples + scale * noise.samples, signal.sample_rate
    )


def convolve(signal, rir):
    """Full FFT-based linear convolution of two single-channel sequences.

    Output length is ``len(signal) + len(rir) - 1``.
    """
    signal = np.asarray(signal, dtype=np.float64).reshape(-1)
    rir = np.asarray(rir, dtype=np.float64).reshape(-1)
    if signal.size == 0 or rir.size == 0:
        raise ValueError("convolve requires non-empty inputs")
    return scipy.signal.fftconvolve(signal, rir, mode="full")


_PCM16_SCALE = 32768.0


def write_wav(path, signal, fmt="float32"):
    """Write a WAV file (interleaved RIFF).

    fmt "float32" is bit-exact on round trip; "pcm16" quantizes to
    16-bit with clipping at full scale.
    """
    data = signal.samples.T
    if fmt == "float32":
        payload = data.astype(np.float32)
    elif fmt == "pcm16":
        q = np.round(data * _PCM16_SCALE)
        payload = np.clip(q, -32768, 32767).astype(np.int16)
    else:
        raise ValueError(f"unsupported WAV format: {fmt!r}")
    if payload.shape[1] == 1:
        payload = payload[:, 0]
    scipy.io.wavfile.write(str(path), signal.sample_rate, payload)


def read_wav(path):
    """Read a PCM16 or IEEE float32 WAV file as a MultichannelSignal.

    PCM16 samples are scaled to [-1, 1) by 1/32768; float32 samples are
    returned unchanged.
    """
    try:
        rate, data = scipy.io.wavfile.read(str(path))
    except ValueError as exc:
        raise ValueError(f"cannot read WAV file {path}: {exc}") from exc
    if data.ndim == 1:
        data = data[:, None]
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / _PCM16_SCALE
    elif data.dtype == np.float32:
        samples = data.astype(np.float32)
    else:
        raise ValueError(
            f"unsupported WAV codec in {path}: dtype {data.dtype} "
            "(only PCM16 and IEEE float32 are supported)"
        )
    return MultichannelSignal(samples.T, rate)
