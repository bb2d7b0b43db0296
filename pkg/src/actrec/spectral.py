"""One-sided magnitude spectra of windowed accelerometer signals.

Each window of N samples per axis is reduced to a single magnitude
spectrum of N/2+1 bins per axis; concatenating the three axes gives the
feature vector of length 3*(N/2 + 1) consumed by the deep model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .ingest import WindowFrame

UNLABELED = "unlabeled"


def feature_length(n: int) -> int:
    """Feature vector length for an even window size n: 3*(n/2 + 1)."""
    if n < 2 or n % 2 != 0:
        raise ConfigError(f"window length must be even and >= 2, got {n}")
    return 3 * (n // 2 + 1)


@dataclass(frozen=True)
class SpectralFeature:
    """Concatenated per-axis magnitude spectra of one window.

    values is ordered [x spectrum | y spectrum | z spectrum] and has
    length 3*(n/2 + 1). The label and origin are inherited from the
    source window.
    """

    values: np.ndarray
    n: int
    label: str = UNLABELED
    user: str = ""
    start: int = 0

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        expected = feature_length(self.n)
        if self.values.shape != (expected,):
            raise ConfigError(
                f"feature length {self.values.shape} does not match 3*({self.n}/2+1) = {expected}"
            )

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def origin(self) -> tuple[str, int]:
        return (self.user, self.start)


def dft_magnitude(signal: np.ndarray) -> np.ndarray:
    """One-sided magnitude spectrum, normalized by the window length.

    Bin k holds |sum_j signal_j * exp(-2*pi*i*j*k/N)| / N for
    k = 0 .. N/2, so the DC bin equals the signal mean. Any even N >= 2
    is accepted.
    """
    signal = np.asarray(signal, dtype=np.float64)
    if signal.ndim != 1:
        raise ConfigError(f"expected a 1-D signal, got shape {signal.shape}")
    n = signal.shape[0]
    if n < 2 or n % 2 != 0:
        raise ConfigError(f"signal length must be even and >= 2, got {n}")
    if not np.all(np.isfinite(signal)):
        raise ConfigError("signal contains non-finite values")
    return np.abs(np.fft.rfft(signal)) / n


def spectral_feature(
    window: WindowFrame,
    *,
    taper: str = "rectangular",
    log_magnitude: bool = False,
) -> SpectralFeature:
    """Spectral feature vector of a window: per-axis magnitude spectra, x|y|z.

    taper "hann" applies a Hann window before the transform; the default
    is rectangular. log_magnitude switches to log(magnitude + 1e-12),
    which gives up the entries-nonnegative invariant. Both are off for
    all headline runs.
    """
    if taper not in ("rectangular", "hann"):
        raise ConfigError(f"unknown taper {taper!r}")
    axes = [np.asarray(window.x), np.asarray(window.y), np.asarray(window.z)]
    if taper == "hann":
        w = np.hanning(window.n)
        axes = [a * w for a in axes]
    parts = [dft_magnitude(a) for a in axes]
    values = np.concatenate(parts)
    if log_magnitude:
        values = np.log(values + 1e-12)
    return SpectralFeature(
        values=values, n=window.n, label=window.label, user=window.user, start=window.start
    )


def feature_matrix(features) -> np.ndarray:
    """Stack feature values into a 2-D (count x L) array."""
    if len(features) == 0:
        raise ConfigError("empty feature list")
    return np.stack([f.values for f in features])
