"""Dataset loaders, sliding windows, standardization, splits, noise injection.

Three on-disk formats are supported (WISDM CSV, Daphnet whitespace
matrix, Skoda delimited matrix), all transparently gzip-compressed or
plain. Loaded samples are expressed in g-units and clipped to the
sensor saturation bound.
"""

from __future__ import annotations

import gzip
import io
import math
import os
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, EmptyInputError, UnknownLabelError

UNLABELED = "unlabeled"

# Canonical activity identifiers per dataset, in canonical index order.
WISDM_LABELS = ["walking", "jogging", "upstairs", "downstairs", "sitting", "standing"]
DAPHNET_LABELS = ["no_freeze", "freeze"]
SKODA_LABELS = [f"activity_{code}" for code in range(48, 58)]

_WISDM_NATIVE = {
    "Walking": "walking",
    "Jogging": "jogging",
    "Upstairs": "upstairs",
    "Downstairs": "downstairs",
    "Sitting": "sitting",
    "Standing": "standing",
}
# Daphnet annotation 0 marks rows outside the experiment protocol; dropped.
_DAPHNET_NATIVE = {1: "no_freeze", 2: "freeze"}
_SKODA_NULL_CODES = frozenset({32})

STANDARD_GRAVITY = 9.80665  # m/s^2 per g, used to convert WISDM readings

DEFAULT_BOUND = 2.0  # saturation bound B in g-units


@dataclass(slots=True, frozen=True)
class AccelSample:
    """One triaxial accelerometer reading, in g-units."""

    t: int
    x: float
    y: float
    z: float
    user: str
    label: str = UNLABELED


@dataclass(frozen=True)
class WindowFrame:
    """n consecutive samples per axis from a single user stream."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    label: str = UNLABELED
    user: str = ""
    start: int = 0

    def __post_init__(self):
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if not (len(self.x) == len(self.y) == len(self.z)):
            raise ConfigError("window axes must have equal length")

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def origin(self) -> tuple[str, int]:
        return (self.user, self.start)


def _open_text(path):
    """Open a data file as text, decompressing gzip when the magic matches."""
    raw = open(path, "rb")
    head = raw.read(2)
    raw.seek(0)
    if head == b"\x1f\x8b":
        return io.TextIOWrapper(gzip.GzipFile(fileobj=raw), encoding="utf-8")
    return io.TextIOWrapper(raw, encoding="utf-8")


def _data_files(path):
    """The file itself, or the sorted non-hidden files of a directory."""
    if os.path.isdir(path):
        names = sorted(
            n for n in os.listdir(path) if not n.startswith(".")
            and os.path.isfile(os.path.join(path, n))
        )
        if not names:
            raise EmptyInputError(f"no data files in directory {path}")
        return [os.path.join(path, n) for n in names]
    if not os.path.exists(path):
        raise DataError(f"no such file: {path}")
    return [path]


def _file_stem(path: str) -> str:
    name = os.path.basename(path)
    for suffix in (".gz", ".txt", ".csv", ".dat"):
        if name.endswith(suffix):
            name = name[: -len(suffix)]
    return name


def _clip(value: float, bound: float) -> float:
    return max(-bound, min(bound, value))


def load_dataset(path, format, **options):
    """Load a dataset file (or directory of files) into AccelSample order.

    format is one of "wisdm", "daphnet", "skoda". Readings are converted
    to g-units and clipped to +-bound (default 2 g). With strict=True a
    structurally malformed row raises DataError naming line and field;
    the default skips such rows, recording (line, reason) into the
    optional `skipped` list. Unknown label codes always raise.
    """
    loaders = {"wisdm": _load_wisdm, "daphnet": _load_daphnet, "skoda": _load_skoda}
    if format not in loaders:
        raise ConfigError(f"unknown dataset format {format!r}")
    samples = []
    for file_path in _data_files(path):
        loaders[format](file_path, samples, **options)
    if not samples:
        raise EmptyInputError(f"no data rows in {path}")
    return samples


def _record_malformed(strict, skipped, line_no, reason, field=None):
    if strict:
        raise DataError(reason, line=line_no, field=field)
    if skipped is not None:
        skipped.append((line_no, reason))


def _load_wisdm(path, out, *, bound=DEFAULT_BOUND, strict=False, skipped=None,
                unit_scale=1.0 / STANDARD_GRAVITY):
    """WISDM CSV: user,activity,timestamp,x,y,z;  (m/s^2 native units)."""
    with _open_text(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.endswith(";"):
                line = line[:-1]
            parts = line.split(",")
            if len(parts) != 6:
                _record_malformed(strict, skipped, line_no,
                                  f"expected 6 fields, got {len(parts)}")
                continue
            user, activity, t_str = parts[0].strip(), parts[1].strip(), parts[2].strip()
            if activity not in _WISDM_NATIVE:
                raise UnknownLabelError(f"unknown activity {activity!r}", line=line_no,
                                        field="activity")
            try:
                t = int(float(t_str))
            except ValueError:
                _record_malformed(strict, skipped, line_no,
                                  f"bad timestamp {t_str!r}", field="timestamp")
                continue
            try:
                x, y, z = (float(parts[i]) for i in (3, 4, 5))
            except ValueError:
                _record_malformed(strict, skipped, line_no, "non-numeric acceleration",
                                  field="acceleration")
                continue
            if not all(math.isfinite(v) for v in (x, y, z)):
                _record_malformed(strict, skipped, line_no, "non-finite acceleration",
                                  field="acceleration")
                continue
            out.append(AccelSample(
                t=t,
                x=_clip(x * unit_scale, bound),
                y=_clip(y * unit_scale, bound),
                z=_clip(z * unit_scale, bound),
                user=user,
                label=_WISDM_NATIVE[activity],
            ))


_DAPHNET_SENSORS = {"ankle": 1, "thigh": 4, "trunk": 7}


def _load_daphnet(path, out, *, sensor="ankle", bound=DEFAULT_BOUND, strict=False,
                  skipped=None, unit_scale=1e-3):
    """Daphnet matrix: time_ms, ankle xyz, thigh xyz, trunk xyz, label (mg units).

    Label 0 rows ("not part of experiment") are dropped. The user id is
    the file stem, so each recording file forms its own stream.
    """
    if sensor not in _DAPHNET_SENSORS:
        raise ConfigError(f"unknown daphnet sensor {sensor!r}")
    first = _DAPHNET_SENSORS[sensor]
    user = _file_stem(path)
    with _open_text(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 11:
                _record_malformed(strict, skipped, line_no,
                                  f"expected 11 fields, got {len(parts)}")
                continue
            try:
                t = int(float(parts[0]))
                x, y, z = (float(parts[first + i]) for i in range(3))
                code = int(float(parts[10]))
            except ValueError:
                _record_malformed(strict, skipped, line_no, "non-numeric field")
                continue
            if code == 0:
                continue
            if code not in _DAPHNET_NATIVE:
                raise UnknownLabelError(f"unknown annotation code {code}", line=line_no,
                                        field="label")
            out.append(AccelSample(
                t=t,
                x=_clip(x * unit_scale, bound),
                y=_clip(y * unit_scale, bound),
                z=_clip(z * unit_scale, bound),
                user=user,
                label=_DAPHNET_NATIVE[code],
            ))


def _split_delimited(line: str):
    return line.split(",") if "," in line else line.split()


def _load_skoda(path, out, *, node=16, columns=None, bound=DEFAULT_BOUND, strict=False,
                skipped=None, unit_scale=1e-3, null_codes=_SKODA_NULL_CODES):
    """Skoda matrix: node id, calibrated x y z (mg), label code per row.

    Only rows of the configured node (default 16) are retained; null
    class codes are dropped. Rows have no time column, so the sample
    index within the file serves as t.
    """
    cols = {"node": 0, "x": 1, "y": 2, "z": 3, "label": 4}
    if columns:
        cols.update(columns)
    user = _file_stem(path)
    index = 0
    with _open_text(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = _split_delimited(line.strip())
            if not parts or parts == [""]:
                continue
            needed = max(cols.values()) + 1
            if len(parts) < needed:
                _record_malformed(strict, skipped, line_no,
                                  f"expected >= {needed} fields, got {len(parts)}")
                continue
            try:
                row_node = int(float(parts[cols["node"]]))
                x = float(parts[cols["x"]])
                y = float(parts[cols["y"]])
                z = float(parts[cols["z"]])
                code = int(float(parts[cols["label"]]))
            except ValueError:
                _record_malformed(strict, skipped, line_no, "non-numeric field")
                continue
            index += 1
            if row_node != node:
                continue
            if code in null_codes:
                continue
            label = f"activity_{code}"
            if label not in SKODA_LABELS:
                raise UnknownLabelError(f"unknown activity code {code}", line=line_no,
                                        field="label")
            out.append(AccelSample(
                t=index,
                x=_clip(x * unit_scale, bound),
                y=_clip(y * unit_scale, bound),
                z=_clip(z * unit_scale, bound),
                user=user,
                label=label,
            ))


def segment_streams(samples, max_gap=None):
    """Split samples into maximal runs with one user and strictly increasing t.

    A user change, a non-increasing t, or (when max_gap is given) a jump
    of more than max_gap t-units starts a new stream. Windows are formed
    within streams only.
    """
    streams = []
    current = []
    for s in samples:
        if current:
            prev = current[-1]
            gap_broken = max_gap is not None and s.t - prev.t > max_gap
            if s.user != prev.user or s.t <= prev.t or gap_broken:
                streams.append(current)
                current = []
        current.append(s)
    if current:
        streams.append(current)
    return streams


def window_count(length: int, n: int, stride: int) -> int:
    """Number of windows in a stream: floor((len - n)/stride) + 1 for len >= n."""
    if length < n:
        return 0
    return (length - n) // stride + 1


def _majority_label(labels, class_order):
    counts = Counter(l for l in labels if l != UNLABELED)
    if not counts:
        return UNLABELED
    best = max(counts.values())
    tied = [l for l, c in counts.items() if c == best]
    if len(tied) == 1:
        return tied[0]
    rank = {label: i for i, label in enumerate(class_order)}
    return min(tied, key=lambda l: rank.get(l, len(rank)))


def make_windows(samples, n: int, stride: int | None = None, *, class_labels=None,
                 max_gap=None):
    """Slide a length-n window over each stream; default stride n (no overlap).

    The window label is the majority label of its samples, ties broken
    by lowest index in class_labels (default: sorted labels present).
    Windows never span users or timestamp discontinuities.
    """
    if n < 2 or n % 2 != 0:
        raise ConfigError(f"window length must be even and >= 2, got {n}")
    if stride is None:
        stride = n
    if stride < 1:
        raise ConfigError(f"stride must be >= 1, got {stride}")
    if class_labels is None:
        class_labels = sorted({s.label for s in samples} - {UNLABELED})
    windows = []
    for stream in segment_streams(samples, max_gap=max_gap):
        xs = np.array([s.x for s in stream])
        ys = np.array([s.y for s in stream])
        zs = np.array([s.z for s in stream])
        labels = [s.label for s in stream]
        for start in range(0, len(stream) - n + 1, stride):
            stop = start + n
            windows.append(WindowFrame(
                x=xs[start:stop],
                y=ys[start:stop],
                z=zs[start:stop],
                label=_majority_label(labels[start:stop], class_labels),
                user=stream[0].user,
                start=stream[start].t,
            ))
    return windows


@dataclass(frozen=True)
class Standardizer:
    """Per-feature centering and scaling, fitted on training features only."""

    mean: np.ndarray
    scale: np.ndarray

    SCALE_FLOOR = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=np.float64))
        object.__setattr__(self, "scale", np.asarray(self.scale, dtype=np.float64))
        if self.mean.shape != self.scale.shape or self.mean.ndim != 1:
            raise ConfigError("mean and scale must be 1-D vectors of equal length")
        if np.any(self.scale <= 0):
            raise ConfigError("scale entries must be strictly positive")

    def __len__(self) -> int:
        return self.mean.shape[0]

    def _check(self, values):
        values = np.asarray(values, dtype=np.float64)
        if values.shape[-1] != len(self):
            raise ConfigError(
                f"feature length {values.shape[-1]} does not match fitted length {len(self)}"
            )
        return values

    def transform(self, values):
        return (self._check(values) - self.mean) / self.scale

    def inverse(self, values):
        return self._check(values) * self.scale + self.mean


def fit_standardizer(features) -> Standardizer:
    """Fit mean and floored standard deviation from features.

    Accepts a 2-D array or a list of SpectralFeature. Zero-variance
    coordinates get the scale floor so they map to exactly 0.
    """
    if isinstance(features, np.ndarray):
        matrix = np.asarray(features, dtype=np.float64)
    else:
        if len(features) == 0:
            raise ConfigError("cannot fit a standardizer on an empty feature set")
        matrix = np.stack([np.asarray(f.values, dtype=np.float64) for f in features])
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise ConfigError("fit set must be a non-empty 2-D matrix")
    mean = matrix.mean(axis=0)
    std = matrix.std(axis=0)
    scale = np.maximum(std, Standardizer.SCALE_FLOOR)
    return Standardizer(mean=mean, scale=scale)


def apply_standardizer(standardizer: Standardizer, feature):
    """Return a copy of the feature with standardized values."""
    from .spectral import SpectralFeature  # local import to avoid a cycle

    return SpectralFeature(
        values=standardizer.transform(feature.values),
        n=feature.n,
        label=feature.label,
        user=feature.user,
        start=feature.start,
    )


SPLIT_POLICIES = ("random-stratified", "by-user")


@dataclass(frozen=True)
class DatasetSplit:
    train: list
    test: list
    seed: int
    policy: str


def split_dataset(windows, policy: str, test_fraction: float, seed: int) -> DatasetSplit:
    """Deterministic train/test split of windows.

    random-stratified holds out round(count * test_fraction) windows per
    class; unlabeled windows always stay in train (they are usable only
    for pretraining). by-user holds out whole users. Both are fully
    determined by (inputs, policy, fraction, seed).
    """
    if policy not in SPLIT_POLICIES:
        raise ConfigError(f"unknown split policy {policy!r}")
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"test_fraction must be in (0, 1), got {test_fraction}")
    windows = list(windows)
    rng = np.random.default_rng(seed)
    test_indices = set()

    if policy == "random-stratified":
        by_label = {}
        for i, w in enumerate(windows):
            by_label.setdefault(w.label, []).append(i)
        for label in sorted(by_label):
            if label == UNLABELED:
                continue
            members = by_label[label]
            if len(members) < 2:
                raise ConfigError(
                    f"class {label!r} has {len(members)} window(s); "
                    "stratified splitting needs at least 2 per class"
                )
            n_test = int(len(members) * test_fraction + 0.5)
            order = rng.permutation(len(members))
            test_indices.update(members[j] for j in order[:n_test])
    else:
        users = sorted({w.user for w in windows})
        if len(users) < 2:
            raise ConfigError("by-user splitting needs at least 2 users")
        n_test = int(len(users) * test_fraction + 0.5)
        n_test = min(max(n_test, 1), len(users) - 1)
        order = rng.permutation(len(users))
        held_out = {users[j] for j in order[:n_test]}
        test_indices.update(i for i, w in enumerate(windows) if w.user in held_out)

    train = [w for i, w in enumerate(windows) if i not in test_indices]
    test = [w for i, w in enumerate(windows) if i in test_indices]
    return DatasetSplit(train=train, test=test, seed=seed, policy=policy)


def inject_noise(samples, sigma: float, seed: int, *, bound=DEFAULT_BOUND):
    """Add i.i.d. zero-mean Gaussian noise per axis, clipped to +-bound.

    sigma = 0 returns the samples unchanged.
    """
    if sigma < 0:
        raise ConfigError(f"noise standard deviation must be >= 0, got {sigma}")
    samples = list(samples)
    if sigma == 0:
        return samples
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, sigma, size=(len(samples), 3))
    return [
        AccelSample(
            t=s.t,
            x=_clip(s.x + noise[i, 0], bound),
            y=_clip(s.y + noise[i, 1], bound),
            z=_clip(s.z + noise[i, 2], bound),
            user=s.user,
            label=s.label,
        )
        for i, s in enumerate(samples)
    ]
