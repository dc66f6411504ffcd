"""Seeded two-view datasets, CSV ingestion and task metrics.

Every generator is a pure function of its arguments. Random draws come from
PCG64 streams derived from ``(seed, stream name)`` through
:class:`numpy.random.SeedSequence`, so adding a new stream never shifts the
draws of an existing one.
"""

import csv
import json
import os
import zlib
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import InsufficientDataError, InvalidInputError, ParseError


def stream(seed, name):
    """Independent generator for the named component of a seeded build."""
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(key,))))


@dataclass
class TwoViewDataset:
    """Paired views with samples on columns.

    ``target`` is a ``(k, N)`` matrix (one-hot labels, regression targets)
    or ``None``.
    """

    x1: np.ndarray
    x2: np.ndarray
    target: np.ndarray = None
    train_idx: np.ndarray = None
    test_idx: np.ndarray = None
    seed: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x1 = np.asarray(self.x1, dtype=np.float64)
        self.x2 = np.asarray(self.x2, dtype=np.float64)
        n = self.x1.shape[1]
        if self.x2.shape[1] != n:
            raise InvalidInputError("views must have the same number of samples")
        if self.target is not None:
            self.target = np.asarray(self.target, dtype=np.float64)
            if self.target.ndim == 1:
                self.target = self.target[None, :]
            if self.target.shape[1] != n:
                raise InvalidInputError("target must have one column per sample")
        if self.train_idx is None:
            self.train_idx = np.arange(n)
        if self.test_idx is None:
            self.test_idx = np.arange(0)
        self.train_idx = np.asarray(self.train_idx, dtype=np.int64)
        self.test_idx = np.asarray(self.test_idx, dtype=np.int64)

    @property
    def n(self):
        return self.x1.shape[1]

    @property
    def dims(self):
        return self.x1.shape[0], self.x2.shape[0]

    @property
    def labels(self):
        """Class indices for one-hot targets."""
        return None if self.target is None else np.argmax(self.target, axis=0)

    def subset(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        return TwoViewDataset(
            self.x1[:, idx],
            self.x2[:, idx],
            None if self.target is None else self.target[:, idx],
            seed=self.seed,
            meta=dict(self.meta),
        )

    def train(self):
        return self.subset(self.train_idx)

    def test(self):
        return self.subset(self.test_idx)


def split_indices(n, train_ratio, seed):
    """Seeded disjoint train/test split, each part sorted."""
    if not 0 < train_ratio <= 1:
        raise InvalidInputError("train_ratio must lie in (0, 1]")
    perm = stream(seed, "split").permutation(n)
    n_train = int(round(train_ratio * n))
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def onehot(labels, classes):
    labels = np.asarray(labels, dtype=np.int64)
    out = np.zeros((classes, labels.size))
    out[labels, np.arange(labels.size)] = 1.0
    return out


def gen_correlated_gaussian(n, dim, rho, seed=0, train_ratio=0.8):
    """Two Gaussian views whose population canonical correlations are ``rho``.

    ``view1 = s``; for the first ``len(rho)`` coordinates
    ``view2_i = rho_i s_i + sqrt(1 - rho_i^2) w_i``, the rest of ``view2`` is
    independent noise.
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=np.float64))
    if rho.size > dim:
        raise InvalidInputError(f"rho has {rho.size} entries but dim is {dim}")
    if np.any(rho < 0) or np.any(rho > 1) or not np.all(np.isfinite(rho)):
        raise InvalidInputError(f"rho entries must lie in [0, 1], got {rho.tolist()}")
    s = stream(seed, "gauss/shared").standard_normal((dim, n))
    w = stream(seed, "gauss/noise").standard_normal((dim, n))
    x2 = w.copy()
    k = rho.size
    x2[:k] = rho[:, None] * s[:k] + np.sqrt(1.0 - rho**2)[:, None] * w[:k]
    train, test = split_indices(n, train_ratio, seed)
    return TwoViewDataset(
        s, x2, None, train, test, seed,
        meta={"generator": "correlated-gaussian", "n": n, "dim": dim, "rho": rho.tolist()},
    )


# Glyph strokes on the unit square (x right, y down), one list per digit.
_A, _B, _C, _D = (0.25, 0.15), (0.75, 0.15), (0.25, 0.5), (0.75, 0.5)
_E, _F = (0.25, 0.85), (0.75, 0.85)
_GLYPHS = [
    [(_A, _B), (_B, _F), (_F, _E), (_E, _A)],
    [((0.5, 0.15), (0.5, 0.85)), ((0.35, 0.3), (0.5, 0.15))],
    [(_A, _B), (_B, _D), (_D, _C), (_C, _E), (_E, _F)],
    [(_A, _B), (_B, _F), (_C, _D), (_E, _F)],
    [(_A, _C), (_C, _D), (_B, _F)],
    [(_B, _A), (_A, _C), (_C, _D), (_D, _F), (_F, _E)],
    [(_B, _A), (_A, _E), (_E, _F), (_F, _D), (_D, _C)],
    [(_A, _B), (_B, (0.4, 0.85))],
    [(_A, _B), (_B, _F), (_F, _E), (_E, _A), (_C, _D)],
    [(_D, _C), (_C, _A), (_A, _B), (_B, _F), (_F, _E)],
]


def glyph_templates(side):
    """Ten digit-like ``side x side`` images with intensities in [0, 1]."""
    coords = (np.arange(side) + 0.5) / side
    gx, gy = np.meshgrid(coords, coords)
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    width = max(0.6 / side, 0.06)
    out = np.zeros((10, side, side))
    for digit, strokes in enumerate(_GLYPHS):
        dist = np.full(pts.shape[0], np.inf)
        for p0, p1 in strokes:
            p0 = np.asarray(p0)
            d = np.asarray(p1) - p0
            t = np.clip((pts - p0) @ d / (d @ d), 0.0, 1.0)
            dist = np.minimum(dist, np.linalg.norm(pts - (p0 + t[:, None] * d), axis=1))
        out[digit] = np.clip(1.5 - dist / width, 0.0, 1.0).reshape(side, side)
    return out


def gen_noisy_patterns(n, side=8, seed=0, noise=1.0, train_ratio=0.8):
    """Rotated glyph images (view 1) and noisy copies (view 2).

    View 2 adds independent ``noise * Uniform[0, 1]`` to every pixel and
    clips to [0, 1]. Images are flattened row-major into ``side**2`` rows.
    """
    if side < 4:
        raise InvalidInputError("side must be at least 4")
    templates = glyph_templates(side)
    digits = stream(seed, "patterns/digit").integers(0, 10, size=n)
    angles = stream(seed, "patterns/angle").uniform(-45.0, 45.0, size=n)
    x1 = np.empty((side * side, n))
    for k in range(n):
        img = ndimage.rotate(templates[digits[k]], angles[k], reshape=False, order=1, mode="constant")
        x1[:, k] = np.clip(img, 0.0, 1.0).ravel()
    pixel_noise = stream(seed, "patterns/noise").uniform(0.0, 1.0, size=x1.shape)
    x2 = np.clip(x1 + noise * pixel_noise, 0.0, 1.0)
    train, test = split_indices(n, train_ratio, seed)
    return TwoViewDataset(
        x1, x2, None, train, test, seed,
        meta={"generator": "noisy-patterns", "n": n, "side": side, "noise": noise,
              "digits": digits.tolist()},
    )


def class_means(classes, separation):
    """Latent class centres: class 0 at the origin, class ``c`` on axis
    ``(c - 1) % 4`` at distance ``separation * (1 + (c - 1) // 4)``."""
    means = np.zeros((4, classes))
    for c in range(1, classes):
        means[(c - 1) % 4, c] = separation * (1 + (c - 1) // 4)
    return means


def gen_classification(n, classes=5, dims=(16, 16), seed=0, noise=1.0, train_ratio=0.7,
                       separation=5.0):
    """Balanced multi-class two-view data.

    A 4-d class-conditional Gaussian latent drives both views: view 1 mixes
    latent axes 0-2 and view 2 mixes axes 1-3 through random ``tanh`` maps,
    plus view-specific sensor noise. The views share axes 1 and 2, and the
    classes placed on axis 0 (or 3) can only be told apart with view 1 (or
    view 2). ``noise`` scales both the latent spread and the sensor noise;
    with ``noise=0`` every class collapses to one point.
    """
    if classes < 2:
        raise InvalidInputError("need at least two classes")
    d1, d2 = dims
    means = class_means(classes, separation)
    labels = np.arange(n) % classes
    labels = labels[stream(seed, "cls/order").permutation(n)]
    latent = means[:, labels] + noise * stream(seed, "cls/latent").standard_normal((4, n))
    rng_mix = stream(seed, "cls/mix")
    a1 = rng_mix.standard_normal((d1, 3)) / np.sqrt(3 * separation)
    a2 = rng_mix.standard_normal((d2, 3)) / np.sqrt(3 * separation)
    sensor = stream(seed, "cls/sensor")
    x1 = np.tanh(a1 @ latent[0:3]) + 0.1 * noise * sensor.standard_normal((d1, n))
    x2 = np.tanh(a2 @ latent[1:4]) + 0.1 * noise * sensor.standard_normal((d2, n))
    train, test = split_indices(n, train_ratio, seed)
    return TwoViewDataset(
        x1, x2, onehot(labels, classes), train, test, seed,
        meta={"generator": "classification", "n": n, "classes": classes,
              "dims": [d1, d2], "noise": noise, "separation": separation},
    )


def gen_rul_series(n_units, window=16, seed=0, train_ratio=0.7, min_life=60, max_life=140):
    """Sliding-window run-to-failure data from synthetic degrading units.

    Each unit has a random lifetime and eight sensor channels. A channel
    drifts slowly with age and rises exponentially as the unit approaches
    failure (time constant 15-40 cycles), plus a per-unit offset and
    measurement noise, so every trend is monotone. Channels 0-3 form view 1
    and 4-7 view 2; each sample is a ``window``-long slice flattened channel
    by channel. The target is the number of remaining cycles after the
    window's last step. Units are assigned whole to the train or test split,
    and every channel is Z-scored with statistics of the training windows.
    """
    if window < 2:
        raise InvalidInputError("window must be at least 2")
    if n_units < 2:
        raise InvalidInputError("need at least two units")
    if not window <= min_life <= max_life:
        raise InvalidInputError("need window <= min_life <= max_life")
    channels = 8
    lives = stream(seed, "rul/life").integers(min_life, max_life + 1, size=n_units)
    rng_ch = stream(seed, "rul/channel")
    signs = rng_ch.choice([-1.0, 1.0], size=channels)
    gains = rng_ch.uniform(0.5, 1.5, size=channels)
    taus = rng_ch.uniform(15.0, 40.0, size=channels)
    wear = rng_ch.uniform(0.1, 0.3, size=channels)
    offsets = stream(seed, "rul/offset").normal(0.0, 0.1, size=(n_units, channels))
    noise_rng = stream(seed, "rul/noise")
    windows, targets, units = [], [], []
    for u, life in enumerate(lives):
        age = np.arange(life)
        remaining = life - 1 - age
        trend = (gains[:, None] * np.exp(-remaining[None, :] / taus[:, None])
                 + wear[:, None] * age[None, :] / max_life)
        series = signs[:, None] * trend + offsets[u][:, None]
        series = series + 0.1 * noise_rng.standard_normal(series.shape)
        for end in range(window - 1, life):
            windows.append(series[:, end - window + 1:end + 1])
            targets.append(remaining[end])
            units.append(u)
    windows = np.stack(windows)  # (n, channels, window)
    units = np.asarray(units)
    unit_perm = stream(seed, "split").permutation(n_units)
    n_train_units = max(1, min(n_units - 1, int(round(train_ratio * n_units))))
    train_units = np.sort(unit_perm[:n_train_units])
    is_train = np.isin(units, train_units)
    ref = windows[is_train]
    mu = ref.mean(axis=(0, 2))
    sd = ref.std(axis=(0, 2))
    windows = (windows - mu[None, :, None]) / sd[None, :, None]
    flat = windows.reshape(windows.shape[0], -1).T
    half = (channels // 2) * window
    return TwoViewDataset(
        flat[:half], flat[half:], np.asarray(targets, dtype=np.float64)[None, :],
        np.flatnonzero(is_train), np.flatnonzero(~is_train), seed,
        meta={"generator": "rul-series", "n_units": n_units, "window": window,
              "units": units.tolist(), "lives": lives.tolist(),
              "channel_mean": mu.tolist(), "channel_std": sd.tolist()},
    )


def read_csv_columns(path):
    """Parse a headered numeric CSV. Returns ``(header, rows)`` with ``rows``
    an ``(N, columns)`` array."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except FileNotFoundError as exc:
        raise ParseError(f"no such file: {path}") from exc
    with fh:
        reader = csv.reader(fh)
        header = None
        rows = []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if header is None:
                header = [c.strip() for c in row]
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line)
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                bad = next(c for c in row if not _is_float(c))
                raise ParseError(f"non-numeric value {bad!r}", line) from None
    if header is None or not rows:
        raise InsufficientDataError(f"{path}: no data rows")
    return header, np.asarray(rows, dtype=np.float64)


def _is_float(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_csv(path, view1_cols, view2_cols, target_cols=None, train_ratio=1.0, seed=0):
    """Build a dataset from named columns of one headered CSV (rows are samples)."""
    header, rows = read_csv_columns(path)
    index = {name: k for k, name in enumerate(header)}

    def pick(cols):
        missing = [c for c in cols if c not in index]
        if missing:
            raise InvalidInputError(f"{path}: unknown column(s) {missing}")
        return rows[:, [index[c] for c in cols]].T

    target = pick(target_cols) if target_cols else None
    train, test = split_indices(rows.shape[0], train_ratio, seed)
    return TwoViewDataset(
        pick(view1_cols), pick(view2_cols), target, train, test, seed,
        meta={"source": str(path)},
    )


def metric_mse(x, xhat):
    """``(1/n) sum_i ||x_i - xhat_i||^2`` over sample columns."""
    x, xhat = _pair(x, xhat)
    return float(np.sum((x - xhat) ** 2) / x.shape[1])


def metric_mae(x, xhat):
    """Mean absolute difference over all entries."""
    x, xhat = _pair(x, xhat)
    return float(np.mean(np.abs(x - xhat)))


def metric_accuracy(labels, predictions):
    labels = np.asarray(labels).ravel()
    predictions = np.asarray(predictions).ravel()
    if labels.shape != predictions.shape:
        raise InvalidInputError("labels and predictions differ in length")
    if labels.size == 0:
        raise InsufficientDataError("no labels")
    return float(np.mean(labels == predictions))


def _pair(x, xhat):
    x = np.asarray(x, dtype=np.float64)
    xhat = np.asarray(xhat, dtype=np.float64)
    if x.shape != xhat.shape:
        raise InvalidInputError(f"shape mismatch {x.shape} vs {xhat.shape}")
    if x.ndim == 1:
        x, xhat = x[None, :], xhat[None, :]
    return x, xhat


DATASET_FORMAT = "ccguide-dataset"
DATASET_VERSION = 1


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value


def _write_matrix(path, prefix, mat):
    header = ",".join(f"{prefix}{k}" for k in range(mat.shape[0]))
    np.savetxt(path, mat.T, fmt="%.17g", delimiter=",", header=header, comments="")


def save_dataset(ds, out_dir, generator=None, params=None):
    """Write ``view1.csv``, ``view2.csv`` (and ``target.csv``) plus a
    ``dataset.json`` sidecar with the split, seed and generator settings.

    Floats are written with 17 significant digits, so reloading is exact
    and rewriting the same dataset gives byte-identical files.
    """
    os.makedirs(out_dir, exist_ok=True)
    files = {"view1": "view1.csv", "view2": "view2.csv"}
    _write_matrix(os.path.join(out_dir, files["view1"]), "a", ds.x1)
    _write_matrix(os.path.join(out_dir, files["view2"]), "b", ds.x2)
    if ds.target is not None:
        files["target"] = "target.csv"
        _write_matrix(os.path.join(out_dir, files["target"]), "t", ds.target)
    sidecar = {
        "format": DATASET_FORMAT,
        "version": DATASET_VERSION,
        "generator": generator,
        "params": _jsonable(params or {}),
        "seed": int(ds.seed),
        "n": int(ds.n),
        "dims": list(ds.dims),
        "files": files,
        "train_idx": ds.train_idx.tolist(),
        "test_idx": ds.test_idx.tolist(),
        "meta": _jsonable(ds.meta),
    }
    with open(os.path.join(out_dir, "dataset.json"), "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return sidecar


def load_dataset(path):
    """Read a directory written by :func:`save_dataset`."""
    side = os.path.join(path, "dataset.json")
    try:
        with open(side, encoding="utf-8") as fh:
            sidecar = json.load(fh)
    except FileNotFoundError as exc:
        raise ParseError(f"no dataset sidecar at {side}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{side} is not valid JSON ({exc.msg})", exc.lineno) from exc
    if sidecar.get("format") != DATASET_FORMAT:
        raise ParseError(f"{side} is not a ccguide dataset sidecar")
    files = sidecar["files"]
    mats = {}
    for key, name in files.items():
        _, rows = read_csv_columns(os.path.join(path, name))
        mats[key] = rows.T
    return TwoViewDataset(
        mats["view1"], mats["view2"], mats.get("target"),
        sidecar["train_idx"], sidecar["test_idx"], sidecar.get("seed", 0),
        meta=dict(sidecar.get("meta", {}), generator=sidecar.get("generator")),
    )
