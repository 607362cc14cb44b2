"""Dataset ingestion, splitting, the simulated oracle, and the toroid generator.

Real benchmark datasets are external; :data:`MANIFEST` carries their expected
shapes so downloads can be validated, and the repo never ships the data.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .active import ANOMALY, NORMAL


@dataclass
class Dataset:
    """A feature matrix with optional 0/1 labels (1 = anomaly)."""

    features: np.ndarray
    labels: np.ndarray | None = None
    name: str = "dataset"

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {self.features.shape}")
        if not np.isfinite(self.features).all():
            raise ValueError("features contain non-finite values")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int8)
            if self.labels.shape != (self.features.shape[0],):
                raise ValueError("labels length does not match the number of rows")
            if not np.isin(self.labels, (NORMAL, ANOMALY)).all():
                raise ValueError("labels must be 0 (normal) or 1 (anomaly)")

    @property
    def n_points(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def contamination(self) -> float | None:
        if self.labels is None:
            return None
        return float(np.count_nonzero(self.labels == ANOMALY)) / self.n_points


@dataclass
class SplitSpec:
    """How to divide a dataset into train and test halves."""

    train_fraction: float = 0.5
    seed: int | None = None
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(
                f"train_fraction must be in (0, 1), got {self.train_fraction}"
            )


def _parse_label_token(token: str):
    t = token.strip().lower()
    if t in ("0", "normal"):
        return NORMAL
    if t in ("1", "anomaly"):
        return ANOMALY
    try:
        v = float(t)
    except ValueError:
        return None
    if v in (0.0, 1.0):
        return int(v)
    return None


def load_csv(path, label_column=None, name: str | None = None) -> Dataset:
    """Parse a CSV of numeric features with an optional header and label column.

    ``label_column`` is a header name or 0-based column index; its values must
    be 0/1 or normal/anomaly (case-insensitive). Errors name the offending
    cell by 1-based file row and column.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"{path}: file contains no rows")

    def _is_numeric(cell: str) -> bool:
        try:
            float(cell)
            return True
        except ValueError:
            return False

    header: list[str] | None = None
    if not all(_is_numeric(c) for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise ValueError(f"{path}: no data rows after the header")

    n_cols = len(rows[0])
    label_idx: int | None = None
    if label_column is not None:
        if isinstance(label_column, str):
            if header is None:
                raise ValueError(
                    f"{path}: label column {label_column!r} needs a header line"
                )
            if label_column not in header:
                raise ValueError(f"{path}: no column named {label_column!r}")
            label_idx = header.index(label_column)
        else:
            label_idx = int(label_column)
            if not 0 <= label_idx < n_cols:
                raise ValueError(f"{path}: label column index {label_idx} out of range")

    first_data_row = 2 if header is not None else 1
    features = np.empty((len(rows), n_cols - (1 if label_idx is not None else 0)))
    labels = np.empty(len(rows), dtype=np.int8) if label_idx is not None else None
    for i, row in enumerate(rows):
        if len(row) != n_cols:
            raise ValueError(
                f"{path}: row {first_data_row + i} has {len(row)} cells, expected {n_cols}"
            )
        j_out = 0
        for j, cell in enumerate(row):
            if j == label_idx:
                lab = _parse_label_token(cell)
                if lab is None:
                    raise ValueError(
                        f"{path}: invalid label {cell!r} at row {first_data_row + i}, "
                        f"column {j + 1}"
                    )
                labels[i] = lab
            else:
                try:
                    features[i, j_out] = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: non-numeric value {cell!r} at row {first_data_row + i}, "
                        f"column {j + 1}"
                    ) from None
                j_out += 1
    return Dataset(features, labels, name=name or path.stem)


def save_csv(dataset: Dataset, path, label_column: str = "label") -> None:
    """Write a dataset as CSV; float cells use repr so reloads are bit-exact."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        head = [f"f{j}" for j in range(dataset.n_features)]
        if dataset.labels is not None:
            head.append(label_column)
        writer.writerow(head)
        for i in range(dataset.n_points):
            row = [repr(float(v)) for v in dataset.features[i]]
            if dataset.labels is not None:
                row.append(str(int(dataset.labels[i])))
            writer.writerow(row)


def split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Disjoint, exhaustive train/test split; stratified keeps the anomaly
    ratio in both halves within rounding.

    A class with fewer than 2 members downgrades to a plain split with a
    warning.
    """
    rng = np.random.default_rng(spec.seed)
    n = dataset.n_points
    stratified = spec.stratified
    if stratified and dataset.labels is None:
        raise ValueError("stratified split requires labels")
    if stratified:
        counts = np.bincount(dataset.labels.astype(np.int64), minlength=2)
        if counts.min() < 2:
            warnings.warn(
                "a class has fewer than 2 members; falling back to a plain split",
                stacklevel=2,
            )
            stratified = False

    if stratified:
        train_parts = []
        for cls in (NORMAL, ANOMALY):
            idx = np.flatnonzero(dataset.labels == cls)
            perm = rng.permutation(idx)
            n_train = int(round(spec.train_fraction * idx.size))
            n_train = min(max(n_train, 1), idx.size - 1)
            train_parts.append(perm[:n_train])
        train_idx = np.sort(np.concatenate(train_parts))
    else:
        perm = rng.permutation(n)
        n_train = int(round(spec.train_fraction * n))
        n_train = min(max(n_train, 1), n - 1)
        train_idx = np.sort(perm[:n_train])

    mask = np.zeros(n, dtype=bool)
    mask[train_idx] = True
    test_idx = np.flatnonzero(~mask)

    def _take(idx):
        return Dataset(
            dataset.features[idx],
            None if dataset.labels is None else dataset.labels[idx],
            name=dataset.name,
        )

    return _take(train_idx), _take(test_idx)


def make_toroid(
    n_normal: int,
    n_anomaly: int,
    seed=None,
    outer_side: float = 4.0,
    inner_side: float = 2.0,
) -> Dataset:
    """2-D benchmark shape: normals uniform on a square ring, anomalies
    uniform strictly inside it.

    With the default geometry normals satisfy 1 <= max(|x|, |y|) <= 2 and
    anomalies max(|x|, |y|) < 1.
    """
    if n_normal < 1 or n_anomaly < 1:
        raise ValueError("counts must be >= 1")
    if not 0.0 < inner_side < outer_side:
        raise ValueError("need 0 < inner_side < outer_side")
    rng = np.random.default_rng(seed)
    outer_h = outer_side / 2.0
    inner_h = inner_side / 2.0

    def _sample(count, low, high, keep):
        out = np.empty((count, 2))
        have = 0
        while have < count:
            batch = rng.uniform(low, high, size=(max(count - have, 64) * 2, 2))
            good = batch[keep(batch)]
            take = min(good.shape[0], count - have)
            out[have : have + take] = good[:take]
            have += take
        return out

    cheb = lambda p: np.abs(p).max(axis=1)
    normals = _sample(
        n_normal, -outer_h, outer_h, lambda p: (cheb(p) >= inner_h) & (cheb(p) <= outer_h)
    )
    anomalies = _sample(n_anomaly, -inner_h, inner_h, lambda p: cheb(p) < inner_h)
    features = np.vstack([normals, anomalies])
    labels = np.concatenate(
        [np.zeros(n_normal, dtype=np.int8), np.ones(n_anomaly, dtype=np.int8)]
    )
    return Dataset(features, labels, name="toroid")


def simulated_oracle(dataset: Dataset):
    """Ground-truth label source: a pure function of the point index."""
    if dataset.labels is None:
        raise ValueError("the simulated oracle needs a labeled dataset")
    labels = dataset.labels.copy()

    def oracle(index: int) -> int:
        idx = int(index)
        if not 0 <= idx < labels.shape[0]:
            raise IndexError(f"oracle index {idx} out of range")
        return int(labels[idx])

    return oracle


# Expected (instances, features, anomalies) of the public benchmark sets,
# used to validate downloaded copies.
MANIFEST = {
    "annthyroid": (7200, 6, 534),
    "breastw": (683, 9, 239),
    "cardio": (1831, 21, 176),
    "cover": (286048, 10, 2747),
    "ionosphere": (351, 33, 126),
    "letter": (1600, 32, 100),
    "mammography": (11183, 6, 260),
    "mnist": (7603, 100, 700),
    "optdigits": (5216, 64, 150),
    "pendigits": (6870, 16, 156),
    "pima": (768, 8, 268),
    "satellite": (6435, 36, 2036),
    "satimage-2": (5803, 36, 71),
    "thyroid": (3772, 6, 93),
    "vertebral": (240, 6, 30),
    "vowels": (1456, 12, 50),
    "wbc": (278, 30, 21),
    "wine": (129, 13, 10),
}

# Where to obtain them; see scripts/fetch_breastw.py for an automated path.
DOWNLOAD_POINTERS = {
    name: "https://odds.cs.stonybrook.edu/" for name in MANIFEST
} | {"breastw": "https://archive.ics.uci.edu/dataset/15/breast+cancer+wisconsin+original"}


def validate_against_manifest(dataset: Dataset, name: str) -> None:
    """Check a downloaded dataset against its expected shape and anomaly count."""
    if name not in MANIFEST:
        raise KeyError(f"unknown dataset {name!r}")
    n_x, m, anomalies = MANIFEST[name]
    if dataset.n_points != n_x or dataset.n_features != m:
        raise ValueError(
            f"{name}: expected {n_x} x {m}, got {dataset.n_points} x {dataset.n_features}"
        )
    if dataset.labels is None:
        raise ValueError(f"{name}: labels are required")
    found = int(np.count_nonzero(dataset.labels == ANOMALY))
    if found != anomalies:
        raise ValueError(f"{name}: expected {anomalies} anomalies, found {found}")
