"""Labeled attenuation datasets: synthesis, splitting, feature standardization.

A dataset row associates an attenuation vector (one dB value per base
station) with the binary region label of the position it was measured at:
0 inside the region of interest, 1 outside.  Positions are kept alongside
for diagnostics only; verifiers never see them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import attenuation_matrix
from .scenario import REGION_INSIDE, REGION_OUTSIDE, Position


class LabeledSample(NamedTuple):
    a: np.ndarray
    t: int
    pos: Position


@dataclass(frozen=True)
class NormalizationStats:
    """Per-feature affine map derived from a training set."""

    mean: np.ndarray
    std: np.ndarray

    def apply(self, features: np.ndarray) -> np.ndarray:
        return (features - self.mean) / self.std

    def invert(self, features: np.ndarray) -> np.ndarray:
        return features * self.std + self.mean


@dataclass(frozen=True)
class Dataset:
    """Feature matrix (n, n_bs) with labels (n,) and source positions (n, 2).

    stats is None for raw dB features and carries the training-set
    standardization once normalize() has been applied.
    """

    features: np.ndarray
    labels: np.ndarray
    positions: np.ndarray
    stats: NormalizationStats | None = None

    def __post_init__(self):
        if self.features.ndim != 2 or len(self.features) == 0:
            raise ValueError("dataset must hold a nonempty (n, n_bs) feature matrix")
        if len(self.labels) != len(self.features) or len(self.positions) != len(self.features):
            raise ValueError("features, labels, and positions must align")

    def __len__(self) -> int:
        return len(self.features)

    def __getitem__(self, i: int) -> LabeledSample:
        return LabeledSample(
            self.features[i], int(self.labels[i]), Position(*self.positions[i])
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> tuple[int, int]:
        n1 = int(self.labels.sum())
        return len(self) - n1, n1


def generate_dataset(scenario, fields, params, s_total: int, p0: float,
                     rng: np.random.Generator) -> Dataset:
    """Synthesize s_total labeled attenuation vectors.

    floor(p0 * s_total) positions are drawn uniformly inside the ROI
    (label 0) and the remainder uniformly outside it (label 1); row order
    is then shuffled.
    """
    if s_total < 2:
        raise ValueError("need at least two samples")
    if not 0.0 < p0 < 1.0:
        raise ValueError("p0 must lie strictly between 0 and 1")
    n0 = int(np.floor(p0 * s_total))
    n1 = s_total - n0
    parts = []
    labels = []
    if n0:
        parts.append(scenario.sample_region(REGION_INSIDE, rng, n0))
        labels.append(np.zeros(n0, dtype=np.int64))
    if n1:
        parts.append(scenario.sample_region(REGION_OUTSIDE, rng, n1))
        labels.append(np.ones(n1, dtype=np.int64))
    xy = np.concatenate(parts)
    t = np.concatenate(labels)
    order = rng.permutation(s_total)
    xy, t = xy[order], t[order]
    a = attenuation_matrix(scenario, fields, params, xy)
    return Dataset(features=a, labels=t, positions=xy)


def split(dataset: Dataset, train_frac: float) -> tuple[Dataset, Dataset]:
    """Partition into leading floor(train_frac * n) rows and the rest."""
    if not 0.0 < train_frac < 1.0:
        raise ValueError("train_frac must lie strictly between 0 and 1")
    n_train = int(np.floor(train_frac * len(dataset)))
    if n_train == 0 or n_train == len(dataset):
        raise ValueError("split leaves one side empty")
    def take(sl):
        return Dataset(
            features=dataset.features[sl],
            labels=dataset.labels[sl],
            positions=dataset.positions[sl],
            stats=dataset.stats,
        )
    return take(slice(None, n_train)), take(slice(n_train, None))


def normalize(dataset: Dataset, stats: NormalizationStats | None = None) -> Dataset:
    """Standardize features to zero mean and unit variance.

    Without stats the map is fitted on this dataset (the training portion);
    pass the training stats to transform held-out data consistently.
    """
    if stats is None:
        mean = dataset.features.mean(axis=0)
        std = dataset.features.std(axis=0)
        zero = np.flatnonzero(std == 0.0)
        if zero.size:
            raise ValueError(f"feature {int(zero[0])} has zero variance")
        stats = NormalizationStats(mean=mean, std=std)
    return Dataset(
        features=stats.apply(dataset.features),
        labels=dataset.labels,
        positions=dataset.positions,
        stats=stats,
    )


def save_dataset(dataset: Dataset, path) -> None:
    """CSV export: a1..aN in dB (or normalized units), label, x, y."""
    n = dataset.n_features
    header = ",".join([f"a{i + 1}" for i in range(n)] + ["label", "x", "y"])
    with open(path, "w") as f:
        f.write(header + "\n")
        for i in range(len(dataset)):
            row = [format(v, ".17g") for v in dataset.features[i]]
            row.append(str(int(dataset.labels[i])))
            row.append(format(dataset.positions[i, 0], ".17g"))
            row.append(format(dataset.positions[i, 1], ".17g"))
            f.write(",".join(row) + "\n")


def load_dataset(path) -> Dataset:
    with open(path) as f:
        header = f.readline().strip().split(",")
        if len(header) < 4 or header[-3:] != ["label", "x", "y"]:
            raise ValueError(f"not a dataset file: {path}")
        n = len(header) - 3
        rows = [line.strip().split(",") for line in f if line.strip()]
    data = np.array([[float(v) for v in row] for row in rows])
    return Dataset(
        features=data[:, :n],
        labels=data[:, n].astype(np.int64),
        positions=data[:, n + 1 :],
    )
