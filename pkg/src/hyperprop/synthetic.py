"""Seeded Gaussian-blob datasets for demos and the end-to-end experiment."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    classes: np.ndarray
    labeled: np.ndarray

    @property
    def unlabeled(self) -> np.ndarray:
        return np.setdiff1d(np.arange(self.classes.size), self.labeled)

    def label_pairs(self):
        return [(int(i), int(self.classes[i])) for i in self.labeled]

    def truth_pairs(self):
        return [(int(i), int(self.classes[i])) for i in self.unlabeled]


def triangle_blobs(n: int = 300, side: float = 5.0, spread: float = 1.0,
                   labeled_fraction: float = 0.1, seed: int = 0) -> Dataset:
    """Three isotropic 2-D blobs centred on an equilateral triangle.

    Samples are split round-robin across classes; ``labeled_fraction`` of
    them, drawn uniformly without replacement, are marked labeled.
    """
    rng = np.random.default_rng(seed)
    centers = side * np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
    classes = np.arange(n) % 3
    x = centers[classes] + spread * rng.standard_normal((n, 2))
    n_lab = int(round(labeled_fraction * n))
    labeled = np.sort(rng.choice(n, size=n_lab, replace=False))
    return Dataset(x, classes.astype(np.int64), labeled.astype(np.int64))
