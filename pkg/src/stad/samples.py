"""Synthetic point clouds used by the tests, scripts and the bundled sample."""

from __future__ import annotations

from importlib import resources

import numpy as np

from .data_io import PointCloud, load_points


def two_gaussians(n: int = 25, dim: int = 2, separation: float = 4.0, seed: int = 42) -> PointCloud:
    rng = np.random.default_rng(seed)
    k = (n + 1) // 2
    pts = rng.normal(size=(n, dim))
    pts[k:, 0] += separation
    return PointCloud(pts)


def noisy_circle(n: int = 200, noise: float = 0.05, seed: int = 0) -> PointCloud:
    rng = np.random.default_rng(seed)
    theta = np.sort(rng.uniform(0, 2 * np.pi, n))
    pts = np.column_stack([np.cos(theta), np.sin(theta)]) + rng.normal(scale=noise, size=(n, 2))
    return PointCloud(pts)


def blob_mixture(n: int = 1139, dim: int = 7, centers: int = 6, seed: int = 0) -> PointCloud:
    """Gaussian blobs of unequal spread, for timing runs."""
    rng = np.random.default_rng(seed)
    mu = rng.normal(scale=5.0, size=(centers, dim))
    which = rng.integers(centers, size=n)
    spread = rng.uniform(0.5, 1.5, size=centers)
    return PointCloud(mu[which] + rng.normal(size=(n, dim)) * spread[which, None])


def bundled(name: str) -> PointCloud:
    """Load a CSV shipped in ``stad/data`` (header row, no labels)."""
    path = resources.files("stad") / "data" / f"{name}.csv"
    with resources.as_file(path) as p:
        return load_points(p, header=True)
