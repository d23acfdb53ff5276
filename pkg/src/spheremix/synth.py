"""Deterministic synthetic weak-classifier suites.

For a sample of true class j, network i emits

    softmax( onehot(j) / tau_i  +  tau_i * gaussian_noise ),

so tau_i dials that network's standalone accuracy: tau -> 0 gives a
near-perfect classifier, large tau drives accuracy to chance 1/c. For
c = 10, tau around 0.70-0.74 lands in the 60-70% band. All randomness
comes from the single seed; equal configs produce byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import InvalidConfig


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def parse_taus(text: str, m: int) -> np.ndarray:
    """Per-network noise levels from 'x', 'lo:hi' (linear spread), or a
    comma-separated list of exactly m values."""
    text = text.strip()
    try:
        if ":" in text:
            lo, hi = (float(s) for s in text.split(":"))
            taus = np.linspace(lo, hi, m)
        elif "," in text:
            taus = np.asarray([float(s) for s in text.split(",")], dtype=np.float64)
        else:
            taus = np.full(m, float(text))
    except ValueError:
        raise InvalidConfig(f"cannot parse tau setting {text!r}") from None
    if taus.shape[0] != m:
        raise InvalidConfig(f"{taus.shape[0]} tau values for m={m} networks")
    if np.any(taus <= 0.0):
        raise InvalidConfig("tau values must be positive")
    return taus


def make_suite(seed: int, m: int, c: int, n_train: int, n_test: int, taus) -> dict:
    """Generate one suite in memory.

    Returns {"train_labels", "test_labels", "train": [m tables], "test":
    [m tables]} with raw (un-embedded) probability rows.
    """
    if m < 1 or c < 2 or n_train < 1 or n_test < 1:
        raise InvalidConfig("need m >= 1, c >= 2 and positive sample counts")
    taus = np.asarray(taus, dtype=np.float64)
    if taus.shape != (m,):
        raise InvalidConfig(f"expected {m} tau values, got shape {taus.shape}")
    rng = np.random.default_rng(seed)
    train_labels = rng.integers(0, c, n_train)
    test_labels = rng.integers(0, c, n_test)
    eye = np.eye(c)
    train = [
        _softmax(eye[train_labels] / t + t * rng.standard_normal((n_train, c)))
        for t in taus
    ]
    test = [
        _softmax(eye[test_labels] / t + t * rng.standard_normal((n_test, c)))
        for t in taus
    ]
    return {
        "train_labels": train_labels,
        "test_labels": test_labels,
        "train": train,
        "test": test,
    }


def _write_table(path: Path, rows: np.ndarray):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def _write_labels(path: Path, labels: np.ndarray):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for v in labels:
            fh.write(f"{int(v)}\n")


def write_suite(suite: dict, outdir) -> dict:
    """Write a generated suite as CSV tables plus label files.

    Returns the path layout: train/test tables indexed by network, and the
    two label files.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    m = len(suite["train"])
    paths = {"train": [], "test": []}
    for i in range(m):
        p = outdir / f"train_net{i:02d}.csv"
        _write_table(p, suite["train"][i])
        paths["train"].append(p)
        p = outdir / f"test_net{i:02d}.csv"
        _write_table(p, suite["test"][i])
        paths["test"].append(p)
    paths["train_labels"] = outdir / "train_labels.txt"
    paths["test_labels"] = outdir / "test_labels.txt"
    _write_labels(paths["train_labels"], suite["train_labels"])
    _write_labels(paths["test_labels"], suite["test_labels"])
    return paths
