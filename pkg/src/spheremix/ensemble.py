"""Mixture-of-networks model: scoring, prediction, loss, and weight learning.

The ensemble score of class j is s_j = sum_i alpha_i p_ij(x_i) with one
density p_ij per (network, class) cell and simplex weights alpha. Prediction
takes argmax_j. The training loss is the mean squared arc distance between
the one-hot label and the normalized score vector,

    L = (1/n) sum_k arccos( s_{k,y_k} / ||s_k|| )^2,

using that the label has unit norm and that normalizing s leaves the cosine
unchanged.

Weights are learned on the sphere: alpha is lifted to alpha_tilde = sqrt(alpha)
on S^{m-1}, the Euclidean gradient of L(alpha_tilde^2) is projected onto the
tangent space (g - <g, at> at), and each update follows the sphere exponential
map with step -eta, taking absolute values afterwards to stay in the closed
positive quadrant (alpha = alpha_tilde^2 is unchanged by sign flips). Density
parameters are estimated beforehand and held fixed throughout.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._points import GRASSMANN, SPHERE, point_vector
from .density import fit_gaussian, fit_kde
from .errors import (
    DegenerateScores,
    DimensionMismatch,
    EmptyBatch,
    LabelOutOfRange,
    NonFiniteLoss,
)
from .estimators import DEFAULT_SIGMA_FLOOR, SampleSet

PARAMETRIC = "parametric"
KDE = "kde"

_SCORE_EPS = 1e-300


@dataclass(frozen=True)
class MixtureWeights:
    """Simplex weights alpha with their sphere lift alpha_tilde = sqrt(alpha).

    alpha is *derived* as alpha_tilde**2, so the simplex identity
    sum(alpha) == ||alpha_tilde||^2 == 1 holds to full precision.
    """

    alpha_tilde: np.ndarray
    alpha: np.ndarray = field(init=False)

    def __post_init__(self):
        at = np.asarray(self.alpha_tilde, dtype=np.float64)
        if at.ndim != 1 or at.size == 0:
            raise ValueError("alpha_tilde must be a non-empty vector")
        if np.any(at < 0.0):
            raise ValueError("alpha_tilde must be non-negative")
        if abs(np.linalg.norm(at) - 1.0) > 1e-12:
            raise ValueError("alpha_tilde must be a unit vector")
        at = at.copy()
        at.setflags(write=False)
        alpha = at * at
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha_tilde", at)
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def uniform(cls, m: int) -> "MixtureWeights":
        return cls(np.full(m, 1.0 / math.sqrt(m)))

    @classmethod
    def from_alpha(cls, alpha) -> "MixtureWeights":
        a = np.asarray(alpha, dtype=np.float64)
        if np.any(a < 0.0) or abs(a.sum() - 1.0) > 1e-9:
            raise ValueError("alpha must be non-negative and sum to 1")
        at = np.sqrt(a)
        return cls(at / np.linalg.norm(at))

    @property
    def m(self) -> int:
        return self.alpha.shape[0]


@dataclass(frozen=True)
class LabeledBatch:
    """Aligned per-network feature points plus class labels.

    ``features[i]`` is the (n, d_i) matrix of embedded points of network i;
    all networks see the same n samples in the same order.
    """

    features: list
    labels: np.ndarray
    space: str = SPHERE

    def __post_init__(self):
        if self.space not in (SPHERE, GRASSMANN):
            raise ValueError(f"unknown space {self.space!r}")
        feats = [np.ascontiguousarray(f, dtype=np.float64) for f in self.features]
        labels = np.asarray(self.labels, dtype=np.int64)
        if not feats or labels.size == 0:
            raise EmptyBatch("batch has no samples")
        n = feats[0].shape[0]
        for i, f in enumerate(feats):
            if f.ndim != 2 or f.shape[0] != n:
                raise DimensionMismatch(f"network {i} table has {f.shape[0]} rows, expected {n}")
        if labels.shape != (n,):
            raise DimensionMismatch(f"{labels.size} labels for {n} samples")
        if np.any(labels < 0):
            raise LabelOutOfRange("labels must be non-negative")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.features[0].shape[0]

    @property
    def m(self) -> int:
        return len(self.features)

    def sample(self, k: int) -> list:
        return [f[k] for f in self.features]


@dataclass(frozen=True)
class EnsembleModel:
    """Fitted ensemble: the m x c density grid plus mixture weights."""

    kind: str
    space: str
    m: int
    c: int
    densities: list
    weights: MixtureWeights
    fit_meta: dict

    def __post_init__(self):
        if self.kind not in (PARAMETRIC, KDE):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.space not in (SPHERE, GRASSMANN):
            raise ValueError(f"unknown space {self.space!r}")
        if len(self.densities) != self.m or any(len(row) != self.c for row in self.densities):
            raise ValueError("densities grid must be complete (m rows of c entries)")
        if self.weights.m != self.m:
            raise ValueError("weight count must match network count")
        for i, row in enumerate(self.densities):
            dims = {d.dim for d in row}
            if len(dims) != 1:
                raise DimensionMismatch(f"network {i} densities disagree on dimension")
            if self.space == SPHERE and row[0].dim != self.c:
                raise DimensionMismatch(
                    f"sphere density of dimension {row[0].dim} for {self.c} classes"
                )

    def network_dims(self) -> list:
        return [row[0].dim for row in self.densities]


# -- scoring and prediction ----------------------------------------------------


def pdf_grid(densities, features) -> np.ndarray:
    """(n, m, c) tensor of p_ij(x_i) values for a batch of features."""
    m = len(densities)
    c = len(densities[0])
    n = features[0].shape[0]
    out = np.empty((n, m, c))
    for i in range(m):
        fi = features[i]
        if fi.shape[1] != densities[i][0].dim:
            raise DimensionMismatch(
                f"network {i} features have dimension {fi.shape[1]}, "
                f"model expects {densities[i][0].dim}"
            )
        for j in range(c):
            out[:, i, j] = densities[i][j].pdf_batch(fi)
    return out


def _batch_features(model: EnsembleModel, sample) -> list:
    if len(sample) != model.m:
        raise DimensionMismatch(f"{len(sample)} per-network points for m={model.m}")
    return [point_vector(p)[None, :] for p in sample]


def class_scores_batch(model: EnsembleModel, features) -> np.ndarray:
    P = pdf_grid(model.densities, features)
    return np.tensordot(P, model.weights.alpha, axes=([1], [0]))


def class_scores(model: EnsembleModel, sample) -> np.ndarray:
    """Unnormalized per-class scores sum_i alpha_i p_ij(x_i) for one sample."""
    return class_scores_batch(model, _batch_features(model, sample))[0]


def ensemble_probability_batch(model: EnsembleModel, features) -> np.ndarray:
    scores = class_scores_batch(model, features)
    totals = scores.sum(axis=1)
    if np.any(totals < _SCORE_EPS):
        raise DegenerateScores("all class scores underflowed for at least one sample")
    return scores / totals[:, None]


def ensemble_probability(model: EnsembleModel, sample) -> np.ndarray:
    """Scores normalized to a probability vector over the c classes."""
    return ensemble_probability_batch(model, _batch_features(model, sample))[0]


def predict_batch(model: EnsembleModel, features) -> np.ndarray:
    scores = class_scores_batch(model, features)
    if np.any(scores.sum(axis=1) < _SCORE_EPS):
        raise DegenerateScores("all class scores underflowed for at least one sample")
    return np.argmax(scores, axis=1)


def predict(model: EnsembleModel, sample) -> int:
    """argmax_j of the class scores; ties go to the smallest class index."""
    return int(predict_batch(model, _batch_features(model, sample))[0])


def label_distance(y: int, p) -> float:
    """Arc distance between the one-hot label y and the direction of p:
    arccos(p_y / ||p||). Zero iff p is supported on y alone."""
    p = np.asarray(p, dtype=np.float64)
    if y < 0 or y >= p.shape[0]:
        raise LabelOutOfRange(f"label {y} outside [0, {p.shape[0]})")
    norm = float(np.linalg.norm(p))
    if norm < _SCORE_EPS:
        raise DegenerateScores("cannot measure a direction of the zero vector")
    return math.acos(min(1.0, max(0.0, float(p[y]) / norm)))


# -- loss and its gradient on the alpha_tilde sphere ----------------------------


def _cosine_to_label(scores: np.ndarray, labels: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(scores, axis=1)
    if np.any(norms < _SCORE_EPS):
        raise DegenerateScores("all class scores underflowed for at least one sample")
    sy = scores[np.arange(scores.shape[0]), labels]
    return np.clip(sy / norms, 0.0, 1.0), norms, sy


def _loss_from_pdf(P: np.ndarray, labels: np.ndarray, alpha_tilde: np.ndarray) -> float:
    scores = np.tensordot(P, alpha_tilde * alpha_tilde, axes=([1], [0]))
    u, _, _ = _cosine_to_label(scores, labels)
    d = np.arccos(u)
    return float(np.mean(d * d))


def _loss_and_euclidean_grad(P, labels, alpha_tilde):
    n, _, c = P.shape
    scores = np.tensordot(P, alpha_tilde * alpha_tilde, axes=([1], [0]))
    u, norms, _ = _cosine_to_label(scores, labels)
    d = np.arccos(u)
    loss = float(np.mean(d * d))
    # d(d^2)/du = -2 d / sqrt(1 - u^2); the ratio d/sqrt(1-u^2) -> 1 as u -> 1
    one_minus = 1.0 - u * u
    w = np.where(one_minus > 1e-24, d / np.sqrt(np.maximum(one_minus, 1e-300)), 1.0)
    onehot = np.zeros((n, c))
    onehot[np.arange(n), labels] = 1.0
    g_scores = -(2.0 / n) * w[:, None] * (onehot - (u / norms)[:, None] * scores) / norms[:, None]
    g_alpha = np.einsum("kj,kij->i", g_scores, P)
    return loss, 2.0 * alpha_tilde * g_alpha


def _tangent_project(g: np.ndarray, at: np.ndarray) -> np.ndarray:
    return g - (g @ at) * at


def _fd_gradient(P, labels, alpha_tilde, h: float = 1e-6) -> np.ndarray:
    g = np.empty_like(alpha_tilde)
    for i in range(alpha_tilde.shape[0]):
        e = np.zeros_like(alpha_tilde)
        e[i] = h
        g[i] = (
            _loss_from_pdf(P, labels, alpha_tilde + e)
            - _loss_from_pdf(P, labels, alpha_tilde - e)
        ) / (2.0 * h)
    return _tangent_project(g, alpha_tilde)


def riemannian_gradient(P, labels, alpha_tilde, *, grad_mode: str = "analytic") -> np.ndarray:
    """Tangent-space gradient of the batch loss at alpha_tilde on S^{m-1}."""
    if grad_mode == "finite-difference":
        return _fd_gradient(P, labels, np.asarray(alpha_tilde, dtype=np.float64))
    _, g = _loss_and_euclidean_grad(P, labels, np.asarray(alpha_tilde, dtype=np.float64))
    return _tangent_project(g, alpha_tilde)


def _sphere_step(at: np.ndarray, step: np.ndarray) -> np.ndarray:
    nv = float(np.linalg.norm(step))
    if nv < 1e-300:
        return at
    out = math.cos(nv) * at + math.sin(nv) * (step / nv)
    out = np.abs(out)
    return out / np.linalg.norm(out)


def fit_weights(
    densities,
    batch: LabeledBatch,
    *,
    eta: float = 0.1,
    max_iters: int = 5000,
    tol: float = 1e-8,
    grad_mode: str = "analytic",
    backtrack: bool = False,
    seed: int = 0,
):
    """Learn the mixture weights by Riemannian gradient descent on S^{m-1}.

    Starts from the uniform mixture, stops when the relative loss change
    falls below ``tol`` (|dL| <= tol * max(1, L)) or after ``max_iters``
    steps. ``backtrack`` halves an individual step while it would increase
    the loss. Returns (MixtureWeights, fit_meta).
    """
    if eta <= 0.0 or tol <= 0.0 or max_iters < 1:
        raise ValueError("eta and tol must be positive, max_iters >= 1")
    P = pdf_grid(densities, batch.features)
    return fit_weights_from_pdf(
        P, batch.labels, eta=eta, max_iters=max_iters, tol=tol,
        grad_mode=grad_mode, backtrack=backtrack, seed=seed,
    )


def fit_weights_from_pdf(
    P: np.ndarray,
    labels: np.ndarray,
    *,
    eta: float = 0.1,
    max_iters: int = 5000,
    tol: float = 1e-8,
    grad_mode: str = "analytic",
    backtrack: bool = False,
    seed: int = 0,
):
    """fit_weights, starting from a precomputed (n, m, c) pdf tensor."""
    m = P.shape[1]
    at = np.full(m, 1.0 / math.sqrt(m))
    loss_prev = _loss_from_pdf(P, labels, at)
    if not np.isfinite(loss_prev):
        raise NonFiniteLoss(f"initial loss is {loss_prev}")
    iterations = 0
    if m > 1:
        for _ in range(max_iters):
            grad = riemannian_gradient(P, labels, at, grad_mode=grad_mode)
            candidate = _sphere_step(at, -eta * grad)
            loss_new = _loss_from_pdf(P, labels, candidate)
            if backtrack:
                step_eta = eta
                while loss_new > loss_prev and step_eta > 1e-12:
                    step_eta *= 0.5
                    candidate = _sphere_step(at, -step_eta * grad)
                    loss_new = _loss_from_pdf(P, labels, candidate)
            if not np.isfinite(loss_new):
                raise NonFiniteLoss("loss became non-finite; reduce eta")
            at = candidate
            iterations += 1
            if abs(loss_new - loss_prev) <= tol * max(1.0, loss_new):
                loss_prev = loss_new
                break
            loss_prev = loss_new
    meta = {
        "eta": float(eta),
        "iterations_run": iterations,
        "final_loss": float(loss_prev),
        "seed": int(seed),
    }
    return MixtureWeights(at), meta


def loss(model: EnsembleModel, batch: LabeledBatch) -> float:
    """Mean squared label distance of the ensemble over the batch."""
    _check_batch(model, batch)
    P = pdf_grid(model.densities, batch.features)
    return _loss_from_pdf(P, batch.labels, model.weights.alpha_tilde)


# -- fitting and evaluation ------------------------------------------------------


def _check_batch(model: EnsembleModel, batch: LabeledBatch):
    if batch.m != model.m:
        raise DimensionMismatch(f"batch has {batch.m} networks, model has {model.m}")
    if np.any(batch.labels >= model.c):
        raise LabelOutOfRange(f"labels must lie in [0, {model.c})")


def fit_densities(
    batch: LabeledBatch,
    c: int,
    kind: str = PARAMETRIC,
    *,
    sigma_floor: float = DEFAULT_SIGMA_FLOOR,
    kde_max_support: int = 0,
    seed: int = 0,
    threads: int = 1,
):
    """Fit the m x c grid of class densities on a labeled batch."""
    if kind not in (PARAMETRIC, KDE):
        raise ValueError(f"unknown model kind {kind!r}")
    if np.any(batch.labels >= c):
        raise LabelOutOfRange(f"labels must lie in [0, {c})")

    def fit_cell(i: int, j: int):
        rows = batch.features[i][batch.labels == j]
        cell = SampleSet(rows, batch.space, network_id=i, class_id=j)
        if kind == PARAMETRIC:
            return fit_gaussian(cell, batch.features[i], sigma_floor=sigma_floor)
        return fit_kde(
            cell, batch.features[i], sigma_floor=sigma_floor,
            max_support=kde_max_support, seed=seed + i * c + j,
        )

    cells = [(i, j) for i in range(batch.m) for j in range(c)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            flat = list(pool.map(lambda ij: fit_cell(*ij), cells))
    else:
        flat = [fit_cell(i, j) for i, j in cells]
    return [flat[i * c:(i + 1) * c] for i in range(batch.m)]


def fit_ensemble(
    batch: LabeledBatch,
    c: int,
    kind: str = PARAMETRIC,
    *,
    eta: float = 0.1,
    max_iters: int = 5000,
    tol: float = 1e-8,
    grad_mode: str = "analytic",
    backtrack: bool = False,
    sigma_floor: float = DEFAULT_SIGMA_FLOOR,
    kde_max_support: int = 0,
    seed: int = 42,
    threads: int = 1,
) -> EnsembleModel:
    """Estimate all densities, then learn the mixture weights."""
    densities = fit_densities(
        batch, c, kind, sigma_floor=sigma_floor,
        kde_max_support=kde_max_support, seed=seed, threads=threads,
    )
    weights, meta = fit_weights(
        densities, batch, eta=eta, max_iters=max_iters, tol=tol,
        grad_mode=grad_mode, backtrack=backtrack, seed=seed,
    )
    return EnsembleModel(
        kind=kind, space=batch.space, m=batch.m, c=c,
        densities=densities, weights=weights, fit_meta=meta,
    )


def evaluate(model: EnsembleModel, batch: LabeledBatch) -> dict:
    """Accuracy, per-class accuracy, and mean loss of the model on a batch."""
    _check_batch(model, batch)
    P = pdf_grid(model.densities, batch.features)
    scores = np.tensordot(P, model.weights.alpha, axes=([1], [0]))
    if np.any(scores.sum(axis=1) < _SCORE_EPS):
        raise DegenerateScores("all class scores underflowed for at least one sample")
    predicted = np.argmax(scores, axis=1)
    hits = predicted == batch.labels
    per_class = np.full(model.c, np.nan)
    for j in range(model.c):
        mask = batch.labels == j
        if np.any(mask):
            per_class[j] = float(np.mean(hits[mask]))
    return {
        "accuracy": float(np.mean(hits)),
        "per_class_accuracy": per_class,
        "mean_loss": _loss_from_pdf(P, batch.labels, model.weights.alpha_tilde),
    }


def density_argmax_accuracy(model: EnsembleModel, batch: LabeledBatch, network: int) -> float:
    """Accuracy of one network's own density classifier argmax_j p_ij(x_i)."""
    _check_batch(model, batch)
    fi = batch.features[network]
    values = np.column_stack([model.densities[network][j].pdf_batch(fi) for j in range(model.c)])
    return float(np.mean(np.argmax(values, axis=1) == batch.labels))
