"""Learn S-curve parameters as a function of the velocity change.

A small softplus MLP ``[1, 35, 15, 5]`` maps a normalised target wheel speed
to five raw outputs, which :func:`omnidrive.scurve.construct_params` turns
into a continuous curve.  The curve is treated as the last layer of the
network: the loss is the mean squared error between the curve and the
recorded (onset-aligned) wheel speeds, and its gradient is pushed back
through the curve construction into the network weights.  Training runs
several independently initialised instances with full-batch Adam and keeps
the one with the lowest validation loss.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .kinematics import RobotGeometry, Twist, inverse_kinematics
from .scurve import SCurveParams, _evaluate_grad, _sigmoid, _softplus, construct_params

log = logging.getLogger(__name__)

LAYER_DIMS = (1, 35, 15, 5)
OMEGA_MIN = 0.05  # rad/s; wheels with smaller targets carry no usable profile
ONSET_FRACTION = 0.02
ONSET_HOLD = 5  # consecutive samples above threshold; rejects isolated noise spikes


@dataclass
class ProfileRecording:
    """One from-rest command and the four wheel speeds recorded after it.

    ``times`` has shape ``(n,)`` and ``wheels`` shape ``(n, 4)`` with columns in
    wheel index order 1..4.
    """

    command: Twist
    duration: float
    times: np.ndarray
    wheels: np.ndarray
    repeat_count: int = 1

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.wheels = np.asarray(self.wheels, dtype=float)
        if self.duration <= 0:
            raise ValueError("recording duration must be positive")
        if self.times.ndim != 1 or self.times.size == 0:
            raise ValueError("recording needs a non-empty 1-d time axis")
        if self.wheels.shape != (self.times.size, 4):
            raise ValueError(f"wheel array must have shape ({self.times.size}, 4), got {self.wheels.shape}")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("recording times must be strictly increasing")
        if self.repeat_count < 1:
            raise ValueError("repeat_count must be at least 1")


@dataclass
class TrainingSample:
    target: float
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if not self.target > 0:
            raise ValueError("training target must be positive")
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if np.any(self.times < 0):
            raise ValueError("onset-aligned times must be non-negative")


@dataclass
class MlpWeights:
    """Network parameters plus the metadata needed to reproduce a prediction."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    omega_max: float
    seed: int = 0
    val_loss: float = math.nan
    train_loss: float = math.nan

    def __post_init__(self):
        dims = self.dims
        if dims != LAYER_DIMS:
            raise ValueError(f"layer dimensions must be {LAYER_DIMS}, got {dims}")
        for W, b in zip(self.weights, self.biases):
            if b.shape != (W.shape[0],):
                raise ValueError("bias length does not match weight rows")
            if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
                raise ValueError("network parameters must be finite")
        if not self.omega_max > 0:
            raise ValueError("omega_max must be positive")

    @property
    def dims(self) -> tuple[int, ...]:
        if len(self.weights) != len(LAYER_DIMS) - 1 or len(self.biases) != len(self.weights):
            return ()
        return (self.weights[0].shape[1],) + tuple(W.shape[0] for W in self.weights)

    def params(self) -> list[np.ndarray]:
        out = []
        for W, b in zip(self.weights, self.biases):
            out += [W, b]
        return out

    def with_params(self, params: Sequence[np.ndarray], **meta) -> "MlpWeights":
        fields = dict(omega_max=self.omega_max, seed=self.seed,
                      val_loss=self.val_loss, train_loss=self.train_loss)
        fields.update(meta)
        return MlpWeights(
            weights=[np.array(p, dtype=float) for p in params[0::2]],
            biases=[np.array(p, dtype=float) for p in params[1::2]],
            **fields,
        )

    def predict_curve(self, delta_omega: float) -> SCurveParams:
        return predict_curve(self, delta_omega)

    def __call__(self, delta_omega: float) -> SCurveParams:
        return predict_curve(self, delta_omega)


@dataclass
class TrainConfig:
    seeds: int = 100
    epochs: int = 3000
    lr: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    val_fraction: float = 0.2
    seed_base: int = 0

    def __post_init__(self):
        if self.seeds < 1:
            raise ValueError("need at least one seed")
        if not 0 < self.val_fraction < 1:
            raise ValueError("validation fraction must lie in (0, 1)")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")


@dataclass
class SeedRun:
    seed: int
    weights: MlpWeights | None
    val_loss: float
    train_loss: float
    history: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))
    error: str | None = None

    @property
    def completed(self) -> bool:
        return self.error is None


@dataclass
class TrainResult:
    best: MlpWeights
    runs: list[SeedRun]
    train_targets: np.ndarray
    val_targets: np.ndarray


# ----------------------------------------------------------------------------
# data preparation


def extract_samples(
    rec: ProfileRecording,
    geom: RobotGeometry,
    omega_min: float = OMEGA_MIN,
    onset_fraction: float = ONSET_FRACTION,
    onset_hold: int = ONSET_HOLD,
) -> list[TrainingSample]:
    """Per-wheel, onset-aligned training curves from one from-rest recording.

    The onset is the first sample from which some wheel stays above
    ``onset_fraction`` of its target for ``onset_hold`` consecutive samples.
    Targets and speeds are taken as magnitudes.
    """
    targets = np.abs(inverse_kinematics(geom, rec.command).as_array())
    active = targets > omega_min
    if not np.any(active):
        log.info("recording for %s has no wheel target above %.3g rad/s; skipped", rec.command, omega_min)
        return []
    speeds = np.abs(rec.wheels)
    over = speeds[:, active] > onset_fraction * targets[active]
    hold = max(1, min(int(onset_hold), len(speeds)))
    # over[i:i+hold] all true, per wheel
    runs = np.lib.stride_tricks.sliding_window_view(over, hold, axis=0).all(axis=-1)
    moving = runs.any(axis=1)
    if np.any(moving):
        i0 = int(np.argmax(moving))
    else:
        log.warning("no onset detected for %s; aligning on the first sample", rec.command)
        i0 = 0
    t = rec.times[i0:] - rec.times[i0]
    return [
        TrainingSample(float(targets[i]), t.copy(), speeds[i0:, i].copy())
        for i in range(4)
        if active[i]
    ]


class _Packed:
    """Samples grouped by identical (target, time grid) for a faster exact MSE.

    Within a group the sum of squared errors equals ``n * sum((S - mean)^2)``
    plus the within-group scatter, so the gradient only needs the group means.
    """

    def __init__(self, samples: Sequence[TrainingSample]):
        if not samples:
            raise ValueError("need at least one training sample")
        groups: dict[tuple, list[TrainingSample]] = {}
        for s in samples:
            key = (s.target, s.times.size, s.times.tobytes())
            groups.setdefault(key, []).append(s)

        targets, idx, times, means, counts = [], [], [], [], []
        scatter = 0.0
        n_points = 0
        for g, members in enumerate(groups.values()):
            vals = np.stack([s.values for s in members])
            mean = vals.mean(axis=0)
            scatter += float(np.sum((vals - mean) ** 2))
            n = len(members)
            n_points += vals.size
            targets.append(members[0].target)
            idx.append(np.full(mean.size, g))
            times.append(members[0].times)
            means.append(mean)
            counts.append(np.full(mean.size, float(n)))
        self.targets = np.array(targets)
        self.idx = np.concatenate(idx)
        self.times = np.concatenate(times)
        self.means = np.concatenate(means)
        self.counts = np.concatenate(counts)
        self.scatter = scatter
        self.n_points = n_points


# ----------------------------------------------------------------------------
# network


def init_weights(seed, omega_max: float) -> MlpWeights:
    """Glorot-uniform weights and zero biases, seeded deterministically."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(LAYER_DIMS[:-1], LAYER_DIMS[1:]):
        s = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-s, s, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    seed_int = seed if isinstance(seed, int) else 0
    return MlpWeights(weights, biases, float(omega_max), seed=seed_int)


def _forward(params, x):
    W1, b1, W2, b2, W3, b3 = params
    z1 = x @ W1.T + b1
    h1 = _softplus(z1)
    z2 = h1 @ W2.T + b2
    h2 = _softplus(z2)
    out = h2 @ W3.T + b3
    return out, (x, z1, h1, z2, h2)


def _backward(params, cache, d_out):
    W1, b1, W2, b2, W3, b3 = params
    x, z1, h1, z2, h2 = cache
    dW3 = d_out.T @ h2
    db3 = d_out.sum(axis=0)
    dz2 = (d_out @ W3) * _sigmoid(z2)
    dW2 = dz2.T @ h1
    db2 = dz2.sum(axis=0)
    dz1 = (dz2 @ W2) * _sigmoid(z1)
    dW1 = dz1.T @ x
    db1 = dz1.sum(axis=0)
    return [dW1, db1, dW2, db2, dW3, db3]


def mlp_forward(w: MlpWeights, delta_omega: float) -> np.ndarray:
    """Raw five-vector for one velocity change."""
    x = np.array([[float(delta_omega) / w.omega_max]])
    out, _ = _forward(w.params(), x)
    return out[0]


def predict_curve(w: MlpWeights, delta_omega: float) -> SCurveParams:
    if not delta_omega > 0:
        raise ValueError(f"delta_omega must be positive, got {delta_omega}")
    return construct_params(mlp_forward(w, delta_omega), delta_omega)


def _loss_and_grad_packed(params, omega_max, data: _Packed, need_grad=True):
    x = (data.targets / omega_max)[:, None]
    raw, cache = _forward(params, x)
    value, g = _evaluate_grad(raw, data.targets, data.times, data.idx)
    resid = value - data.means
    loss = (float(np.sum(data.counts * resid**2)) + data.scatter) / data.n_points
    if not need_grad:
        return loss, None
    d_value = 2.0 * data.counts * resid / data.n_points
    d_raw_pts = g * d_value[:, None]
    d_raw = np.zeros_like(raw)
    np.add.at(d_raw, data.idx, d_raw_pts)
    return loss, _backward(params, cache, d_raw)


def loss(w: MlpWeights, samples: Sequence[TrainingSample]) -> float:
    """Mean squared error of the predicted curves over every sample point."""
    data = _Packed(samples)
    value, _ = _loss_and_grad_packed(w.params(), w.omega_max, data, need_grad=False)
    return value


def loss_and_grad(w: MlpWeights, samples: Sequence[TrainingSample]):
    """Loss and its gradient, ordered like :meth:`MlpWeights.params`."""
    return _loss_and_grad_packed(w.params(), w.omega_max, _Packed(samples))


def gradient_check(
    w: MlpWeights,
    samples: Sequence[TrainingSample],
    n_coords: int = 50,
    seed: int = 0,
    step: float = 1e-6,
    grad_fn: Callable | None = None,
) -> float:
    """Max relative deviation between analytic and central-difference gradients.

    Each coordinate's deviation is ``|g - fd| / max(|g|, |fd|, 1e-8)``; the
    floor keeps coordinates whose true gradient vanishes from dominating.
    ``grad_fn(w, samples) -> (loss, grads)`` defaults to :func:`loss_and_grad`
    and exists so tests can inject a broken gradient.
    """
    grad_fn = grad_fn or loss_and_grad
    data = _Packed(samples)
    _, grads = grad_fn(w, samples)
    params = [p.copy() for p in w.params()]
    sizes = [p.size for p in params]
    offsets = np.cumsum([0] + sizes)
    rng = np.random.default_rng(seed)
    picks = rng.choice(offsets[-1], size=min(n_coords, offsets[-1]), replace=False)

    worst = 0.0
    for flat in picks:
        k = int(np.searchsorted(offsets, flat, side="right") - 1)
        j = int(flat - offsets[k])
        orig = params[k].flat[j]
        params[k].flat[j] = orig + step
        up, _ = _loss_and_grad_packed(params, w.omega_max, data, need_grad=False)
        params[k].flat[j] = orig - step
        down, _ = _loss_and_grad_packed(params, w.omega_max, data, need_grad=False)
        params[k].flat[j] = orig
        fd = (up - down) / (2 * step)
        an = float(grads[k].flat[j])
        worst = max(worst, abs(an - fd) / max(abs(an), abs(fd), 1e-8))
    return worst


# ----------------------------------------------------------------------------
# training


def split_targets(targets, val_fraction: float, seed) -> tuple[np.ndarray, np.ndarray]:
    """Hold out whole curves: pick validation targets among the interior values.

    The smallest and largest targets always stay in the training set so that
    validation measures interpolation, not extrapolation.
    """
    uniq = np.unique(np.asarray(targets, dtype=float))
    if uniq.size < 2:
        raise ValueError("need at least two distinct target values to form a validation split")
    pool = uniq[1:-1] if uniq.size >= 3 else uniq[1:]
    n_val = min(max(1, int(round(val_fraction * uniq.size))), pool.size)
    rng = np.random.default_rng(seed)
    val = np.sort(rng.choice(pool, size=n_val, replace=False))
    train = np.setdiff1d(uniq, val)
    return train, val


def _adam(params, omega_max, data, cfg: TrainConfig):
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    history = np.empty(cfg.epochs + 1)
    for epoch in range(1, cfg.epochs + 1):
        value, grads = _loss_and_grad_packed(params, omega_max, data)
        if not math.isfinite(value):
            raise FloatingPointError(f"non-finite loss at epoch {epoch}")
        history[epoch - 1] = value
        c1 = 1.0 - cfg.beta1**epoch
        c2 = 1.0 - cfg.beta2**epoch
        for p, g, mi, vi in zip(params, grads, m, v):
            mi *= cfg.beta1
            mi += (1.0 - cfg.beta1) * g
            vi *= cfg.beta2
            vi += (1.0 - cfg.beta2) * g * g
            p -= cfg.lr * (mi / c1) / (np.sqrt(vi / c2) + cfg.eps)
    final, _ = _loss_and_grad_packed(params, omega_max, data, need_grad=False)
    if not math.isfinite(final):
        raise FloatingPointError("non-finite loss after the last epoch")
    history[-1] = final
    return params, history


def train_all(samples: Sequence[TrainingSample], cfg: TrainConfig | None = None) -> TrainResult:
    """Train ``cfg.seeds`` instances and report every run alongside the best."""
    cfg = cfg or TrainConfig()
    samples = list(samples)
    all_targets = np.array([s.target for s in samples])
    train_t, val_t = split_targets(all_targets, cfg.val_fraction, cfg.seed_base)
    train_set = [s for s in samples if s.target in set(train_t)]
    val_set = [s for s in samples if s.target in set(val_t)]
    train_data, val_data = _Packed(train_set), _Packed(val_set)
    omega_max = float(all_targets.max())

    runs = []
    for i in range(cfg.seeds):
        init = init_weights(np.random.SeedSequence([cfg.seed_base, i]), omega_max)
        try:
            params, history = _adam([p.copy() for p in init.params()], omega_max, train_data, cfg)
            val, _ = _loss_and_grad_packed(params, omega_max, val_data, need_grad=False)
            if not math.isfinite(val):
                raise FloatingPointError("non-finite validation loss")
            w = init.with_params(params, seed=i, val_loss=val, train_loss=float(history[-1]))
            runs.append(SeedRun(i, w, val, float(history[-1]), history))
            log.debug("seed %d: train %.4g val %.4g", i, history[-1], val)
        except (FloatingPointError, ValueError) as exc:
            log.warning("seed %d aborted: %s", i, exc)
            runs.append(SeedRun(i, None, math.nan, math.nan, error=str(exc)))

    done = [r for r in runs if r.completed]
    if not done:
        raise RuntimeError("every training seed failed")
    best = min(done, key=lambda r: (r.val_loss, r.seed))
    return TrainResult(best.weights, runs, train_t, val_t)


def train(samples: Sequence[TrainingSample], cfg: TrainConfig | None = None) -> MlpWeights:
    """Best-of-``cfg.seeds`` network by validation loss (ties go to the lower seed)."""
    return train_all(samples, cfg).best
