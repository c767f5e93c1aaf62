"""Three-segment softplus / linear / softplus velocity profile.

A profile rises from 0 at ``t = 0`` to ``delta_omega`` as ``t -> inf``::

    s1(t) = m [sp(t - a, k1) - sp(-a, k1)]        0 <= t <= a
    s2(t) = s1(a) + m (t - a)                      a <= t <= b
    s3(t) = delta_omega - m sp(b - t, k2)          b <= t

with ``sp(x, k) = log(1 + exp(k x)) / k``.  Requiring ``s2(b) == s3(b)``
leaves one equation in the five parameters; it is solved for the slope::

    m = delta_omega / D,   D = (ln2/k1 - sp(-a, k1)) + (b - a) + ln2/k2

so the network's third output is carried but never used.  The softplus
centres sit on the segment boundaries, which makes the slope ``m/2`` at
``a`` and ``b`` and ``m`` only asymptotically.

The module keeps two layers: array functions (``_derive``, ``_evaluate``,
``_evaluate_grad``) that broadcast over batches and are used by the
calibrator, and the scalar API built on :class:`SCurveParams`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LN2 = math.log(2.0)
EPS_GAP = 1e-3
EPS_K = 1e-3
# above this, log1p(exp(z)) == z + exp(-z) to better than 1e-13 relative
_SOFTPLUS_SWITCH = 30.0


def _softplus(z):
    z = np.asarray(z, dtype=float)
    small = np.log1p(np.exp(np.minimum(z, _SOFTPLUS_SWITCH)))
    large = z + np.exp(-np.maximum(z, _SOFTPLUS_SWITCH))
    return np.where(z > _SOFTPLUS_SWITCH, large, small)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=float)))


def _sp(x, k):
    return _softplus(x * k) / k


def _dsp_dk(x, k):
    return (x * _sigmoid(x * k) - _sp(x, k)) / k


def softplus_ramp(x, sharpness: float = 1.0):
    """Smooth ramp ``log(1 + exp(x * sharpness)) / sharpness``.

    Works on scalars and arrays; scalars come back as ``float``.
    """
    if np.any(np.asarray(sharpness) <= 0):
        raise ValueError("sharpness must be positive")
    out = _sp(np.asarray(x, dtype=float), sharpness)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SCurveParams:
    a: float
    b: float
    m: float
    k1: float
    k2: float
    delta_omega: float

    def __post_init__(self):
        vals = (self.a, self.b, self.m, self.k1, self.k2, self.delta_omega)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite S-curve parameter in {vals}")
        if not 0 < self.a < self.b:
            raise ValueError(f"need 0 < a < b, got a={self.a}, b={self.b}")
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("sharpness k1, k2 must be positive")
        if self.delta_omega > 0 and self.m <= 0:
            raise ValueError("slope m must be positive for a positive delta_omega")
        lhs = self.m * _continuity_denominator(self.a, self.b, self.k1, self.k2)
        if abs(lhs - self.delta_omega) > 1e-9 * max(abs(self.delta_omega), 1e-300):
            raise ValueError(
                f"continuity violated: m*D = {lhs!r} but delta_omega = {self.delta_omega!r}"
            )

    @classmethod
    def from_shape(cls, a, b, k1, k2, delta_omega) -> "SCurveParams":
        """Build a curve from its shape parameters, solving for the slope."""
        if delta_omega <= 0:
            raise ValueError("delta_omega must be positive")
        m = delta_omega / _continuity_denominator(a, b, k1, k2)
        return cls(float(a), float(b), float(m), float(k1), float(k2), float(delta_omega))

    def __call__(self, t):
        return evaluate(self, t)

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.a, self.b, self.m, self.k1, self.k2)


def _continuity_denominator(a, b, k1, k2):
    return (LN2 / k1 - _sp(-a, k1)) + (b - a) + LN2 / k2


def _derive(raw, delta_omega):
    """Raw network outputs ``(..., 5)`` -> arrays ``a, b, m, k1, k2``."""
    raw = np.asarray(raw, dtype=float)
    a = _softplus(raw[..., 0])
    b = a + _softplus(raw[..., 1]) + EPS_GAP
    k1 = _softplus(raw[..., 3]) + EPS_K
    k2 = _softplus(raw[..., 4]) + EPS_K
    m = delta_omega / _continuity_denominator(a, b, k1, k2)
    return a, b, m, k1, k2


def _evaluate(a, b, m, k1, k2, delta_omega, t):
    t = np.asarray(t, dtype=float)
    s1_a = m * (_sp(0.0, k1) - _sp(-a, k1))
    v1 = m * (_sp(t - a, k1) - _sp(-a, k1))
    v2 = s1_a + m * (t - a)
    v3 = delta_omega - m * _sp(b - t, k2)
    return np.where(t <= a, v1, np.where(t <= b, v2, v3))


def _evaluate_grad(raw, delta_omega, t, idx=None):
    """Value and d(value)/d(raw) of the curve.

    Without ``idx``, ``raw (..., 5)``, ``delta_omega`` and ``t`` broadcast
    together.  With ``idx``, ``raw (g, 5)`` and ``delta_omega (g,)`` describe
    ``g`` curves and point ``j`` is evaluated at ``t[j]`` on curve ``idx[j]``;
    curve-level terms are then computed once per curve.

    Returns ``(value, grad)`` with ``grad.shape == value.shape + (5,)``.
    """
    raw = np.asarray(raw, dtype=float)
    t = np.asarray(t, dtype=float)
    dw = np.asarray(delta_omega, dtype=float)
    if idx is None:
        shape = np.broadcast_shapes(raw.shape[:-1], dw.shape, t.shape)
        raw = np.broadcast_to(raw, shape + (5,)).reshape(-1, 5)
        dw = np.broadcast_to(dw, shape).reshape(-1)
        t = np.broadcast_to(t, shape).reshape(-1)
        idx = np.arange(t.size)
        value, grad = _evaluate_grad(raw, dw, t, idx)
        return value.reshape(shape), grad.reshape(shape + (5,))

    a, b, m, k1, k2 = _derive(raw, dw)
    sp_na = _sp(-a, k1)
    sig_na = _sigmoid(-k1 * a)
    dspdk_na = _dsp_dk(-a, k1)
    head = LN2 / k1 - sp_na
    D = head + (b - a) + LN2 / k2
    # slope is tied to the shape through m = delta_omega / D
    dD_a = sig_na - 1.0
    dD_k1 = -LN2 / k1**2 - dspdk_na
    dD_k2 = -LN2 / k2**2
    chain = np.stack(
        [
            _sigmoid(raw[:, 0]),
            _sigmoid(raw[:, 1]),
            np.zeros_like(a),
            _sigmoid(raw[:, 3]),
            _sigmoid(raw[:, 4]),
        ],
        axis=-1,
    )

    n = t.size
    value = np.empty(n)
    # partials with respect to (a, b, k1, k2, m) at fixed m
    pa = np.zeros(n)
    pb = np.zeros(n)
    pk1 = np.zeros(n)
    pk2 = np.zeros(n)
    pm = np.empty(n)

    in1 = t <= a[idx]
    in3 = t > b[idx]
    in2 = ~(in1 | in3)

    j = np.flatnonzero(in1)
    if j.size:
        c = idx[j]
        u = t[j] - a[c]
        sp_u = _sp(u, k1[c])
        pm[j] = sp_u - sp_na[c]
        value[j] = m[c] * pm[j]
        pa[j] = m[c] * (sig_na[c] - _sigmoid(k1[c] * u))
        pk1[j] = m[c] * (_dsp_dk(u, k1[c]) - dspdk_na[c])
    j = np.flatnonzero(in2)
    if j.size:
        c = idx[j]
        u = t[j] - a[c]
        pm[j] = head[c] + u
        value[j] = m[c] * head[c] + m[c] * u
        pa[j] = m[c] * sig_na[c] - m[c]
        pk1[j] = m[c] * (-LN2 / k1[c] ** 2 - dspdk_na[c])
    j = np.flatnonzero(in3)
    if j.size:
        c = idx[j]
        v = b[c] - t[j]
        sp_v = _sp(v, k2[c])
        pm[j] = -sp_v
        value[j] = dw[c] - m[c] * sp_v
        pb[j] = -m[c] * _sigmoid(k2[c] * v)
        pk2[j] = -m[c] * _dsp_dk(v, k2[c])

    md = (m / D)[idx] * pm
    da = pa - md * dD_a[idx]
    db = pb - md
    dk1 = pk1 - md * dD_k1[idx]
    dk2 = pk2 - md * dD_k2[idx]
    ch = chain[idx]
    grad = np.stack(
        [(da + db) * ch[:, 0], db * ch[:, 1], np.zeros(n), dk1 * ch[:, 3], dk2 * ch[:, 4]],
        axis=-1,
    )
    return value, grad


def construct_params(raw, delta_omega: float) -> SCurveParams:
    """Map five unconstrained network outputs onto a valid continuous curve."""
    raw = np.asarray(raw, dtype=float)
    if raw.shape != (5,):
        raise ValueError(f"raw parameter vector must have 5 entries, got shape {raw.shape}")
    if not np.all(np.isfinite(raw)):
        raise ValueError("raw parameter vector is not finite")
    if not delta_omega > 0:
        raise ValueError(f"delta_omega must be positive, got {delta_omega}")
    a, b, m, k1, k2 = (float(x) for x in _derive(raw, float(delta_omega)))
    return SCurveParams(a, b, m, k1, k2, float(delta_omega))


def evaluate(p: SCurveParams, t):
    """Curve value at elapsed time ``t >= 0`` (scalar or array)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("S-curve is defined for t >= 0 only")
    out = _evaluate(p.a, p.b, p.m, p.k1, p.k2, p.delta_omega, t_arr)
    return float(out) if out.ndim == 0 else out


def eval_gradient(raw, delta_omega: float, t: float) -> np.ndarray:
    """Gradient of the curve value at ``t`` with respect to the five raw outputs."""
    if t < 0:
        raise ValueError("S-curve is defined for t >= 0 only")
    if not delta_omega > 0:
        raise ValueError("delta_omega must be positive")
    _, grad = _evaluate_grad(np.asarray(raw, dtype=float), float(delta_omega), float(t))
    return grad


def segment_values(p: SCurveParams, t):
    """The three segment formulas evaluated (and extended) at any ``t``."""
    t = np.asarray(t, dtype=float)
    s1 = p.m * (_sp(t - p.a, p.k1) - _sp(-p.a, p.k1))
    s2 = p.m * (_sp(0.0, p.k1) - _sp(-p.a, p.k1)) + p.m * (t - p.a)
    s3 = p.delta_omega - p.m * _sp(p.b - t, p.k2)
    return s1, s2, s3


def segment_slopes(p: SCurveParams, t):
    """Time derivatives of the three segment formulas at any ``t``."""
    t = np.asarray(t, dtype=float)
    d1 = p.m * _sigmoid(p.k1 * (t - p.a))
    d2 = p.m * np.ones_like(t)
    d3 = p.m * _sigmoid(p.k2 * (p.b - t))
    return d1, d2, d3


def saturation_time(p: SCurveParams, fraction: float = 0.99) -> float:
    """First time the curve reaches ``fraction * delta_omega`` (bisection)."""
    if not 0 < fraction < 1:
        raise ValueError("fraction must lie in (0, 1)")
    goal = fraction * p.delta_omega
    lo, hi = 0.0, p.b + 1.0 / p.k2
    while evaluate(p, hi) < goal:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if evaluate(p, mid) < goal:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return hi
