"""Positive integrable memory kernels and their product-integration moments."""
from dataclasses import dataclass

import numpy as np

from memdiff.errors import DomainError, Violation

KINDS = ("exponential", "constant", "power")


@dataclass(frozen=True)
class MemoryKernel:
    """``K(t)`` on ``(0, horizon]``.

    * ``exponential``: ``kappa * exp(-rate * t)`` (``rate = 0`` is the constant limit)
    * ``constant``: ``kappa``
    * ``power``: ``kappa * t**(-alpha)``, weakly singular at 0 for ``alpha > 0``
    """

    kind: str = "exponential"
    kappa: float = 1.0
    rate: float = 1.0
    alpha: float = 0.0
    horizon: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; expected one of {KINDS}")


def validate_kernel(K):
    """Return the list of hypothesis violations (empty when admissible)."""
    out = []
    if not (np.isfinite(K.kappa) and K.kappa > 0):
        out.append(Violation("kernel.kappa", "positivity", f"kappa={K.kappa} must be > 0"))
    if K.kind == "exponential" and not (np.isfinite(K.rate) and K.rate >= 0):
        out.append(Violation("kernel.rate", "positivity", f"rate={K.rate} must be >= 0"))
    if K.kind == "power":
        if not np.isfinite(K.alpha) or K.alpha >= 1:
            out.append(
                Violation("kernel.alpha", "not integrable", f"alpha={K.alpha}: t^-alpha not in L1")
            )
        elif K.alpha < 0:
            out.append(Violation("kernel.alpha", "range", f"alpha={K.alpha} must be in [0, 1)"))
    if not (np.isfinite(K.horizon) and K.horizon > 0):
        out.append(Violation("kernel.horizon", "positivity", f"horizon={K.horizon}"))
    return out


def kernel_eval(K, t):
    t = np.asarray(t, dtype=float)
    if np.any((t <= 0) | (t > K.horizon)) or not np.all(np.isfinite(t)):
        raise DomainError(f"kernel evaluated outside (0, {K.horizon}]")
    if K.kind == "exponential":
        out = K.kappa * np.exp(-K.rate * t)
    elif K.kind == "constant":
        out = K.kappa * np.ones_like(t)
    else:
        out = K.kappa * t ** (-K.alpha)
    return out if out.ndim else float(out)


def l1_norm(K, T=None):
    """Closed-form ``∫_0^T |K|``; ``T`` defaults to the kernel horizon."""
    T = K.horizon if T is None else float(T)
    if K.kind == "constant" or (K.kind == "exponential" and K.rate == 0):
        return K.kappa * T
    if K.kind == "exponential":
        return -K.kappa * np.expm1(-K.rate * T) / K.rate
    return K.kappa * T ** (1 - K.alpha) / (1 - K.alpha)


def _exp_moment_factors(x):
    """``(1 - e^-x)/x`` and ``(1 - e^-x (1 + x))/x^2``, stable near 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-3
    xs = np.where(small, 1.0, x)
    f0 = np.where(small, 1 - x / 2 + x * x / 6 - x**3 / 24, -np.expm1(-xs) / xs)
    f1 = np.where(
        small,
        0.5 - x / 3 + x * x / 8 - x**3 / 30,
        (-np.expm1(-xs) - xs * np.exp(-xs)) / (xs * xs),
    )
    return f0, f1


def panel_moments(K, dt, n_lags):
    """Zeroth and first moments of ``K`` over the lag panels ``[l dt, (l+1) dt]``.

    Returns ``(I0, I1)`` of length ``n_lags`` with
    ``I0[l] = ∫ K(τ) dτ`` and ``I1[l] = ∫ K(τ) (τ - l dt)/dt dτ`` over panel ``l``.
    Both are exact, so the singular endpoint of a power kernel is never sampled.
    """
    lags = np.arange(n_lags, dtype=float)
    h = float(dt)
    if K.kind == "constant" or (K.kind == "exponential" and K.rate == 0):
        I0 = np.full(n_lags, K.kappa * h)
        return I0, 0.5 * I0
    if K.kind == "exponential":
        f0, f1 = _exp_moment_factors(K.rate * h)
        decay = K.kappa * h * np.exp(-K.rate * h * lags)
        return decay * f0, decay * f1
    a = 1.0 - K.alpha
    b = 2.0 - K.alpha
    scale = K.kappa * h**a
    p_a = (lags + 1) ** a - lags**a
    I0 = scale * p_a / a
    I1 = scale * (((lags + 1) ** b - lags**b) / b - lags * p_a / a)
    return I0, I1


class ConvolutionWeights:
    """Product-trapezoid weights for ``∫_0^{t_k} K(t_k - s) g(s) ds`` on a uniform grid.

    ``g`` is interpolated linearly between grid values and the kernel is integrated
    exactly against each linear piece.
    """

    def __init__(self, K, dt, n_steps):
        I0, I1 = panel_moments(K, dt, n_steps)
        w = np.empty(n_steps)
        w[0] = I0[0] - I1[0]
        w[1:] = I1[:-1] + I0[1:] - I1[1:]
        self.n_steps = n_steps
        self.interior = w
        self.tail = I1
        self._reversed = w[::-1].copy()

    def apply(self, history, k):
        """Convolution at step ``k`` from ``history[0..k]`` (leading axis = time)."""
        if k == 0:
            return np.zeros_like(history[0])
        if k > self.n_steps:
            raise IndexError(f"step {k} beyond the {self.n_steps} prepared lags")
        head = self._reversed[self.n_steps - k :]
        flat = history[1 : k + 1].reshape(k, -1)
        out = head @ flat + self.tail[k - 1] * history[0].ravel()
        return out.reshape(history[0].shape)

    def matrix(self, n=None):
        """Dense lower-triangular map from history ``g_0..g_n`` to ``M_0..M_n``."""
        n = self.n_steps if n is None else n
        W = np.zeros((n + 1, n + 1))
        for k in range(1, n + 1):
            W[k, 1 : k + 1] = self._reversed[self.n_steps - k :]
            W[k, 0] = self.tail[k - 1]
        return W
