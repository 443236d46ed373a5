"""Numerical differentiation of sampled signals.

Two estimators are provided for the time derivative of a uniformly
sampled series:

* `fd_derivative` — second-order central differences in the interior,
  first-order one-sided stencils at the two endpoints.
* `spectral_derivative` — differentiation in the frequency domain with
  a guard against the spurious oscillations a plain FFT derivative
  produces on non-periodic records.  The series is detrended by a
  least-squares line, extended on both sides by tapered mirror images
  (quarter of the record length), windowed, multiplied by j*omega with
  a Gaussian low-pass gain, transformed back, cropped, and the trend
  slope is added back.

`accel_targets` applies the configured estimator column-wise to the
velocities of a trajectory, cross-fading to the finite-difference
estimate inside a small boundary margin where the spectral estimate is
least trustworthy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPECTRAL_HYBRID = "spectral_hybrid"
FINITE_DIFFERENCE = "finite_difference"
METHODS = (SPECTRAL_HYBRID, FINITE_DIFFERENCE)


@dataclass
class DiffConfig:
    """Differentiation settings; None selects the documented defaults
    (mirror length N//4, Gaussian bandwidth N/20, boundary margin
    max(5, N//50)) from the record length N at call time."""

    method: str = SPECTRAL_HYBRID
    alpha: float = 0.2
    sigma: float | None = None
    mirror_len: int | None = None
    boundary_margin: int | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown differentiation method "
                             f"{self.method!r}; expected one of {METHODS}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.sigma is not None and not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.mirror_len is not None and self.mirror_len < 1:
            raise ValueError("mirror_len must be at least 1")
        if self.boundary_margin is not None and self.boundary_margin < 0:
            raise ValueError("boundary_margin must be non-negative")


@dataclass
class TrendFit:
    a: float  # intercept
    b: float  # slope


def _check_series(series: np.ndarray, dt: float) -> np.ndarray:
    series = np.asarray(series, dtype=float)
    if series.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not np.all(np.isfinite(series)):
        raise ValueError("series contains non-finite values")
    return series


def detrend(series: np.ndarray, dt: float) -> tuple[np.ndarray, TrendFit]:
    """Remove the least-squares line a + b*t; returns (residual, fit)."""
    series = _check_series(series, dt)
    n = series.shape[0]
    if n < 2:
        raise ValueError("need at least two samples to fit a trend")
    t = dt * np.arange(n)
    tm = t - t.mean()
    b = float(tm @ (series - series.mean()) / (tm @ tm))
    a = float(series.mean() - b * t.mean())
    return series - (a + b * t), TrendFit(a=a, b=b)


def cosine_taper(m: int) -> np.ndarray:
    """Half-cosine ramp tau(s) = (1 - cos(pi s / m))/2 for s = 0..m;
    tau(0) = 0, tau(m) = 1."""
    if m < 1:
        raise ValueError("taper length must be at least 1")
    s = np.arange(m + 1)
    return 0.5 * (1.0 - np.cos(np.pi * s / m))


def mirror_extend(series: np.ndarray, mirror_len: int) -> np.ndarray:
    """Extend by tapered mirror images on both sides.

    The left extension reflects about the first sample, the right about
    the last; both decay to zero at the outer edge through the cosine
    taper so the extended record starts and ends near zero.  The
    central N samples are the original series unchanged.
    """
    series = np.asarray(series, dtype=float)
    n = series.shape[0]
    m = int(mirror_len)
    if not 1 <= m <= n - 1:
        raise ValueError(f"mirror_len must be in [1, {n - 1}], got {m}")
    taper = cosine_taper(m)
    left = taper[:m] * series[m:0:-1]
    right = taper[m - 1::-1] * series[np.arange(n - 2, n - 2 - m, -1)]
    return np.concatenate((left, series, right))


def tukey_window(n: int, alpha: float) -> np.ndarray:
    """Tapered-cosine window of n samples over [0, L], L = n - 1:
    cosine ramps on the first and last alpha*L/2 samples, flat middle."""
    if n < 2:
        raise ValueError("window needs at least two samples")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    t = np.arange(n, dtype=float)
    L = float(n - 1)
    edge = alpha * L / 2.0
    w = np.ones(n)
    head = t < edge
    w[head] = 0.5 * (1.0 - np.cos(2.0 * np.pi * t[head] / (alpha * L)))
    tail = t > L - edge
    w[tail] = 0.5 * (1.0 - np.cos(2.0 * np.pi * (L - t[tail]) / (alpha * L)))
    return w


def gaussian_gain(n: int, sigma: float) -> np.ndarray:
    """Low-pass gain exp(-(k/sigma)^2 / 2) over the signed FFT bins."""
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    k = np.fft.fftfreq(n, d=1.0) * n
    return np.exp(-0.5 * (k / sigma) ** 2)


def dft(x: np.ndarray) -> np.ndarray:
    return np.fft.fft(x)


def idft(X: np.ndarray) -> np.ndarray:
    return np.fft.ifft(X)


def spectral_derivative(series: np.ndarray, dt: float,
                        config: DiffConfig | None = None) -> np.ndarray:
    """Frequency-domain derivative of a non-periodic record.

    Differentiation multiplies the spectrum by j*omega_k, which is
    exact for band-limited periodic signals; the detrend/mirror/window
    stages suppress the boundary discontinuity that otherwise injects
    an error of order |z(T)-z(0)| / (2 dt) near the record edges.
    """
    config = config or DiffConfig()
    series = _check_series(series, dt)
    n = series.shape[0]
    if n < 16:
        raise ValueError(f"record too short for spectral differentiation "
                         f"({n} samples, need 16)")
    m = config.mirror_len if config.mirror_len is not None else n // 4
    sigma = config.sigma if config.sigma is not None else n / 20.0

    residual, trend = detrend(series, dt)
    extended = mirror_extend(residual, m)
    ne = extended.shape[0]
    windowed = extended * tukey_window(ne, config.alpha)
    spectrum = dft(windowed)
    omega = 2.0 * np.pi * np.fft.fftfreq(ne, d=dt)
    deriv_ext = idft(1j * omega * gaussian_gain(ne, sigma) * spectrum).real
    return deriv_ext[m:m + n] + trend.b


def fd_derivative(series: np.ndarray, dt: float, order: int = 1) -> np.ndarray:
    """Finite-difference derivative of the given order (1 or 2).

    Order 1: central (z[i+1]-z[i-1])/(2 dt) in the interior, one-sided
    first-order differences at the endpoints.
    """
    series = _check_series(series, dt)
    n = series.shape[0]
    if order == 1:
        if n < 2:
            raise ValueError("need at least two samples")
        out = np.empty(n)
        out[1:-1] = (series[2:] - series[:-2]) / (2.0 * dt)
        out[0] = (series[1] - series[0]) / dt
        out[-1] = (series[-1] - series[-2]) / dt
        return out
    if order == 2:
        if n < 3:
            raise ValueError("need at least three samples")
        out = np.empty(n)
        out[1:-1] = (series[2:] - 2.0 * series[1:-1] + series[:-2]) / dt ** 2
        out[0] = (series[2] - 2.0 * series[1] + series[0]) / dt ** 2
        out[-1] = (series[-1] - 2.0 * series[-2] + series[-3]) / dt ** 2
        return out
    raise ValueError(f"unsupported derivative order {order}")


def hybrid_derivative(series: np.ndarray, dt: float,
                      config: DiffConfig | None = None) -> np.ndarray:
    """Spectral derivative in the interior, cross-faded to the
    finite-difference estimate over a small margin at each boundary."""
    config = config or DiffConfig()
    series = _check_series(series, dt)
    n = series.shape[0]
    margin = (config.boundary_margin if config.boundary_margin is not None
              else max(5, n // 50))
    spectral = spectral_derivative(series, dt, config)
    if margin == 0:
        return spectral
    fd = fd_derivative(series, dt)
    if 2 * margin >= n:
        raise ValueError(f"boundary margin {margin} too large for {n} samples")
    w = np.ones(n)
    ramp = np.arange(margin) / margin
    w[:margin] = ramp
    w[n - margin:] = ramp[::-1]
    return w * spectral + (1.0 - w) * fd


def derivative(series: np.ndarray, dt: float,
               config: DiffConfig | None = None) -> np.ndarray:
    """Derivative estimate using the configured method."""
    config = config or DiffConfig()
    if config.method == FINITE_DIFFERENCE:
        return fd_derivative(series, dt)
    return hybrid_derivative(series, dt, config)


def accel_targets(traj, config: DiffConfig | None = None) -> np.ndarray:
    """Acceleration targets, one row per trajectory sample, obtained by
    differentiating each velocity column once (never positions twice)."""
    config = config or DiffConfig()
    vel = traj.velocities
    out = np.empty_like(vel)
    for j in range(vel.shape[1]):
        out[:, j] = derivative(vel[:, j], traj.dt, config)
    return out
