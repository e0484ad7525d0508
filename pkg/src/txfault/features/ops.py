"""Single-window time-series features.

Each function takes a 1-D window of samples and returns a scalar or a
short vector.  Degenerate inputs (constant windows, zero variance) map to
documented finite sentinels so that feature matrices never carry NaN or
infinity.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

CHANGE_QUANTILE_MODES = ("corridor_mean", "eq1_literal")


def _as_window(x, min_len: int = 1, what: str = "window") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"{what} must be one-dimensional")
    if x.size < min_len:
        raise ValueError(f"window too short: {what} needs at least {min_len} "
                         f"samples, got {x.size}")
    return x


def change_quantile(x, ql: float = 0.0, qh: float = 1.0,
                    mode: str = "corridor_mean", bounds=None) -> float:
    """Average absolute consecutive change inside a value corridor.

    The corridor is ``[Q(ql), Q(qh)]`` with ``Q`` the linearly interpolated
    sample quantile, or the absolute ``bounds=(lo, hi)`` when given.  Only
    steps whose two endpoints both lie in the corridor count.

    ``mode="corridor_mean"`` averages over the qualifying steps (0 when
    there are none); ``mode="eq1_literal"`` sums them and divides by the
    window length ``n``.
    """
    x = _as_window(x, 2)
    if mode not in CHANGE_QUANTILE_MODES:
        raise ValueError(f"mode must be one of {CHANGE_QUANTILE_MODES}")
    if bounds is None:
        if not 0.0 <= ql <= qh <= 1.0:
            raise ValueError("need 0 <= ql <= qh <= 1")
        lo, hi = np.quantile(x, [ql, qh])
    else:
        lo, hi = bounds
        if lo > hi:
            raise ValueError("corridor lower bound exceeds upper bound")
    inside = (x >= lo) & (x <= hi)
    keep = inside[:-1] & inside[1:]
    steps = np.abs(np.diff(x))[keep]
    if mode == "eq1_literal":
        return float(steps.sum() / x.size)
    if steps.size == 0:
        return 0.0
    return float(steps.mean())


def abs_energy(x) -> float:
    """Sum of squared samples."""
    x = _as_window(x, 1)
    return float(np.dot(x, x))


def _tolerance(x: np.ndarray, r: float, relative: bool) -> float:
    if r <= 0:
        raise ValueError("tolerance r must be positive")
    return r * float(np.std(x)) if relative else float(r)


def _window_max(a: np.ndarray, m: int) -> np.ndarray:
    """Max over each run of ``m`` consecutive entries of ``a``."""
    out = a[:a.size - m + 1].copy()
    for k in range(1, m):
        np.maximum(out, a[k:a.size - m + 1 + k], out=out)
    return out


def sample_entropy(x, m: int = 2, r: float = 0.2, relative: bool = True) -> float:
    """Sample entropy ``-ln(A/B)`` with Chebyshev tolerance ``r``.

    ``B`` counts pairs of distinct length-``m`` templates (the first
    ``n - m`` of them) within tolerance, ``A`` the same pairs extended to
    length ``m + 1``.  ``r`` is a multiple of the window's standard
    deviation when ``relative`` is true.  A zero count returns the cap
    ``ln((n - m)(n - m - 1))``; a constant window with relative ``r``
    returns 0.
    """
    x = _as_window(x, m + 2, "sample entropy window")
    n = x.size
    if relative and np.std(x) == 0:
        return 0.0
    tol = _tolerance(x, r, relative)
    n_templates = n - m
    a_count = b_count = 0
    # pair (i, i + lag): compare along the lag diagonal in one shot
    for lag in range(1, n_templates):
        diff = np.abs(x[:-lag] - x[lag:])
        close_m = _window_max(diff, m)[:n_templates - lag] <= tol
        b_count += int(np.count_nonzero(close_m))
        ext = diff[m:m + n_templates - lag]
        a_count += int(np.count_nonzero(close_m & (ext <= tol)))
    if a_count == 0 or b_count == 0:
        return math.log((n - m) * (n - m - 1))
    return -math.log(a_count / b_count)


def _phi(counts: np.ndarray) -> float:
    return float(np.mean(np.log(counts / counts.size)))


def approximate_entropy(x, m: int = 2, r: float = 0.2,
                        relative: bool = True) -> float:
    """Approximate entropy ``phi(m) - phi(m + 1)`` with self-matches."""
    x = _as_window(x, m + 2, "approximate entropy window")
    if relative and np.std(x) == 0:
        return 0.0
    tol = _tolerance(x, r, relative)
    n_m = x.size - m + 1
    c_m = np.ones(n_m)                  # self-matches
    c_m1 = np.ones(n_m - 1)
    for lag in range(1, n_m):
        diff = np.abs(x[:-lag] - x[lag:])
        close = _window_max(diff, m)[:n_m - lag] <= tol
        c_m[:n_m - lag] += close
        c_m[lag:] += close
        if lag < n_m - 1:
            close1 = close[:n_m - 1 - lag] & (diff[m:m + n_m - 1 - lag] <= tol)
            c_m1[:n_m - 1 - lag] += close1
            c_m1[lag:] += close1
    return _phi(c_m) - _phi(c_m1)


def binned_entropy(x, bins: int = 10) -> float:
    """Shannon entropy (nats) of an equal-width histogram over [min, max]."""
    x = _as_window(x, 1)
    if bins < 1:
        raise ValueError("bins must be >= 1")
    counts, _ = np.histogram(x, bins=bins)
    p = counts[counts > 0] / x.size
    return float(-np.sum(p * np.log(p)))


STAT_NAMES = ("min", "max", "mean", "median", "std", "skewness", "kurtosis",
              "q10", "q25", "q75", "q90", "mean_crossings", "n_peaks")


def basic_stats(x) -> dict[str, float]:
    """Summary statistics of a window.

    ``std`` is the population standard deviation; ``skewness`` and
    ``kurtosis`` (excess) are moment ratios, 0 when the window is constant
    or too short (fewer than 3 / 4 samples).  ``mean_crossings`` counts
    sign changes of ``x - mean`` and ``n_peaks`` counts strict local maxima
    of the interior samples.
    """
    x = _as_window(x, 1)
    n = x.size
    mean = float(np.mean(x))
    dev = x - mean
    m2 = float(np.mean(dev ** 2))
    std = math.sqrt(m2)
    skew = kurt = 0.0
    if m2 > 0:
        if n >= 3:
            skew = float(np.mean(dev ** 3)) / m2 ** 1.5
        if n >= 4:
            kurt = float(np.mean(dev ** 4)) / m2 ** 2 - 3.0
    q10, q25, median, q75, q90 = np.quantile(x, [0.1, 0.25, 0.5, 0.75, 0.9])
    above = dev > 0
    crossings = int(np.count_nonzero(above[1:] != above[:-1]))
    peaks = 0
    if n >= 3:
        mid = x[1:-1]
        peaks = int(np.count_nonzero((mid > x[:-2]) & (mid > x[2:])))
    return {
        "min": float(x.min()), "max": float(x.max()), "mean": mean,
        "median": float(median), "std": std, "skewness": skew,
        "kurtosis": kurt, "q10": float(q10), "q25": float(q25),
        "q75": float(q75), "q90": float(q90),
        "mean_crossings": float(crossings), "n_peaks": float(peaks),
    }


def fft_coefficients(x, k: int = 10, cycle: int = 167) -> np.ndarray:
    """Magnitudes of DFT bins ``0..k-1`` followed by the 2nd-harmonic ratio.

    The ratio ``|X[2]| / |X[1]|`` is taken over the first ``cycle``
    samples (the whole window if shorter), so that bin 1 is the
    fundamental; it is 0 when the fundamental vanishes.
    """
    x = _as_window(x, 2)
    if not 1 <= k <= x.size // 2:
        raise ValueError(f"k={k} out of range for window of length {x.size}")
    mags = np.abs(np.fft.rfft(x))[:k]
    head = x[:min(cycle, x.size)]
    ratio = 0.0
    if head.size >= 4:
        spec = np.abs(np.fft.rfft(head))
        if spec[1] > 0:
            ratio = float(spec[2] / spec[1])
    return np.append(mags, ratio)


class ARFit(NamedTuple):
    coefficients: np.ndarray
    degenerate: bool


def ar_coefficients(x, k: int = 4) -> ARFit:
    """Least-squares AR(k) fit ``x[t] ~ sum_j c_j x[t-j]`` (no intercept).

    A rank-deficient design (e.g. a constant window) yields zero
    coefficients with ``degenerate=True``.
    """
    x = _as_window(x, 2 * k + 1, "AR window")
    n = x.size
    design = np.column_stack([x[k - j:n - j] for j in range(1, k + 1)])
    target = x[k:]
    sv = np.linalg.svd(design, compute_uv=False)
    if sv[0] == 0 or sv[-1] / sv[0] < 1e-10:
        return ARFit(np.zeros(k), True)
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    return ARFit(coef, False)


def haar_dwt(x, levels: int = 3) -> tuple[np.ndarray, list[np.ndarray]]:
    """Orthonormal Haar DWT of the window zero-padded to a power of two.

    Returns the final approximation and the detail coefficients of each
    level, finest first.
    """
    x = _as_window(x, 1)
    if levels < 1 or x.size < 2 ** levels:
        raise ValueError(f"levels={levels} too deep for window of length {x.size}")
    size = 1 << max(int(math.ceil(math.log2(x.size))), levels)
    approx = np.zeros(size)
    approx[:x.size] = x
    details = []
    for _ in range(levels):
        even, odd = approx[0::2], approx[1::2]
        details.append((even - odd) / math.sqrt(2.0))
        approx = (even + odd) / math.sqrt(2.0)
    return approx, details


def dwt_coefficients(x, levels: int = 3, n_approx: int = 8) -> np.ndarray:
    """Per-level Haar detail energies then the first ``n_approx``
    approximation coefficients (zero-filled if fewer exist)."""
    approx, details = haar_dwt(x, levels)
    energies = [float(np.dot(d, d)) for d in details]
    head = np.zeros(n_approx)
    take = min(n_approx, approx.size)
    head[:take] = approx[:take]
    return np.concatenate([energies, head])
