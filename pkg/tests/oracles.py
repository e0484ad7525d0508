"""Brute-force reference implementations used by the test suite.

Nothing here imports txfault internals; every function is a direct
transcription of the definition it checks, favouring clarity over speed.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


def quantile(x, q):
    """Linear interpolation between order statistics."""
    s = sorted(float(v) for v in x)
    pos = q * (len(s) - 1)
    lo = int(math.floor(pos))
    hi = min(lo + 1, len(s) - 1)
    return s[lo] + (pos - lo) * (s[hi] - s[lo])


def change_quantile(x, ql, qh, mode="corridor_mean", bounds=None):
    x = [float(v) for v in x]
    lo, hi = bounds if bounds is not None else (quantile(x, ql), quantile(x, qh))
    steps = [abs(x[i + 1] - x[i]) for i in range(len(x) - 1)
             if lo <= x[i] <= hi and lo <= x[i + 1] <= hi]
    if mode == "eq1_literal":
        return sum(steps) / len(x)
    return sum(steps) / len(steps) if steps else 0.0


def abs_energy(x):
    return sum(float(v) * float(v) for v in x)


def _std(x):
    n = len(x)
    mu = sum(x) / n
    return math.sqrt(sum((v - mu) ** 2 for v in x) / n)


def _templates(x, m, count):
    x = np.asarray(x, dtype=float)
    return np.stack([x[i:i + m] for i in range(count)])


def _chebyshev_matrix(t):
    """All pairwise max-norm distances, one template coordinate at a time."""
    out = np.zeros((t.shape[0], t.shape[0]))
    for k in range(t.shape[1]):
        np.maximum(out, np.abs(t[:, k, None] - t[None, :, k]), out=out)
    return out


def sample_entropy(x, m=2, r=0.2, relative=True):
    x = [float(v) for v in x]
    n = len(x)
    if relative and _std(x) == 0:
        return 0.0
    tol = r * _std(x) if relative else r
    count = n - m
    dm = _chebyshev_matrix(_templates(x, m, count))
    dm1 = _chebyshev_matrix(_templates(x, m + 1, count))
    iu = np.triu_indices(count, k=1)
    b = int(np.sum(dm[iu] <= tol))
    a = int(np.sum(dm1[iu] <= tol))
    if a == 0 or b == 0:
        return math.log((n - m) * (n - m - 1))
    return -math.log(a / b)


def sample_entropy_loops(x, m=2, r=0.2):
    """Pure-Python pair enumeration with absolute tolerance ``r``."""
    n = len(x)
    a = b = 0
    for i, j in itertools.combinations(range(n - m), 2):
        if all(abs(x[i + k] - x[j + k]) <= r for k in range(m)):
            b += 1
            if abs(x[i + m] - x[j + m]) <= r:
                a += 1
    if a == 0 or b == 0:
        return math.log((n - m) * (n - m - 1))
    return -math.log(a / b)


def approximate_entropy(x, m=2, r=0.2, relative=True):
    x = [float(v) for v in x]
    if relative and _std(x) == 0:
        return 0.0
    tol = r * _std(x) if relative else r

    def phi(mm):
        count = len(x) - mm + 1
        close = _chebyshev_matrix(_templates(x, mm, count)) <= tol
        c = close.sum(axis=1) / count
        return float(np.mean(np.log(c)))

    return phi(m) - phi(m + 1)


def binned_entropy(x, bins=10):
    x = [float(v) for v in x]
    lo, hi = min(x), max(x)
    counts = [0] * bins
    for v in x:
        k = 0 if hi == lo else min(int((v - lo) / (hi - lo) * bins), bins - 1)
        counts[k] += 1
    n = len(x)
    return -sum(c / n * math.log(c / n) for c in counts if c)


def basic_stats(x):
    x = [float(v) for v in x]
    n = len(x)
    mu = sum(x) / n
    m2 = sum((v - mu) ** 2 for v in x) / n
    m3 = sum((v - mu) ** 3 for v in x) / n
    m4 = sum((v - mu) ** 4 for v in x) / n
    skew = m3 / m2 ** 1.5 if m2 > 0 and n >= 3 else 0.0
    kurt = m4 / m2 ** 2 - 3.0 if m2 > 0 and n >= 4 else 0.0
    crossings = sum(1 for i in range(n - 1) if (x[i] > mu) != (x[i + 1] > mu))
    peaks = sum(1 for i in range(1, n - 1) if x[i] > x[i - 1] and x[i] > x[i + 1])
    return {"min": min(x), "max": max(x), "mean": mu, "median": quantile(x, 0.5),
            "std": math.sqrt(m2), "skewness": skew, "kurtosis": kurt,
            "q10": quantile(x, 0.1), "q25": quantile(x, 0.25),
            "q75": quantile(x, 0.75), "q90": quantile(x, 0.9),
            "mean_crossings": float(crossings), "n_peaks": float(peaks)}


def dft_magnitude(x, k):
    x = np.asarray(x, dtype=float)
    n = np.arange(x.size)
    re = np.sum(x * np.cos(2 * math.pi * k * n / x.size))
    im = -np.sum(x * np.sin(2 * math.pi * k * n / x.size))
    return math.hypot(re, im)


def fft_coefficients(x, k=10, cycle=167):
    mags = [dft_magnitude(x, j) for j in range(k)]
    head = list(x)[:cycle]
    f1 = dft_magnitude(head, 1)
    ratio = dft_magnitude(head, 2) / f1 if f1 > 0 else 0.0
    return np.array(mags + [ratio])


def ar_coefficients(x, k=4):
    """Normal-equation solution of the no-intercept AR(k) regression, built
    and solved in exact arithmetic so conditioning costs nothing."""
    fr = [Fraction(float(v)) for v in x]
    scale = max(f.denominator for f in fr)        # every denominator is a power of 2
    xi = [int(f * scale) for f in fr]
    rows = [[xi[t - j] for j in range(1, k + 1)] for t in range(k, len(xi))]
    target = xi[k:]
    gram = [[sum(r[a] * r[b] for r in rows) for b in range(k)] for a in range(k)]
    rhs = [sum(r[a] * y for r, y in zip(rows, target)) for a in range(k)]
    # Gauss-Jordan elimination over the rationals
    aug = [[Fraction(v) for v in gram[i] + [rhs[i]]] for i in range(k)]
    for col in range(k):
        piv = next(i for i in range(col, k) if aug[i][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        for i in range(k):
            if i != col and aug[i][col] != 0:
                f = aug[i][col] / aug[col][col]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[col])]
    return np.array([float(aug[i][k] / aug[i][i]) for i in range(k)])


def haar_levels(x, levels=3):
    size = 1
    while size < len(x) or size < 2 ** levels:
        size *= 2
    a = [float(v) for v in x] + [0.0] * (size - len(x))
    details = []
    s = math.sqrt(2.0)
    for _ in range(levels):
        details.append([(a[2 * i] - a[2 * i + 1]) / s for i in range(len(a) // 2)])
        a = [(a[2 * i] + a[2 * i + 1]) / s for i in range(len(a) // 2)]
    return a, details


def dwt_coefficients(x, levels=3, n_approx=8):
    a, details = haar_levels(x, levels)
    head = (a + [0.0] * n_approx)[:n_approx]
    return np.array([sum(v * v for v in d) for d in details] + head)


# -- trees ---------------------------------------------------------------------

def gini(labels):
    n = len(labels)
    _, counts = np.unique(labels, return_counts=True)
    return 1.0 - sum((c / n) ** 2 for c in counts)


def best_split(X, y, min_samples_leaf=1, tie_eps=1e-12):
    """All features, all midpoint thresholds.  Among candidates within
    ``tie_eps`` of the best gain, the lowest (feature, threshold) wins."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    n, d = X.shape
    if len(set(y.tolist())) < 2:
        return None
    parent = gini(y)
    cands = []
    for f in range(d):
        vals = sorted(set(X[:, f]))
        for lo, hi in zip(vals, vals[1:]):
            thr = (lo + hi) / 2.0
            if thr >= hi:          # midpoint collapsed onto the upper value
                thr = lo
            left = X[:, f] <= thr
            nl = int(left.sum())
            if nl < min_samples_leaf or n - nl < min_samples_leaf:
                continue
            gain = parent - nl / n * gini(y[left]) - (n - nl) / n * gini(y[~left])
            cands.append((f, thr, gain))
    if not cands:
        return None
    top = max(g for _, _, g in cands)
    return min((c for c in cands if c[2] >= top - tie_eps), key=lambda c: (c[0], c[1]))


# -- balancing and densities -----------------------------------------------------

def nearmiss(majority, minority, n_keep, n_neighbors=3):
    scores = []
    for i, a in enumerate(majority):
        d = sorted(math.dist(a, b) for b in minority)[:n_neighbors]
        scores.append((sum(d) / len(d), i))
    return sorted(i for _, i in sorted(scores)[:n_keep])


def kde(samples, h, x):
    total = 0.0
    for s in samples:
        z = (x - s) / h
        total += math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
    return total / (len(samples) * h)
