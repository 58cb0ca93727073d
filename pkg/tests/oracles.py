"""Slow, obviously-correct reference implementations used only by the tests."""

import itertools
import math

import numpy as np


def brute_extrema_1d(s):
    """Strict extrema by direct scan; plateaus resolved by walking both ends."""
    s = list(s)
    n = len(s)
    maxima, minima = [], []
    i = 1
    while i < n - 1:
        j = i
        while j + 1 < n and s[j + 1] == s[i]:
            j += 1
        if j == n - 1:
            break
        left, right = s[i - 1], s[j + 1]
        centre = (i + j) // 2
        if s[i] > left and s[i] > right:
            maxima.append(centre)
        elif s[i] < left and s[i] < right:
            minima.append(centre)
        i = j + 1
    return maxima, minima


def brute_extrema_2d(f):
    h, w = f.shape
    mx = np.zeros((h, w), bool)
    mn = np.zeros((h, w), bool)
    for i in range(h):
        for j in range(w):
            nb = [f[i + di, j + dj] for di in (-1, 0, 1) for dj in (-1, 0, 1)
                  if (di or dj) and 0 <= i + di < h and 0 <= j + dj < w]
            mx[i, j] = all(f[i, j] > v for v in nb)
            mn[i, j] = all(f[i, j] < v for v in nb)
    return mx, mn


def brute_window_extreme(f, w, op):
    """Per-pixel max/min over a w x w window with edge replication."""
    h, wd = f.shape
    r = w // 2
    out = np.empty_like(f)
    for i in range(h):
        for j in range(wd):
            vals = [f[min(max(i + di, 0), h - 1), min(max(j + dj, 0), wd - 1)]
                    for di in range(-r, r + 1) for dj in range(-r, r + 1)]
            out[i, j] = op(vals)
    return out


def brute_min_nn_distance(mask):
    pts = np.argwhere(mask)
    best = math.inf
    for a, b in itertools.combinations(range(len(pts)), 2):
        best = min(best, math.dist(pts[a], pts[b]))
    return best


def brute_max_nn_distance(mask):
    pts = np.argwhere(mask)
    nn = []
    for a in range(len(pts)):
        nn.append(min(math.dist(pts[a], pts[b]) for b in range(len(pts)) if b != a))
    return max(nn)


def naive_dft2(x):
    """Unnormalised forward DFT straight from the definition, O(N^4)."""
    h, w = x.shape
    m, n = np.indices((h, w))
    out = np.zeros((h, w), complex)
    for u in range(h):
        for v in range(w):
            phase = -2 * np.pi * (u * m / h + v * n / w)
            out[u, v] = np.sum(x * np.cos(phase)) + 1j * np.sum(x * np.sin(phase))
    return out


def loop_l1_mean(a, b):
    a = np.asarray(a, float).ravel()
    b = np.asarray(b, float).ravel()
    total = 0.0
    for x, y in zip(a, b):
        total += abs(x - y)
    return total / len(a)


def pearson(a, b):
    a = np.asarray(a, float) - np.mean(a)
    b = np.asarray(b, float) - np.mean(b)
    return float((a * b).sum() / math.sqrt((a * a).sum() * (b * b).sum()))


def fft_energy_split(field, cutoff):
    """Fraction of spectral energy at radial frequency (cycles/image) above cutoff."""
    h, w = field.shape
    fy = np.fft.fftfreq(h) * h
    fx = np.fft.fftfreq(w) * w
    radius = np.hypot(*np.meshgrid(fy, fx, indexing="ij"))
    power = np.abs(np.fft.fft2(field)) ** 2
    return power[radius > cutoff].sum() / power.sum()
