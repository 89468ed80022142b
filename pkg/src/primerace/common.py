"""Shared plumbing: error types, compensated summation, quadrature."""

from __future__ import annotations

import numpy as np


class CapacityError(ValueError):
    """Requested work exceeds the desk-scale capacity of a module."""


class CompletenessError(RuntimeError):
    """A zero search could not certify that it found every zero.

    Carries the suspect interval so the caller can rescan it densely.
    """

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class KahanSum:
    """Compensated accumulator; add() accepts scalars or arrays (summed first)."""

    __slots__ = ("value", "_c")

    def __init__(self, value=0.0):
        self.value = float(value)
        self._c = 0.0

    def add(self, x):
        x = float(np.sum(x)) if np.ndim(x) else float(x)
        y = x - self._c
        t = self.value + y
        self._c = (t - self.value) - y
        self.value = t
        return self


_GL_CACHE = {}


def _gl_nodes(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def composite_gauss_legendre(f, lo, hi, subwidth=1e-3, nodes=32):
    """Integrate f over [lo, hi] with fixed-order Gauss-Legendre panels.

    f must accept an ndarray of abscissae and return values of the same
    shape.  Panel width defaults to 1e-3 so that integrands band-limited
    to a few thousand rad/unit are resolved spectrally by 32 nodes.
    """
    if hi < lo:
        raise ValueError(f"bad interval [{lo}, {hi}]")
    if hi == lo:
        return 0.0
    x, w = _gl_nodes(nodes)
    nsub = max(1, int(np.ceil((hi - lo) / subwidth)))
    edges = np.linspace(lo, hi, nsub + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    ts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    vals = f(ts)
    vals = np.asarray(vals).reshape(nsub, nodes)
    return float(np.real_if_close((vals * w[None, :]).sum(axis=1) @ half, tol=0)) \
        if not np.iscomplexobj(vals) else complex((vals * w[None, :]).sum(axis=1) @ half)


def real12(x):
    """Format a real with 12 significant digits (census CSV convention)."""
    return format(float(x), ".12g")
