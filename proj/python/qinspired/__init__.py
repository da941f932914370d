"""Sampling-based low-rank linear algebra."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import Error, __version__, _run_highdim, _run_random_point


def run_highdim(n_bits=50, k=3, kappa=3.0, kappa_beta=3.0, r=150, c=150, L=100, reps=10, seed=1,
                samples=10_000):
    """Implicit Hadamard experiment; returns the error report as a dict."""
    return _json.loads(_run_highdim(n_bits, k, kappa, kappa_beta, r, c, L, reps, seed, samples))


def run_random_point(m=4000, n=2000, k=5, kappa=5.0, r=425, c=425, L=100, reps=10, seed=1,
                     samples=10_000, reconstruction=True):
    """Dense Gaussian low-rank experiment; returns the error report as a dict."""
    return _json.loads(_run_random_point(m, n, k, kappa, r, c, L, reps, seed, samples, reconstruction))
