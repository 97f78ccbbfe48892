"""Analytic 1-D densities with exact sampling and exact interval means.

The four laws used throughout the benchmarks: f(x) = 2x and f(x) = 3x^2 on
[0, 1], the unit exponential on [0, +inf), and the standard Gaussian. Each
one exposes closed-form pdf / cdf / inverse cdf and the conditional mean
over an interval, so downstream solvers never need numerical quadrature.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import ZeroMassError

INF = float("inf")

#: probability mass below which an interval is treated as empty
MASS_FLOOR = 1e-300

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _scalarize(x, out):
    """Return a float when the input was scalar, else the array."""
    if np.ndim(x) == 0:
        return float(out)
    return out


class Density:
    """A 1-D probability law with closed-form quantities.

    Instances are immutable and stateless; random sources are always passed
    in by the caller, so a single instance is safe to share across threads.
    """

    kind: str = ""
    support_low: float = 0.0
    support_high: float = 0.0
    mean: float = 0.0

    def pdf(self, x):
        """Density f(x); zero outside the support."""
        raise NotImplementedError

    def cdf(self, x):
        """Distribution function F(x), clamped to [0, 1]."""
        raise NotImplementedError

    def ppf(self, u):
        """Inverse of the cdf on [0, 1]."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        """Draw by inverse-cdf transform of uniforms from ``rng``.

        Using the inverse cdf for every kind (including the Gaussian)
        means a shared uniform stream yields a shared data stream, which
        the benchmark harness relies on for common random numbers.
        """
        return self.ppf(rng.random(size))

    def mass(self, a, b):
        """Probability of the interval [a, b]."""
        return self.cdf(b) - self.cdf(a)

    def conditional_mean(self, a, b):
        """Mean of the law restricted to [a, b].

        Accepts scalars or equal-shaped arrays. Raises :class:`ZeroMassError`
        if any interval holds mass below ``MASS_FLOOR``.
        """
        a_arr = np.asarray(a, dtype=float)
        b_arr = np.asarray(b, dtype=float)
        if np.any(a_arr >= b_arr):
            raise ValueError("conditional_mean requires a < b")
        m = np.asarray(self.mass(a_arr, b_arr))
        if np.any(m < MASS_FLOOR):
            idx = int(np.argmax(m < MASS_FLOOR))
            raise ZeroMassError(
                f"interval {idx} of {self.kind} carries no probability mass",
                index=idx,
            )
        return _scalarize(a, self._cond_mean(a_arr, b_arr))

    def _cond_mean(self, a, b):
        raise NotImplementedError

    def __repr__(self):
        return f"Density({self.kind!r})"


class Linear2x(Density):
    """f(x) = 2x on [0, 1], F(x) = x^2."""

    kind = "linear2x"
    support_low = 0.0
    support_high = 1.0
    mean = 2.0 / 3.0

    def pdf(self, x):
        x_arr = np.asarray(x, dtype=float)
        out = np.where((x_arr >= 0.0) & (x_arr <= 1.0), 2.0 * x_arr, 0.0)
        return _scalarize(x, out)

    def cdf(self, x):
        return _scalarize(x, np.clip(np.asarray(x, dtype=float), 0.0, 1.0) ** 2)

    def ppf(self, u):
        return _scalarize(u, np.sqrt(np.asarray(u, dtype=float)))

    def _cond_mean(self, a, b):
        # (2/3)(b^3-a^3)/(b^2-a^2) factored to avoid cancellation
        return (2.0 / 3.0) * (a * a + a * b + b * b) / (a + b)


class Quadratic3x2(Density):
    """f(x) = 3x^2 on [0, 1], F(x) = x^3."""

    kind = "quadratic3x2"
    support_low = 0.0
    support_high = 1.0
    mean = 3.0 / 4.0

    def pdf(self, x):
        x_arr = np.asarray(x, dtype=float)
        out = np.where((x_arr >= 0.0) & (x_arr <= 1.0), 3.0 * x_arr * x_arr, 0.0)
        return _scalarize(x, out)

    def cdf(self, x):
        return _scalarize(x, np.clip(np.asarray(x, dtype=float), 0.0, 1.0) ** 3)

    def ppf(self, u):
        return _scalarize(u, np.cbrt(np.asarray(u, dtype=float)))

    def _cond_mean(self, a, b):
        # (3/4)(b^4-a^4)/(b^3-a^3) factored
        return 0.75 * (a * a + b * b) * (a + b) / (a * a + a * b + b * b)


class Exponential(Density):
    """f(x) = exp(-x) on [0, +inf), F(x) = 1 - exp(-x)."""

    kind = "exponential"
    support_low = 0.0
    support_high = INF
    mean = 1.0

    def pdf(self, x):
        x_arr = np.asarray(x, dtype=float)
        out = np.where(x_arr >= 0.0, np.exp(-np.maximum(x_arr, 0.0)), 0.0)
        return _scalarize(x, out)

    def cdf(self, x):
        x_arr = np.asarray(x, dtype=float)
        out = np.where(x_arr >= 0.0, -np.expm1(-np.maximum(x_arr, 0.0)), 0.0)
        return _scalarize(x, out)

    def ppf(self, u):
        return _scalarize(u, -np.log1p(-np.asarray(u, dtype=float)))

    def _cond_mean(self, a, b):
        # ((a+1)e^-a - (b+1)e^-b) / (e^-a - e^-b); the b -> inf limit is a+1.
        finite = np.isfinite(b)
        b_safe = np.where(finite, b, a)
        one_minus_w = -np.expm1(a - b_safe)  # 1 - e^(a-b), stable for narrow cells
        with np.errstate(invalid="ignore", divide="ignore"):
            tail = (b_safe - a) * (1.0 - one_minus_w) / one_minus_w
        return np.where(finite, a + 1.0 - tail, a + 1.0)


class Gaussian(Density):
    """Standard Gaussian N(0, 1) on the whole real line."""

    kind = "gaussian"
    support_low = -INF
    support_high = INF
    mean = 0.0

    def pdf(self, x):
        x_arr = np.asarray(x, dtype=float)
        finite = np.isfinite(x_arr)
        x_safe = np.where(finite, x_arr, 0.0)
        out = np.where(finite, np.exp(-0.5 * x_safe * x_safe) / _SQRT_2PI, 0.0)
        return _scalarize(x, out)

    def cdf(self, x):
        x_arr = np.asarray(x, dtype=float)
        out = np.where(
            np.isneginf(x_arr), 0.0, np.where(np.isposinf(x_arr), 1.0, ndtr(x_arr))
        )
        return _scalarize(x, out)

    def ppf(self, u):
        return _scalarize(u, ndtri(np.asarray(u, dtype=float)))

    def _cond_mean(self, a, b):
        # truncated-normal mean: (phi(a) - phi(b)) / (Phi(b) - Phi(a))
        return (self.pdf(np.asarray(a)) - self.pdf(np.asarray(b))) / (
            self.cdf(np.asarray(b)) - self.cdf(np.asarray(a))
        )


_REGISTRY: dict[str, Density] = {
    d.kind: d for d in (Linear2x(), Quadratic3x2(), Exponential(), Gaussian())
}
_ALIASES = {"standard_gaussian": "gaussian"}

#: canonical density names accepted by config files and the CLI
DENSITY_NAMES = tuple(_REGISTRY)


def get_density(name: str) -> Density:
    """Look up a density by its canonical config name."""
    key = _ALIASES.get(name, name)
    try:
        return _REGISTRY[key]
    except KeyError:
        raise ValueError(
            f"unknown density {name!r}; expected one of {', '.join(DENSITY_NAMES)}"
        ) from None
