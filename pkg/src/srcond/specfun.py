"""Special functions and quadrature.

Bessel functions of the first kind for the small set of integer and
half-integer orders the library needs, their first positive zeros, and
Gauss-Legendre quadrature rules on [-1, 1].

Half-integer orders are evaluated through their closed trigonometric
forms, e.g. J_{1/2}(x) = sqrt(2/(pi x)) sin(x).  Integer orders go
through scipy's cephes routines (j0/j1/jn), which are accurate to a few
ulp over the range used here; the power-series route survives in the
test suite as an independent oracle.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as _sp

from .errors import ConfigError, DomainError, NumericsError

# Orders are stored doubled so that half-integers stay exact.  Evaluation
# supports one extra order on each side of the core set so that the
# three-term recurrence J_{v-1} + J_{v+1} = (2v/x) J_v can be checked for
# every core order.
_EVAL_ORDERS = frozenset({-3, -2, -1, 0, 1, 2, 3, 4, 5, 6})
_ZERO_ORDERS = frozenset({-1, 0, 1, 2, 3, 4})


@dataclass(frozen=True)
class BesselOrder:
    """Order nu stored as 2*nu so half-integer orders are exact."""

    twice_order: int

    def __post_init__(self):
        if self.twice_order not in _EVAL_ORDERS:
            raise ConfigError(
                f"unsupported Bessel order nu={self.twice_order / 2}; "
                f"supported 2*nu values: {sorted(_EVAL_ORDERS)}"
            )

    @property
    def nu(self) -> float:
        return self.twice_order / 2.0

    @classmethod
    def of(cls, value) -> "BesselOrder":
        """Coerce a BesselOrder, an int/float order, or a half-integer."""
        if isinstance(value, BesselOrder):
            return value
        twice = 2.0 * float(value)
        if abs(twice - round(twice)) > 1e-12:
            raise ConfigError(f"order {value} is not integer or half-integer")
        return cls(int(round(twice)))


def _halfint_j(t2: int, x: np.ndarray) -> np.ndarray:
    """Closed trigonometric forms for J_nu with 2*nu odd."""
    out = np.empty_like(x)
    zero = x == 0.0
    xs = np.where(zero, 1.0, x)  # placeholder, fixed up below
    pref = np.sqrt(2.0 / (np.pi * xs))
    s, c = np.sin(xs), np.cos(xs)
    if t2 == 1:
        val = pref * s
        at0 = 0.0
    elif t2 == -1:
        val = pref * c
        at0 = np.inf
    elif t2 == 3:
        val = pref * (s / xs - c)
        at0 = 0.0
    elif t2 == -3:
        val = pref * (-c / xs - s)
        at0 = -np.inf
    elif t2 == 5:
        val = pref * ((3.0 / xs**2 - 1.0) * s - 3.0 * c / xs)
        at0 = 0.0
    else:  # pragma: no cover - guarded by _EVAL_ORDERS
        raise ConfigError(f"unsupported half-integer order 2*nu={t2}")
    out[...] = val
    out[zero] = at0
    return out


def bessel_j(order, x):
    """Bessel function of the first kind J_nu(x) for x >= 0.

    Accepts scalars or arrays; vectorized over x.
    """
    order = BesselOrder.of(order)
    xs = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xs)):
        raise DomainError("bessel_j requires finite x")
    if np.any(xs < 0):
        raise DomainError("bessel_j requires x >= 0")
    t2 = order.twice_order
    if t2 % 2 == 0:
        n = t2 // 2
        if n == 0:
            out = _sp.j0(xs)
        elif n == 1:
            out = _sp.j1(xs)
        elif n == -1:
            out = -_sp.j1(xs)
        else:
            out = _sp.jn(n, xs)
    else:
        out = _halfint_j(t2, np.atleast_1d(xs).astype(float))
        out = out.reshape(xs.shape) if xs.shape else out[0]
    if np.isscalar(x) or np.asarray(x).shape == ():
        return float(out)
    return out


@lru_cache(maxsize=None)
def _first_zero(t2: int) -> float:
    nu = t2 / 2.0
    lo = max(nu, 1e-6)
    hi = nu + 4.0
    flo = bessel_j(BesselOrder(t2), lo)
    fhi = bessel_j(BesselOrder(t2), hi)
    if not (flo > 0.0 > fhi):
        raise NumericsError(
            f"bracket ({lo}, {hi}) shows no sign change for nu={nu}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fmid = bessel_j(BesselOrder(t2), mid)
        if fmid > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    return 0.5 * (lo + hi)


def first_bessel_zero(order) -> float:
    """First positive zero j_{nu,1}, found by bracketing and bisection.

    The bracket (nu, nu+4) contains j_{nu,1} for every supported order;
    it is validated by a sign change before bisecting.
    """
    order = BesselOrder.of(order)
    if order.twice_order not in _ZERO_ORDERS:
        raise ConfigError(
            f"first zero unsupported for nu={order.nu}; "
            f"supported 2*nu values: {sorted(_ZERO_ORDERS)}"
        )
    return _first_zero(order.twice_order)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of an m-point Gauss-Legendre rule on (-1, 1)."""

    nodes: np.ndarray
    weights: np.ndarray

    def map_to(self, a: float, b: float):
        """Affinely mapped nodes and weights for integration over [a, b]."""
        half = 0.5 * (b - a)
        return a + half * (self.nodes + 1.0), half * self.weights

    def integrate(self, f, a: float = -1.0, b: float = 1.0) -> float:
        x, w = self.map_to(a, b)
        return float(np.dot(w, f(x)))


def _legendre_and_derivative(m: int, x: np.ndarray):
    """P_m(x) and P_m'(x) by the three-term recurrence."""
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(2, m + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    dp = m * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


@lru_cache(maxsize=None)
def _gl_rule(m: int) -> QuadratureRule:
    if m == 1:
        return QuadratureRule(np.zeros(1), np.full(1, 2.0))
    i = np.arange(m)
    x = np.cos(np.pi * (i + 0.75) / (m + 0.5))
    for _ in range(100):
        p, dp = _legendre_and_derivative(m, x)
        dx = p / dp
        x -= dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    else:  # pragma: no cover
        raise NumericsError(f"Newton iteration stalled for m={m}")
    # enforce the symmetry of the rule exactly
    x = 0.5 * (x - x[::-1])
    _, dp = _legendre_and_derivative(m, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    w = 0.5 * (w + w[::-1])
    order = np.argsort(x)
    return QuadratureRule(x[order], w[order])


def gauss_legendre(m: int) -> QuadratureRule:
    """m-point Gauss-Legendre rule on [-1, 1] via Newton iteration on P_m."""
    m = int(m)
    if not 1 <= m <= 10000:
        raise ConfigError(f"node count m={m} out of range [1, 10000]")
    return _gl_rule(m)
