"""Compactly supported minorant machinery for separation-limited bounds.

The central object is a radial bump ``phi`` supported on a ball of radius
R = j_{d/2,1}/(2 pi), built from a Bessel function of order d/2 - 1 and
normalized so that both phi and its radial derivative vanish at R.  Its
autocorrelation h = phi * phi and the combination

    psi_tau(x) = (1+tau)^{-d/2} [4 pi^2 (1+tau) + Laplacian] h(x / sqrt(1+tau))

give a function whose Fourier transform is nonnegative on the unit ball
and nonpositive outside, which is what turns frequency-side energy
estimates into node-wise real-space bounds.  The Laplacian acts on h
before the argument scaling; only that ordering places the sign change
of the transform exactly at ||v|| = 1.

Inside its support the bump satisfies Laplacian(phi) = 4 pi^2 (1 - phi),
because its radial profile is an eigenfunction of the Laplacian shifted
by a constant.  Two consequences organize all the numerics here:

* Laplacian(h) = 4 pi^2 (b - h) with b = indicator(support ball) * phi,
  so the psi profile reduces to 4 pi^2 [tau h + b]: two smooth
  convolution tables and no numerical differentiation.  Difference
  tables of h are still built and reconciled against the identity, and a
  step-halving monitor guards the tables at construction time.
* Taking transforms, phi_hat(v) = ball_hat(v) / (1 - v^2) with ball_hat
  the closed-form transform of the support ball's indicator; the zero of
  ball_hat at v = 1 (forced by the choice of the support radius) makes
  the singularity removable.  Iterating the same identity turns every
  origin derivative the bounds need into one-dimensional integrals of
  phi itself.

h is only C^4 at the origin (its transform decays like v^{-d-5}), so the
radial profile of psi carries a genuine cubic term at 0; derivative
checks difference against dedicated quadrature evaluations and
extrapolate both the h and h^2 error terms away.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericsError, TruncationError
from .specfun import BesselOrder, bessel_j, first_bessel_zero, gauss_legendre
from .torus import NodeSet, separation

_TWO_PI = 2.0 * math.pi
_FOUR_PI_SQ = 4.0 * math.pi**2

# surface measure of the unit sphere S^{d-1}
_SPHERE = {1: 2.0, 2: _TWO_PI, 3: 4.0 * math.pi}

_GRID_POINTS = 10_001  # radial samples of the convolution tables


def _scaled_j(t2: int, z):
    """z^{-nu} J_nu(z) for 2*nu = t2, finite and smooth at z = 0.

    Supported t2: -1, 0, 1, 2, 3, 4, 5.  Small arguments of the orders
    with cancellation-prone closed forms go through the power series.
    """
    z = np.asarray(z, dtype=float)
    if t2 == -1:
        return math.sqrt(2.0 / math.pi) * np.cos(z)
    if t2 == 0:
        return bessel_j(BesselOrder(0), z)
    if t2 == 1:
        return math.sqrt(2.0 / math.pi) * np.sinc(z / math.pi)
    nu = t2 / 2.0
    out = np.empty_like(z)
    small = z < 0.5
    if np.any(small):
        zs = z[small]
        acc = np.zeros_like(zs)
        z24 = 0.25 * zs * zs
        for k in range(11, -1, -1):
            coef = (-1) ** k / (math.factorial(k) * math.gamma(nu + k + 1))
            acc = acc * z24 + coef
        out[small] = acc / 2.0**nu
    big = ~small
    if np.any(big):
        zb = z[big]
        if t2 == 2:
            out[big] = bessel_j(BesselOrder(2), zb) / zb
        elif t2 == 3:
            out[big] = math.sqrt(2.0 / math.pi) * (np.sin(zb) / zb - np.cos(zb)) / zb**2
        elif t2 == 4:
            out[big] = bessel_j(BesselOrder(4), zb) / zb**2
        elif t2 == 5:
            out[big] = (
                math.sqrt(2.0 / math.pi)
                * ((3.0 / zb**2 - 1.0) * np.sin(zb) - 3.0 * np.cos(zb) / zb)
                / zb**3
            )
        else:  # pragma: no cover
            raise DomainError(f"unsupported scaled order 2*nu={t2}")
    return out


@dataclass
class _HTables:
    """Per-dimension tables shared by every tau.

    ``h`` is the autocorrelation phi * phi, ``b`` the convolution of phi
    with the indicator of its support ball, both sampled on ``r_grid``.
    ``h1``/``h2`` are central-difference radial derivatives of h, kept as
    a cross-check against the Laplacian identity 4 pi^2 (b - h).
    """

    dim: int
    j_zero: float
    radius: float
    phi_coeff: float
    r_grid: np.ndarray
    h: np.ndarray
    b: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    h0: float
    ball_volume: float
    phi_hat0: float
    quad_order: int


_H_CACHE: dict = {}


def _phi_values(tables: _HTables, r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    z = _TWO_PI * r
    val = 1.0 - tables.phi_coeff * _scaled_j(tables.dim - 2, z)
    return np.where(r < tables.radius, val, 0.0)


def _conv_pair_1d(tables: _HTables, r: np.ndarray, m: int):
    R = tables.radius
    rule = gauss_legendre(m)
    h_out = np.zeros_like(r)
    b_out = np.zeros_like(r)
    inside = r < 2.0 * R
    ri = r[inside]
    lo = ri - R
    hi = np.full_like(ri, R)
    half = 0.5 * (hi - lo)
    t = lo[:, None] + half[:, None] * (rule.nodes[None, :] + 1.0)
    w = half[:, None] * rule.weights[None, :]
    shifted = _phi_values(tables, np.abs(ri[:, None] - t))
    h_out[inside] = np.sum(w * shifted * _phi_values(tables, np.abs(t)), axis=1)
    b_out[inside] = np.sum(w * shifted, axis=1)
    return h_out, b_out


def _conv_pair_radial(tables: _HTables, r: np.ndarray, m: int):
    """phi * phi and indicator * phi in one pass, d >= 2.

    Polar double quadrature; the angular integral stops where the shifted
    argument leaves the support of phi and the radial integral is split
    there too, so each panel sees a smooth integrand.  Both convolutions
    share the inner integral; only the outer radial weight differs.
    """
    d, R = tables.dim, tables.radius
    rule = gauss_legendre(m)
    xs, ws = rule.nodes, rule.weights
    h_out = np.zeros_like(r)
    b_out = np.zeros_like(r)
    mask = (r > 0.0) & (r < 2.0 * R)
    rm = r[mask]
    if rm.size == 0:
        return h_out, b_out

    lo1 = np.where(rm <= R, 0.0, rm - R)
    cut = np.where(rm <= R, R - rm, 0.5 * (rm - R + R))
    seg_lo = np.stack([lo1, cut], axis=1)
    seg_hi = np.stack([cut, np.full_like(rm, R)], axis=1)

    half = 0.5 * (seg_hi - seg_lo)  # (c, 2)
    rho = seg_lo[..., None] + half[..., None] * (xs + 1.0)  # (c, 2, m)
    wr = half[..., None] * ws  # (c, 2, m)

    rc = rm[:, None, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        cos_cut = (rc**2 + rho**2 - R * R) / (2.0 * rc * rho)
        theta_max = np.where(
            rc + rho <= R, math.pi, np.arccos(np.clip(cos_cut, -1.0, 1.0))
        )
    theta_max = np.where(np.abs(rc - rho) >= R, 0.0, theta_max)

    th_half = 0.5 * theta_max[..., None]  # (c, 2, m, 1)
    theta = th_half * (xs + 1.0)  # (c, 2, m, m)
    wt = th_half * ws
    arg = np.sqrt(
        np.maximum(rc[..., None] ** 2 + rho[..., None] ** 2
                   - 2.0 * rc[..., None] * rho[..., None] * np.cos(theta), 0.0)
    )
    fvals = _phi_values(tables, arg)
    if d == 3:
        fvals = fvals * np.sin(theta)
    inner = np.sum(wt * fvals, axis=-1)  # (c, 2, m)

    radial = rho ** (d - 1) * inner
    h_out[mask] = _SPHERE[d - 1] * np.sum(wr * radial * _phi_values(tables, rho), axis=(1, 2))
    b_out[mask] = _SPHERE[d - 1] * np.sum(wr * radial, axis=(1, 2))
    return h_out, b_out


def _conv_pair(tables: _HTables, r: np.ndarray, m: int):
    if tables.dim == 1:
        return _conv_pair_1d(tables, r, m)
    return _conv_pair_radial(tables, r, m)


def _conv_values(tables: _HTables, r: np.ndarray, m: int, against_phi: bool = True) -> np.ndarray:
    h_vals, b_vals = _conv_pair(tables, r, m)
    return h_vals if against_phi else b_vals


def _build_h_tables(d: int) -> _HTables:
    if d not in (1, 2, 3):
        raise DomainError("dimension must be 1, 2, or 3")
    if d in _H_CACHE:
        return _H_CACHE[d]
    j = first_bessel_zero(BesselOrder(d))
    R = j / _TWO_PI
    nu = d / 2.0 - 1.0
    phi_coeff = j**nu / bessel_j(BesselOrder(d - 2), j)
    ball_volume = math.pi ** (d / 2.0) * R**d / math.gamma(d / 2.0 + 1.0)

    tables = _HTables(
        dim=d, j_zero=j, radius=R, phi_coeff=phi_coeff,
        r_grid=np.zeros(1), h=np.zeros(1), b=np.zeros(1),
        h1=np.zeros(1), h2=np.zeros(1),
        h0=0.0, ball_volume=ball_volume, phi_hat0=0.0, quad_order=0,
    )

    # scalar integrals of phi, at high fixed order
    rule = gauss_legendre(400)
    x, w = rule.map_to(0.0, R)
    phi_x = _phi_values(tables, x)
    h0 = _SPHERE[d] * float(np.dot(w, phi_x**2 * x ** (d - 1)))
    phi_hat0 = _TWO_PI * float(
        np.dot(w, phi_x * (_TWO_PI * x) ** (d / 2.0 - 1.0) * x ** (d / 2.0)
               * _scaled_j(d - 2, np.zeros_like(x)))
    )
    if abs(phi_hat0 - ball_volume) > 1e-9 * ball_volume:
        raise NumericsError(
            f"transform at zero ({phi_hat0}) disagrees with the support ball "
            f"volume ({ball_volume}); quadrature stack is broken"
        )
    tables.h0 = h0
    tables.phi_hat0 = phi_hat0

    # freeze one quadrature order for the whole grid so the quadrature
    # error varies smoothly with the radius
    probes = np.linspace(0.13, 1.87, 9) * R
    m = 48 if d == 1 else 64
    while m < 512:
        a_h, a_b = _conv_pair(tables, probes, m)
        f_h, f_b = _conv_pair(tables, probes, 2 * m)
        drift = max(np.max(np.abs(a_h - f_h)), np.max(np.abs(a_b - f_b)))
        if drift < 3e-11 * max(1.0, h0):
            break
        m *= 2
    tables.quad_order = m

    n_pts = _GRID_POINTS
    r_grid = np.linspace(0.0, 2.0 * R, n_pts)
    h = np.empty(n_pts)
    b = np.empty(n_pts)
    h[0] = h0
    b[0] = ball_volume  # b(0) = integral of phi over its support
    chunk = 1024
    for start in range(1, n_pts, chunk):
        stop = min(start + chunk, n_pts)
        h[start:stop], b[start:stop] = _conv_pair(tables, r_grid[start:stop], m)
    h[-1] = 0.0
    b[-1] = 0.0

    # central differences with the even extension at 0 and zero beyond 2R
    step = r_grid[1] - r_grid[0]
    h_pad = np.concatenate(([h[1]], h, [0.0]))
    h1 = (h_pad[2:] - h_pad[:-2]) / (2.0 * step)
    h2 = (h_pad[2:] - 2.0 * h + h_pad[:-2]) / step**2
    tables.r_grid = r_grid
    tables.h = h
    tables.b = b
    tables.h1 = h1
    tables.h2 = h2
    _H_CACHE[d] = tables
    return tables


@dataclass
class BoundReport:
    """Ingredients and value of the separation-limited singular value bound."""

    psi0: float
    psi_hat0: float
    neg_second_deriv0: float
    bandlimit: float
    value: float
    dim: int
    tau: float
    min_separation: float
    crossover_bandlimit: float

    def to_json(self) -> dict:
        return {
            "psi0": self.psi0,
            "psi_hat0": self.psi_hat0,
            "neg_second_deriv0": self.neg_second_deriv0,
            "bandlimit": self.bandlimit,
            "value": self.value,
            "dim": self.dim,
            "tau": self.tau,
            "min_separation": self.min_separation,
            "crossover_bandlimit": self.crossover_bandlimit,
        }


@dataclass
class MinorantModel:
    """Precomputed radial machinery for one (dim, tau) pair.

    Construction is the expensive part (the convolution tables are built
    by quadrature and cached per dimension); evaluation is read-only and
    safe to share between threads.
    """

    dim: int
    tau: float
    phi_radius: float
    support_radius: float
    h_tables: _HTables = field(repr=False)
    q_grid: np.ndarray = field(repr=False)
    q0: float = field(repr=False, default=0.0)
    q2: float = field(repr=False, default=0.0)
    psi0: float = 0.0
    lap_psi0: float = 0.0
    psi_hat0: float = 0.0
    phi_hat_at_1: float = field(default=0.0, repr=False)

    # -- construction ---------------------------------------------------

    @classmethod
    def build(cls, dim: int, tau: float) -> "MinorantModel":
        if tau < 0:
            raise DomainError("tau must be nonnegative")
        t = _build_h_tables(dim)
        d = dim
        s2 = 1.0 + tau
        scale = s2 ** (-d / 2.0)
        A = _FOUR_PI_SQ * s2

        V, h0 = t.ball_volume, t.h0
        lap_h0 = _FOUR_PI_SQ * (V - h0)
        lap2_h0 = -_FOUR_PI_SQ * lap_h0
        H2 = lap_h0 / d
        H4 = 3.0 * lap2_h0 / (d * (d + 2.0))

        # psi profile before scaling: q = A h + Lap h = 4 pi^2 (tau h + b)
        q_grid = _FOUR_PI_SQ * (tau * t.h + t.b)
        q0 = _FOUR_PI_SQ * (tau * h0 + V)
        q2 = A * H2 + H4 * (d + 2.0) / 3.0

        psi0 = scale * q0
        lap_psi0 = scale / s2 * (A * lap_h0 + lap2_h0)
        psi_hat0 = _FOUR_PI_SQ * s2 * t.phi_hat0**2

        # transform value at the removable point v = 1
        phi_hat_at_1 = (
            (_TWO_PI * t.radius**2) ** (d / 2.0)
            * math.pi * t.radius * t.j_zero
            * float(_scaled_j(d + 2, np.asarray(t.j_zero)))
        )

        model = cls(
            dim=d, tau=float(tau),
            phi_radius=t.radius,
            support_radius=2.0 * t.radius * math.sqrt(s2),
            h_tables=t, q_grid=q_grid, q0=q0, q2=q2,
            psi0=psi0, lap_psi0=lap_psi0, psi_hat0=psi_hat0,
            phi_hat_at_1=phi_hat_at_1,
        )
        model._validate_tables()
        return model

    def _validate_tables(self):
        """Difference route against the identity route, plus step halving.

        The psi profile from central differences of h must agree with
        4 pi^2 (tau h + b), and halving the difference step must not move
        psi by more than 1e-6 of its peak.
        """
        t = self.h_tables
        d = self.dim
        A = _FOUR_PI_SQ * (1.0 + self.tau)
        step = t.r_grid[1] - t.r_grid[0]
        idx = np.linspace(200, len(t.r_grid) - 200, 7).astype(int)
        worst_route = 0.0
        for i in idx:
            rho = t.r_grid[i]
            q_fd = A * t.h[i] + t.h2[i] + (d - 1.0) * t.h1[i] / rho
            worst_route = max(worst_route, abs(q_fd - self.q_grid[i]))
        if worst_route > 1e-4 * abs(self.q0):
            raise NumericsError(
                f"difference tables disagree with the Laplacian identity "
                f"by {worst_route:.3e}"
            )
        probes = np.array([0.3, 0.8, 1.3, 1.7]) * t.radius
        worst_half = 0.0
        for rho in probes:
            vals = {}
            for hh in (step, 0.5 * step):
                sten = _conv_values(t, np.array([rho - hh, rho, rho + hh]), t.quad_order)
                d1 = (sten[2] - sten[0]) / (2.0 * hh)
                d2 = (sten[2] - 2.0 * sten[1] + sten[0]) / hh**2
                vals[hh] = A * sten[1] + d2 + (d - 1.0) * d1 / rho
            worst_half = max(worst_half, abs(vals[step] - vals[0.5 * step]))
        if worst_half > 1e-6 * abs(self.q0):
            raise NumericsError(
                f"difference step too coarse: halving moves psi by {worst_half:.3e}"
            )

    # -- scalar accessors ------------------------------------------------

    @property
    def scale(self) -> float:
        return (1.0 + self.tau) ** (-self.dim / 2.0)

    @property
    def second_deriv0(self) -> float:
        """Pure second partial of psi_tau at the origin, one axis."""
        return self.lap_psi0 / self.dim


# -- evaluators ----------------------------------------------------------


def phi(model: MinorantModel, r):
    """The radial bump: zero beyond its support radius, positive inside."""
    r = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(r)):
        raise DomainError("radius must be finite")
    out = _phi_values(model.h_tables, np.abs(r))
    return float(out) if out.ndim == 0 else out


def phi_hat(model: MinorantModel, v, tol: float = 1e-10):
    """Fourier transform of phi at radius v, by Hankel quadrature.

    The quadrature order is doubled until the result moves by less than
    ``tol``; non-convergence raises.
    """
    v_arr = np.atleast_1d(np.asarray(v, dtype=float))
    if not np.all(np.isfinite(v_arr)) or np.any(v_arr < 0):
        raise DomainError("v must be finite and nonnegative")
    t = model.h_tables
    d, R = model.dim, t.radius
    vmax = float(v_arr.max()) if v_arr.size else 0.0
    m = 64 + int(3.2 * R * vmax)

    def evaluate(order):
        rule = gauss_legendre(min(order, 8192))
        x, w = rule.map_to(0.0, R)
        base = _phi_values(t, x) * (_TWO_PI * x) ** (d / 2.0 - 1.0) * x ** (d / 2.0)
        kern = _scaled_j(d - 2, _TWO_PI * np.outer(x, v_arr))
        return _TWO_PI * (w * base) @ kern

    prev = evaluate(m)
    while m < 8192:
        m *= 2
        cur = evaluate(m)
        if np.max(np.abs(cur - prev)) < tol * max(1.0, float(np.max(np.abs(cur)))):
            prev = cur
            break
        prev = cur
    else:
        raise NumericsError("Hankel quadrature did not converge")
    out = prev
    return float(out[0]) if np.asarray(v).ndim == 0 else out


def _phi_hat_closed(model: MinorantModel, w: np.ndarray) -> np.ndarray:
    """phi_hat via the closed form ball_hat(w) / (1 - w^2).

    ball_hat vanishes at w = 1 by the choice of the support radius, so
    the quotient is filled from its limit on a small window there.
    """
    t = model.h_tables
    d, R = model.dim, t.radius
    w = np.asarray(w, dtype=float)
    chi = (_TWO_PI * R**2) ** (d / 2.0) * _scaled_j(d, _TWO_PI * R * w)
    denom = (1.0 - w) * (1.0 + w)
    near = np.abs(1.0 - w) < 1e-6
    safe = np.where(near, 1.0, denom)
    out = chi / safe
    if np.any(near):
        out = np.where(near, 2.0 * model.phi_hat_at_1 / (1.0 + w), out)
    return out


def autocorrelation(model: MinorantModel, r, tol: float = 1e-9):
    """(phi * phi) at radius r via the radial convolution integral."""
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if not np.all(np.isfinite(r_arr)):
        raise DomainError("radius must be finite")
    t = model.h_tables
    m = t.quad_order
    zero = r_arr == 0.0
    prev = _conv_values(t, r_arr, m)
    while m < 1024:
        m *= 2
        cur = _conv_values(t, r_arr, m)
        if np.max(np.abs(cur - prev)) < 0.5 * tol:
            prev = cur
            break
        prev = cur
    else:
        raise NumericsError("convolution quadrature did not converge")
    out = np.where(zero, t.h0, prev)
    return float(out[0]) if np.asarray(r).ndim == 0 else out


def psi_tau(model: MinorantModel, r):
    """psi_tau at radius r, from the precomputed convolution tables."""
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if not np.all(np.isfinite(r_arr)):
        raise DomainError("radius must be finite")
    t = model.h_tables
    rho = np.abs(r_arr) / math.sqrt(1.0 + model.tau)
    vals = np.interp(rho, t.r_grid, model.q_grid, right=0.0)
    # inside the first grid cell the exact quadratic beats the chord
    step = t.r_grid[1] - t.r_grid[0]
    vals = np.where(rho < step, model.q0 + 0.5 * model.q2 * rho**2, vals)
    vals = np.where(rho >= 2.0 * t.radius, 0.0, vals)
    out = model.scale * vals
    return float(out[0]) if np.asarray(r).ndim == 0 else out


def _psi_direct(model: MinorantModel, r) -> np.ndarray:
    """psi_tau by direct quadrature of both convolutions; no tables."""
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    t = model.h_tables
    rho = np.abs(r_arr) / math.sqrt(1.0 + model.tau)
    hv = _conv_values(t, rho, t.quad_order, against_phi=True)
    bv = _conv_values(t, rho, t.quad_order, against_phi=False)
    hv = np.where(rho == 0.0, t.h0, hv)
    bv = np.where(rho == 0.0, t.ball_volume, bv)
    return model.scale * _FOUR_PI_SQ * (model.tau * hv + bv)


def psi_tau_vec(model: MinorantModel, x) -> float:
    """psi_tau as a function of a full d-vector."""
    x = np.asarray(x, dtype=float)
    return float(psi_tau(model, float(np.linalg.norm(x))))


def psi_hat_tau(model: MinorantModel, v):
    """Transform of psi_tau: 4 pi^2 (1+tau) (1 - v^2) phi_hat(sqrt(1+tau) v)^2.

    Uses the closed form of phi_hat; the test suite pins it against the
    quadrature route.
    """
    v_arr = np.atleast_1d(np.asarray(v, dtype=float))
    if not np.all(np.isfinite(v_arr)):
        raise DomainError("v must be finite")
    s2 = 1.0 + model.tau
    ph = _phi_hat_closed(model, math.sqrt(s2) * np.abs(v_arr))
    out = _FOUR_PI_SQ * s2 * (1.0 - v_arr**2) * ph**2
    return float(out[0]) if np.asarray(v).ndim == 0 else out


# -- certification -------------------------------------------------------


@dataclass
class ClauseReport:
    name: str
    passed: bool
    details: dict

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "details": self.details}


@dataclass
class AdmissibilityReport:
    passed: bool
    clauses: list

    def clause(self, name: str) -> ClauseReport:
        for c in self.clauses:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict:
        return {"passed": self.passed, "clauses": [c.to_json() for c in self.clauses]}


def _tail_envelope_constant(model: MinorantModel, v_cut: float) -> float:
    """C with |psi_hat_tau(v)| <= C v^{-(d+3)} for v >= v_cut.

    Comes from the ball-transform closed form and the Bessel envelope
    |J_nu(z)| <= sqrt(2/(pi z)) (1 + 1/(2 z^2)); requires sqrt(1+tau) v_cut >= 3.
    """
    d, R = model.dim, model.phi_radius
    s = math.sqrt(1.0 + model.tau)
    z = s * v_cut
    if z < 3.0:
        raise DomainError("envelope needs sqrt(1+tau) * v_cut >= 3")
    fudge = (1.0 + 0.5 / z**2) ** 2 * (z**2 / (z**2 - 1.0)) ** 2
    return 4.0 * R ** (d - 1) * (1.0 + model.tau) ** (-(d + 3) / 2.0) * fudge


def certify_admissibility(model: MinorantModel, grid_resolution: int = 2000) -> AdmissibilityReport:
    """Check the three admissibility clauses on radial grids.

    (i) compact support at the scaled radius; (ii) strict maximum at the
    origin with a nonvanishing quadratic gap, where the origin curvature
    comes from the exact scalar identities, which is what makes tau = 0
    fail this clause cleanly; (iii) sign pattern of the transform up to
    v = 30 plus a decay-based tail bound beyond.
    """
    if grid_resolution < 16:
        raise DomainError("grid_resolution too small")
    q_tau = model.support_radius
    psi0 = model.psi0

    rs_out = np.linspace(q_tau * (1.0 + 1e-9), 1.5 * q_tau, grid_resolution)
    vals_out = psi_tau(model, rs_out)
    worst_out = float(np.max(np.abs(vals_out)))
    i_out = int(np.argmax(np.abs(vals_out)))
    clause_i = ClauseReport(
        name="compact_support",
        passed=bool(worst_out <= 1e-8 * psi0),
        details={"worst_value": worst_out, "worst_radius": float(rs_out[i_out]),
                 "support_radius": q_tau},
    )

    rs = np.linspace(0.0, q_tau, grid_resolution + 1)[1:]
    gaps = (psi0 - psi_tau(model, rs)) / rs**2
    c_grid = float(np.min(gaps))
    i_min = int(np.argmin(gaps))
    curvature0 = -model.second_deriv0
    curv_floor = 1e-8 * psi0 / q_tau**2
    tau = model.tau
    cd_estimate = (
        c_grid / (tau * (1.0 + tau) ** (-model.dim / 2.0 - 1.0)) if tau > 0 else None
    )
    clause_ii = ClauseReport(
        name="origin_maximum",
        passed=bool(c_grid > 0.0 and curvature0 > curv_floor),
        details={
            "quadratic_gap_min": c_grid,
            "worst_radius": float(rs[i_min]),
            "origin_curvature": curvature0,
            "curvature_floor": curv_floor,
            "gap_shape_constant": cd_estimate,
        },
    )

    vs = np.linspace(0.0, 30.0, 4 * grid_resolution)
    hat = psi_hat_tau(model, vs)
    tol = 1e-10 * model.psi_hat0
    inside = vs <= 1.0
    worst_in = float(np.min(hat[inside], initial=np.inf))
    worst_out_sign = float(np.max(hat[~inside], initial=-np.inf))
    v_cut = 30.0
    tail_c = _tail_envelope_constant(model, v_cut)
    clause_iii = ClauseReport(
        name="transform_sign",
        passed=bool(worst_in >= -tol and worst_out_sign <= tol),
        details={
            "min_inside": worst_in,
            "max_outside": worst_out_sign,
            "tolerance": tol,
            "tail_bound_constant": tail_c,
            "tail_bound_at_cut": tail_c * v_cut ** (-(model.dim + 3)),
        },
    )

    clauses = [clause_i, clause_ii, clause_iii]
    return AdmissibilityReport(passed=all(c.passed for c in clauses), clauses=clauses)


@dataclass
class DerivativeReport:
    passed: bool
    clauses: list

    def clause(self, name: str) -> ClauseReport:
        for c in self.clauses:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict:
        return {"passed": self.passed, "clauses": [c.to_json() for c in self.clauses]}


def radial_derivative_check(model: MinorantModel) -> DerivativeReport:
    """Central differences on psi_tau as a function of the full d-vector.

    Checks that the gradient at 0 vanishes, mixed second partials vanish,
    pure second partials agree across axes, and d times the pure second
    partial reproduces the Laplacian at the origin.  Stencil values come
    from dedicated quadrature evaluations; since the radial profile has a
    cubic term at 0, the pure second differences are extrapolated over
    three step sizes to remove both the h and h^2 error terms.
    """
    d = model.dim
    psi0 = model.psi0
    h = model.support_radius / 80.0
    clauses = []

    def psi_vec(x):
        return float(_psi_direct(model, np.array([np.linalg.norm(x)]))[0])

    grads = []
    for s in range(d):
        e = np.zeros(d)
        e[s] = h
        grads.append((psi_vec(e) - psi_vec(-e)) / (2.0 * h))
    grad_norm = float(np.linalg.norm(grads))
    clauses.append(ClauseReport(
        name="gradient",
        passed=bool(grad_norm <= 1e-5 * psi0),
        details={"gradient_norm": grad_norm, "tolerance": 1e-5 * psi0},
    ))

    if d >= 2:
        lap = model.lap_psi0
        worst_mixed = 0.0
        worst_pair = None
        for s in range(d):
            for sp in range(s + 1, d):
                ee = np.zeros(d)
                ee[s] = h
                ee[sp] = h
                em = ee.copy()
                em[sp] = -h
                mixed = (
                    psi_vec(ee) - psi_vec(em) - psi_vec(-em) + psi_vec(-ee)
                ) / (4.0 * h * h)
                if abs(mixed) > worst_mixed:
                    worst_mixed, worst_pair = abs(mixed), (s + 1, sp + 1)
        clauses.append(ClauseReport(
            name="mixed_partials",
            passed=bool(worst_mixed <= 1e-4 * abs(lap)),
            details={"worst_value": worst_mixed, "worst_pair": worst_pair,
                     "tolerance": 1e-4 * abs(lap)},
        ))

        h0 = model.support_radius / 40.0
        pures = []
        for s in range(d):
            e = np.zeros(d)
            e[s] = 1.0

            def second(step):
                return (
                    psi_vec(step * e) - 2.0 * psi0 + psi_vec(-step * e)
                ) / step**2

            d1, d2, d4 = second(h0), second(0.5 * h0), second(0.25 * h0)
            # eliminates both the h and h^2 error terms
            pures.append(d1 / 3.0 - 2.0 * d2 + (8.0 / 3.0) * d4)
        pures = np.asarray(pures)
        spread = float(np.max(pures) - np.min(pures))
        rel_spread = spread / max(abs(float(np.mean(pures))), 1e-300)
        lap_fd = d * float(np.mean(pures))
        rel_lap = abs(lap_fd - lap) / abs(lap)
        clauses.append(ClauseReport(
            name="pure_partials",
            passed=bool(rel_spread <= 1e-4 and rel_lap <= 1e-4),
            details={"pure_second_partials": pures.tolist(),
                     "pairwise_relative_spread": rel_spread,
                     "laplacian_fd": lap_fd, "laplacian_exact": lap,
                     "laplacian_relative_error": rel_lap},
        ))

    return DerivativeReport(passed=all(c.passed for c in clauses), clauses=clauses)


# -- the separation-limited bound -----------------------------------------


def prop_bound(model: MinorantModel, n: float) -> BoundReport:
    """Lower bound for sigma_min^2 of the unit-weight block Jacobian.

    Valid whenever the node separation is at least support_radius / n.
    B(n) = min(psi0, (-Lap psi0 / d) n^2) / psi_hat0 * n^d.
    """
    if not n > 0:
        raise DomainError("n must be positive")
    if model.tau <= 0:
        raise DomainError("the bound needs tau > 0")
    if model.psi_hat0 <= 0:
        raise NumericsError("psi_hat0 must be positive; model invalid")
    neg_dd = -model.second_deriv0
    value = min(model.psi0, neg_dd * n * n) / model.psi_hat0 * n**model.dim
    crossover = math.sqrt(model.psi0 / neg_dd)
    return BoundReport(
        psi0=model.psi0,
        psi_hat0=model.psi_hat0,
        neg_second_deriv0=neg_dd,
        bandlimit=float(n),
        value=value,
        dim=model.dim,
        tau=model.tau,
        min_separation=model.support_radius / n,
        crossover_bandlimit=crossover,
    )


# -- Poisson-summation diagnostics ----------------------------------------


@dataclass
class PoissonReport:
    s_freq: tuple
    s_real: tuple
    lhs: float
    tail_estimate: float
    k_max: float

    @property
    def discrepancies(self) -> tuple:
        return tuple(f - r for f, r in zip(self.s_freq, self.s_real))

    def to_json(self) -> dict:
        return {
            "s_freq": list(self.s_freq),
            "s_real": list(self.s_real),
            "lhs": self.lhs,
            "tail_estimate": self.tail_estimate,
            "k_max": self.k_max,
        }


def _iter_lattice(d: int, k_max: float, chunk: int = 1 << 19):
    """Yield integer vectors with ||k||_2 <= k_max in memory-bounded chunks."""
    K = int(math.floor(k_max))
    k2 = k_max * k_max
    if d == 1:
        ks = np.arange(-K, K + 1, dtype=np.int64)[:, None]
        for start in range(0, len(ks), chunk):
            yield ks[start:min(start + chunk, len(ks))]
        return
    rows_per = max(1, chunk // (2 * K + 1))
    for x0 in range(-K, K + 1, rows_per):
        xs = np.arange(x0, min(x0 + rows_per, K + 1), dtype=np.int64)
        if d == 2:
            gx, gy = np.meshgrid(xs, np.arange(-K, K + 1, dtype=np.int64), indexing="ij")
            pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
        else:
            gx, gy, gz = np.meshgrid(
                xs, np.arange(-K, K + 1, dtype=np.int64),
                np.arange(-K, K + 1, dtype=np.int64), indexing="ij",
            )
            pts = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
        keep = np.sum(pts.astype(float) ** 2, axis=1) <= k2
        if np.any(keep):
            yield pts[keep]


def _tail_sum(d: int, p: int, K: float) -> float:
    """Integral-comparison bound for sum over ||k|| > K of ||k||^(p - d - 3)."""
    keff = max(K - math.sqrt(d), 1.0)
    return _SPHERE[d] * keff ** (p - 3) / (3 - p)


def poisson_tail_estimate(model: MinorantModel, u_blocks, n: float, k_max: float) -> float:
    """Upper estimate for everything the truncated lattice sums drop."""
    d = model.dim
    c_env = _tail_envelope_constant(model, k_max / n)
    u0 = u_blocks[0]
    us = u_blocks[1:]
    U0 = float(np.sum(np.abs(u0)))
    Us = [float(np.sum(np.abs(b))) for b in us]
    scale = c_env * n ** (d + 3)
    est = scale * U0**2 * _tail_sum(d, 0, k_max)
    est += 2.0 * sum(2.0 * math.pi * U0 * u for u in Us) * scale * _tail_sum(d, 1, k_max)
    cross = 0.0
    for a in range(len(Us)):
        for b in range(a):
            cross += 2.0 * Us[a] * Us[b]
    est += (2.0 * math.pi) ** 2 * cross * scale * _tail_sum(d, 2, k_max)
    est += (2.0 * math.pi) ** 2 * sum(u * u for u in Us) * scale * _tail_sum(d, 2, k_max)
    return est


def _split_blocks(d: int, m: int, u) -> list:
    u = np.asarray(u, dtype=complex).ravel()
    if len(u) != (d + 1) * m:
        raise DomainError(f"u must have length (d+1)|Y| = {(d + 1) * m}")
    return [u[s * m:(s + 1) * m] for s in range(d + 1)]


def suggest_k_max(model: MinorantModel, Y: NodeSet, u, n: float,
                  rel_tol: float = 1e-4) -> int:
    """Smallest truncation radius whose tail estimate fits the budget."""
    blocks = _split_blocks(model.dim, len(Y), u)
    s1_real = n**model.dim * model.psi0 * float(np.sum(np.abs(blocks[0]) ** 2))
    if s1_real <= 0:
        raise DomainError("u must have a nonzero weight block to set the budget")
    budget = rel_tol * s1_real
    K = max(3.0 * n, 3.0 * n / math.sqrt(1.0 + model.tau) + 1.0)
    while K < 5e7:
        if poisson_tail_estimate(model, blocks, n, K) <= 0.5 * budget:
            return int(math.ceil(K))
        K *= 1.3
    raise TruncationError("no affordable truncation radius found", budget=budget)


def poisson_decomposition(model: MinorantModel, Y: NodeSet, u, n: float, k_max: float) -> PoissonReport:
    """Frequency-side lattice sums against their real-space closed forms.

    The frequency side truncates the lattice at ||k|| <= k_max and sums
    psi_hat (dilated by n) against the trigonometric polynomials of the
    block vector u; the real side uses the closed forms
    S1 = psi(0) ||u_0||^2, S4 from the origin curvature, and S2 = S3 = 0.
    Separation of at least support_radius / n makes every off-diagonal
    real-space term vanish, which is what the closed forms encode.
    """
    d = model.dim
    if Y.dim != d:
        raise DomainError("node set dimension does not match the model")
    if not n > 0:
        raise DomainError("n must be positive")
    if k_max < 3.0 * n:
        raise DomainError("k_max must be at least 3n")
    m = len(Y)
    blocks = _split_blocks(d, m, u)
    sep_needed = model.support_radius / n
    if sep_needed >= 1.0:
        raise DomainError("support_radius / n must be below the torus diameter")
    if m >= 2 and separation(Y) < sep_needed * (1.0 - 1e-12):
        raise DomainError(
            f"separation {separation(Y):.6g} below required {sep_needed:.6g}"
        )

    u0 = blocks[0]
    us = blocks[1:]
    T = Y.points

    s1 = 0.0
    s2_parts = np.zeros(d, dtype=complex)
    s3_parts = {}
    s4 = np.zeros(d)
    lhs_sum = 0.0
    two_pi_i = 2j * math.pi

    for K in _iter_lattice(d, k_max):
        kf = K.astype(float)
        radii = np.sqrt(np.sum(kf * kf, axis=1))
        psik = psi_hat_tau(model, radii / n)
        phases = np.exp(-two_pi_i * (kf @ T.T))
        mu0 = phases @ u0
        mus = [-two_pi_i * kf[:, s] * (phases @ us[s]) for s in range(d)]
        s1 += float(np.sum(psik * np.abs(mu0) ** 2))
        for s in range(d):
            s2_parts[s] += np.sum(psik * mus[s] * np.conj(mu0))
            s4[s] += float(np.sum(psik * np.abs(mus[s]) ** 2))
            for sp in range(s):
                s3_parts[(s, sp)] = s3_parts.get((s, sp), 0.0) + np.sum(
                    psik * mus[s] * np.conj(mus[sp])
                )
        in_ball = radii <= n
        if np.any(in_ball):
            total = mu0[in_ball].copy()
            for s in range(d):
                total = total + mus[s][in_ball]
            lhs_sum += float(np.sum(np.abs(total) ** 2))

    s2 = float(2.0 * np.sum(np.real(s2_parts)))
    s3 = float(2.0 * sum(np.real(v) for v in s3_parts.values())) if s3_parts else 0.0
    s4_total = float(np.sum(s4))
    lhs = model.psi_hat0 * lhs_sum

    norm_u0 = float(np.sum(np.abs(u0) ** 2))
    norm_us = float(sum(np.sum(np.abs(b) ** 2) for b in us))
    s1_real = n**d * model.psi0 * norm_u0
    s4_real = n ** (d + 2) * (-model.second_deriv0) * norm_us

    est = poisson_tail_estimate(model, blocks, n, k_max)
    budget = 1e-4 * abs(s1_real)
    if est > budget:
        raise TruncationError(
            f"truncation tail estimate {est:.3e} exceeds 1e-4 |S1| = {budget:.3e}",
            estimate=est, budget=budget,
        )

    return PoissonReport(
        s_freq=(s1, s2, s3, s4_total),
        s_real=(s1_real, 0.0, 0.0, s4_real),
        lhs=lhs,
        tail_estimate=est,
        k_max=float(k_max),
    )


# -- profile export --------------------------------------------------------

PROFILES = ("phi", "phi_hat", "autocorrelation", "psi", "psi_hat")


def profile_values(model: MinorantModel, which: str, rmax: float | None = None,
                   points: int = 800):
    """(radius, value) samples of one of the radial profiles."""
    if which not in PROFILES:
        raise DomainError(f"unknown profile {which!r}; choose from {PROFILES}")
    defaults = {
        "phi": 1.1 * model.phi_radius,
        "phi_hat": 8.0,
        "autocorrelation": 2.2 * model.phi_radius,
        "psi": 1.1 * model.support_radius,
        "psi_hat": 5.0,
    }
    rmax = defaults[which] if rmax is None else float(rmax)
    rs = np.linspace(0.0, rmax, points)
    fn = {
        "phi": phi,
        "phi_hat": phi_hat,
        "autocorrelation": autocorrelation,
        "psi": psi_tau,
        "psi_hat": psi_hat_tau,
    }[which]
    return rs, np.asarray(fn(model, rs), dtype=float)


def profile_to_csv(model: MinorantModel, which: str, path, rmax: float | None = None,
                   points: int = 800) -> None:
    rs, vals = profile_values(model, which, rmax=rmax, points=points)
    with open(path, "w") as fh:
        fh.write("radius,value\n")
        for r, v in zip(rs, vals):
            fh.write(f"{r:.17g},{v:.17g}\n")
