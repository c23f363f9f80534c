"""Bounded-solution operator for the scalar wave-profile ODE.

For d > 0, c > 0 and beta > 0 the equation

    d u'' - c u' - beta u + g = 0

has, for every bounded continuous g, exactly one bounded solution

    u(t) = 1/(d (l2 - l1)) [ int_{-inf}^t e^{l1 (t-s)} g(s) ds
                             + int_t^{inf} e^{l2 (t-s)} g(s) ds ],

with l1 < 0 < l2 the roots of d l^2 - c l - beta = 0.  Profiles live on a
uniform grid; outside the window each component follows an exponential
approach to its tail limit, so the two integrals split into closed-form
tail pieces and a first-order recursion over grid cells.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.signal import lfilter

from .errors import ConfigurationError, InputError, ParameterError, ResolutionError

# |lambda| h above this makes the cell weights too coarse to trust
RESOLUTION_LIMIT = 0.5


@dataclass(frozen=True)
class Grid:
    """Uniform grid left, left+h, ..., left+(count-1)h."""

    left: float
    h: float
    count: int

    def __post_init__(self):
        if not (math.isfinite(self.left) and math.isfinite(self.h)):
            raise ConfigurationError("grid bounds must be finite")
        if self.h <= 0:
            raise ConfigurationError(f"grid spacing must be positive, got {self.h}")
        if int(self.count) != self.count or self.count < 3:
            raise ConfigurationError(f"grid needs at least 3 nodes, got {self.count}")
        object.__setattr__(self, "count", int(self.count))
        if self.left <= 0.0 <= self.right:
            k = -self.left / self.h
            if abs(k - round(k)) > 1e-9 * max(1.0, abs(k)):
                raise ConfigurationError("t = 0 must be a grid node")

    @classmethod
    def symmetric(cls, L: float, h: float) -> "Grid":
        """Grid on [-L, L] with a node at the origin."""
        if L <= 0 or h <= 0:
            raise ConfigurationError("L and h must be positive")
        half = int(round(L / h))
        if abs(half * h - L) > 1e-9 * L:
            raise ConfigurationError(f"L={L} is not a multiple of h={h}")
        return cls(-half * h, h, 2 * half + 1)

    @property
    def right(self) -> float:
        return self.left + (self.count - 1) * self.h

    @property
    def nodes(self) -> np.ndarray:
        return self.left + self.h * np.arange(self.count)

    def index_of_zero(self) -> int:
        if not (self.left <= 0.0 <= self.right):
            raise ConfigurationError("grid does not contain t = 0")
        return int(round(-self.left / self.h))

    def contains_zero(self) -> bool:
        return self.left <= 0.0 <= self.right


def _as_component_array(x, n, name):
    a = np.broadcast_to(np.asarray(x, dtype=float), (n,)).copy()
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} must be finite")
    return a


@dataclass(frozen=True)
class TailSpec:
    """Behaviour beyond the window: lim + (edge - lim) * exp(-rate * distance)."""

    left_limit: np.ndarray
    right_limit: np.ndarray
    decay_rate_left: np.ndarray
    decay_rate_right: np.ndarray

    @classmethod
    def make(cls, n, left_limit=0.0, right_limit=0.0, decay_rate_left=1.0, decay_rate_right=1.0):
        t = cls(
            _as_component_array(left_limit, n, "left_limit"),
            _as_component_array(right_limit, n, "right_limit"),
            _as_component_array(decay_rate_left, n, "decay_rate_left"),
            _as_component_array(decay_rate_right, n, "decay_rate_right"),
        )
        if np.any(t.decay_rate_left <= 0) or np.any(t.decay_rate_right <= 0):
            raise InputError("tail decay rates must be positive")
        return t

    @property
    def n(self) -> int:
        return self.left_limit.shape[0]

    def component(self, i) -> "TailSpec":
        return TailSpec.make(
            1, self.left_limit[i], self.right_limit[i], self.decay_rate_left[i], self.decay_rate_right[i]
        )


@dataclass(frozen=True)
class Profile:
    """Sampled vector profile, shape (n, count), plus its tail model."""

    grid: Grid
    values: np.ndarray
    tails: TailSpec

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[None, :]
        if v.ndim != 2 or v.shape[1] != self.grid.count:
            raise InputError(f"values shape {v.shape} does not match grid of {self.grid.count} nodes")
        if not np.all(np.isfinite(v)):
            raise InputError("profile values must be finite")
        if self.tails.n != v.shape[0]:
            raise InputError("tail spec and values disagree on the number of components")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @classmethod
    def from_function(cls, grid, fn, tails):
        vals = np.atleast_2d(np.asarray(fn(grid.nodes), dtype=float))
        return cls(grid, vals, tails)

    def component(self, i) -> "Profile":
        return Profile(self.grid, self.values[i : i + 1].copy(), self.tails.component(i))

    def replace_values(self, values, tails=None) -> "Profile":
        return Profile(self.grid, values, self.tails if tails is None else tails)

    def evaluate(self, s) -> np.ndarray:
        """Values at arbitrary points, shape (n, len(s)).

        Linear interpolation inside the window, the tail model outside.
        """
        s = np.asarray(s, dtype=float)
        g, tl = self.grid, self.tails
        out = np.empty((self.n, s.size))
        lo, hi = s < g.left, s > g.right
        mid = ~(lo | hi)
        for i in range(self.n):
            v = self.values[i]
            out[i, mid] = np.interp(s[mid], g.nodes, v)
            out[i, lo] = tl.left_limit[i] + (v[0] - tl.left_limit[i]) * np.exp(
                tl.decay_rate_left[i] * (s[lo] - g.left)
            )
            out[i, hi] = tl.right_limit[i] + (v[-1] - tl.right_limit[i]) * np.exp(
                -tl.decay_rate_right[i] * (s[hi] - g.right)
            )
        return out


@dataclass(frozen=True)
class GreenKernel:
    """Coefficients and characteristic roots of d u'' - c u' - beta u."""

    d: float
    c: float
    beta: float
    lambda1: float = field(init=False)
    lambda2: float = field(init=False)

    def __post_init__(self):
        disc = math.sqrt(self.c * self.c + 4.0 * self.beta * self.d)
        # cancellation-free roots
        if self.c >= 0:
            l2 = (self.c + disc) / (2.0 * self.d)
            l1 = -self.beta / (self.d * l2)
        else:
            l1 = (self.c - disc) / (2.0 * self.d)
            l2 = -self.beta / (self.d * l1)
        object.__setattr__(self, "lambda1", l1)
        object.__setattr__(self, "lambda2", l2)

    @property
    def prefactor(self) -> float:
        return 1.0 / (self.d * (self.lambda2 - self.lambda1))


def _check_positive(**kw):
    for name, v in kw.items():
        if not math.isfinite(v):
            raise ParameterError(f"{name} must be finite, got {v}")
        if v <= 0:
            raise ParameterError(f"{name} must be positive, got {v}")


def make_kernel(d: float, c: float, beta: float) -> GreenKernel:
    """Kernel of the wave form d u'' - c u' - beta u + g = 0."""
    _check_positive(d=d, c=c, beta=beta)
    return GreenKernel(float(d), float(c), float(beta))


def make_ode_kernel(alpha: float, beta: float) -> GreenKernel:
    """Kernel of u'' + alpha u' + beta u + f = 0 with beta < 0.

    Same operator as the wave form with d = 1, c = -alpha and beta -> -beta,
    so alpha may have either sign (including zero).
    """
    if not (math.isfinite(alpha) and math.isfinite(beta)):
        raise ParameterError("alpha and beta must be finite")
    if beta >= 0:
        raise ParameterError(f"ode form needs beta < 0, got {beta}")
    return GreenKernel(1.0, -float(alpha), -float(beta))


def tail_window(kernels: Sequence[GreenKernel], tol: float = 1e-12) -> float:
    """Half-width L with exp(-min(|l1|, l2) L) below tol."""
    rate = min(min(-k.lambda1, k.lambda2) for k in kernels)
    return -math.log(tol) / rate


def _cell_weights(lam, h):
    """int_0^h e^{lam x} dx and int_0^h x e^{lam x} dx, stable near lam = 0."""
    x = lam * h
    if abs(x) < 1e-8:
        return h * (1 + x / 2), h * h * (0.5 + x / 3)
    em = math.expm1(x)
    return h * em / x, h * h * ((x - 1.0) * em + x) / (x * x)


def _green_1d(kernel, g, h, gl, gr, rate_l, rate_r):
    l1, l2 = kernel.lambda1, kernel.lambda2
    dg = g[1:] - g[:-1]

    # forward part: I1(t) = int_{-inf}^t e^{l1 (t-s)} g(s) ds
    w0, w1 = _cell_weights(l1, h)
    a = math.exp(l1 * h)
    src = g[1:] * w0 - dg * w1 / h
    i1_0 = gl / (-l1) + (g[0] - gl) / (rate_l - l1)
    y, _ = lfilter([1.0], [1.0, -a], src, zi=[a * i1_0])
    i1 = np.concatenate(([i1_0], y))

    # backward part: I2(t) = int_t^inf e^{l2 (t-s)} g(s) ds
    w0, w1 = _cell_weights(-l2, h)
    b = math.exp(-l2 * h)
    src = g[:-1] * w0 + dg * w1 / h
    i2_n = gr / l2 + (g[-1] - gr) / (rate_r + l2)
    y, _ = lfilter([1.0], [1.0, -b], src[::-1], zi=[b * i2_n])
    i2 = np.concatenate((y[::-1], [i2_n]))

    return kernel.prefactor * (i1 + i2)


def check_resolution(kernel: GreenKernel, h: float):
    worst = max(-kernel.lambda1, kernel.lambda2) * h
    if worst > RESOLUTION_LIMIT:
        raise ResolutionError(
            f"max(|lambda1|, lambda2) h = {worst:.3g} exceeds {RESOLUTION_LIMIT}; refine the grid"
        )


def apply_green(kernel: GreenKernel, g: Profile) -> Profile:
    """Bounded solution u of d u'' - c u' - beta u + g = 0, one component per kernel call."""
    if g.n != 1:
        raise InputError("apply_green takes a scalar profile; use apply_green_system")
    return apply_green_system([kernel], g)


def apply_green_system(kernels: Sequence[GreenKernel], g: Profile) -> Profile:
    """Componentwise version: kernel i acts on component i."""
    if len(kernels) != g.n:
        raise InputError(f"{len(kernels)} kernels for {g.n} components")
    h = g.grid.h
    tl = g.tails
    out = np.empty_like(g.values)
    for i, k in enumerate(kernels):
        check_resolution(k, h)
        out[i] = _green_1d(
            k, g.values[i], h, tl.left_limit[i], tl.right_limit[i], tl.decay_rate_left[i], tl.decay_rate_right[i]
        )
    betas = np.array([k.beta for k in kernels])
    tails = TailSpec.make(g.n, tl.left_limit / betas, tl.right_limit / betas, tl.decay_rate_left, tl.decay_rate_right)
    return Profile(g.grid, out, tails)


def interior_mask(grid: Grid, skip_origin: bool = True) -> np.ndarray:
    """Nodes where centred differences are taken; optionally drops t = 0 and its neighbours."""
    m = np.ones(grid.count, dtype=bool)
    m[0] = m[-1] = False
    if skip_origin and grid.contains_zero():
        z = grid.index_of_zero()
        m[max(z - 1, 0) : z + 2] = False
    return m


def centred_derivatives(values: np.ndarray, h: float):
    """First and second centred differences on interior nodes (full-length arrays, NaN at ends)."""
    v = np.atleast_2d(values)
    d1 = np.full_like(v, np.nan)
    d2 = np.full_like(v, np.nan)
    d1[:, 1:-1] = (v[:, 2:] - v[:, :-2]) / (2 * h)
    d2[:, 1:-1] = (v[:, 2:] - 2 * v[:, 1:-1] + v[:, :-2]) / (h * h)
    return d1, d2


def ode_residual(kernel: GreenKernel, u: Profile, g: Profile) -> float:
    """max |d u'' - c u' - beta u + g| over interior nodes, excluding t = 0 and its neighbours."""
    if u.n != 1 or g.n != 1:
        raise InputError("ode_residual takes scalar profiles")
    d1, d2 = centred_derivatives(u.values, u.grid.h)
    r = kernel.d * d2 - kernel.c * d1 - kernel.beta * u.values + g.values
    mask = interior_mask(u.grid)
    return float(np.max(np.abs(r[0, mask])))


def exponential_response(kernel: GreenKernel, rate: float, h: Optional[float] = None) -> float:
    """Multiplier M with G[e^{rate s}](t) = M e^{rate t}, for l1 < rate < l2.

    With h given, the multiplier of the piecewise-linear discretisation on a
    grid of spacing h; otherwise the exact value 1/(beta + c rate - d rate^2).
    """
    l1, l2 = kernel.lambda1, kernel.lambda2
    if not (l1 < rate < l2):
        raise ParameterError(f"rate {rate} outside ({l1}, {l2})")
    if h is None:
        return 1.0 / (kernel.beta + kernel.c * rate - kernel.d * rate * rate)
    e = math.exp(rate * h)
    w0, w1 = _cell_weights(l1, h)
    a = math.exp(l1 * h)
    c1 = (e * w0 - (e - 1.0) * w1 / h) / (e - a)
    w0, w1 = _cell_weights(-l2, h)
    b = math.exp(-l2 * h)
    c2 = (w0 + (e - 1.0) * w1 / h) / (1.0 - b * e)
    return kernel.prefactor * (c1 + c2)


def slow_tail_rate(kernel: GreenKernel, gain: float, h: Optional[float] = None) -> float:
    """Smallest positive rate with gain * M(rate) = 1.

    gain is the linear coefficient of H at the zero state, so the answer is the
    slow root of d x^2 - c x + (gain - beta) = 0, or its discrete counterpart
    for the grid spacing h.  A profile whose left tail decays at this rate is
    reproduced exactly by one application of G on that grid.
    """
    growth = gain - kernel.beta
    disc = kernel.c ** 2 - 4 * kernel.d * growth
    if growth <= 0 or disc < 0:
        raise ParameterError(
            f"no slow tail rate: need 0 < gain - beta <= c^2/(4d), got {growth} with c^2/(4d) = {kernel.c**2 / (4 * kernel.d)}"
        )
    root = 2 * growth / (kernel.c + math.sqrt(disc))
    if h is None:
        return root
    f = lambda x: gain * exponential_response(kernel, x, h) - 1.0
    cap = 0.5 * (root + kernel.lambda2)
    for k in range(8):
        w = 0.01 * 2 ** k
        lo, hi = root * (1 - min(w, 0.9)), min(root * (1 + w), cap)
        if f(lo) * f(hi) < 0:
            return brentq(f, lo, hi, xtol=1e-15, rtol=1e-15)
    raise ParameterError("could not bracket the discrete slow rate")


# --- counterexamples -----------------------------------------------------------

# one-sided 5-point derivative weights (fourth order), node offsets 0..4
_ONE_SIDED = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0


def one_sided_slopes(values: np.ndarray, h: float, index: int):
    """Fourth-order one-sided derivative estimates from the left and right of a node."""
    v = np.asarray(values, dtype=float)
    if index < 4 or index > v.size - 5:
        raise ConfigurationError("need four nodes on each side of the knot")
    right = _ONE_SIDED @ v[index : index + 5] / h
    left = -(_ONE_SIDED @ v[index - 4 : index + 1][::-1]) / h
    return left, right


def _branch_fn(t):
    return np.where(t <= 0, np.exp(np.minimum(t, 0.0)), np.exp(-np.maximum(t, 0.0)))


@dataclass(frozen=True)
class NonuniquenessReport:
    sup_norm: float
    max_offknot_residual: float
    derivative_jump: float


def counterexample_nonuniqueness(grid: Grid) -> NonuniquenessReport:
    """y = e^{-|t|} solves y'' - y = 0 away from 0: bounded, nonzero, not C^1."""
    y = _branch_fn(grid.nodes)
    d1, d2 = centred_derivatives(y, grid.h)
    res = d2[0] - y
    mask = interior_mask(grid)
    z = grid.index_of_zero()
    left, right = one_sided_slopes(y, grid.h, z)
    return NonuniquenessReport(float(np.max(np.abs(y))), float(np.max(np.abs(res[mask]))), float(right - left))


@dataclass(frozen=True)
class IdentityDiscrepancy:
    at_zero: float
    max_abs: float
    values: np.ndarray


def ma_identity_discrepancy(grid: Grid, y: Optional[Callable] = None) -> IdentityDiscrepancy:
    """Test the piecewise integral identity on u'' - u = 0 with the forcing phi = 0.

    The left side is the bounded-solution integral of phi (so identically 0);
    the right side is y plus the jump corrections 1/(l2-l1) J [e^{l1 t} - e^{l2 t}]
    for a single derivative jump J at t = 0.  For y = e^{-|t|} this gives
    y - e^{-t} + e^{t}, which is 1 at the origin instead of 0.
    """
    kernel = make_ode_kernel(0.0, -1.0)
    t = grid.nodes
    yv = np.asarray((y or _branch_fn)(t), dtype=float)
    z = grid.index_of_zero()
    left, right = one_sided_slopes(yv, grid.h, z)
    jump = right - left
    zero = Profile(grid, np.zeros(grid.count), TailSpec.make(1))
    lhs = apply_green(kernel, zero).values[0] * kernel.d * (kernel.lambda2 - kernel.lambda1)
    scale = 1.0 / (kernel.lambda2 - kernel.lambda1)
    rhs = yv + scale * jump * np.exp(kernel.lambda1 * t) - scale * jump * np.exp(kernel.lambda2 * t)
    diff = lhs - rhs
    return IdentityDiscrepancy(float(abs(diff[z])), float(np.max(np.abs(diff))), diff)
