"""Built-in systems: delayed predator-prey and delayed Belousov-Zhabotinskii.

Each upper/lower constructor first builds the textbook half-exponential
candidate and certifies it with the generic verifier.  When certification
fails, a C^1 candidate from the same exponential family is built instead
(left rate at the slow root of the linearisation at 0, amplitudes fixed by
C^1 matching) and certified in turn.  The returned FrontPair records which
construction was accepted and the report of every rejected attempt; pass
strict=True to raise on the first rejection instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .engine import ModelSpec, VerificationReport, check_lower, check_upper
from .errors import CertificationError, ParameterError
from .perron import Grid, Profile, TailSpec, make_kernel, slow_tail_rate

CERT_GRID = (40.0, 0.01)
ZERO_BETA_BUMP = 0.1


def default_grid() -> Grid:
    return Grid.symmetric(*CERT_GRID)


# --- closed-form fronts -----------------------------------------------------------


@dataclass(frozen=True)
class ClosedFormFront:
    """Exponential branches joined at t = 0.

    t <= 0:  amplitude e^{g t} + sum(coef e^{rate t} for coef, rate in left_correction)
    t >  0:  limit - right_amplitude e^{-delta t}

    right_amplitude defaults to limit - amplitude (continuity).
    """

    growth_rate_left: float
    amplitude: float
    decay_rate_right: float
    limit: float
    right_amplitude: Optional[float] = None
    left_correction: Tuple[Tuple[float, float], ...] = ()

    @classmethod
    def half_exponential(cls, limit, rate_left, rate_right, amplitude=None):
        """Continuous front; the default amplitude makes it C^1."""
        if amplitude is None:
            amplitude = limit * rate_right / (rate_left + rate_right)
        return cls(rate_left, amplitude, rate_right, limit)

    @classmethod
    def zero(cls):
        return cls(1.0, 0.0, 1.0, 0.0, 0.0)

    @property
    def right_amp(self) -> float:
        return self.limit - self.amplitude if self.right_amplitude is None else self.right_amplitude

    def _left_terms(self):
        return ((self.amplitude, self.growth_rate_left),) + tuple(self.left_correction)

    def derivative_n(self, t, order=0):
        t = np.asarray(t, dtype=float)
        tl = np.minimum(t, 0.0)
        tr = np.maximum(t, 0.0)
        left = sum(a * g ** order * np.exp(g * tl) for a, g in self._left_terms())
        d = self.decay_rate_right
        right = -self.right_amp * (-d) ** order * np.exp(-d * tr)
        if order == 0:
            right = right + self.limit
        return np.where(t <= 0, left, right)

    def value(self, t):
        return self.derivative_n(t, 0)

    def derivative(self, t):
        return self.derivative_n(t, 1)

    def second_derivative(self, t):
        """One-sided: the left branch at t = 0."""
        return self.derivative_n(t, 2)

    def knot_jumps(self):
        """(value jump, slope jump) at t = 0, right minus left."""
        vl = sum(a for a, _ in self._left_terms())
        sl = sum(a * g for a, g in self._left_terms())
        vr = self.limit - self.right_amp
        sr = self.right_amp * self.decay_rate_right
        return vr - vl, sr - sl

    def slowest_left_rate(self):
        rates = [g for a, g in self._left_terms() if a != 0]
        return min(rates) if rates else None


@dataclass
class FrontPair:
    fronts: Tuple[ClosedFormFront, ...]
    construction: str
    report: Optional[VerificationReport] = None
    rejected: List[Tuple[str, VerificationReport]] = field(default_factory=list)

    def __iter__(self):
        return iter(self.fronts)

    def __getitem__(self, i):
        return self.fronts[i]

    def profile(self, grid: Grid) -> Profile:
        return fronts_profile(self.fronts, grid)


def fronts_profile(fronts: Sequence[ClosedFormFront], grid: Grid) -> Profile:
    t = grid.nodes
    vals = np.vstack([f.value(t) for f in fronts])
    left_rates = [f.slowest_left_rate() for f in fronts]
    fallback = min(r for r in left_rates if r is not None) if any(r is not None for r in left_rates) else 1.0
    left_rates = [fallback if r is None else r for r in left_rates]
    right_rates = [f.decay_rate_right if f.right_amp != 0 else 1.0 for f in fronts]
    tails = TailSpec.make(len(fronts), 0.0, [f.limit for f in fronts], left_rates, right_rates)
    return Profile(grid, vals, tails)


def _certify(model, fronts, grid, kind, label, pair_rejected):
    prof = fronts_profile(fronts, grid)
    rep = (check_upper if kind == "upper" else check_lower)(model, prof)
    if not rep.passed:
        pair_rejected.append((label, rep))
    return rep


def _finish(kind, candidates, model, grid, strict):
    """Try candidate builders in order; return the first certified one."""
    rejected: List[Tuple[str, VerificationReport]] = []
    for label, build in candidates:
        try:
            fronts = build()
        except ParameterError:
            if strict:
                raise
            rejected.append((label, None))
            continue
        rep = _certify(model, fronts, grid, kind, label, rejected)
        if rep.passed:
            return FrontPair(tuple(fronts), label, rep, rejected)
        if strict:
            raise CertificationError(f"{label} {kind} solution rejected: {rep.as_dict()}", rep)
    reps = [r for _, r in rejected if r is not None]
    raise CertificationError(f"no {kind} construction certified for {model.name}", reps[-1] if reps else None)


def _kpp_lower(d, c, growth, kappa, amplitude=None):
    """C^1 lower front for a logistic-type component u (growth - kappa u + ...).

    t <= 0: A e^{g t} - (A/2) e^{(g+eta) t}, g the slow root of d x^2 - c x + growth,
    t >  0: k - C e^{-delta t}, with k and C from C^1 matching.
    """
    disc = c * c - 4 * d * growth
    if growth <= 0 or disc < 0:
        raise ParameterError(f"lower construction needs 0 < growth <= c^2/(4d); growth={growth}")
    g = 2 * growth / (c + math.sqrt(disc))
    gf = (c + math.sqrt(disc)) / (2 * d)
    eta = min(0.9 * g, 0.5 * (gf - g))
    q = d * (g + eta) ** 2 - c * (g + eta) + growth  # < 0
    if amplitude is None:
        amplitude = 0.5 * min(-q / (2 * kappa), growth / (4 * kappa))
    A, B = amplitude, amplitude / 2
    psi0 = A - B
    slope0 = g * A - (g + eta) * B
    # right branch rate: keep psi0 (growth - kappa psi0) >= 2 slope0 (d delta + c)
    dmax = ((growth - kappa * psi0) * psi0 / (2 * slope0) - c) / d
    delta = min(max(dmax, 1e-3), g)
    C = slope0 / delta
    return ClosedFormFront(g, A, delta, psi0 + C, C, ((-B, g + eta),))


def _lower_with_retry(model, build_amplitude, start, upper, grid, label, rejected, retries=10):
    """Halve the amplitude until the lower front certifies and sits below the upper one."""
    amp = start
    up = upper.profile(grid).values if upper is not None else None
    for _ in range(retries + 1):
        fronts = build_amplitude(amp)
        prof = fronts_profile(fronts, grid)
        rep = check_lower(model, prof)
        excess = 0.0 if up is None else float(np.max(prof.values - up))
        if rep.passed and excess <= 1e-12:
            return fronts, rep
        why = "" if rep.passed else " (inequality)"
        if excess > 1e-12:
            why += f" (exceeds upper by {excess:.3g})"
        rejected.append((f"{label} scale={amp:.4g}{why}", rep))
        amp *= 0.5
    return None, rep


# --- predator-prey ------------------------------------------------------------------


@dataclass(frozen=True)
class PredatorPreyParams:
    d1: float
    d2: float
    r: float
    P: float
    a: float
    b: float
    nu: float
    tau: float = 1.0

    def __post_init__(self):
        for name in ("d1", "d2", "r", "P", "a", "b", "nu"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be positive, got {v}")
        if not (math.isfinite(self.tau) and self.tau >= 0):
            raise ParameterError("tau must be nonnegative")
        if not self.P > self.nu / self.b:
            raise ParameterError(f"need P > nu/b for a positive steady state (P={self.P}, nu/b={self.nu / self.b})")

    @property
    def p(self) -> float:
        return self.nu / self.b

    @property
    def q(self) -> float:
        return (1.0 - self.nu / (self.P * self.b)) / self.a

    def upper_route_violations(self) -> List[str]:
        out = []
        if not self.nu < self.b:
            out.append("nu < b")
        if not self.d2 > 2 * self.d1:
            out.append("d2 > 2 d1")
        return out


def pp_beta(params: PredatorPreyParams, margin: float = 0.0) -> np.ndarray:
    r, P, b, nu = params.r, params.P, params.b, params.nu
    beta = np.array([max(-r + r * nu / (P * b) + nu / b, 0.0) + margin, nu + margin])
    beta[beta == 0.0] = ZERO_BETA_BUMP
    return beta


def pp_model(params: PredatorPreyParams, c: float, margin: float = 0.0, beta=None) -> ModelSpec:
    r, P, a, b, nu = params.r, params.P, params.a, params.b, params.nu

    def reaction(u, ud):
        return np.stack([r * u[0] * (1.0 - u[0] / P - a * u[1]), u[1] * (-nu + b * ud[0])])

    return ModelSpec(
        "predator_prey",
        [params.d1, params.d2],
        c,
        params.tau,
        [params.p, params.q],
        pp_beta(params, margin) if beta is None else beta,
        reaction,
    )


def pp_cstar_branch(params: PredatorPreyParams) -> Tuple[float, str]:
    if params.p < params.P < 0.5:
        return 0.0, "corollary"
    r, P, a, q = params.r, params.P, params.a, params.q
    return max(0.5 * math.sqrt((1.0 / P + 2 * a * q) * r), math.sqrt(4 * params.d1 * r)), "estimate"


def pp_cstar(params: PredatorPreyParams) -> float:
    return pp_cstar_branch(params)[0]


def pp_rates(params: PredatorPreyParams, c: float) -> Tuple[float, float]:
    disc = c * c - 4 * params.d1 * params.r
    if disc < 0:
        raise ParameterError(f"complex rate: need c^2 >= 4 d1 r, got c={c}")
    return (c + math.sqrt(disc)) / (2 * params.d1), c / (2 * params.d2)


def pp_displayed_upper(params, c):
    l1, l2 = pp_rates(params, c)
    p, q = params.p, params.q
    return (
        ClosedFormFront(l1, p / 2, l1, p),
        ClosedFormFront(l2, q / 2, l2, q),
    )


def pp_repaired_upper(params, c, model, h=None):
    """Prey rises at the slow root of d1 x^2 - c x + r; right rates large enough to close the t > 0 inequality."""
    l1, l2 = pp_rates(params, c)
    k1 = make_kernel(params.d1, c, model.beta[0])
    g1 = slow_tail_rate(k1, params.r + model.beta[0], h)
    p, q, r, P, a = params.p, params.q, params.r, params.P, params.a
    delta = l1
    for _ in range(40):
        d2 = max(delta, l2)
        B1 = p * g1 / (g1 + delta)
        B2 = q * l2 / (l2 + d2)
        if params.d1 * delta ** 2 + c * delta >= r * p / P + r * p * a * B2 / B1:
            break
        delta *= 1.5
    return (
        ClosedFormFront.half_exponential(p, g1, delta),
        ClosedFormFront.half_exponential(q, l2, max(delta, l2)),
    )


def pp_upper(params: PredatorPreyParams, c: float, grid: Optional[Grid] = None, model=None, strict=False) -> FrontPair:
    grid = grid or default_grid()
    model = model or pp_model(params, c)
    pp_rates(params, c)
    return _finish(
        "upper",
        [
            ("displayed", lambda: pp_displayed_upper(params, c)),
            ("slow-rate C1", lambda: pp_repaired_upper(params, c, model, grid.h)),
        ],
        model,
        grid,
        strict,
    )


def pp_lower_defaults(params: PredatorPreyParams):
    k = params.nu / (4 * params.b)
    alpha = min(0.1, params.P / (2 * k), (4 * params.P * params.b / params.nu) / 10)
    return k, alpha


def pp_displayed_lower(params, c, k, alpha):
    nu1 = c / params.d1
    return (ClosedFormFront(nu1, alpha * k, nu1, k, alpha * k), ClosedFormFront.zero())


def pp_lower(
    params: PredatorPreyParams,
    c: float,
    k: Optional[float] = None,
    alpha: Optional[float] = None,
    grid: Optional[Grid] = None,
    model=None,
    upper: Optional[FrontPair] = None,
    strict: bool = False,
) -> FrontPair:
    grid = grid or default_grid()
    model = model or pp_model(params, c)
    dk, da = pp_lower_defaults(params)
    k = dk if k is None else k
    alpha = da if alpha is None else alpha
    if not (0 < k <= params.nu / (4 * params.b) and k < params.P and alpha > 0):
        raise ParameterError("need 0 < k <= nu/(4b), k < P and alpha > 0")
    if upper is None:
        upper = pp_upper(params, c, grid, model)
    return _lower(
        model,
        grid,
        upper,
        strict,
        lambda a: pp_displayed_lower(params, c, k, a),
        alpha,
        lambda A: (_kpp_lower(params.d1, c, params.r, params.r / params.P, A), ClosedFormFront.zero()),
        _kpp_lower(params.d1, c, params.r, params.r / params.P).amplitude,
    )


def _lower(model, grid, upper, strict, displayed, alpha, repaired, amp0):
    rejected: List[Tuple[str, VerificationReport]] = []
    fronts, rep = _lower_with_retry(model, displayed, alpha, upper, grid, "displayed", rejected)
    if fronts is not None:
        return FrontPair(tuple(fronts), "displayed", rep, rejected)
    if strict:
        raise CertificationError(f"displayed lower solution rejected: {rep.as_dict()}", rep)
    fronts, rep = _lower_with_retry(model, repaired, amp0, upper, grid, "two-exponential C1", rejected)
    if fronts is None:
        raise CertificationError(
            f"no lower construction certified for {model.name}; last attempt: {rejected[-1][0]}", rep
        )
    return FrontPair(tuple(fronts), "two-exponential C1", rep, rejected)


# --- Belousov-Zhabotinskii ------------------------------------------------------------


@dataclass(frozen=True)
class BZParams:
    r: float
    b: float
    tau: float = 1.0

    def __post_init__(self):
        for name in ("r", "b"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be positive, got {v}")
        if not (math.isfinite(self.tau) and self.tau >= 0):
            raise ParameterError("tau must be nonnegative")


def bz_beta(params: BZParams, margin: float = 0.0) -> np.ndarray:
    beta = np.array([max(params.r + 2 - 1, 1.0) + margin, params.b + margin])
    beta[beta == 0.0] = ZERO_BETA_BUMP
    return beta


def bz_model(params: BZParams, c: float, margin: float = 0.0, require_upper_route: bool = True, beta=None) -> ModelSpec:
    if require_upper_route and not params.b < 1:
        raise ParameterError(f"upper-solution route needs b < 1, got b={params.b}")
    r, b = params.r, params.b

    def reaction(u, ud):
        return np.stack([u[0] * ((1.0 - r) - u[0] + r * ud[1]), b * u[0] * (1.0 - u[1])])

    return ModelSpec(
        "belousov_zhabotinskii",
        [1.0, 1.0],
        c,
        params.tau,
        [1.0, 1.0],
        bz_beta(params, margin) if beta is None else beta,
        reaction,
    )


def bz_speed_floor(params: BZParams) -> float:
    """Admissible speeds are c >= 2 with b < c."""
    return max(2.0, params.b)


def bz_rates(params: BZParams, c: float) -> Tuple[float, float]:
    if c < 2:
        raise ParameterError(f"complex rate: need c >= 2, got c={c}")
    if not params.b < min(1.0, c):
        raise ParameterError(f"need b < min(1, c), got b={params.b}, c={c}")
    return (c + math.sqrt(c * c - 4)) / 2, (c + math.sqrt(c * c - 4 * params.b)) / 2


def bz_displayed_upper(params, c):
    l1, m1 = bz_rates(params, c)
    return ClosedFormFront(l1, 0.5, l1, 1.0), ClosedFormFront(m1, 0.5, m1, 1.0)


def _bz_c1_upper(params, c, rho):
    """Both components rise at rate rho and relax at rates closing the t > 0 inequalities.

    Sufficient conditions, with Q(x) = x^2 - c x + (1 - r):
      t <= 0, first:  Q(rho) <= 0 and r A2 e^{-rho c tau} <= A1,
                      or Q(rho) + r A2 e^{-rho c tau} <= 0
      t <= 0, second: rho (c - rho) A2 >= b A1
      t >  0:  d1^2 + c d1 >= 1 and d2^2 + c d2 >= b
    """
    r, b, tau = params.r, params.b, params.tau
    q = rho * rho - c * rho + (1 - r)
    d1 = 1.05 * (-c + math.sqrt(c * c + 4)) / 2
    A1 = d1 / (rho + d1)
    A2 = max(A1, b * A1 / (rho * (c - rho)))
    lag = r * A2 * math.exp(-rho * c * tau)
    if A2 >= 1 or not ((q <= 0 and lag <= A1) or q + lag <= 0):
        raise ParameterError(f"no C1 upper with left rate {rho:.6g}: amplitude conditions cannot be met")
    d2 = max(rho * A2 / (1 - A2), 1.05 * (-c + math.sqrt(c * c + 4 * b)) / 2)
    return (
        ClosedFormFront.half_exponential(1.0, rho, d1),
        ClosedFormFront.half_exponential(1.0, rho, d2),
    )


def bz_repaired_upper(params, c, model, h=None):
    """Left rate at the slow root of x^2 - c x + (1 - r), discretely consistent when h is given."""
    if params.r >= 1:
        raise ParameterError("slow-rate upper construction needs r < 1")
    k1 = make_kernel(1.0, c, model.beta[0])
    return _bz_c1_upper(params, c, slow_tail_rate(k1, (1 - params.r) + model.beta[0], h))


def bz_upper(params: BZParams, c: float, grid: Optional[Grid] = None, model=None, strict=False) -> FrontPair:
    grid = grid or default_grid()
    bz_rates(params, c)
    model = model or bz_model(params, c)
    return _finish(
        "upper",
        [
            ("displayed", lambda: bz_displayed_upper(params, c)),
            ("slow-rate C1", lambda: bz_repaired_upper(params, c, model, grid.h)),
            ("mid-rate C1", lambda: _bz_c1_upper(params, c, c / 2)),
        ],
        model,
        grid,
        strict,
    )


def bz_lower_defaults(params: BZParams):
    return (1 - params.r) / 4, 0.1


def bz_displayed_lower(params, c, k, alpha):
    return ClosedFormFront(c, alpha * k, c, k, alpha * k), ClosedFormFront.zero()


def bz_lower(
    params: BZParams,
    c: float,
    k: Optional[float] = None,
    alpha: Optional[float] = None,
    grid: Optional[Grid] = None,
    model=None,
    upper: Optional[FrontPair] = None,
    strict: bool = False,
) -> FrontPair:
    if params.r >= 1:
        raise ParameterError("lower construction is only supported for r < 1")
    grid = grid or default_grid()
    model = model or bz_model(params, c)
    dk, da = bz_lower_defaults(params)
    k = dk if k is None else k
    alpha = da if alpha is None else alpha
    if not (0 < k <= (1 - params.r) / 2 and alpha > 0):
        raise ParameterError("need 0 < k <= (1 - r)/2 and alpha > 0")
    if upper is None:
        upper = bz_upper(params, c, grid, model)
    growth = 1 - params.r
    return _lower(
        model,
        grid,
        upper,
        strict,
        lambda a: bz_displayed_lower(params, c, k, a),
        alpha,
        lambda A: (_kpp_lower(1.0, c, growth, 1.0, A), ClosedFormFront.zero()),
        _kpp_lower(1.0, c, growth, 1.0).amplitude,
    )
