"""Monotone iteration between an upper and a lower solution.

The wave system  D phi'' - c phi' + f(phi(t), phi(t - c tau)) = 0  is written
as the fixed point phi = G(H(phi)) with H(phi) = f(...) + beta phi, where G is
the componentwise bounded-solution operator.  With beta large enough for H to
be monotone on the order interval, iterating from an upper solution gives a
nonincreasing sequence squeezed above the lower solution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .errors import (
    BudgetError,
    CertificationError,
    ConfigurationError,
    InputError,
    MonotonicityError,
    OrderingError,
    ParameterError,
    PreconditionError,
)
from .perron import (
    GreenKernel,
    Profile,
    TailSpec,
    apply_green_system,
    centred_derivatives,
    interior_mask,
    make_kernel,
)

Reaction = Callable[[np.ndarray, np.ndarray], np.ndarray]

ORDER_TOL = 1e-9
CERT_TOL = 1e-6
KNOT_TOL = 1e-5


@dataclass(frozen=True)
class ModelSpec:
    """Reaction-diffusion system with one discrete delay, in wave coordinates.

    reaction(u, ud) takes arrays of shape (n, m) (current and delayed states)
    and returns shape (n, m).
    """

    name: str
    D: np.ndarray
    c: float
    tau: float
    K: np.ndarray
    beta: np.ndarray
    reaction: Reaction

    def __post_init__(self):
        for key in ("D", "K", "beta"):
            object.__setattr__(self, key, np.atleast_1d(np.asarray(getattr(self, key), dtype=float)))
        n = self.D.size
        if self.K.size != n or self.beta.size != n:
            raise ParameterError("D, K and beta must have the same length")
        if np.any(self.D <= 0) or np.any(self.K <= 0):
            raise ParameterError("diffusion and equilibrium components must be positive")
        if np.any(self.beta < 0):
            raise ParameterError("beta must be componentwise nonnegative")
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ParameterError(f"wave speed must be positive, got {self.c}")
        if self.tau < 0:
            raise ParameterError("delay must be nonnegative")
        z = np.zeros((n, 1))
        k = self.K[:, None]
        if np.max(np.abs(self.reaction(z, z))) > 1e-12 or np.max(np.abs(self.reaction(k, k))) > 1e-12:
            raise ParameterError("0 and K must be equilibria of the reaction")

    @property
    def n(self) -> int:
        return self.D.size

    @property
    def shift(self) -> float:
        """Delay in the travelling coordinate."""
        return self.c * self.tau

    def kernels(self) -> List[GreenKernel]:
        return [make_kernel(d, self.c, b) for d, b in zip(self.D, self.beta)]

    def with_beta(self, beta) -> "ModelSpec":
        return ModelSpec(self.name, self.D, self.c, self.tau, self.K, beta, self.reaction)


@dataclass
class VerificationReport:
    """Outcome of a pointwise differential-inequality check.

    max_violation is the signed extreme of the inequality residual: the max of E
    for an upper solution, minus the min of E for a lower one.  It is <= 0 when
    the inequality holds everywhere it was checked.
    """

    kind: str
    max_violation: float
    worst_node: float
    worst_component: int
    checked_nodes: int
    knot_value_jump: float
    knot_slope_jump: float
    knot_value_uncertainty: float = 0.0
    knot_slope_uncertainty: float = 0.0
    tolerance: float = CERT_TOL
    knot_tolerance: float = KNOT_TOL

    @property
    def smooth(self) -> bool:
        """C^1 at the knot, up to the measured extrapolation error."""
        return (
            self.knot_value_jump <= self.knot_tolerance + self.knot_value_uncertainty
            and self.knot_slope_jump <= self.knot_tolerance + self.knot_slope_uncertainty
        )

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance and self.smooth

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "passed": self.passed,
            "max_violation": self.max_violation,
            "worst_node": self.worst_node,
            "worst_component": self.worst_component,
            "checked_nodes": self.checked_nodes,
            "knot_value_jump": self.knot_value_jump,
            "knot_slope_jump": self.knot_slope_jump,
            "knot_value_uncertainty": self.knot_value_uncertainty,
            "knot_slope_uncertainty": self.knot_slope_uncertainty,
        }


@dataclass
class IterationReport:
    steps: int
    deltas: List[float]
    residuals: List[float]
    ordering_violations: List[float]
    derivative_ratios: List[float]
    converged: bool
    final_profile: Profile
    lower_gap: List[float] = field(default_factory=list)

    def trace_rows(self):
        for i, (d, r, v) in enumerate(zip(self.deltas, self.residuals, self.ordering_violations), start=1):
            yield i, d, r, v


# --- H and its monotonicity ---------------------------------------------------


def delayed(profile: Profile, shift: float) -> np.ndarray:
    """phi(t - shift) on the grid nodes."""
    if shift == 0.0:
        return profile.values
    return profile.evaluate(profile.grid.nodes - shift)


def evaluate_H(model: ModelSpec, phi: Profile) -> Profile:
    """H(phi) = f(phi(t), phi(t - c tau)) + beta phi(t)."""
    if phi.n != model.n:
        raise InputError(f"profile has {phi.n} components, model has {model.n}")
    K = model.K[:, None]
    lo = np.min(phi.values + ORDER_TOL * K)
    hi = np.max(phi.values - K - ORDER_TOL * K)
    if lo < 0 or hi > 0:
        raise OrderingError("profile outside [0, K]")
    ud = delayed(phi, model.shift)
    vals = model.reaction(phi.values, ud) + model.beta[:, None] * phi.values
    tl = phi.tails
    left = model.reaction(tl.left_limit[:, None], tl.left_limit[:, None])[:, 0] + model.beta * tl.left_limit
    right = model.reaction(tl.right_limit[:, None], tl.right_limit[:, None])[:, 0] + model.beta * tl.right_limit
    return phi.replace_values(vals, TailSpec.make(model.n, left, right, tl.decay_rate_left, tl.decay_rate_right))


def check_quasi_monotone(model: ModelSpec, trials: int = 100_000, seed: int = 0) -> float:
    """Most negative value of f(phi) - f(psi) + beta (phi - psi) over sampled 0 <= psi <= phi <= K.

    Current and delayed arguments are drawn independently; a tenth of the
    samples is snapped to the faces of the box.  Nonnegative means (A) held on
    every sample.
    """
    rng = np.random.default_rng(seed)
    n = model.n
    K = model.K[:, None]

    def pair():
        hi = rng.random((n, trials)) * K
        lo = rng.random((n, trials)) * hi
        snap = rng.random((n, trials)) < 0.1
        corner = rng.integers(0, 3, size=(n, trials))
        hi = np.where(snap & (corner == 0), K, hi)
        lo = np.where(snap & (corner == 1), 0.0, lo)
        lo = np.where(snap & (corner == 2), hi, lo)
        return hi, lo

    phi, psi = pair()
    phid, psid = pair()
    diff = model.reaction(phi, phid) - model.reaction(psi, psid) + model.beta[:, None] * (phi - psi)
    return float(np.min(diff))


def certify_quasi_monotone(model: ModelSpec, trials: int = 100_000, seed: int = 0, tol: float = 1e-9) -> float:
    worst = check_quasi_monotone(model, trials, seed)
    if worst < -tol:
        raise CertificationError(f"monotonicity condition fails for beta={model.beta.tolist()}: min {worst:.3g}")
    return worst


# --- upper / lower checks -------------------------------------------------------


def wave_operator(model: ModelSpec, phi: Profile) -> np.ndarray:
    """E = D phi'' - c phi' + f(phi, phi(t - c tau)) by centred differences (NaN at the ends)."""
    d1, d2 = centred_derivatives(phi.values, phi.grid.h)
    f = model.reaction(phi.values, delayed(phi, model.shift))
    return model.D[:, None] * d2 - model.c * d1 + f


# extrapolation weights from offsets 1..5 onto the knot: value and slope
_OFFS = np.arange(1, 6, dtype=float)
_VAND = np.vander(_OFFS, 5, increasing=True)
_VAL_W = np.linalg.solve(_VAND.T, np.eye(5)[0])
_SLOPE_W = np.linalg.solve(_VAND.T, np.eye(5)[1])


def _side_estimates(v, z, h, s):
    right = v[z + s : z + 6 * s : s]
    left = v[z - s : z - 6 * s : -s]
    vr, vl = _VAL_W @ right, _VAL_W @ left
    sr, sl = (_SLOPE_W @ right) / (s * h), -(_SLOPE_W @ left) / (s * h)
    vj = max(abs(vr - vl), abs(v[z] - vr), abs(v[z] - vl))
    return vj, abs(sr - sl)


def knot_jumps(phi: Profile):
    """Value and slope jumps at t = 0 with their extrapolation uncertainty.

    Each side is extrapolated to the knot from five nodes beyond it, once with
    spacing h and once with 2h.  A genuine jump gives nearly equal estimates;
    truncation error grows about 16-fold from h to 2h, so the difference of the
    two estimates bounds the error of the finer one.
    """
    g = phi.grid
    z = g.index_of_zero()
    if z < 10 or z > g.count - 11:
        raise ConfigurationError("need ten nodes on each side of t = 0")
    out = np.zeros(4)
    for v in phi.values:
        vj1, sj1 = _side_estimates(v, z, g.h, 1)
        vj2, sj2 = _side_estimates(v, z, g.h, 2)
        out = np.maximum(out, [vj1, sj1, abs(vj2 - vj1), abs(sj2 - sj1)])
    return tuple(float(x) for x in out)


def _verify(model, phi, sign, kind, tol):
    if phi.n != model.n:
        raise InputError(f"profile has {phi.n} components, model has {model.n}")
    E = sign * wave_operator(model, phi)
    mask = interior_mask(phi.grid)
    sub = E[:, mask]
    idx = np.unravel_index(int(np.argmax(sub)), sub.shape)
    nodes = phi.grid.nodes[mask]
    vj, sj, vu, su = knot_jumps(phi)
    return VerificationReport(
        kind,
        float(sub[idx]),
        float(nodes[idx[1]]),
        int(idx[0]),
        int(mask.sum()),
        vj,
        sj,
        vu,
        su,
        tolerance=tol,
    )


def check_upper(model: ModelSpec, rho: Profile, tol: float = CERT_TOL) -> VerificationReport:
    """Check D rho'' - c rho' + f(rho, rho(t - c tau)) <= 0 off the knot, and C^1 at the knot."""
    return _verify(model, rho, 1.0, "upper", tol)


def check_lower(model: ModelSpec, psi: Profile, tol: float = CERT_TOL) -> VerificationReport:
    """Check the reversed inequality for a lower solution."""
    return _verify(model, psi, -1.0, "lower", tol)


def derivative_bound(model: ModelSpec, profile: Profile, H: Optional[Profile] = None) -> float:
    """Ratio of the largest slope to the a-priori bound 2 sup|H_i| / (d_i (l2_i - l1_i)), maximised over i."""
    if H is None:
        H = evaluate_H(model, profile)
    d1, _ = centred_derivatives(profile.values, profile.grid.h)
    ratio = 0.0
    for i, k in enumerate(model.kernels()):
        slope = float(np.nanmax(np.abs(d1[i])))
        supH = max(
            float(np.max(np.abs(H.values[i]))), abs(H.tails.left_limit[i]), abs(H.tails.right_limit[i])
        )
        if slope == 0.0:
            continue
        if supH == 0.0:
            return math.inf
        ratio = max(ratio, slope * k.d * (k.lambda2 - k.lambda1) / (2.0 * supH))
    return ratio


# --- the iteration ----------------------------------------------------------------


def _check_inputs(model, upper, lower):
    if upper.grid != lower.grid:
        raise ConfigurationError("upper and lower must share a grid")
    K = model.K[:, None]
    if np.max(lower.values) <= 0:
        raise PreconditionError("lower solution is identically zero")
    if np.min(upper.values) < -ORDER_TOL or np.max(upper.values - K) > ORDER_TOL:
        raise PreconditionError("upper solution leaves [0, K]")
    if np.min(np.diff(upper.values, axis=1)) < -ORDER_TOL:
        raise PreconditionError("upper solution is not nondecreasing")
    if np.max(lower.values - upper.values) > 1e-12:
        raise PreconditionError("lower solution exceeds the upper one")


def wave_residual(model: ModelSpec, phi: Profile) -> float:
    E = wave_operator(model, phi)
    return float(np.max(np.abs(E[:, interior_mask(phi.grid)])))


def iterate(
    model: ModelSpec,
    upper: Profile,
    lower: Profile,
    epsilon: float = 1e-8,
    max_steps: int = 1000,
    order_tol: float = 1e-8,
    residual_tol: float = 1e-4,
    certify: bool = True,
    callback: Optional[Callable[[int, Profile], None]] = None,
) -> IterationReport:
    """phi_n = G(H(phi_{n-1})) from phi_0 = upper, with per-step ordering checks.

    Ordering is asserted, never clipped: a breach raises MonotonicityError
    with the step and location.  Stops when the sup-norm step is <= epsilon.
    """
    _check_inputs(model, upper, lower)
    if certify:
        for rep in (check_upper(model, upper), check_lower(model, lower)):
            if not rep.passed:
                raise CertificationError(f"{rep.kind} solution rejected: {rep.as_dict()}", rep)
    kernels = model.kernels()
    nodes = upper.grid.nodes
    report = IterationReport(0, [], [], [], [], False, upper)
    prev = upper
    for step in range(1, max_steps + 1):
        H = evaluate_H(model, prev)
        nxt = apply_green_system(kernels, H)
        # keep the tail shape of the upper solution; limits come from G
        nxt = nxt.replace_values(
            nxt.values,
            TailSpec.make(
                model.n, nxt.tails.left_limit, nxt.tails.right_limit, upper.tails.decay_rate_left, upper.tails.decay_rate_right
            ),
        )
        up = nxt.values - prev.values
        below = lower.values - nxt.values
        nonmono = -np.diff(nxt.values, axis=1)
        viol = max(float(np.max(up)), float(np.max(below)), float(np.max(nonmono)))
        delta = float(np.max(np.abs(up)))
        report.steps = step
        report.deltas.append(delta)
        report.ordering_violations.append(viol)
        report.lower_gap.append(float(np.min(-below)))
        report.residuals.append(wave_residual(model, nxt))
        report.derivative_ratios.append(derivative_bound(model, nxt, H))
        report.final_profile = nxt
        if callback is not None:
            callback(step, nxt)
        if viol > order_tol:
            which = np.argmax([np.max(up), np.max(below), np.max(nonmono)])
            arr = (up, below, nonmono)[which]
            comp, j = np.unravel_index(int(np.argmax(arr)), arr.shape)
            what = ("phi_n exceeds phi_{n-1}", "phi_n drops below the lower solution", "phi_n decreases in t")[which]
            raise MonotonicityError(
                f"step {step}: {what} by {viol:.3g} at t={nodes[min(j, nodes.size - 1)]:.6g} (component {comp})",
                step,
                float(nodes[min(j, nodes.size - 1)]),
                viol,
                report,
            )
        prev = nxt
        if delta <= epsilon:
            report.converged = report.residuals[-1] <= residual_tol
            if not report.converged:
                raise BudgetError(
                    f"step size {delta:.3g} reached but residual {report.residuals[-1]:.3g} > {residual_tol}", report
                )
            return report
    raise BudgetError(f"no convergence in {max_steps} steps, last step size {report.deltas[-1]:.3g}", report)
