"""Acceptance criteria, one pass/fail line each.

Run under pytest (the table is printed at the end of the session) or
directly with `python3 tests/test_acceptance.py`.  Every criterion is
evaluated in full; a line lists each sub-check so a failure names its part.
"""
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import ACCEPTANCE, BZ_DESK, DESK_C, PP_DESK  # noqa: E402
from oracles import gaussian_bounded_solution  # noqa: E402
from wavefront.engine import check_lower, check_quasi_monotone, check_upper, iterate  # noqa: E402
from wavefront.errors import CertificationError, MonotonicityError, WavefrontError  # noqa: E402
from wavefront.models import (  # noqa: E402
    ClosedFormFront,
    bz_lower,
    bz_model,
    bz_rates,
    bz_upper,
    fronts_profile,
    pp_cstar,
    pp_cstar_branch,
    pp_lower,
    pp_model,
    pp_rates,
    pp_upper,
)
from wavefront.pde import SimConfig, manufactured_translation, profile_drift, simulate, transition_width  # noqa: E402
from wavefront.perron import (  # noqa: E402
    Grid,
    Profile,
    TailSpec,
    apply_green,
    counterexample_nonuniqueness,
    ma_identity_discrepancy,
    make_kernel,
    ode_residual,
)

CASES = 1000


def summarize(parts):
    ok = all(p for _, p, _ in parts)
    return ok, "; ".join(f"{name} {'ok' if p else 'FAIL'} ({info})" for name, p, info in parts)


# --- 1 --------------------------------------------------------------------------------


def _random_case(rng, n=201):
    k = make_kernel(rng.uniform(0.2, 4), rng.uniform(0.2, 4), rng.uniform(0.05, 3))
    h = min(0.05, 0.45 / max(-k.lambda1, k.lambda2))
    return k, Grid(-(n // 2) * h, h, n)


def criterion_1():
    t0 = time.perf_counter()
    parts = []
    worst = 0.0
    for d, c, beta in ((1, 2.5, 1), (3, 2.5, 0.5)):
        for g0 in (1.0, 2.5):
            g = Grid.symmetric(40.0, 0.01)
            u = apply_green(make_kernel(d, c, beta), Profile(g, np.full(g.count, g0), TailSpec.make(1, g0, g0)))
            worst = max(worst, float(np.max(np.abs(u.values - g0 / beta))))
    parts.append(("constant", worst <= 1e-9, f"max err {worst:.2e}"))

    rng = np.random.default_rng(20240601)
    bad = dict(linearity=0, positivity=0, translation=0, monotone=0)
    for _ in range(CASES):
        k, g = _random_case(rng)
        P = lambda v, a=0.0, b=0.0: Profile(g, v, TailSpec.make(1, a, b))
        f1, f2 = rng.standard_normal((2, g.count))
        a, b = rng.uniform(-5, 5, 2)
        lhs = apply_green(k, P(a * f1 + b * f2)).values
        rhs = a * apply_green(k, P(f1)).values + b * apply_green(k, P(f2)).values
        bad["linearity"] += np.max(np.abs(lhs - rhs)) > 1e-12 * max(1.0, np.max(np.abs(lhs)))

        v = rng.random(g.count)
        u = apply_green(k, P(v, rng.random(), rng.random())).values
        bad["positivity"] += np.min(u) < -1e-12 * np.max(np.abs(u))

        s = int(rng.integers(1, 30))
        bump = np.zeros(g.count)
        bump[60:140] = rng.random(80)
        u0 = apply_green(k, P(bump)).values[0]
        u1 = apply_green(k, P(np.roll(bump, s))).values[0]
        bad["translation"] += np.max(np.abs(u1[s:] - u0[:-s])) > 1e-12 * np.max(np.abs(u0))

        m = np.cumsum(rng.random(g.count) * (rng.random(g.count) < 0.3))
        m /= max(m[-1], 1e-12)
        um = apply_green(k, Profile(g, m, TailSpec.make(1, 0.0, m[-1], 2.0, 2.0))).values[0]
        bad["monotone"] += np.min(np.diff(um)) < -1e-12 * max(1.0, np.max(np.abs(um)))
    for name, nbad in bad.items():
        parts.append((name, nbad == 0, f"{nbad}/{CASES} failed"))
    dt = time.perf_counter() - t0
    parts.append(("runtime", dt < 10, f"{dt:.2f} s"))
    return summarize(parts)


# --- 2 --------------------------------------------------------------------------------


def criterion_2():
    res, errs = {}, {}
    for h in (0.02, 0.01, 0.005):
        g = Grid.symmetric(20.0, h)
        f = Profile.from_function(g, lambda t: np.exp(-t * t), TailSpec.make(1))
        k = make_kernel(1.0, 1.0, 1.0)
        u = apply_green(k, f)
        res[h] = ode_residual(k, u, f)
        errs[h] = float(np.max(np.abs(u.values[0] - gaussian_bounded_solution(1, 1, 1, g.nodes))))
    orders = [math.log2(res[0.02] / res[0.01]), math.log2(res[0.01] / res[0.005])]
    parts = [
        ("order", min(orders) >= 1.8, "orders " + ", ".join(f"{o:.4f}" for o in orders)),
        ("absolute at h=0.01", res[0.01] < 1e-5, f"residual {res[0.01]:.4e}, solution error {errs[0.01]:.2e}"),
    ]
    return summarize(parts)


# --- 3 --------------------------------------------------------------------------------


def criterion_3():
    g = Grid.symmetric(10.0, 0.01)
    ce = counterexample_nonuniqueness(g)
    ma = ma_identity_discrepancy(g)
    parts = [
        ("sup-norm", ce.sup_norm == 1.0, f"{ce.sup_norm!r}"),
        ("off-knot residual", ce.max_offknot_residual < 1e-5, f"{ce.max_offknot_residual:.2e}"),
        ("derivative jump", abs(ce.derivative_jump + 2) <= 1e-6, f"{ce.derivative_jump!r}"),
        ("identity at 0", abs(ma.at_zero - 1) <= 1e-9, f"{ma.at_zero!r}"),
    ]
    return summarize(parts)


# --- 4 --------------------------------------------------------------------------------


def criterion_4():
    import dataclasses

    cs = pp_cstar(PP_DESK)
    corollary = dataclasses.replace(PP_DESK, P=0.45, nu=0.4)
    l1, l2 = pp_rates(PP_DESK, DESK_C)
    b1, m1 = bz_rates(BZ_DESK, DESK_C)
    ref_l1 = (2.5 + math.sqrt(2.5 ** 2 - 4)) / 2
    ref_m1 = (2.5 + math.sqrt(2.5 ** 2 - 4 * 0.5)) / 2
    parts = [
        ("c* = 2", cs == 2.0, f"{cs!r}"),
        ("corollary branch", pp_cstar_branch(corollary) == (0.0, "corollary"), f"{pp_cstar(corollary)!r}"),
        ("pp lambda1", abs(l1 - ref_l1) <= 1e-12 and abs(l1 - 2.0) <= 1e-12, f"{l1!r}"),
        ("pp lambda2", abs(l2 - 2.5 / 6) <= 1e-12, f"{l2!r}"),
        ("bz lambda1", abs(b1 - 2.0) <= 1e-12, f"{b1!r}"),
        ("bz mu1", abs(m1 - ref_m1) <= 1e-12, f"{m1!r}"),
    ]
    return summarize(parts)


# --- 5 --------------------------------------------------------------------------------


def desk_pair(name, grid):
    """Model and certified (upper, lower) fronts of a desk instance."""
    if name == "pp":
        model = pp_model(PP_DESK, DESK_C)
        up = pp_upper(PP_DESK, DESK_C, grid, model)
        return model, up, pp_lower(PP_DESK, DESK_C, grid=grid, model=model, upper=up)
    model = bz_model(BZ_DESK, DESK_C)
    up = bz_upper(BZ_DESK, DESK_C, grid, model)
    return model, up, bz_lower(BZ_DESK, DESK_C, grid=grid, model=model, upper=up)


def criterion_5():
    g = Grid.symmetric(40.0, 0.01)
    parts = []
    for name in ("pp", "bz"):
        model = pp_model(PP_DESK, DESK_C) if name == "pp" else bz_model(BZ_DESK, DESK_C)
        try:
            model, up, lo = desk_pair(name, g)
            ru = check_upper(model, up.profile(g))
            rl = check_lower(model, lo.profile(g))
            parts.append((f"{name} upper", ru.passed, f"{up.construction}, violation {ru.max_violation:.2e}"))
            parts.append((f"{name} lower", rl.passed, f"{lo.construction}, violation {rl.max_violation:.2e}"))
        except CertificationError as exc:
            parts.append((f"{name} upper/lower", False, str(exc)[:80]))
        qm = check_quasi_monotone(model, 100_000, 0)
        parts.append((f"{name} (A)", qm >= -1e-9, f"min {qm:.3g}"))
    return summarize(parts)


# --- 6 and 7 ------------------------------------------------------------------------------

_SOLVED = {}


def solve_desk(name):
    """Converged front (or the failure) for a desk instance on the iteration grid."""
    if name in _SOLVED:
        return _SOLVED[name]
    t0 = time.perf_counter()
    grid = Grid.symmetric(710.0 if name == "pp" else 150.0, 0.02)
    model, up, lo = desk_pair(name, grid)
    try:
        rep, err = iterate(model, up.profile(grid), lo.profile(grid), 1e-8, 1000), None
    except WavefrontError as exc:
        rep, err = getattr(exc, "report", None), exc
    _SOLVED[name] = (model, rep, err, time.perf_counter() - t0)
    return _SOLVED[name]


def criterion_6():
    parts = []
    for name in ("pp", "bz"):
        model, rep, err, dt = solve_desk(name)
        if err is not None:
            parts.append((name, False, f"{type(err).__name__}: {str(err)[:90]}"))
            continue
        v = rep.final_profile.values
        K = model.K[:, None]
        bnd = max(float(np.max(np.abs(v[:, 0]))), float(np.max(np.abs(v[:, -1:] - K))))
        parts += [
            (f"{name} converged", rep.converged and rep.deltas[-1] <= 1e-8, f"{rep.steps} steps, delta {rep.deltas[-1]:.2e}"),
            (f"{name} ordering", max(rep.ordering_violations) <= 1e-8, f"max {max(rep.ordering_violations):.2e}"),
            (f"{name} derivative ratio", max(rep.derivative_ratios) <= 1, f"max {max(rep.derivative_ratios):.3f}"),
            (f"{name} residual", rep.residuals[-1] <= 1e-4, f"{rep.residuals[-1]:.2e}"),
            (f"{name} boundary", bnd <= 1e-3 * float(np.max(model.K)), f"{bnd:.2e}"),
            (f"{name} runtime", dt < 60, f"{dt:.1f} s"),
        ]
    return summarize(parts)


def criterion_7():
    parts = []
    for name in ("pp", "bz"):
        model, rep, err, _ = solve_desk(name)
        if err is not None:
            parts.append((name, False, "no converged front to simulate"))
            continue
        prof = rep.final_profile
        width = transition_width(prof.evaluate, model.K[0])
        cfg = SimConfig.for_front(width, model.c, 10.0, 0.05, D=model.D)
        res = simulate(model, prof, cfg)
        drift = profile_drift(res, prof.evaluate, model.c) / float(np.max(model.K))
        err_c = abs(res.measured_speed - model.c) / model.c
        parts.append((f"{name} speed", err_c <= 0.05, f"{res.measured_speed:.5f}, R2 {res.speed_r2:.6f}"))
        parts.append((f"{name} drift", drift <= 0.02, f"{drift:.2e} of |K|"))
        mt = manufactured_translation(prof.evaluate, model.c, model.K[0], cfg)
        parts.append((f"{name} self-test", abs(mt.measured_speed - model.c) <= 1e-6, f"{mt.measured_speed!r}"))
    return summarize(parts)


# --- 8 --------------------------------------------------------------------------------------


def criterion_8():
    parts = []
    g = Grid.symmetric(150.0, 0.02)
    for name in ("bz", "pp"):
        model, up, lo = desk_pair(name, g)
        for factor in (0.8, 1.2):
            broken = tuple(
                ClosedFormFront(f.growth_rate_left, min(f.amplitude * factor, f.limit), f.decay_rate_right, f.limit)
                for f in up.fronts
            )
            prof = fronts_profile(broken, g)
            rep = check_upper(model, prof)
            caught = not rep.passed
            how = f"check_upper slope jump {rep.knot_slope_jump:.3g}"
            if not caught:
                try:
                    iterate(model, prof, lo.profile(g))
                    how = "iteration converged"
                except MonotonicityError as exc:
                    caught, how = True, f"MonotonicityError at step {exc.step}"
            parts.append((f"{name} x{factor}", caught, how))
    return summarize(parts)


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 9)}


@pytest.mark.parametrize("key", sorted(CRITERIA))
def test_criterion(key):
    ok, detail = CRITERIA[key]()
    ACCEPTANCE[key] = (ok, detail)
    print(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for key in sorted(CRITERIA):
        ok, detail = CRITERIA[key]()
        failed += not ok
        print(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}", flush=True)
    sys.exit(1 if failed else 0)
