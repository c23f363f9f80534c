"""Break C^1 matching of the BZ upper front and watch the scheme react.

Each factor scales the left amplitude while keeping continuity, so the
slope jumps at t = 0.  Certification should reject every such candidate;
the uncertified iteration shows which kinks it survives.
"""
from wavefront.engine import check_upper, iterate
from wavefront.errors import WavefrontError
from wavefront.models import BZParams, ClosedFormFront, bz_lower, bz_model, bz_upper, fronts_profile
from wavefront.perron import Grid


def main():
    p, c = BZParams(0.5, 0.5), 2.5
    g = Grid.symmetric(150.0, 0.02)
    m = bz_model(p, c)
    up = bz_upper(p, c, g, m)
    lo = bz_lower(p, c, grid=g, model=m, upper=up).profile(g)
    for factor in (0.3, 0.5, 0.8, 0.95, 1.0, 1.05, 1.2):
        fr = tuple(ClosedFormFront(f.growth_rate_left, f.amplitude * factor, f.decay_rate_right, f.limit) for f in up)
        prof = fronts_profile(fr, g)
        rep = check_upper(m, prof)
        try:
            it = iterate(m, prof, lo, certify=False)
            outcome = f"converged in {it.steps} steps"
        except WavefrontError as exc:
            outcome = f"{type(exc).__name__}: {str(exc)[:70]}"
        print(f"x{factor:<5} certified={rep.passed!s:<5} slope jump={rep.knot_slope_jump:.3e}  uncertified run: {outcome}")


if __name__ == "__main__":
    main()
