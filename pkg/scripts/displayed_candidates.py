"""Certify the textbook half-exponential candidates and show why they are replaced."""
from wavefront.engine import check_lower, check_upper
from wavefront.models import (
    BZParams,
    PredatorPreyParams,
    bz_displayed_lower,
    bz_displayed_upper,
    bz_lower,
    bz_lower_defaults,
    bz_model,
    bz_upper,
    default_grid,
    fronts_profile,
    pp_displayed_lower,
    pp_displayed_upper,
    pp_lower,
    pp_lower_defaults,
    pp_model,
    pp_upper,
)

C = 2.5


def show(label, rep):
    print(
        f"  {label:<28} passed={rep.passed!s:<5} violation={rep.max_violation: .3e} at t={rep.worst_node: .2f}"
        f"  value jump={rep.knot_value_jump:.3e}  slope jump={rep.knot_slope_jump:.3e}"
    )


def main():
    g = default_grid()
    pp = PredatorPreyParams(1.0, 3.0, 1.0, 1.0, 1.0, 1.0, 0.5)
    bz = BZParams(0.5, 0.5)
    for name, params, model, dup, dlo, defaults, up_fn, lo_fn in (
        ("predator-prey", pp, pp_model(pp, C), pp_displayed_upper, pp_displayed_lower, pp_lower_defaults, pp_upper, pp_lower),
        ("BZ", bz, bz_model(bz, C), bz_displayed_upper, bz_displayed_lower, bz_lower_defaults, bz_upper, bz_lower),
    ):
        print(f"{name}, c = {C}")
        show("displayed upper", check_upper(model, fronts_profile(dup(params, C), g)))
        show("displayed lower", check_lower(model, fronts_profile(dlo(params, C, *defaults(params)), g)))
        up = up_fn(params, C, g, model)
        lo = lo_fn(params, C, grid=g, model=model, upper=up)
        show(f"accepted upper ({up.construction})", up.report)
        show(f"accepted lower ({lo.construction})", lo.report)


if __name__ == "__main__":
    main()
