"""Numerical Orlicz-Lorentz gauge analysis for positive integral operators.

Layers:

* ``space``: piecewise-constant functions, weights, distribution functions
  and the exact nonincreasing rearrangement;
* ``young``: N-functions, complementary pairs, doubling and convexity checks;
* ``gauges``: Luxemburg gauge functionals, duals and the down dual;
* ``kernels``: kernels, iterated rearrangement, the derived kernel and the
  associated operators;
* ``conditions``: numerical verdicts for the boundedness conditions;
* ``harness``: empirical best-constant experiments, comparisons and reports.
"""

from .space import (
    DEFAULT_WINDOW,
    GridFunction,
    Weight,
    DistributionFunction,
    cumulative,
    default_edges,
    dilate,
    distribution,
    distribution_function,
    integrate,
    make_weight,
    maximal,
    rearrange,
    reciprocal_transform,
    resample,
    restrict,
)
from .young import (
    NFunction,
    check_convex_composition,
    check_delta2,
    complementary,
    make_power_nfunction,
    make_sampled_nfunction,
    normalize_unit,
    sample_density,
)
from .gauges import GaugeSpec, GaugeValue, down_dual_gauge, dual_gauge, gauge_norm, modular
from .kernels import (
    KernelFamily,
    KernelGrid,
    apply,
    apply_adjoint,
    h_operator,
    hardy_average,
    iterated_rearrangement,
    m_kernel,
    make_kernel,
    row_rearrangement_exact,
    s_operator,
    split_signed,
    sum_profile_m,
)
from .conditions import (
    ConditionReport,
    dilation_function,
    gho_check,
    hardy_avg_check,
    hlp_check,
    homogeneous_check,
    kantorovich_mixed_norm,
    nested_windows,
    power_case_check,
    radial_check,
    rearranged_check,
)
from .harness import (
    ExperimentConfig,
    Report,
    default_family,
    empirical_best_constant,
    oneil_compare,
    run_experiment,
)

__version__ = "0.1.0"
