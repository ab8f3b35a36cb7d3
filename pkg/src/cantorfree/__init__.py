"""Exact metric geometry on finite dyadic Cantor approximations.

The package provides:

* generation and validation of exact (rational) or float64 metrics on the
  2**m depth-m dyadic net, with per-cylinder distance statistics and the
  cylinder spread criterion (dyadic);
* metric surgery: replacing the geometry inside small cylinder pieces by
  rescaled copies of arbitrary metrics while moving the whole metric less
  than any prescribed epsilon (surgery);
* Lipschitz machinery: constants, extensions, flatness profiles, seeded
  random Lipschitz functions (lipfn);
* transportation norms of zero-sum molecules with primal and dual
  certificates, cylinder extension operators with exact operator norms, the
  almost-extension defect, and the piecewise splitting bound (freenorm);
* line-embedding distortion, bilipschitz map distortion, similarity and
  box-counting dimensions, and remaining-measure bookkeeping (probes);
* JSON serialization and a CLI (serialize, cli).
"""

from .dyadic import (
    Address,
    CylinderSpread,
    CylinderStats,
    DyadicMetric,
    MetricDiagnostics,
    all_addresses,
    cylinder_spread,
    cylinder_stats,
    disconnection_constant,
    generate,
    net_density,
    representatives,
    spread_threshold,
    sup_distance,
    validate_metric,
)
from .errors import (
    CantorFreeError,
    DegenerateMetricError,
    DepthLimitError,
    InsufficientDepthError,
    InternalCheckError,
    InvalidParameterError,
    SizeLimitError,
)
from .freenorm import (
    ExtOperator,
    FreeNormResult,
    Molecule,
    OperatorNorm,
    SplitBoundReport,
    build_cylinder_operator,
    cylinder_operator_norm,
    extension_defect,
    free_norm,
    split_bound_check,
    transport_value,
    zero_operator,
)
from .lipfn import (
    LipFn,
    flatness_profile,
    lip_const,
    lip_full_norm,
    mcshane_extend,
    random_lip,
)
from .numerics import RationalMatrix, Tolerance, as_fraction, tolerance_for
from .probes import (
    DistortionReport,
    box_dim_estimate,
    construction_scales,
    default_box_levels,
    dim_formula,
    fat_measure,
    line_distortion,
    map_distortion,
)
from .surgery import (
    PartitionSpec,
    SurgeryContract,
    SurgeryPlan,
    apply_surgery,
    greedy_partition,
    reduce_cylinder_spread,
    surgery_contract,
    transplant,
)

__version__ = "0.1.0"
