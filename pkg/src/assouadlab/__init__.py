"""Assouad dimension and spectrum of planar sets under holomorphic and
quasiregular maps: estimation from dual-scale dyadic covering counts, map
application, adaptive refinement, porosity, and theorem-verification suites.
"""

from .covering import (
    CoverBounds,
    DyadicFrame,
    ScaleWindow,
    admissible_pairs,
    count_bruteforce,
    count_dyadic,
    dump_counts_csv,
)
from .cmaps import (
    Affine,
    DilatationReport,
    MapExpr,
    NegLog,
    Polynomial,
    Power,
    Reciprocal,
    Square,
    Stretch,
    apply_map,
    derivative_bound,
    estimate_dilatation,
    format_map,
    parse_map,
)
from .dimension import (
    CountTable,
    DimEstimate,
    EstimatorParams,
    SpectrumCurve,
    SpectrumSample,
    Witness,
    build_count_table,
    estimate_assouad,
    estimate_quasi_assouad,
    estimate_spectrum,
    regularize_spectrum,
)
from .harness import (
    BoundReport,
    SuiteContext,
    SUITE_NAMES,
    beta_intermediate,
    predict_qr_bound,
    predict_spectrum_bound,
    run_suite,
)
from .pointset import (
    PointSet,
    SetSpec,
    Similarity,
    diameter,
    generate,
    load,
    normalize,
    parse_setspec,
    save,
)
from .porosity import (
    PorosityParams,
    PorosityReport,
    check_luukkainen,
    estimate_porosity,
)
from .refine import (
    RefineResult,
    RefineSchedule,
    classify,
    cover_cells,
    image_cover_count,
    refine,
)

__version__ = "0.1.0"
