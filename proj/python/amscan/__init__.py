"""Calibrated multiscale scanning of d-dimensional grids.

Thin re-export of the compiled core: local likelihood-ratio statistics for
Gaussian/Poisson/Gamma fields, FFT box sums over rectangle systems, simulated
surrogate quantiles, and FWER-controlled significance maps.
"""

from ._core import (  # noqa: F401
    AmsError,
    Calibration,
    DegenerateDataError,
    EmptySystemError,
    Field,
    ModelFamily,
    QuantileTable,
    RegionSystem,
    ScanResult,
    SignificanceMap,
    __version__,
    build_rectangles,
    cache_lookup_or_simulate,
    check_growth,
    empirical_quantile,
    estimate_global,
    fft_scale_sums,
    local_lrt,
    mean_variance,
    naive_scale_sums,
    omega,
    omega_tilde,
    poisson_field,
    read_grid,
    restrict_scales,
    scan_statistic,
    segment,
    significance_map,
    simulate_mn,
    standard_normal_field,
    surrogate_statistic,
    taylor_gap,
    write_grid,
)
