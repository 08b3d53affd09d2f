"""ringpairs: ring-resonator spectra and four-wave-mixing pair statistics.

The pipeline goes spectrum -> resonances -> mode ladder / dispersion ->
joint spectral intensity -> coincidence classification; each stage is a
plain function over immutable inputs and can be used on its own.
"""

from .coincidences import (
    CorrelationReport,
    LossBudget,
    ModePairCount,
    SubtractedCount,
    accidental_cc,
    apply_loss_budget,
    attach_bandwidths,
    bandwidth_report,
    car,
    classify_correlated,
    read_counts_csv,
    subtract_acc,
    write_counts_csv,
)
from .dispersion import (
    DispersionFit,
    ModeLadder,
    build_mode_ladder,
    fit_dispersion,
    integrated_dispersion,
    linewidth_crossover_mu,
)
from .errors import (
    AmbiguousLadderError,
    DegenerateBudgetError,
    DuplicateAbscissaError,
    FitFailureError,
    IllConditionedFitError,
    IncompleteLadderError,
    InsufficientDataError,
    IntegrationError,
    MalformedInputError,
    ParameterError,
    PumpNotResonantError,
    RejectedFitError,
    RingPairsError,
    ValidationError,
)
from .jsi import (
    JsiDiagonal,
    JsiMap,
    NonlinearPhaseParams,
    PumpLine,
    jsi_diagonal,
    jsi_map,
    lorentzian_density,
    pair_overlap,
    phase_mismatch,
    round_trip_time_from_fsr,
    sinc_sq,
)
from .resonances import (
    QSummary,
    ResonanceDip,
    ResonanceSet,
    analyze_trace,
    detect_dips,
    fit_lorentzian_dip,
    free_spectral_range,
    q_statistics,
    quality_factor,
)
from .spectra import (
    SpectrumTrace,
    SyntheticSpec,
    generate_synthetic,
    load_spectrum,
    lorentzian_dip_model,
    save_spectrum,
)

__version__ = "0.1.0"
