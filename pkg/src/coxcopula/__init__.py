"""Bivariate Cox model with covariate-driven copula dependence."""

__version__ = "0.1.0"

from .copulas import (
    AMHCopula,
    ArchimedeanCopula,
    ArchimedeanGenerator,
    AsymmetricLogisticPickands,
    ClaytonCopula,
    ConstantPickands,
    Copula,
    ExtendedArchimedeanCopula,
    ExtremeValueCopula,
    FunctionCopula,
    FunctionPickands,
    GumbelBarnettCopula,
    GumbelCopula,
    GumbelPickands,
    PickandsFunction,
    ProductCopula,
    TabulatedPickands,
    archimedean_cdf,
    copula_cdf,
    copula_density,
    evc_from_pickands,
    make_copula,
    spearman_rho,
)
from .errors import (
    DivergenceError,
    DomainError,
    DomainWarning,
    EstimationError,
    InputError,
    NumericError,
    PropagationWarning,
    TransitionDomainError,
    ValidityError,
)
from .estimation import (
    FitResult,
    ObservationSet,
    cox_pl_fit,
    kendall_tau,
    mean_relative_error,
    spearman_rho_empirical,
    theta_from_tau,
)
from .model import (
    CovariateLink,
    PropagatedModel,
    SurvivalMarginal,
    asymmetric_logistic_pickands,
    khoudraji_asymmetrize,
    propagate_archimedean,
    propagate_copula,
    propagate_extended_archimedean,
    propagate_generator,
    propagate_pickands,
    propagate_sdf,
    transition_pickands,
)
from .sampling import (
    SamplePairSet,
    SeededRng,
    sample_archimedean,
    sample_copula,
    sample_gumbel_via_frailty,
    sample_khoudraji,
    sample_model_m,
    sample_positive_stable,
)
from .verify import (
    GridSpec,
    VerificationReport,
    check_copula_axioms,
    check_min_id,
    check_pickands,
    check_pqd,
    check_tp2,
    run_suite,
)
