"""Security bounds for continuous-variable QKD with noisy coherent states."""
from .errors import (
    ConvergenceError,
    CovarianceError,
    CVQKDError,
    DegenerateError,
    DomainError,
    PhysicalityError,
    PreconditionError,
)
from .gaussian import (
    SymplecticSpectrum,
    TwoModeCovariance,
    entropy_g,
    entropy_two_mode,
    symplectic_spectrum,
)
from .protocol import (
    ChannelParams,
    KeyRateReport,
    SourceParams,
    chi_total,
    holevo_direct,
    holevo_reverse,
    k_direct_asymptotic,
    k_reverse_asymptotic,
    key_rates,
    limiting_epsilon0,
    mutual_information,
    prior_k_reverse,
    prior_k_reverse_asymptotic,
)

__version__ = "0.1.0"
