"""Statistics of the resonance-fluorescence photon cascade of a driven two-level atom."""

__version__ = "0.1.0"

from .params import (  # noqa: E402
    AtomDriveParams,
    CascadeError,
    ConvergenceError,
    DegenerateRootsError,
    DomainError,
    ParameterError,
)
from .dynamics import (  # noqa: E402
    amplitudes_closed_form,
    amplitudes_ode_oracle,
    complex_chi,
    delay_eval,
    populations,
)
from .laplace import (  # noqa: E402
    counting_stats,
    delay_moments,
    laplace_K,
    laplace_K_numeric_oracle,
    moments_from_logderivative_oracle,
)
from .correlation import (  # noqa: E402
    intensity_correlation,
    j_convolution_oracle,
    j_of_t,
    j_perturbative,
    j_resonant,
    laplace_J,
    mean_intensity,
    noise_spectrum,
    pole_decomposition,
)
from .montecarlo import (  # noqa: E402
    empirical_correlation,
    empirical_counting,
    empirical_delay_histogram,
    generate_stream,
    sample_delay,
)
