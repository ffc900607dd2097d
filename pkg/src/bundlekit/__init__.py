"""Position/momentum duality on a particle-on-a-ring Hilbert bundle.

States live in finite frames (momentum modes or theta samples), frames are
related by (shifted) Fourier unitaries, and letting the boundary twist vary
over a circle yields a flat connection whose holonomy is ``exp(i theta)``.
"""

from .errors import (
    AliasError,
    BundleKitError,
    FrameMismatch,
    GridError,
    HermiticityError,
    RealityError,
    ShapeError,
    StepError,
)
from .hilbert import (
    BasePoint,
    BundleElement,
    FibreVector,
    Momentum,
    PositionCircle,
    PositionLine,
    TransitionUnitary,
    act,
    basis_vector,
    canonicalize,
    inner_product,
    is_unitary,
    norm,
    orbit_equivalent,
)
from .duality import (
    LineGrid,
    ShiftedFourierFamily,
    TwistParam,
    analysis,
    line_fourier,
    shifted_analysis,
    shifted_synthesis,
    synthesis,
    transition_unitary,
    twist_defect,
)
from .spectra import (
    PhysicalParams,
    PotentialSpec,
    SpectrumResult,
    angular_momentum_eigenvalues,
    build_hamiltonian,
    free_energies,
    solve_eigen,
    spectral_flow,
)
from .connection import (
    BaseGrid,
    ConnectionForm,
    CurvatureForm,
    TransportResult,
    covariant_derivative_alpha,
    curvature_fd,
    gauge_transform,
    holonomy_operator,
    inverse_family,
    parallel_transport_alpha,
    transport_loop,
    twist_connection,
)

__version__ = "0.1.0"
