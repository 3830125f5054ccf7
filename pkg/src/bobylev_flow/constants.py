"""Constants and defaults for the bobylev-flow solver."""

import math

TOOL_NAME: str = "bobylev-flow"

HALF_PI: float = 0.5 * math.pi
TWO_PI: float = 2.0 * math.pi

# Angular kernel
DEFAULT_PROFILE: str = "power-law"
DEFAULT_S: float = 0.25
DEFAULT_K: float = 1.0

# Graded 1-D theta integrals: panels theta_min * ratio**k with Gauss-Legendre
# nodes on each panel; below theta_min the integrand expansion is integrated exactly
THETA_MIN: float = 1e-8
THETA_PANEL_RATIO: float = 2.0
THETA_PANEL_ORDER: int = 16

# Spectral grid
DEFAULT_R_MAX: float = 16.0
DEFAULT_N: int = 49
BALL_TOLERANCE: float = 1e-9  # relative slack on |xi| <= R_max
INTERPOLATION_BLOCK: int = 4096  # points per gather in tricubic evaluation

# Sphere quadrature
DEFAULT_N_THETA: int = 48  # geometric panels in the regularized zone
DEFAULT_N_PHI: int = 32
DEFAULT_THETA_SPLIT: float = math.pi / 8
DEFAULT_GRADING_RATIO: float = 1.35
DEFAULT_PANEL_ORDER: int = 2
DEFAULT_N_DIRECT: int = 16
SIGMA_UNIT_TOLERANCE: float = 1e-12

# Collision evaluation: nodes per work item; fixed so results do not depend on worker count
NODE_CHUNK_SIZE: int = 16

# Evolution
DEFAULT_TOL_DRIFT: float = 1e-6
MAX_HALVINGS: int = 8
STABILITY_FACTOR: float = 0.5
SPLIT_BOUND_FACTOR: float = 7.0  # I1 + I2 + I3 integrand <= 7 ||1-psi||_alpha |xi|^alpha sin^alpha(theta/2)
INTEGRATORS: tuple[str, ...] = ("rk4", "heun")

# Tabulated densities
TABULATED_PAD_FACTOR: int = 2
TABULATED_MASS_TOLERANCE: float = 1e-3

# Diagnostics
SPHERE_SAMPLES: int = 256
DECAY_FLOOR: float = 1e-14
ENTROPY_CLIP_LIMIT: float = 0.05
GAP_REFINE_POINTS: int = 5
HOLDER_SAMPLES: int = 10_000
# Grid on which ‖ψ − 1‖_α is measured for the Hölder check
HOLDER_GRID_R_MAX: float = 8.0
HOLDER_GRID_N: int = 33
DEFAULT_WEIGHT_N: int = 16
DEFAULT_WEIGHT_DELTA: float = 0.05
HERMITE_NODES: int = 24

# Scenario catalog
PRESET_NAMES: tuple[str, ...] = (
    "dirac-origin",
    "maxwellian",
    "two-dirac-line",
    "three-dirac-noncoplanar",
    "gaussian-mixture",
    "tabulated-density",
)
