"""Embedding-aware formation control with a simulated-annealing variant."""

from .core import (
    Configuration,
    ConfigurationError,
    EdgeGain,
    all_edge_gains,
    centroid,
    dissipation,
    drift,
    edge_gain,
    edge_gains,
    lyapunov,
    project_to_centroid_zero,
)
from .dynamics import (
    AnnealingSchedule,
    IntegrationError,
    IntegratorParams,
    Trajectory,
    integrate,
    noise_amplitude,
    step_deterministic,
    step_stochastic,
)
from .equilibria import (
    EquilibriumReport,
    SpherePoint,
    check_equilibrium,
    classify_relative_position,
    equilibrium_manifold_dimension,
    sample_tree_equilibrium,
    two_agent_sphere,
)
from .topology import Graph, GraphError

__version__ = "0.1.0"
