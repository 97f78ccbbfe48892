"""vqlab: a vector-quantization laboratory.

Five quantization algorithms (SCL, stochastic SOM, batch VQ, batch SOM,
online K-means, plus the SOM-then-SCL hybrid), exact 1-D optimal-quantizer
oracles for four analytic densities, and a seeded benchmark harness that
reproduces error-to-optimum and distortion-decay comparisons.
"""

from .algorithms import (
    AlgorithmSpec,
    DatasetSource,
    DensitySource,
    Probe,
    RunState,
    batch_som_iteration,
    bvq_iteration,
    find_winner,
    kmeans_step,
    parse_algorithm,
    run,
    scl_step,
    som_step,
)
from .densities import DENSITY_NAMES, Density, get_density
from .metrics import MetricTrace, distortion, error_measure, generalized_distortion
from .oracle import (
    QuantizerSolution,
    boundaries_from_quantizers,
    centroid_update,
    solve_empirical,
    solve_fixed_point,
    som_limit_boundaries,
)
from .topology import (
    Chain,
    Codebook,
    ConstantGain,
    FixedNeighbors,
    Grid,
    PiecewiseNeighbors,
    RobbinsMonroGain,
    Schedule,
    SomToScl,
    parse_gain,
    parse_neighbors,
)

__version__ = "0.1.0"

__all__ = [
    "AlgorithmSpec",
    "Chain",
    "Codebook",
    "ConstantGain",
    "DENSITY_NAMES",
    "DatasetSource",
    "Density",
    "DensitySource",
    "FixedNeighbors",
    "Grid",
    "MetricTrace",
    "PiecewiseNeighbors",
    "Probe",
    "QuantizerSolution",
    "RobbinsMonroGain",
    "RunState",
    "Schedule",
    "SomToScl",
    "batch_som_iteration",
    "boundaries_from_quantizers",
    "bvq_iteration",
    "centroid_update",
    "distortion",
    "error_measure",
    "find_winner",
    "generalized_distortion",
    "get_density",
    "kmeans_step",
    "parse_algorithm",
    "parse_gain",
    "parse_neighbors",
    "run",
    "scl_step",
    "solve_empirical",
    "solve_fixed_point",
    "som_limit_boundaries",
    "som_step",
]
