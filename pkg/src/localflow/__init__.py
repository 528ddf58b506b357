"""Local graph clustering with attribute-weighted flow diffusion."""

from .attributes import (AttributeMatrix, EdgeWeightView, base_view,
                         default_gamma, kernel_weight, neighborhood_average,
                         reweight, signal_ratio)
from .clustering import (ClusterResult, Metrics, SweepOutcome, alpha_sweep,
                         local_cluster, precision_recall_f1, sweep_cut)
from .diffusion import (DiffusionConfig, DiffusionState, SourceSink,
                        dual_objective, excess_nodes, push, run,
                        solve_dual_reference, support)
from .errors import (ConductanceUndefinedError, GraphFormatError,
                     LocalFlowError, PushPreconditionError, TrappedMassError)
from .graph import (Graph, NodeSet, cut_weight, volume, weighted_conductance,
                    weighted_volume)
from .synth import (Instance, ModelParams, TheoryBounds,
                    edge_weight_separation, eta, generate, m_factor,
                    theorem2_source_mass)

__all__ = [
    "AttributeMatrix", "EdgeWeightView", "base_view", "default_gamma",
    "kernel_weight", "neighborhood_average", "reweight", "signal_ratio",
    "ClusterResult", "Metrics", "SweepOutcome", "alpha_sweep", "local_cluster",
    "precision_recall_f1", "sweep_cut",
    "DiffusionConfig", "DiffusionState", "SourceSink", "dual_objective",
    "excess_nodes", "push", "run", "solve_dual_reference", "support",
    "ConductanceUndefinedError", "GraphFormatError", "LocalFlowError",
    "PushPreconditionError", "TrappedMassError",
    "Graph", "NodeSet", "cut_weight", "volume", "weighted_conductance",
    "weighted_volume",
    "Instance", "ModelParams", "TheoryBounds", "edge_weight_separation", "eta",
    "generate", "m_factor", "theorem2_source_mass",
]

__version__ = "0.1.0"
