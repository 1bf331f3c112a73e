"""Scale-free overlay construction and core-based clustering."""

from sfcluster.centralized import NoCoresError, RewireConfig, assign_clusters, rewire
from sfcluster.graph import CorePartition, Graph, partition, read_edge_list, write_edge_list
from sfcluster.metrics import fidelity, trace_distance
from sfcluster.powerlaw import PowerLawParams, pmf, tail_prob
from sfcluster.protocol import start_round
from sfcluster.sfn_rewire import RewireWalkConfig, build_distributed, rewire_all
from sfcluster.simnet import DelayModel, SimNetwork

__all__ = [
    "CorePartition", "DelayModel", "Graph", "NoCoresError", "PowerLawParams", "RewireConfig",
    "RewireWalkConfig", "SimNetwork", "assign_clusters", "build_distributed", "fidelity",
    "partition", "pmf", "read_edge_list", "rewire", "rewire_all", "start_round", "tail_prob",
    "trace_distance", "write_edge_list",
]
__version__ = "0.1.0"
