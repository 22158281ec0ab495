"""Dynamic primal-dual maintenance of fractional hypergraph b-matching,
set cover and integral b-matching under edge updates."""
from .bmatch import BMatchState, RoundingConfig, create_bmatch
from .partition import Config, PartitionError, PartitionState, Violation, create_partition
from .sampler import SamplerTree
from .setcover import SetCoverInstance, SetCoverState, build_setcover

__all__ = [
    "BMatchState",
    "Config",
    "PartitionError",
    "PartitionState",
    "RoundingConfig",
    "SamplerTree",
    "SetCoverInstance",
    "SetCoverState",
    "Violation",
    "build_setcover",
    "create_bmatch",
    "create_partition",
]
