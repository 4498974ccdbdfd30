"""retnet: time-resolved retweet networks, consensus communities, influence
rankings, and hate-speech share reports from labeled tweet event streams."""

from ._core import KERNEL
from .community import EnsembleConfig, Partition, ensemble_louvain, louvain, modularity
from .evolution import PartitionSimilarity, SelectionConfig, bcubed, select_timepoints
from .influence import UserInfluence, community_influence, gini, retweet_hindex, user_influence
from .ingest import (
    EventStream,
    HateLabel,
    TweetEvent,
    merge_streams,
    parse_events,
    serialize_events,
    validate_stream,
)
from .report import PipelineConfig, community_hate_shares, meta_network, run_pipeline
from .snapshot import (
    RetweetNetwork,
    UndirectedNetwork,
    WindowConfig,
    build_snapshot,
    decay_weight,
    project_undirected,
    snapshot_series,
)
from .stats import ContingencyTable, cohens_h, log_odds_ratio
from .synthgen import BlockSpec, DriftEvent, SynthConfig, generate_stream

__version__ = "0.1.0"

__all__ = [
    "KERNEL",
    "__version__",
    "BlockSpec",
    "ContingencyTable",
    "DriftEvent",
    "EnsembleConfig",
    "EventStream",
    "HateLabel",
    "Partition",
    "PartitionSimilarity",
    "PipelineConfig",
    "RetweetNetwork",
    "SelectionConfig",
    "SynthConfig",
    "TweetEvent",
    "UndirectedNetwork",
    "UserInfluence",
    "WindowConfig",
    "bcubed",
    "build_snapshot",
    "cohens_h",
    "community_hate_shares",
    "community_influence",
    "decay_weight",
    "ensemble_louvain",
    "generate_stream",
    "gini",
    "log_odds_ratio",
    "louvain",
    "merge_streams",
    "meta_network",
    "modularity",
    "parse_events",
    "project_undirected",
    "retweet_hindex",
    "run_pipeline",
    "select_timepoints",
    "serialize_events",
    "snapshot_series",
    "user_influence",
    "validate_stream",
]
