# SPDX-License-Identifier: Apache-2.0
"""Deep graph clustering with GCN, attention and contrastive channels."""

from ._gclgcn import (
    Config,
    ConfigError,
    ContractError,
    DimensionError,
    Error,
    Graph,
    MismatchError,
    NumericError,
    ParseError,
    ablation_study,
    centrality,
    encoding_study,
    evaluate,
    generate_sbm,
    kmeans,
    layer_study,
    load_graph,
    normalized_adjacency,
    preset_names,
    sweep_fusion,
    sweep_loss_weights,
    target_distribution,
    train,
)

__all__ = [
    "Config",
    "ConfigError",
    "ContractError",
    "DimensionError",
    "Error",
    "Graph",
    "MismatchError",
    "NumericError",
    "ParseError",
    "ablation_study",
    "centrality",
    "config",
    "encoding_study",
    "evaluate",
    "generate_sbm",
    "kmeans",
    "layer_study",
    "load_graph",
    "normalized_adjacency",
    "preset_names",
    "sweep_fusion",
    "sweep_loss_weights",
    "target_distribution",
    "train",
]


def config(preset="cora", **settings):
    """Preset plus overrides, e.g. config("cora", epochs=20, hidden="64,64,128").

    Dotted keys use double underscores: contrastive__epochs=5.
    """
    cfg = Config.preset(preset)
    for key, value in settings.items():
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        cfg.set(key.replace("__", "."), str(value))
    return cfg
