"""Scene-graph fusion retrieval: similarity kernels, training, and evaluation.

The heavy lifting lives in the compiled ``_scenematch`` extension; this
package re-exports its functions. Model state crosses the boundary as JSON
text (datasets, configs, checkpoints) and numerics as numpy arrays.
"""

from ._scenematch import (
    elu,
    evaluate,
    fusion_ratios,
    gradcheck,
    leaky_relu,
    masked_row_softmax,
    matmul,
    mean_row_cosine,
    mine_hard_negatives,
    pair_score,
    rank_rows,
    recall_at_k,
    row_softmax,
    rsum,
    synth_dataset,
    train,
    triplet_loss,
    two_way_softmax,
)

__all__ = [
    "elu",
    "evaluate",
    "fusion_ratios",
    "gradcheck",
    "leaky_relu",
    "masked_row_softmax",
    "matmul",
    "mean_row_cosine",
    "mine_hard_negatives",
    "pair_score",
    "rank_rows",
    "recall_at_k",
    "row_softmax",
    "rsum",
    "synth_dataset",
    "train",
    "triplet_loss",
    "two_way_softmax",
]
