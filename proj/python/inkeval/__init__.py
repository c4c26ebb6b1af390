"""Python access to the inkeval core: parsing, rewards, GRPO math, metrics,
label scaling and mock Best-of-N runs."""

import json as _json

from . import _core
from ._core import (
    InkevalError,
    accuracy_reward,
    classify_scroll_type,
    clipped_surrogate,
    group_advantages,
    iou,
    scale_auction_labels,
    score_metrics,
    scores_to_ranking,
    token_f1,
)

__all__ = [
    "InkevalError",
    "accuracy_reward",
    "bon_mock",
    "classify_scroll_type",
    "clipped_surrogate",
    "final_reward",
    "group_advantages",
    "iou",
    "parse",
    "rank_correlations",
    "render",
    "scale_auction_labels",
    "score_metrics",
    "scores_to_ranking",
    "token_f1",
]


def parse(text, width=0, height=0):
    """Parse report as a dict; never raises for malformed responses."""
    return _json.loads(_core.parse_json(text, width, height))


def render(gold):
    """Gold-format text for an expert response dict (as in parse()["response"])."""
    return _core.render(_json.dumps(gold, ensure_ascii=False))


def final_reward(response, gold, weights=(10.0, 2.0, 2.0, 1.0), width=0, height=0):
    """Reward breakdown of a response against gold-format ground-truth text."""
    w_acc, w_bert, w_miou, w_format = weights
    return _json.loads(
        _core.reward_json(response, gold, w_acc, w_bert, w_miou, w_format, width, height)
    )


def rank_correlations(rank_a, rank_b):
    return _json.loads(_core.rank_correlations_json(list(rank_a), list(rank_b)))


def bon_mock(prompt, scores, content_dir, base_seed=0, jobs=1):
    """Best-of-N record with mock models; None in `scores` marks an unscoreable candidate."""
    return _json.loads(_core.bon_mock_json(prompt, list(scores), base_seed, jobs, str(content_dir)))
