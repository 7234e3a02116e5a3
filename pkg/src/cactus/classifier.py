"""Class profiles over abstracted cells, missing-tolerant scoring, and the
per-feature discriminative-strength ranking.

A record is scored against each class by a smoothed log-likelihood over its
*observed* Up/Down cells; missing cells contribute nothing, so any
missingness pattern yields finite scores. The significance of a feature is
the absolute difference of its unsmoothed class-conditional Up rates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .abstraction import AbstractedDataset
from .errors import SingleClassTraining, UnknownFeature
from .reports import ImportanceReport


@dataclass(frozen=True)
class ClassProfiles:
    """Per-class smoothed P(Up) for every informative feature."""

    features: tuple[str, ...]
    p_up: np.ndarray  # shape (2, k); p_up[c, j] = smoothed P(Up | class c)
    priors: np.ndarray  # shape (2,)
    alpha: float

    def index_of(self, feature: str) -> int:
        try:
            return self.features.index(feature)
        except ValueError:
            raise UnknownFeature(f"feature {feature!r} has no class profile")


class Classification(NamedTuple):
    label: int
    score_0: float
    score_1: float
    tie: bool


def _class_counts(a: AbstractedDataset):
    y = np.asarray(a.target)
    n1 = int(y.sum())
    n0 = y.size - n1
    if n0 == 0 or n1 == 0:
        raise SingleClassTraining(f"abstracted data {a.name!r} has a single class")
    return y, n0, n1


def fit_profiles(a: AbstractedDataset, alpha: float = 1.0) -> ClassProfiles:
    """Estimate smoothed per-class Up probabilities and class priors.

    p[c,f] = (count(Up, class c) + alpha) / (count(observed, class c) + 2*alpha),
    counting only observed cells. Features with no observed cell at all
    (degenerate at fit time) get no profile.
    """
    if not alpha > 0.0:
        raise ValueError(f"smoothing alpha must be > 0, got {alpha}")
    y, n0, n1 = _class_counts(a)
    obs = ~a.missing
    keep = obs.any(axis=0)
    features = tuple(f for f, k in zip(a.features, keep) if k)
    up = a.up[:, keep]
    obs = obs[:, keep]
    is1 = y == 1
    p_up = np.empty((2, len(features)))
    for c, mask in enumerate((~is1, is1)):
        up_c = (up & obs & mask[:, None]).sum(axis=0)
        obs_c = (obs & mask[:, None]).sum(axis=0)
        p_up[c] = (up_c + alpha) / (obs_c + 2.0 * alpha)
    priors = np.array([n0 / y.size, n1 / y.size])
    return ClassProfiles(features, p_up, priors, alpha)


def classify(profiles: ClassProfiles, record) -> Classification:
    """Score one abstracted record ({feature: Up|Down|Missing}) per class.

    Record cells use True for Up, False for Down, None for Missing. An
    observed feature without a profile raises UnknownFeature; a missing one
    is skipped (it carries no evidence either way).
    """
    scores = np.log(profiles.priors)
    index = {f: j for j, f in enumerate(profiles.features)}
    for feature, cell in record.items():
        if cell is None:
            continue
        j = index.get(feature)
        if j is None:
            raise UnknownFeature(f"feature {feature!r} has no class profile")
        p = profiles.p_up[:, j]
        scores = scores + (np.log(p) if cell else np.log1p(-p))
    label, tie = _argmax_label(scores[0], scores[1])
    return Classification(label, float(scores[0]), float(scores[1]), tie)


def _argmax_label(s0: float, s1: float) -> tuple[int, bool]:
    if s1 > s0:
        return 1, False
    return 0, s0 == s1


def classify_rows(profiles: ClassProfiles, a: AbstractedDataset):
    """Vectorized batch scoring; returns (labels, score_0, score_1, ties).

    Features of ``a`` absent from the profiles are ignored as evidence-free;
    profile features absent from ``a`` count as missing for every row.
    """
    cols = [j for j, f in enumerate(a.features) if f in set(profiles.features)]
    prof_idx = [profiles.index_of(a.features[j]) for j in cols]
    up = a.up[:, cols]
    obs = ~a.missing[:, cols]
    p = profiles.p_up[:, prof_idx]  # (2, k)
    scores = np.log(profiles.priors)[:, None] + np.stack(
        [
            (up & obs) @ np.log(p[c]) + (~up & obs) @ np.log1p(-p[c])
            for c in (0, 1)
        ]
    )
    s0, s1 = scores[0], scores[1]
    labels = (s1 > s0).astype(np.int8)
    ties = s0 == s1
    return labels, s0, s1, ties


def significance(
    a: AbstractedDataset, model_name: str = "cactus", dataset_tag: str | None = None
) -> ImportanceReport:
    """Rank features by |P(Up | class 1) - P(Up | class 0)| over observed cells.

    Features with no observation in either class score 0: with no distinct
    pattern across classes there is nothing discriminative to report.
    """
    y, _, _ = _class_counts(a)
    obs = ~a.missing
    is1 = y == 1
    pairs = []
    for j, feature in enumerate(a.features):
        rates = []
        for mask in (~is1, is1):
            o = int((obs[:, j] & mask).sum())
            if o == 0:
                rates = None
                break
            rates.append(int((a.up[:, j] & obs[:, j] & mask).sum()) / o)
        s = 0.0 if rates is None else min(abs(rates[1] - rates[0]), 1.0)
        pairs.append((feature, s))
    return ImportanceReport.from_pairs(
        model_name, dataset_tag if dataset_tag is not None else a.name, pairs
    )
