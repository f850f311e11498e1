"""Construction of the 100-dimensional latent seed from sentence sentiments.

The generator is seeded with the 100 most confident sentence sentiments,
standardized to zero mean and unit (population) standard deviation.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .sentiment import SentenceSentiment

LATENT_DIM = 100

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LatentSeed:
    """100 values plus the (doc_id, sentence_index) provenance of each slot."""

    values: np.ndarray
    provenance: tuple[tuple[str, int], ...]
    standardized: bool = False

    def __post_init__(self) -> None:
        if len(self.values) != LATENT_DIM or len(self.provenance) != LATENT_DIM:
            raise ValidationError(f"latent seed must have {LATENT_DIM} entries")
        if self.standardized:
            if abs(float(self.values.mean())) > 1e-9:
                raise ValidationError("standardized seed has nonzero mean")
            if abs(float(self.values.std()) - 1.0) > 1e-9:
                raise ValidationError("standardized seed has non-unit std")

    def to_json(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "values": [float(v) for v in self.values],
            "provenance": [[d, i] for d, i in self.provenance],
            "standardized": self.standardized,
        }
        path.write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def from_json(cls, path: str | Path) -> "LatentSeed":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            values=np.asarray(raw["values"], dtype=float),
            provenance=tuple((str(d), int(i)) for d, i in raw["provenance"]),
            standardized=bool(raw["standardized"]),
        )


def select_top_confidence(
    sentiments: list[SentenceSentiment], signed: bool = True
) -> LatentSeed:
    """Keep the 100 highest-confidence sentiments, zero-padding when short.

    Signed mode (default) stores label * confidence so polarity survives;
    unsigned mode stores the raw confidence. Ties are broken by
    (doc_id, sentence_index) for determinism.
    """
    if not sentiments:
        raise ValidationError("no sentiments to build a latent seed from")
    ranked = sorted(
        sentiments, key=lambda s: (-s.confidence, s.doc_id, s.sentence_index)
    )[:LATENT_DIM]
    values = np.zeros(LATENT_DIM)
    provenance: list[tuple[str, int]] = []
    for i, s in enumerate(ranked):
        values[i] = s.label * s.confidence if signed else s.confidence
        provenance.append((s.doc_id, s.sentence_index))
    if len(ranked) < LATENT_DIM:
        log.warning(
            "only %d sentiments available; zero-padding %d latent slots",
            len(ranked), LATENT_DIM - len(ranked),
        )
        provenance.extend(("", -1) for _ in range(LATENT_DIM - len(ranked)))
    return LatentSeed(values=values, provenance=tuple(provenance))


def standardize_values(values: np.ndarray) -> np.ndarray:
    """(v - mean) / population std; errors when the spread is zero."""
    values = np.asarray(values, dtype=float)
    mu = float(values.mean())
    sigma = float(values.std())
    if sigma == 0.0:
        raise ValidationError("degenerate latent: all values equal")
    return (values - mu) / sigma


def standardize(seed: LatentSeed) -> LatentSeed:
    """Shift/scale to zero mean and unit population standard deviation."""
    return replace(seed, values=standardize_values(seed.values), standardized=True)
