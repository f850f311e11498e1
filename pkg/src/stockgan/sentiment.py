"""Naive Bayes sentence sentiment over classes {-1, 0, +1}.

The classifier scores log P(Y) + sum_k log P(x_k | Y) for the three classes
and reports the argmax with its normalized posterior as a confidence. Word
likelihoods use Laplace smoothing; out-of-vocabulary tokens are skipped so
classification is a pure function of the trained vocabulary.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .errors import ValidationError
from .ingest import LabeledSeedCorpus, NewsDocument

CLASSES = (-1, 0, 1)
# deterministic tie-break preference: neutral, then positive, then negative
TIE_ORDER = (0, 1, -1)


@dataclass(frozen=True)
class NaiveBayesModel:
    """Log priors and smoothed log likelihoods over a fixed vocabulary."""

    alpha: float
    vocabulary: dict[str, int]
    log_prior: dict[int, float]
    log_likelihood: dict[int, list[float]]

    @property
    def vocab_size(self) -> int:
        return len(self.vocabulary)

    def to_json(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "alpha": self.alpha,
            "classes": list(CLASSES),
            "priors": {str(c): self.log_prior[c] for c in CLASSES},
            "vocabulary": self.vocabulary,
            "likelihoods": {str(c): self.log_likelihood[c] for c in CLASSES},
        }
        path.write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def from_json(cls, path: str | Path) -> "NaiveBayesModel":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            alpha=float(raw["alpha"]),
            vocabulary={str(k): int(v) for k, v in raw["vocabulary"].items()},
            log_prior={int(c): float(v) for c, v in raw["priors"].items()},
            log_likelihood={int(c): list(map(float, v)) for c, v in raw["likelihoods"].items()},
        )


@dataclass(frozen=True)
class SentenceSentiment:
    """Predicted label and normalized posterior for one sentence."""

    label: int
    confidence: float
    doc_id: str
    sentence_index: int

    def __post_init__(self) -> None:
        if self.label not in CLASSES:
            raise ValidationError(f"label {self.label} not in {CLASSES}")
        if not (0.0 < self.confidence <= 1.0):
            raise ValidationError(f"confidence {self.confidence} outside (0, 1]")


def train_nb(corpus: LabeledSeedCorpus, alpha: float = 1.0) -> NaiveBayesModel:
    """Count-based training with Laplace smoothing alpha.

    P(Y=y) = count(y) / total;
    P(x|y) = (count(x,y) + alpha) / (count(.,y) + alpha * V).
    """
    if alpha <= 0:
        raise ValidationError("smoothing alpha must be > 0")
    if not corpus.entries:
        raise ValidationError("empty seed corpus")
    vocab: dict[str, int] = {}
    for tokens, _ in corpus.entries:
        for tok in tokens:
            vocab.setdefault(tok, len(vocab))
    v = len(vocab)

    class_counts = Counter(label for _, label in corpus.entries)
    total = sum(class_counts.values())
    token_counts: dict[int, Counter] = {c: Counter() for c in CLASSES}
    for tokens, label in corpus.entries:
        token_counts[label].update(tokens)

    log_prior = {c: math.log(class_counts[c] / total) for c in CLASSES}
    log_likelihood = {}
    for c in CLASSES:
        denom = sum(token_counts[c].values()) + alpha * v
        log_likelihood[c] = [
            math.log((token_counts[c][tok] + alpha) / denom) for tok in vocab
        ]
    return NaiveBayesModel(
        alpha=alpha,
        vocabulary=vocab,
        log_prior=log_prior,
        log_likelihood=log_likelihood,
    )


def _scores(model: NaiveBayesModel, sentence: list[str] | tuple[str, ...]) -> dict[int, float]:
    scores = dict(model.log_prior)
    for tok in sentence:
        idx = model.vocabulary.get(tok)
        if idx is None:
            continue  # out-of-vocabulary tokens are skipped
        for c in CLASSES:
            scores[c] += model.log_likelihood[c][idx]
    return scores


def posterior(model: NaiveBayesModel, sentence: list[str] | tuple[str, ...]) -> dict[int, float]:
    """Normalized 3-class posterior of a sentence."""
    scores = _scores(model, sentence)
    peak = max(scores.values())
    expd = {c: math.exp(s - peak) for c, s in scores.items()}
    z = sum(expd.values())
    return {c: e / z for c, e in expd.items()}


def classify(
    model: NaiveBayesModel,
    sentence: list[str] | tuple[str, ...],
    doc_id: str = "",
    sentence_index: int = 0,
) -> SentenceSentiment:
    """Argmax class with ties broken toward 0, then +1, then -1."""
    scores = _scores(model, sentence)
    best = max(scores.values())
    label = next(c for c in TIE_ORDER if scores[c] == best)
    post = posterior(model, sentence)
    return SentenceSentiment(
        label=label,
        confidence=post[label],
        doc_id=doc_id,
        sentence_index=sentence_index,
    )


def analyze_document(model: NaiveBayesModel, doc: NewsDocument) -> list[SentenceSentiment]:
    """One sentiment per sentence, in document order."""
    return [
        classify(model, sent, doc_id=doc.doc_id, sentence_index=i)
        for i, sent in enumerate(doc.sentences)
    ]


def word_sentiment(model: NaiveBayesModel, token: str) -> int | None:
    """Word-level label: argmax_y P(y|token); None when out of vocabulary."""
    if token not in model.vocabulary:
        return None
    return classify(model, [token]).label


def context_sentiment(
    model: NaiveBayesModel,
    docs: list[NewsDocument],
    keyword: str,
    window: int = 5,
) -> float:
    """Mean word-level sentiment of tokens within +/- window of the keyword.

    Every keyword occurrence contributes its sentence-bounded neighborhood,
    excluding the keyword itself; out-of-vocabulary neighbors are skipped.
    """
    if window < 1:
        raise ValidationError("context window must be >= 1")
    found = False
    values: list[int] = []
    for doc in docs:
        for sent in doc.sentences:
            for pos, tok in enumerate(sent):
                if tok != keyword:
                    continue
                found = True
                lo = max(0, pos - window)
                for j in range(lo, min(len(sent), pos + window + 1)):
                    if sent[j] == keyword:
                        continue
                    label = word_sentiment(model, sent[j])
                    if label is not None:
                        values.append(label)
    if not found:
        raise ValidationError(f"keyword not found: {keyword!r}")
    if not values:
        raise ValidationError(f"no scorable context around {keyword!r}")
    return sum(values) / len(values)
