"""Character n-gram Naive Bayes language identification.

A lightweight, trainable replacement for an external LID model: per-language
add-alpha-smoothed character n-gram profiles (orders 1..n_max), classified by
summed log-probabilities plus a prior.  Used to measure off-target rates and
to carve out per-direction on-target subsets.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

LID_SCHEMA_VERSION = 1
UNKNOWN = "unknown"


class LidError(ValueError):
    pass


@dataclass(frozen=True)
class LidConfig:
    max_order: int = 3
    alpha: float = 0.1
    empty_is_off_target: bool = True

    def __post_init__(self):
        if self.max_order < 1:
            raise LidError("max_order must be >= 1")
        if self.alpha <= 0:
            raise LidError("smoothing alpha must be positive")


def _ngrams(text: str, n: int) -> Iterable[str]:
    return (text[i : i + n] for i in range(len(text) - n + 1))


@dataclass(frozen=True)
class LidModel:
    languages: tuple[str, ...]
    config: LidConfig
    # counts[lang][order-1] is a character n-gram frequency table
    counts: Mapping[str, Sequence[Mapping[str, int]]]
    priors: Mapping[str, float]
    # vocabulary sizes per order, shared across languages (plus one unseen slot)
    vocab_sizes: tuple[int, ...] = field(default=())
    _total_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def _total(self, language: str, order: int) -> int:
        key = (language, order)
        if key not in self._total_cache:
            self._total_cache[key] = sum(self.counts[language][order - 1].values())
        return self._total_cache[key]

    def log_score(self, text: str, language: str) -> float:
        if language not in self.counts:
            raise LidError(f"language {language!r} not in model")
        cfg = self.config
        score = math.log(self.priors[language])
        for order in range(1, cfg.max_order + 1):
            table = self.counts[language][order - 1]
            denom = self._total(language, order) + cfg.alpha * self.vocab_sizes[order - 1]
            for gram in _ngrams(text, order):
                score += math.log((table.get(gram, 0) + cfg.alpha) / denom)
        return score

    def to_json_dict(self) -> dict:
        return {
            "schema_version": LID_SCHEMA_VERSION,
            "languages": list(self.languages),
            "max_order": self.config.max_order,
            "alpha": self.config.alpha,
            "empty_is_off_target": self.config.empty_is_off_target,
            "priors": dict(self.priors),
            "vocab_sizes": list(self.vocab_sizes),
            "counts": {
                lang: [dict(table) for table in tables]
                for lang, tables in self.counts.items()
            },
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "LidModel":
        if data.get("schema_version") != LID_SCHEMA_VERSION:
            raise LidError(f"unsupported model schema {data.get('schema_version')!r}")
        config = LidConfig(
            max_order=data["max_order"],
            alpha=data["alpha"],
            empty_is_off_target=data["empty_is_off_target"],
        )
        return cls(
            languages=tuple(data["languages"]),
            config=config,
            counts=data["counts"],
            priors=data["priors"],
            vocab_sizes=tuple(data["vocab_sizes"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), sort_keys=True) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "LidModel":
        return cls.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def lid_train(
    samples: Mapping[str, Sequence[str]], config: LidConfig = LidConfig()
) -> LidModel:
    """Count character n-grams per language into smoothed profiles."""
    if len(samples) < 2:
        raise LidError("training needs at least 2 languages")
    counts: dict[str, list[Counter]] = {}
    for lang, sentences in samples.items():
        if not sentences:
            raise LidError(f"no training sentences for {lang!r}")
        tables = [Counter() for _ in range(config.max_order)]
        for sentence in sentences:
            for order in range(1, config.max_order + 1):
                tables[order - 1].update(_ngrams(sentence, order))
        counts[lang] = tables
    vocab_sizes = []
    for order in range(config.max_order):
        vocab = set()
        for tables in counts.values():
            vocab.update(tables[order])
        vocab_sizes.append(len(vocab) + 1)  # +1 reserves mass for unseen n-grams
    languages = tuple(sorted(samples))
    priors = {lang: 1.0 / len(languages) for lang in languages}
    return LidModel(
        languages=languages,
        config=config,
        counts={lang: [dict(t) for t in counts[lang]] for lang in languages},
        priors=priors,
        vocab_sizes=tuple(vocab_sizes),
    )


def lid_classify(text: str, model: LidModel) -> tuple[str, float]:
    """Most likely language and its log-score margin over the runner-up.

    Empty or whitespace-only text classifies as the designated unknown
    outcome.  Ties break towards the lexicographically smallest code.
    """
    if not text.strip():
        return UNKNOWN, 0.0
    scored = sorted(
        ((model.log_score(text, lang), lang) for lang in model.languages),
        key=lambda pair: (-pair[0], pair[1]),
    )
    best_score, best_lang = scored[0]
    margin = best_score - scored[1][0] if len(scored) > 1 else math.inf
    return best_lang, margin


@dataclass(frozen=True)
class OffTargetReport:
    per_direction: Mapping[str, dict]
    overall_total: int
    overall_off_target: int

    @property
    def overall_rate(self) -> float:
        return self.overall_off_target / self.overall_total if self.overall_total else 0.0


def off_target_rate(
    hyps: Sequence[tuple[str, str]], model: LidModel
) -> OffTargetReport:
    """Fraction of hypotheses not classified as their expected language.

    ``hyps`` is a list of (text, expected code); results are grouped by the
    expected code.  Empty hypotheses count per the model's config.
    """
    expected_codes = {code for _, code in hyps}
    missing = expected_codes - set(model.languages)
    if missing:
        raise LidError(f"expected codes absent from model: {sorted(missing)}")
    per: dict[str, dict] = {}
    for text, expected in hyps:
        entry = per.setdefault(expected, {"total": 0, "off_target": 0})
        entry["total"] += 1
        label, _ = lid_classify(text, model)
        if label == UNKNOWN:
            off = model.config.empty_is_off_target
        else:
            off = label != expected
        if off:
            entry["off_target"] += 1
    for entry in per.values():
        entry["rate"] = entry["off_target"] / entry["total"]
    return OffTargetReport(
        per_direction=per,
        overall_total=sum(e["total"] for e in per.values()),
        overall_off_target=sum(e["off_target"] for e in per.values()),
    )


def on_target_subset(
    baseline_hyps: Mapping[str, Sequence[tuple[int, str]]],
    model: LidModel,
) -> dict[str, set[int]]:
    """Per direction, the row ids whose baseline hypothesis is already in the
    target language.  Keys are ``src-tgt`` direction strings."""
    subsets: dict[str, set[int]] = {}
    for direction, rows in baseline_hyps.items():
        _, _, target = direction.rpartition("-")
        if target not in model.languages:
            raise LidError(f"target {target!r} of {direction!r} absent from model")
        ids = [rid for rid, _ in rows]
        if len(set(ids)) != len(ids):
            raise LidError(f"duplicate row ids in direction {direction!r}")
        keep = set()
        for rid, text in rows:
            label, _ = lid_classify(text, model)
            if label == target:
                keep.add(rid)
        subsets[direction] = keep
    return subsets
