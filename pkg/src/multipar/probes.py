"""Synthetic probe datasets: number pairs and dictionary-pivoted word pairs.

Number pairs carry no semantics beyond digits: each line is a space-joined
sequence of integers replicated on both sides.  Word pairs come from
English-centric dictionaries joined on shared English headwords, so a
DE entry and an NL entry for the same English word yield a DE-NL pair.
Token budgets can be matched against a reference dataset so the probe
corpora carry comparable surface mass.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping

from .datagen import BitextRecord, Direction, DirectionSet, FtDataset
from .rng import stream


class ProbeError(ValueError):
    pass


@dataclass(frozen=True)
class Dictionary:
    """Word-level translation entries for one (unordered) language pair."""

    pair: tuple[str, str]
    entries: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if self.pair[0] == self.pair[1]:
            raise ProbeError("dictionary pair with identical languages")
        for a, b in self.entries:
            if not a or not b or any(ch.isspace() for ch in a + b):
                raise ProbeError(f"bad dictionary entry ({a!r}, {b!r})")

    def oriented(self, direction: Direction) -> tuple[tuple[str, str], ...]:
        """Entries with the first element in ``direction.src``."""
        if (direction.src, direction.tgt) == self.pair:
            return self.entries
        if (direction.tgt, direction.src) == self.pair:
            return tuple((b, a) for a, b in self.entries)
        raise ProbeError(f"dictionary {self.pair} does not cover {direction}")


@dataclass(frozen=True)
class ProbeConfig:
    digit_min: int = 1
    digit_max: int = 1000
    tokens_per_line: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.digit_min > self.digit_max:
            raise ProbeError("digit_min must not exceed digit_max")
        if self.tokens_per_line < 1:
            raise ProbeError("tokens_per_line must be >= 1")


def gen_number_pairs(
    dirs: DirectionSet, lines_per_direction: int, config: ProbeConfig
) -> FtDataset:
    """Identical source/target lines of uniform random integers, per direction.

    Each line is a deterministic function of (direction, line index, seed).
    """
    if lines_per_direction < 1:
        raise ProbeError("lines_per_direction must be >= 1")
    records = []
    for d in dirs:
        for i in range(lines_per_direction):
            rng = stream(config.seed, f"numbers/{d}/{i}")
            line = " ".join(
                str(rng.randint(config.digit_min, config.digit_max))
                for _ in range(config.tokens_per_line)
            )
            records.append(BitextRecord(d, line, line, i, origin="number_pairs"))
    manifest = {
        "corpus_id": "number_pairs",
        "directions": [str(d) for d in dirs],
        "tag_strategy": "none",
        "seed": config.seed,
        "counts": {"records": len(records)},
        "config": {
            "digit_min": config.digit_min,
            "digit_max": config.digit_max,
            "tokens_per_line": config.tokens_per_line,
            "lines_per_direction": lines_per_direction,
        },
    }
    return FtDataset(tuple(records), manifest)


def load_muse_dictionary(path: str | Path) -> set[tuple[str, str]]:
    """MUSE-style input: one ``english<TAB or space>foreign`` entry per line."""
    entries = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ProbeError(f"{path}:{lineno}: expected 2 fields")
            entries.add((parts[0], parts[1]))
    return entries


def pivot_dictionaries(
    en_dicts: Mapping[str, Iterable[tuple[str, str]]],
    seed: int,
    english_code: str = "en",
) -> tuple[dict[str, Dictionary], dict[tuple[str, str], Dictionary]]:
    """Join English-centric dictionaries on shared English headwords.

    Only headwords present in every input dictionary survive.  For each
    (headword, language) one translation is chosen uniformly at random among
    the candidates, once and globally, so every pivoted pair involving that
    language reuses the same choice and transitivity holds.  Returns the
    restricted English-centric dictionaries and one dictionary per unordered
    non-English pair; all have exactly |shared headwords| entries.
    """
    if len(en_dicts) < 2:
        raise ProbeError("pivoting needs at least two English-centric dictionaries")
    candidates: dict[str, dict[str, list[str]]] = {}
    for code, entries in en_dicts.items():
        per_word: dict[str, list[str]] = {}
        for en_word, foreign in entries:
            per_word.setdefault(en_word, []).append(foreign)
        candidates[code] = per_word

    shared = None
    for per_word in candidates.values():
        keys = set(per_word)
        shared = keys if shared is None else shared & keys
    headwords = sorted(shared)

    # one global choice per (headword, language)
    chosen: dict[str, dict[str, str]] = {}
    for code in sorted(candidates):
        rng = stream(seed, f"pivot/{code}")
        chosen[code] = {
            w: sorted(set(candidates[code][w]))[rng.randbelow(len(set(candidates[code][w])))]
            for w in headwords
        }

    en_centric = {
        code: Dictionary(
            pair=(english_code, code),
            entries=tuple((w, chosen[code][w]) for w in headwords),
        )
        for code in sorted(candidates)
    }
    pivoted = {}
    for a, b in combinations(sorted(candidates), 2):
        pivoted[(a, b)] = Dictionary(
            pair=(a, b),
            entries=tuple((chosen[a][w], chosen[b][w]) for w in headwords),
        )
    return en_centric, pivoted


def build_word_pair_dataset(
    dicts: Iterable[Dictionary], dirs: DirectionSet
) -> FtDataset:
    """One single-word record per (direction, dictionary entry).

    Both orientations of a pair draw from the same entry set, so (a, b) and
    (b, a) produce mirrored records.
    """
    by_pair = {}
    for d in dicts:
        by_pair[tuple(sorted(d.pair))] = d
    records = []
    for direction in dirs:
        key = tuple(sorted((direction.src, direction.tgt)))
        if key not in by_pair:
            raise ProbeError(f"no dictionary for direction {direction}")
        for i, (src_word, tgt_word) in enumerate(by_pair[key].oriented(direction)):
            records.append(
                BitextRecord(direction, src_word, tgt_word, i, origin="word_pairs")
            )
    manifest = {
        "corpus_id": "word_pairs",
        "directions": [str(d) for d in dirs],
        "tag_strategy": "none",
        "counts": {"records": len(records)},
    }
    return FtDataset(tuple(records), manifest)


@dataclass(frozen=True)
class BudgetReport:
    lines_per_direction: int
    target_tokens: int
    achieved_tokens: int


def match_token_budget(
    target_total_tokens: int,
    tokens_per_line: int,
    num_directions: int,
) -> BudgetReport:
    """Lines per direction so total token mass approximates a reference budget.

    Rounds to the nearest line count (half away from zero), minimum one line;
    the achieved budget is therefore within one line's tokens per direction
    of the target.
    """
    if target_total_tokens < tokens_per_line:
        lines = 1
    else:
        exact = target_total_tokens / (tokens_per_line * num_directions)
        lines = max(1, int(exact + 0.5))
    return BudgetReport(
        lines_per_direction=lines,
        target_tokens=target_total_tokens,
        achieved_tokens=lines * tokens_per_line * num_directions,
    )


def count_whitespace_tokens(dataset: FtDataset, side: str = "src") -> int:
    """Whitespace-tokenized token count over one side of a dataset."""
    if side not in ("src", "tgt"):
        raise ProbeError(f"unknown side {side!r}")
    total = 0
    for r in dataset.records:
        text = r.src_text if side == "src" else r.tgt_text
        total += len(text.split())
    return total
