"""Multi-parallel corpus representation, disk I/O, and pivot-alignment mining.

On disk a corpus is a directory with one ``<code>.txt`` file per language
(UTF-8, LF line endings, one sentence per line) plus an optional
``manifest.json`` recording the language list, row count, and provenance.
Bitext inputs for mining are per-language TSV files with one
``english<TAB>foreign`` pair per line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .registry import LanguageRegistry

_ASCII_WS = " \t\n\r\f\v"


class CorpusError(ValueError):
    pass


def _check_sentence(code: str, row_id, text: str) -> None:
    if "\n" in text or "\r" in text:
        raise CorpusError(f"embedded newline in {code!r} sentence (row {row_id})")


@dataclass(frozen=True)
class MultiParallelCorpus:
    """K aligned rows over N languages; rows may be partial (missing columns)."""

    languages: tuple[str, ...]
    rows: tuple[Mapping[str, str], ...]
    row_ids: tuple[int, ...]
    provenance: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.languages) < 2:
            raise CorpusError("a corpus needs at least 2 languages")
        if len(set(self.languages)) != len(self.languages):
            raise CorpusError("duplicate language codes")
        if len(self.rows) != len(self.row_ids):
            raise CorpusError("rows and row_ids length mismatch")
        if len(set(self.row_ids)) != len(self.row_ids):
            raise CorpusError("duplicate row ids")
        known = set(self.languages)
        for rid, row in zip(self.row_ids, self.rows):
            for code, text in row.items():
                if code not in known:
                    raise CorpusError(f"row {rid} references unknown language {code!r}")
                _check_sentence(code, rid, text)

    @property
    def n_languages(self) -> int:
        return len(self.languages)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def is_fully_parallel(self) -> bool:
        return all(len(row) == self.n_languages for row in self.rows)

    def row_by_id(self, row_id: int) -> Mapping[str, str]:
        try:
            return self.rows[self.row_ids.index(row_id)]
        except ValueError:
            raise CorpusError(f"no row with id {row_id}") from None


def load_corpus(
    paths: Mapping[str, str | Path], registry: LanguageRegistry | None = None
) -> MultiParallelCorpus:
    """Read one one-sentence-per-line file per language into a full corpus.

    All files must be UTF-8 and have equal line counts; row i of every
    language comes from line i.
    """
    if registry is not None:
        for code in paths:
            if code not in registry:
                raise CorpusError(f"unknown language code {code!r}")
    columns: dict[str, list[str]] = {}
    counts: dict[str, int] = {}
    for code, path in paths.items():
        try:
            text = Path(path).read_text(encoding="utf-8")
        except UnicodeDecodeError as exc:
            raise CorpusError(f"invalid UTF-8 in {path}: {exc}") from exc
        except OSError as exc:
            raise CorpusError(f"cannot read {path}: {exc}") from exc
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        columns[code] = lines
        counts[code] = len(lines)
    if len(set(counts.values())) > 1:
        detail = ", ".join(f"{paths[c]}: {n}" for c, n in sorted(counts.items()))
        raise CorpusError(f"line-count mismatch across files ({detail})")
    k = next(iter(counts.values())) if counts else 0
    codes = tuple(paths)
    rows = tuple(
        {code: columns[code][i] for code in codes} for i in range(k)
    )
    return MultiParallelCorpus(
        languages=codes,
        rows=rows,
        row_ids=tuple(range(k)),
        provenance={"source": "load_corpus", "files": {c: str(paths[c]) for c in codes}},
    )


def save_corpus(corpus: MultiParallelCorpus, directory: str | Path) -> None:
    """Write ``<code>.txt`` per language plus ``manifest.json``.

    Partial rows are written as empty lines so that line numbers stay
    aligned with row positions across all files.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for code in corpus.languages:
        lines = [row.get(code, "") for row in corpus.rows]
        (directory / f"{code}.txt").write_text(
            "".join(line + "\n" for line in lines), encoding="utf-8"
        )
    manifest = {
        "languages": list(corpus.languages),
        "rows": corpus.n_rows,
        "row_ids": list(corpus.row_ids),
        "provenance": dict(corpus.provenance),
    }
    (directory / "manifest.json").write_text(
        json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


def load_corpus_dir(
    directory: str | Path, registry: LanguageRegistry | None = None
) -> MultiParallelCorpus:
    """Load a corpus from the directory layout written by :func:`save_corpus`."""
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        codes = manifest["languages"]
    else:
        codes = sorted(p.stem for p in directory.glob("*.txt"))
    corpus = load_corpus({c: directory / f"{c}.txt" for c in codes}, registry)
    if manifest_path.exists() and manifest.get("row_ids") is not None:
        ids = tuple(manifest["row_ids"])
        if len(ids) == corpus.n_rows:
            corpus = MultiParallelCorpus(
                corpus.languages, corpus.rows, ids, corpus.provenance
            )
    return corpus


@dataclass(frozen=True)
class MiningStats:
    input_pairs: Mapping[str, int]
    duplicate_pivots_dropped: Mapping[str, int]
    yield_rows: int


def normalize_pivot(sentence: str) -> str:
    """Trim leading/trailing ASCII whitespace; no case folding or stripping."""
    return sentence.strip(_ASCII_WS)


def load_bitext_tsv(path: str | Path) -> list[tuple[str, str]]:
    """Read ``english<TAB>foreign`` pairs, one per line."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise CorpusError(f"{path}:{lineno}: expected 2 tab-separated fields")
            pairs.append((parts[0], parts[1]))
    return pairs


def mine_pivot_aligned(
    bitexts: Mapping[str, Sequence[tuple[str, str]]],
    english_code: str = "en",
) -> tuple[MultiParallelCorpus, MiningStats]:
    """Join English-centric bitexts on identical (normalized) English sentences.

    An English sentence occurring more than once within a single bitext is
    ambiguous in that bitext and is dropped from it before joining, so each
    output row is a function of the pivot string.  Output rows follow the
    first-seen order of the pivot in the first bitext; the result is fully
    multi-parallel over {english} + the bitext languages.
    """
    if len(bitexts) < 2:
        raise CorpusError("pivot mining needs at least two bitexts")
    if english_code in bitexts:
        raise CorpusError(f"bitext keyed by the pivot language {english_code!r}")

    indexes: dict[str, dict[str, str]] = {}
    dup_counts: dict[str, int] = {}
    for code, pairs in bitexts.items():
        seen: dict[str, str] = {}
        ambiguous: set[str] = set()
        for en, foreign in pairs:
            key = normalize_pivot(en)
            if key in seen:
                # repeated pivot within one bitext: alignment is ambiguous
                ambiguous.add(key)
            else:
                seen[key] = foreign
        for key in ambiguous:
            del seen[key]
        indexes[code] = seen
        dup_counts[code] = len(ambiguous)

    codes = list(bitexts)
    first = codes[0]
    order: list[str] = []
    emitted: set[str] = set()
    for en, _ in bitexts[first]:
        key = normalize_pivot(en)
        if key in emitted or key not in indexes[first]:
            continue
        if all(key in indexes[c] for c in codes[1:]):
            order.append(key)
            emitted.add(key)

    rows = tuple(
        {english_code: key, **{c: indexes[c][key] for c in codes}} for key in order
    )
    corpus = MultiParallelCorpus(
        languages=(english_code, *codes),
        rows=rows,
        row_ids=tuple(range(len(rows))),
        provenance={"source": "mine_pivot_aligned", "bitexts": codes},
    )
    stats = MiningStats(
        input_pairs={c: len(bitexts[c]) for c in codes},
        duplicate_pivots_dropped=dup_counts,
        yield_rows=len(rows),
    )
    return corpus, stats


def subset_rows(
    corpus: MultiParallelCorpus, row_ids: Sequence[int]
) -> MultiParallelCorpus:
    """Keep the given rows, in the given order, retaining their original ids."""
    if len(set(row_ids)) != len(row_ids):
        raise CorpusError("duplicate row ids in subset")
    index = {rid: i for i, rid in enumerate(corpus.row_ids)}
    try:
        positions = [index[rid] for rid in row_ids]
    except KeyError as exc:
        raise CorpusError(f"row id {exc.args[0]} out of range") from None
    return MultiParallelCorpus(
        languages=corpus.languages,
        rows=tuple(corpus.rows[p] for p in positions),
        row_ids=tuple(row_ids),
        provenance={
            **dict(corpus.provenance),
            "row_subset_of": list(corpus.row_ids),
        },
    )


def restrict_languages(
    corpus: MultiParallelCorpus, codes: Iterable[str]
) -> MultiParallelCorpus:
    """Project the corpus onto a subset of its languages; K is unchanged."""
    keep = set(codes)
    unknown = keep - set(corpus.languages)
    if unknown:
        raise CorpusError(f"unknown language codes: {sorted(unknown)}")
    if len(keep) < 2:
        raise CorpusError("need at least 2 languages after restriction")
    kept = tuple(c for c in corpus.languages if c in keep)
    rows = tuple(
        {c: row[c] for c in kept if c in row} for row in corpus.rows
    )
    return MultiParallelCorpus(
        languages=kept,
        rows=rows,
        row_ids=corpus.row_ids,
        provenance={**dict(corpus.provenance), "restricted_to": sorted(keep)},
    )
