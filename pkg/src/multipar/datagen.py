"""Fine-tuning bitext construction from a multi-parallel corpus.

Covers direction enumeration and nested sampling, family restriction,
row subsetting, bucketed multi-parallel vs. multi-directional settings,
language-tag serialization, horizontal expansion, and bitext emission.

All sampling here draws permutation prefixes from seeded streams, so the
10% direction sample is always a subset of the 20% sample under the same
seed, and likewise for row counts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import CorpusError, MultiParallelCorpus
from .registry import LanguageRegistry
from .rng import stream


class DatagenError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Direction:
    src: str
    tgt: str

    def __post_init__(self):
        if self.src == self.tgt:
            raise DatagenError(f"direction with identical endpoints {self.src!r}")

    def __str__(self) -> str:
        return f"{self.src}-{self.tgt}"

    @classmethod
    def parse(cls, text: str) -> "Direction":
        src, sep, tgt = text.partition("-")
        if not sep or not src or not tgt:
            raise DatagenError(f"cannot parse direction {text!r}")
        return cls(src, tgt)

    def is_english_centric(self, english_code: str = "en") -> bool:
        return english_code in (self.src, self.tgt)


@dataclass(frozen=True)
class DirectionSet:
    directions: tuple[Direction, ...]
    english_code: str = "en"
    provenance: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.directions)) != len(self.directions):
            raise DatagenError("duplicate directions")

    def __len__(self) -> int:
        return len(self.directions)

    def __iter__(self):
        return iter(self.directions)

    def __contains__(self, d: Direction) -> bool:
        return d in set(self.directions)

    def english_centric(self) -> tuple[Direction, ...]:
        return tuple(d for d in self.directions if d.is_english_centric(self.english_code))

    def zero_shot(self) -> tuple[Direction, ...]:
        return tuple(d for d in self.directions if not d.is_english_centric(self.english_code))


def enumerate_directions(
    codes: Sequence[str],
    include_english_centric: bool = True,
    excluded_languages: Iterable[str] = (),
    english_code: str = "en",
) -> DirectionSet:
    """All ordered pairs over ``codes``, minus exclusions, in lexicographic order."""
    excluded = set(excluded_languages)
    kept = [c for c in sorted(set(codes)) if c not in excluded]
    dirs = [
        Direction(a, b)
        for a in kept
        for b in kept
        if a != b
        and (include_english_centric or english_code not in (a, b))
    ]
    if len(kept) < 2 or not dirs:
        raise DatagenError("fewer than 2 usable languages after exclusions")
    return DirectionSet(
        tuple(dirs),
        english_code=english_code,
        provenance={
            "rule": "enumerate",
            "include_english_centric": include_english_centric,
            "exclusions": sorted(excluded),
        },
    )


def sample_directions(dirs: DirectionSet, fraction: float, seed: int) -> DirectionSet:
    """Prefix of a seeded uniform permutation, floor(fraction * |dirs|) long.

    Samples are nested across fractions under the same seed.
    """
    if not 0.0 < fraction <= 1.0:
        raise DatagenError(f"fraction must be in (0, 1], got {fraction}")
    count = int(fraction * len(dirs))
    if count == 0:
        raise DatagenError(f"fraction {fraction} of {len(dirs)} directions selects none")
    perm = stream(seed, "directions").permutation(sorted(dirs.directions))
    return DirectionSet(
        tuple(perm[:count]),
        english_code=dirs.english_code,
        provenance={**dict(dirs.provenance), "fraction": fraction, "seed": seed},
    )


def restrict_directions_to_family(
    dirs: DirectionSet,
    family: str,
    registry: LanguageRegistry,
    include_english: bool = True,
) -> DirectionSet:
    """Directions whose both endpoints belong to the family."""
    members = set(registry.members_of_family(family, include_english=include_english))
    kept = tuple(d for d in dirs if d.src in members and d.tgt in members)
    if not kept:
        raise DatagenError(f"no directions fall within family {family!r}")
    return DirectionSet(
        kept,
        english_code=dirs.english_code,
        provenance={
            **dict(dirs.provenance),
            "family": family,
            "include_english": include_english,
        },
    )


def sample_rows(corpus: MultiParallelCorpus, count: int, seed: int) -> list[int]:
    """``count`` distinct row ids via a seeded permutation prefix (nested)."""
    k = corpus.n_rows
    if not 1 <= count <= k:
        raise DatagenError(f"row count {count} out of range [1, {k}]")
    perm = stream(seed, "rows").permutation(corpus.row_ids)
    return perm[:count]


@dataclass(frozen=True)
class TagStrategy:
    """Language-tag serialization applied to finished datasets.

    ``one_tag`` prepends the target-language tag to the source side only;
    ``two_tag`` prepends the source tag to the source side and the target
    tag to the target side.
    """

    kind: str  # "none" | "one_tag" | "two_tag"
    target_tag: str = "<2{code}>"
    source_tag: str = "<src:{code}>"
    two_tag_target: str = "<tgt:{code}>"

    KINDS = ("none", "one_tag", "two_tag")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise DatagenError(f"unknown tag strategy {self.kind!r}")


@dataclass(frozen=True, slots=True)
class BitextRecord:
    direction: Direction
    src_text: str
    tgt_text: str
    row_id: int
    origin: str = ""


@dataclass(frozen=True)
class FtDataset:
    records: tuple[BitextRecord, ...]
    manifest: Mapping[str, object] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    def directions(self) -> tuple[Direction, ...]:
        return tuple(dict.fromkeys(r.direction for r in self.records))


def build_pairwise(
    corpus: MultiParallelCorpus,
    dirs: DirectionSet,
    row_ids: Sequence[int] | None = None,
    origin: str = "",
) -> FtDataset:
    """One record per (direction, row) where both sides exist and are nonempty.

    Order is direction-major with rows in the given order; rows with an
    empty or missing side are skipped and counted in the manifest.
    """
    languages = set(corpus.languages)
    for d in dirs:
        if d.src not in languages or d.tgt not in languages:
            raise DatagenError(f"direction {d} references a language absent from corpus")
    if row_ids is None:
        row_ids = list(corpus.row_ids)
    index = {rid: i for i, rid in enumerate(corpus.row_ids)}
    try:
        selected = [(rid, corpus.rows[index[rid]]) for rid in row_ids]
    except KeyError as exc:
        raise DatagenError(f"row id {exc.args[0]} not in corpus") from None

    records: list[BitextRecord] = []
    skipped: dict[str, int] = {}
    append = records.append
    for d in dirs:
        src, tgt = d.src, d.tgt
        n_skipped = 0
        for rid, row in selected:
            s = row.get(src)
            t = row.get(tgt)
            if s and t:
                append(BitextRecord(d, s, t, rid, origin))
            else:
                n_skipped += 1
        if n_skipped:
            skipped[str(d)] = n_skipped
    manifest = {
        "corpus_id": corpus.provenance.get("source", "unknown"),
        "directions": [str(d) for d in dirs],
        "direction_provenance": dict(dirs.provenance),
        "rows": list(row_ids),
        "tag_strategy": "none",
        "skipped": skipped,
        "counts": {"records": len(records)},
    }
    return FtDataset(tuple(records), manifest)


@dataclass(frozen=True)
class BucketAssignment:
    """Total map row_id -> bucket index; bucket sizes differ by at most one."""

    mapping: Mapping[int, int]
    num_buckets: int

    def __post_init__(self):
        if any(not 0 <= b < self.num_buckets for b in self.mapping.values()):
            raise DatagenError("bucket index out of range")
        sizes = self.sizes()
        if sizes and max(sizes) - min(sizes) > 1:
            raise DatagenError("bucket sizes differ by more than one")

    def bucket_rows(self, bucket: int) -> list[int]:
        if not 0 <= bucket < self.num_buckets:
            raise DatagenError(f"invalid bucket index {bucket}")
        return [rid for rid, b in self.mapping.items() if b == bucket]

    def sizes(self) -> list[int]:
        counts = [0] * self.num_buckets
        for b in self.mapping.values():
            counts[b] += 1
        return counts


def partition_buckets(
    row_ids: Sequence[int], num_buckets: int, seed: int
) -> BucketAssignment:
    """Seeded permutation dealt round-robin into balanced buckets."""
    if not 1 <= num_buckets <= len(row_ids):
        raise DatagenError(
            f"bucket count {num_buckets} out of range [1, {len(row_ids)}]"
        )
    perm = stream(seed, "buckets").permutation(row_ids)
    mapping = {rid: i % num_buckets for i, rid in enumerate(perm)}
    return BucketAssignment(mapping, num_buckets)


def build_multiparallel_setting(
    corpus: MultiParallelCorpus,
    assignment: BucketAssignment,
    chosen_bucket: int,
    codes: Iterable[str],
    seed: int | None = None,
) -> FtDataset:
    """Pairwise data over all directions of ``codes``, from one bucket's rows."""
    codes = sorted(set(codes))
    dirs = enumerate_directions(codes, include_english_centric=True)
    rows = sorted(assignment.bucket_rows(chosen_bucket))
    dataset = build_pairwise(corpus, dirs, rows, origin=f"bucket:{chosen_bucket}")
    manifest = {
        **dataset.manifest,
        "setting": "multi_parallel",
        "bucket": chosen_bucket,
        "seed": seed,
    }
    return FtDataset(dataset.records, manifest)


def build_multidirectional_setting(
    corpus: MultiParallelCorpus,
    assignment: BucketAssignment,
    pair_for_bucket: Mapping[int, tuple[str, str]],
    seed: int | None = None,
) -> FtDataset:
    """Per bucket, records in exactly the 2 directions of that bucket's pair."""
    if set(pair_for_bucket) != set(range(assignment.num_buckets)):
        missing = set(range(assignment.num_buckets)) - set(pair_for_bucket)
        raise DatagenError(f"buckets without a pair: {sorted(missing)}")
    records: list[BitextRecord] = []
    skipped: dict[str, int] = {}
    for bucket in range(assignment.num_buckets):
        a, b = pair_for_bucket[bucket]
        if a == b:
            raise DatagenError(f"bucket {bucket} maps to identical languages {a!r}")
        dirs = DirectionSet((Direction(*sorted((a, b))), Direction(*sorted((a, b), reverse=True))))
        rows = sorted(assignment.bucket_rows(bucket))
        part = build_pairwise(corpus, dirs, rows, origin=f"bucket:{bucket}")
        records.extend(part.records)
        for key, n in part.manifest["skipped"].items():
            skipped[key] = skipped.get(key, 0) + n
    manifest = {
        "corpus_id": corpus.provenance.get("source", "unknown"),
        "setting": "multi_directional",
        "pair_for_bucket": {str(k): list(v) for k, v in pair_for_bucket.items()},
        "tag_strategy": "none",
        "skipped": skipped,
        "counts": {"records": len(records)},
        "seed": seed,
    }
    return FtDataset(tuple(records), manifest)


def apply_tags(dataset: FtDataset, strategy: TagStrategy) -> FtDataset:
    """Serialize language tags onto the dataset per the strategy.

    Tagging an already-tagged dataset is an error (detected via the
    manifest), since tags are plain text once applied.
    """
    if dataset.manifest.get("tag_strategy", "none") != "none" and strategy.kind != "none":
        raise DatagenError("dataset is already tagged")
    if strategy.kind == "none":
        return dataset
    if strategy.kind == "one_tag":
        records = tuple(
            replace(r, src_text=f"{strategy.target_tag.format(code=r.direction.tgt)} {r.src_text}")
            for r in dataset.records
        )
    else:
        records = tuple(
            replace(
                r,
                src_text=f"{strategy.source_tag.format(code=r.direction.src)} {r.src_text}",
                tgt_text=f"{strategy.two_tag_target.format(code=r.direction.tgt)} {r.tgt_text}",
            )
            for r in dataset.records
        )
    manifest = {**dataset.manifest, "tag_strategy": strategy.kind}
    return FtDataset(records, manifest)


def horizontal_expand(
    corpus: MultiParallelCorpus, new_code: str, sentences: Sequence[str]
) -> tuple[MultiParallelCorpus, int]:
    """Add one language column; returns the count of newly covered directions (2N)."""
    if new_code in corpus.languages:
        raise DatagenError(f"language {new_code!r} already present")
    if len(sentences) != corpus.n_rows:
        raise DatagenError(
            f"need {corpus.n_rows} sentences for {new_code!r}, got {len(sentences)}"
        )
    rows = tuple(
        {**row, new_code: sent} for row, sent in zip(corpus.rows, sentences)
    )
    expanded = MultiParallelCorpus(
        languages=(*corpus.languages, new_code),
        rows=rows,
        row_ids=corpus.row_ids,
        provenance={**dict(corpus.provenance), "expanded_with": new_code},
    )
    return expanded, 2 * corpus.n_languages


def _check_emittable(text: str) -> str:
    if "\t" in text or "\n" in text or "\r" in text:
        raise DatagenError(f"embedded tab/newline in record text: {text!r}")
    return text


def emit_bitext(dataset: FtDataset, mode: str, path: str | Path) -> None:
    """Write the dataset to disk, with a manifest JSON alongside.

    ``tsv``: one ``src_lang<TAB>tgt_lang<TAB>src<TAB>tgt`` line per record in
    ``records.tsv``.  ``split_files``: aligned ``<src>-<tgt>.src`` /
    ``<src>-<tgt>.tgt`` pairs per direction.
    """
    if not dataset.records:
        raise DatagenError("refusing to emit an empty dataset")
    if mode not in ("tsv", "split_files"):
        raise DatagenError(f"unknown emit mode {mode!r}")
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    per_direction: dict[str, int] = {}
    if mode == "tsv":
        with open(out / "records.tsv", "w", encoding="utf-8", newline="\n") as fh:
            for r in dataset.records:
                d = r.direction
                fh.write(
                    f"{d.src}\t{d.tgt}\t{_check_emittable(r.src_text)}\t"
                    f"{_check_emittable(r.tgt_text)}\n"
                )
                per_direction[str(d)] = per_direction.get(str(d), 0) + 1
    else:
        handles: dict[Direction, tuple] = {}
        try:
            for r in dataset.records:
                if r.direction not in handles:
                    base = out / str(r.direction)
                    handles[r.direction] = (
                        open(f"{base}.src", "w", encoding="utf-8", newline="\n"),
                        open(f"{base}.tgt", "w", encoding="utf-8", newline="\n"),
                    )
                sfh, tfh = handles[r.direction]
                sfh.write(_check_emittable(r.src_text) + "\n")
                tfh.write(_check_emittable(r.tgt_text) + "\n")
                key = str(r.direction)
                per_direction[key] = per_direction.get(key, 0) + 1
        finally:
            for sfh, tfh in handles.values():
                sfh.close()
                tfh.close()
    manifest = {
        **{k: v for k, v in dataset.manifest.items()},
        "format": mode,
        "counts": {
            "records": len(dataset.records),
            "per_direction": per_direction,
        },
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def read_bitext_tsv(path: str | Path) -> list[BitextRecord]:
    """Read records back from the ``tsv`` emit format (row ids not preserved)."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 4:
                raise DatagenError(f"{path}:{lineno + 1}: expected 4 fields")
            src_lang, tgt_lang, src, tgt = parts
            records.append(BitextRecord(Direction(src_lang, tgt_lang), src, tgt, lineno))
    return records
