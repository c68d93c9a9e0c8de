"""Language registry: codes, families, resource tiers, and scripts.

A registry pins down the closed set of languages an experiment runs over,
which language is the English pivot, and the grouping metadata (family,
resource tier) that the report layer aggregates by.  The EC30/EC40
registries used throughout the bundled experiments ship as package data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

TIERS = ("High", "Medium", "Low", "ExtraLow")


class RegistryError(ValueError):
    pass


@dataclass(frozen=True)
class LanguageSpec:
    code: str
    family: str
    tier: str
    script: str

    def __post_init__(self):
        if not self.code:
            raise RegistryError("language code must be nonempty")
        if self.tier not in TIERS:
            raise RegistryError(f"unknown tier {self.tier!r} for {self.code!r}")


class LanguageRegistry:
    """Ordered, duplicate-free collection of languages with a designated pivot."""

    def __init__(self, entries: Iterable[LanguageSpec], english_code: str = "en"):
        self.entries: tuple[LanguageSpec, ...] = tuple(entries)
        self.english_code = english_code
        self._by_code = {}
        for spec in self.entries:
            if spec.code in self._by_code:
                raise RegistryError(f"duplicate language code {spec.code!r}")
            self._by_code[spec.code] = spec
        if english_code not in self._by_code:
            raise RegistryError(f"english code {english_code!r} not in registry")

    def __contains__(self, code: str) -> bool:
        return code in self._by_code

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, code: str) -> LanguageSpec:
        try:
            return self._by_code[code]
        except KeyError:
            raise RegistryError(f"unknown language code {code!r}") from None

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(spec.code for spec in self.entries)

    @property
    def families(self) -> tuple[str, ...]:
        seen = dict.fromkeys(spec.family for spec in self.entries)
        return tuple(seen)

    def members_of_family(self, family: str, include_english: bool = True) -> tuple[str, ...]:
        if family not in self.families:
            raise RegistryError(f"unknown family {family!r}")
        codes = [
            s.code
            for s in self.entries
            if s.family == family and (include_english or s.code != self.english_code)
        ]
        return tuple(codes)

    def tier_of(self, code: str) -> str:
        return self[code].tier

    def family_of(self, code: str) -> str:
        return self[code].family

    def subset(self, codes: Iterable[str]) -> "LanguageRegistry":
        keep = set(codes) | {self.english_code}
        return LanguageRegistry(
            (s for s in self.entries if s.code in keep), self.english_code
        )

    def to_dict(self) -> dict:
        return {
            "english_code": self.english_code,
            "languages": [vars(s) | {} for s in self.entries],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LanguageRegistry":
        entries = [LanguageSpec(**row) for row in data["languages"]]
        return cls(entries, data.get("english_code", "en"))

    @classmethod
    def load(cls, path: str | Path) -> "LanguageRegistry":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8"
        )


def _load_bundled() -> LanguageRegistry:
    text = resources.files("multipar.data").joinpath("ec40.json").read_text("utf-8")
    return LanguageRegistry.from_dict(json.loads(text))


def ec40() -> LanguageRegistry:
    """The full 40-language registry (plus the English pivot)."""
    return _load_bundled()


def ec30() -> LanguageRegistry:
    """The 30-language subset: ExtraLow-tier languages excluded."""
    full = _load_bundled()
    return LanguageRegistry(
        (s for s in full.entries if s.tier != "ExtraLow"), full.english_code
    )
