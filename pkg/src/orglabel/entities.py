"""Organizational-mention extraction and bin assignment.

A gazetteer (curated names, aliases, and an organization-type bin per entry)
drives a deterministic recognizer: case-insensitive, word-boundary-delimited,
longest-match-wins, left to right, no overlaps. The recognizer interface is
a plain callable ``text -> list[OrgMention]`` so a statistical model can be
plugged in later without touching the rest of the pipeline.
"""

from __future__ import annotations

import csv
import logging
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .corpus import GoldRecord, PostStore
from .errors import DataFormatError
from .textprep import normalize

log = logging.getLogger(__name__)

# Post fields scanned for mentions: prose only, never the source code that
# later becomes classifier input.
MENTION_FIELDS = ("title", "description", "discussion")

_WS = re.compile(r"\s+")


def _alias_key(alias: str) -> str:
    return _WS.sub(" ", alias.strip().casefold())


@dataclass(frozen=True)
class GazetteerEntry:
    canonical_name: str
    aliases: tuple[str, ...]
    bin: str


class Gazetteer:
    """Alias dictionary mapping organization names to bins.

    Canonical names are unique after case-folding; each alias (the canonical
    name always counts as one) resolves to exactly one canonical name.
    """

    def __init__(self, entries: list[GazetteerEntry]):
        self.entries = list(entries)
        self._by_canonical: dict[str, GazetteerEntry] = {}
        self._alias_to_canonical: dict[str, str] = {}
        for entry in self.entries:
            ckey = _alias_key(entry.canonical_name)
            if not ckey:
                raise DataFormatError("gazetteer entry with empty canonical name")
            if ckey in self._by_canonical:
                raise DataFormatError(
                    f"duplicate canonical name {entry.canonical_name!r}"
                )
            self._by_canonical[ckey] = entry
            for alias in (entry.canonical_name, *entry.aliases):
                akey = _alias_key(alias)
                if not akey:
                    continue
                owner = self._alias_to_canonical.get(akey)
                if owner is not None and owner != entry.canonical_name:
                    raise DataFormatError(
                        f"alias {alias!r} maps to both {owner!r} "
                        f"and {entry.canonical_name!r}"
                    )
                self._alias_to_canonical[akey] = entry.canonical_name
        self._pattern = self._compile() if self._alias_to_canonical else None

    def _compile(self) -> re.Pattern:
        # Longest aliases first so the alternation picks the longest match at
        # each position; alias-internal spaces match any whitespace run.
        alias_patterns = []
        for akey in sorted(self._alias_to_canonical, key=lambda a: (-len(a), a)):
            parts = [re.escape(p) for p in akey.split(" ")]
            alias_patterns.append(r"\s+".join(parts))
        body = "|".join(alias_patterns)
        return re.compile(
            rf"(?<![0-9a-zA-Z])(?:{body})(?![0-9a-zA-Z])", re.IGNORECASE
        )

    def __len__(self):
        return len(self.entries)

    def bins(self) -> tuple[str, ...]:
        return tuple(sorted({e.bin for e in self.entries}))

    def canonical_for_alias(self, alias: str) -> str | None:
        return self._alias_to_canonical.get(_alias_key(alias))

    def bin_for(self, canonical_name: str) -> str:
        entry = self._by_canonical.get(_alias_key(canonical_name))
        if entry is None:
            raise KeyError(f"unknown canonical name {canonical_name!r}")
        return entry.bin

    @property
    def pattern(self) -> re.Pattern | None:
        return self._pattern


def load_gazetteer(path) -> Gazetteer:
    """Read a gazetteer CSV with header canonical_name,aliases,bin.

    The aliases column is a semicolon-separated list and may be empty.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc
    return _parse_gazetteer_csv(text, str(path))


def _parse_gazetteer_csv(text: str, origin: str) -> Gazetteer:
    reader = csv.DictReader(text.splitlines())
    expected = ["canonical_name", "aliases", "bin"]
    if reader.fieldnames != expected:
        raise DataFormatError(
            f"{origin}: expected header {','.join(expected)}, "
            f"got {reader.fieldnames}"
        )
    entries = []
    for row in reader:
        name = (row["canonical_name"] or "").strip()
        bin_label = (row["bin"] or "").strip()
        if not name or not bin_label:
            raise DataFormatError(f"{origin}: row with empty name or bin: {row}")
        aliases = tuple(
            a.strip() for a in (row["aliases"] or "").split(";") if a.strip()
        )
        entries.append(
            GazetteerEntry(canonical_name=name, aliases=aliases, bin=bin_label)
        )
    return Gazetteer(entries)


def builtin_gazetteer() -> Gazetteer:
    """The starter gazetteer shipped with the package."""
    text = resources.files("orglabel.data").joinpath("gazetteer.csv").read_text(
        encoding="utf-8"
    )
    return _parse_gazetteer_csv(text, "builtin gazetteer")


@dataclass(frozen=True)
class OrgMention:
    """A recognized organization occurrence inside one piece of text."""

    canonical_name: str
    surface: str
    span: tuple[int, int]
    post: tuple[str, str] | None = None
    field: str | None = None


def extract_orgs(text: str, gazetteer: Gazetteer) -> list[OrgMention]:
    """Find every non-overlapping gazetteer match, left to right.

    Matching is case-insensitive, requires word boundaries (a transition
    between alphanumeric and non-alphanumeric text), and prefers the longest
    alias at each position. Spans index into ``text`` and slicing them
    reproduces each surface form exactly.
    """
    if gazetteer.pattern is None or not text:
        return []
    mentions = []
    for match in gazetteer.pattern.finditer(text):
        surface = match.group(0)
        canonical = gazetteer.canonical_for_alias(surface)
        if canonical is None:  # pragma: no cover - pattern and dict co-built
            continue
        mentions.append(
            OrgMention(
                canonical_name=canonical,
                surface=surface,
                span=(match.start(), match.end()),
            )
        )
    return mentions


def extract_post_mentions(post, gazetteer: Gazetteer) -> list[OrgMention]:
    """Extract mentions from a post's prose fields, in field order."""
    mentions = []
    for field_name in MENTION_FIELDS:
        text = getattr(post, field_name)
        for m in extract_orgs(text, gazetteer):
            mentions.append(
                OrgMention(
                    canonical_name=m.canonical_name,
                    surface=m.surface,
                    span=m.span,
                    post=post.key,
                    field=field_name,
                )
            )
    return mentions


def assign_bins(mentions: list[OrgMention], gazetteer: Gazetteer) -> dict[str, int]:
    """Count mentions per bin; every gazetteer bin appears, possibly at zero."""
    counts = {b: 0 for b in gazetteer.bins()}
    for mention in mentions:
        try:
            bin_label = gazetteer.bin_for(mention.canonical_name)
        except KeyError:
            raise ValueError(
                f"mention {mention.canonical_name!r} is not in the gazetteer"
            ) from None
        counts[bin_label] += 1
    return counts


def prune_bins(counts: dict[str, int], min_mentions: int = 100) -> dict[str, int]:
    """Keep exactly the bins with at least min_mentions mentions."""
    return {b: n for b, n in counts.items() if n >= min_mentions}


def _majority_bin(bins_in_order: list[str]) -> str:
    """Most frequent bin; ties go to the bin seen earliest."""
    counts = Counter(bins_in_order)
    best = max(counts.values())
    for b in bins_in_order:
        if counts[b] == best:
            return b
    raise AssertionError("unreachable: non-empty input")


def build_gold(
    store: PostStore,
    gazetteer: Gazetteer,
    retained_bins,
) -> list[GoldRecord]:
    """Label posts that carry source code by the bins their prose mentions.

    A post contributes one record when its normalized source code is
    non-empty and at least one mention falls in a retained bin; the label is
    the majority retained bin (earliest mention breaks ties). Everything else
    is skipped.
    """
    retained = set(retained_bins)
    if not retained:
        raise ValueError("retained_bins must be non-empty")
    records = []
    for post in store.iter_posts():
        if not post.source_code:
            continue
        mentions = extract_post_mentions(post, gazetteer)
        bins_in_order = [
            gazetteer.bin_for(m.canonical_name)
            for m in mentions
        ]
        retained_hits = [b for b in bins_in_order if b in retained]
        if not retained_hits:
            continue
        tokens = normalize(post.source_code)
        if not tokens:
            continue
        records.append(
            GoldRecord(
                record_id=f"{post.forum}:{post.post_id}",
                tokens=tuple(tokens),
                bin=_majority_bin(retained_hits),
                source=post.key,
            )
        )
    if not records:
        log.warning("build_gold produced no records")
    return records
