"""Forum-post corpus: file ingestion, persistent store, statistics, gold data.

Post dumps are UTF-8 JSON-lines files; each record carries exactly the keys
``post_id, forum, language, title, date, author, author_reputation,
description, source_code, discussion`` (the last two may be empty). Accepted
posts land in a single-directory store made of an append-only record log
(``posts.jsonl``) plus a parallel key index (``keys.txt``), which makes
re-ingesting a file a byte-identical no-op and keeps ingestion incremental.

Gold-record files are JSON lines with ``record_id``, ``bin``, and either
``tokens`` (normalized token array) or ``raw_text`` (normalized on load);
an optional ``source`` object points back to (forum, post_id).
"""

from __future__ import annotations

import datetime as dt
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataFormatError
from .textprep import normalize

log = logging.getLogger(__name__)

POST_FIELDS = (
    "post_id",
    "forum",
    "language",
    "title",
    "date",
    "author",
    "author_reputation",
    "description",
    "source_code",
    "discussion",
)

# The five organization-type bins the shipped gazetteer covers, ordered by
# descending share in a typical gold build.
DEFAULT_BINS = ("Databases", "Software", "Open Source", "Mobile", "Video Games")

_DMY_DATE = re.compile(r"^(\d{1,2})-([A-Za-z]{3})-(\d{2})$")
_MONTHS = {
    "jan": 1, "feb": 2, "mar": 3, "apr": 4, "may": 5, "jun": 6,
    "jul": 7, "aug": 8, "sep": 9, "oct": 10, "nov": 11, "dec": 12,
}


def parse_post_date(value: str) -> dt.date:
    """Accept ISO-8601 (2019-09-26) or DD-MMM-YY (26-Sep-19).

    Two-digit years pivot at 70: 00-69 map to 2000-2069, 70-99 to 1970-1999.
    """
    value = value.strip()
    m = _DMY_DATE.match(value)
    if m:
        day, mon, yy = m.groups()
        month = _MONTHS.get(mon.lower())
        if month is None:
            raise ValueError(f"unknown month abbreviation {mon!r}")
        year = int(yy)
        year += 2000 if year < 70 else 1900
        return dt.date(year, month, int(day))
    try:
        return dt.date.fromisoformat(value)
    except ValueError:
        raise ValueError(f"unsupported date format {value!r}") from None


@dataclass(frozen=True)
class ForumPost:
    """One forum posting with its seven metadata fields plus provenance."""

    post_id: str
    forum: str
    language: str
    title: str
    date: dt.date
    author: str
    author_reputation: str
    description: str
    source_code: str
    discussion: str

    @property
    def key(self) -> tuple[str, str]:
        return (self.forum, self.post_id)

    def to_record(self) -> dict:
        rec = {f: getattr(self, f) for f in POST_FIELDS}
        rec["date"] = self.date.isoformat()
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "ForumPost":
        if not isinstance(rec, dict):
            raise ValueError("record is not a JSON object")
        keys = set(rec)
        missing = [f for f in POST_FIELDS if f not in keys]
        if missing:
            raise ValueError(f"missing keys: {', '.join(missing)}")
        extra = sorted(keys - set(POST_FIELDS))
        if extra:
            raise ValueError(f"unexpected keys: {', '.join(extra)}")
        for f in POST_FIELDS:
            if not isinstance(rec[f], str):
                raise ValueError(f"field {f!r} must be a string")
        if not rec["post_id"]:
            raise ValueError("post_id is empty")
        if not rec["forum"]:
            raise ValueError("forum is empty")
        fields = dict(rec)
        fields["date"] = parse_post_date(rec["date"])
        return cls(**fields)


class PostStore:
    """Single-directory embedded post store.

    Layout: ``posts.jsonl`` is an append-only log of canonical JSON records;
    ``keys.txt`` holds one tab-separated (forum, post_id) pair per accepted
    record, in log order. Single writer; readers are safe once writes finish.
    """

    LOG_NAME = "posts.jsonl"
    KEYS_NAME = "keys.txt"

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.log_path = self.directory / self.LOG_NAME
        self.keys_path = self.directory / self.KEYS_NAME
        self.log_path.touch()
        self.keys_path.touch()
        self._seen = set()
        for line in self.keys_path.read_text(encoding="utf-8").splitlines():
            forum, _, post_id = line.partition("\t")
            self._seen.add((forum, post_id))

    def __len__(self):
        return len(self._seen)

    def __contains__(self, key: tuple[str, str]):
        return key in self._seen

    def add(self, post: ForumPost) -> bool:
        """Persist a post; returns False when its key is already present."""
        if post.key in self._seen:
            return False
        line = json.dumps(post.to_record(), sort_keys=True, ensure_ascii=False)
        with self.log_path.open("a", encoding="utf-8") as fh:
            fh.write(line + "\n")
        with self.keys_path.open("a", encoding="utf-8") as fh:
            fh.write(f"{post.forum}\t{post.post_id}\n")
        self._seen.add(post.key)
        return True

    def iter_posts(self):
        with self.log_path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    yield ForumPost.from_record(json.loads(line))


@dataclass
class IngestReport:
    """Outcome of one ingestion run; components sum to the records seen."""

    files_read: int = 0
    posts_added: int = 0
    posts_skipped_duplicate: int = 0
    posts_rejected: int = 0
    rejection_reasons: list[tuple[int, str]] = field(default_factory=list)

    @property
    def records_seen(self) -> int:
        return self.posts_added + self.posts_skipped_duplicate + self.posts_rejected

    def to_dict(self) -> dict:
        return {
            "files_read": self.files_read,
            "posts_added": self.posts_added,
            "posts_skipped_duplicate": self.posts_skipped_duplicate,
            "posts_rejected": self.posts_rejected,
            "rejection_reasons": [
                {"line": line, "reason": reason}
                for line, reason in self.rejection_reasons
            ],
        }


def ingest_posts(input_path, store: PostStore) -> IngestReport:
    """Ingest a JSON-lines dump (or a directory of ``*.jsonl`` dumps).

    Well-formed, unseen (forum, post_id) records are persisted; duplicates are
    counted and skipped (first content wins); malformed lines are rejected
    with per-line reasons and never abort the run.
    """
    input_path = Path(input_path)
    if input_path.is_dir():
        files = sorted(input_path.glob("*.jsonl"))
        if not files:
            raise DataFormatError(f"no .jsonl files in directory {input_path}")
    elif input_path.is_file():
        files = [input_path]
    else:
        raise DataFormatError(f"input path does not exist: {input_path}")

    report = IngestReport()
    for path in files:
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise DataFormatError(f"cannot read {path}: {exc}") from exc
        report.files_read += 1
        for line_no, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                post = ForumPost.from_record(json.loads(line))
            except (ValueError, json.JSONDecodeError) as exc:
                report.posts_rejected += 1
                report.rejection_reasons.append((line_no, f"{path.name}: {exc}"))
                continue
            if store.add(post):
                report.posts_added += 1
            else:
                report.posts_skipped_duplicate += 1
                log.warning(
                    "duplicate key %s/%s at %s:%d kept first version",
                    post.forum, post.post_id, path.name, line_no,
                )
    return report


@dataclass(frozen=True)
class ForumRow:
    name: str
    language: str
    post_count: int
    source_code_count: int


@dataclass
class CorpusStats:
    """Per-forum post and snippet counts with a totals row."""

    rows: list[ForumRow]
    total_posts: int
    total_source_code: int
    total_languages: int

    def to_dict(self) -> dict:
        return {
            "forums": [
                {
                    "name": r.name,
                    "language": r.language,
                    "posts": r.post_count,
                    "source_code": r.source_code_count,
                }
                for r in self.rows
            ],
            "total": {
                "languages": self.total_languages,
                "posts": self.total_posts,
                "source_code": self.total_source_code,
            },
        }

    def to_markdown(self) -> str:
        lines = [
            "| Name | Language | Posts | Source Code |",
            "| --- | --- | ---: | ---: |",
        ]
        for r in self.rows:
            lines.append(
                f"| {r.name} | {r.language} | {r.post_count:,} "
                f"| {r.source_code_count:,} |"
            )
        plural = "Language" if self.total_languages == 1 else "Languages"
        lines.append(
            f"| Total | {self.total_languages} {plural} | {self.total_posts:,} "
            f"| {self.total_source_code:,} |"
        )
        return "\n".join(lines) + "\n"


def corpus_stats(store: PostStore) -> CorpusStats:
    """Count posts and non-empty source-code snippets per forum."""
    per_forum: dict[str, dict] = {}
    languages_all = set()
    for post in store.iter_posts():
        info = per_forum.setdefault(
            post.forum, {"languages": set(), "posts": 0, "source_code": 0}
        )
        info["posts"] += 1
        if post.source_code:
            info["source_code"] += 1
        info["languages"].add(post.language)
        languages_all.add(post.language)
    rows = [
        ForumRow(
            name=name,
            language="/".join(sorted(info["languages"])),
            post_count=info["posts"],
            source_code_count=info["source_code"],
        )
        for name, info in sorted(per_forum.items())
    ]
    return CorpusStats(
        rows=rows,
        total_posts=sum(r.post_count for r in rows),
        total_source_code=sum(r.source_code_count for r in rows),
        total_languages=len(languages_all),
    )


@dataclass(frozen=True)
class GoldRecord:
    """A preprocessed snippet paired with its organization-type bin."""

    record_id: str
    tokens: tuple[str, ...]
    bin: str
    source: tuple[str, str] | None = None

    def to_record(self) -> dict:
        rec = {
            "record_id": self.record_id,
            "tokens": list(self.tokens),
            "bin": self.bin,
        }
        if self.source is not None:
            rec["source"] = {"forum": self.source[0], "post_id": self.source[1]}
        return rec


_TOKEN_OK = re.compile(r"^[0-9a-z]+$")


@dataclass
class GoldDataset:
    """Labeled records plus the class order used for fold building.

    Classes are indexed by descending record count (ties by name), so index 0
    is always the majority bin.
    """

    records: list[GoldRecord]
    bins: tuple[str, ...]
    rejections: list[tuple[int, str]] = field(default_factory=list)

    def __post_init__(self):
        counts = {b: 0 for b in self.bins}
        for rec in self.records:
            counts[rec.bin] += 1
        self.class_order = tuple(
            sorted(counts, key=lambda b: (-counts[b], b))
        )
        self.class_index = {b: i for i, b in enumerate(self.class_order)}
        self.counts = counts

    def __len__(self):
        return len(self.records)

    def label_indices(self) -> list[int]:
        return [self.class_index[rec.bin] for rec in self.records]

    def token_lists(self) -> list[list[str]]:
        return [list(rec.tokens) for rec in self.records]

    def percentages(self) -> dict[str, float]:
        total = len(self.records)
        return {
            b: round(100.0 * self.counts[b] / total, 2) if total else 0.0
            for b in self.class_order
        }

    def summary(self) -> dict:
        pct = self.percentages()
        return {
            "total": len(self.records),
            "bins": [
                {"bin": b, "count": self.counts[b], "percent": pct[b]}
                for b in self.class_order
            ],
        }


def _record_tokens(rec: dict) -> tuple[str, ...]:
    if "tokens" in rec:
        tokens = rec["tokens"]
        if not isinstance(tokens, list) or not all(
            isinstance(t, str) for t in tokens
        ):
            raise ValueError("tokens must be an array of strings")
        bad = [t for t in tokens if not _TOKEN_OK.match(t)]
        if bad:
            raise ValueError(f"tokens not normalized: {bad[:3]}")
        return tuple(tokens)
    if "raw_text" in rec:
        if not isinstance(rec["raw_text"], str):
            raise ValueError("raw_text must be a string")
        return tuple(normalize(rec["raw_text"]))
    raise ValueError("record has neither tokens nor raw_text")


def load_gold(path, bins=DEFAULT_BINS) -> GoldDataset:
    """Load a gold-record file, rejecting records outside the declared bins.

    ``bins="auto"`` infers the bin set from the file itself. Records must end
    up with a non-empty token sequence; an empty or fully rejected file is an
    error.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc

    infer_bins = isinstance(bins, str) and bins == "auto"
    declared = None if infer_bins else tuple(bins)

    records: list[GoldRecord] = []
    rejections: list[tuple[int, str]] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            if not isinstance(rec, dict):
                raise ValueError("record is not a JSON object")
            record_id = rec.get("record_id")
            if not isinstance(record_id, str) or not record_id:
                raise ValueError("record_id missing or empty")
            bin_label = rec.get("bin")
            if not isinstance(bin_label, str) or not bin_label:
                raise ValueError("bin missing or empty")
            if declared is not None and bin_label not in declared:
                raise ValueError(f"unknown bin {bin_label!r}")
            tokens = _record_tokens(rec)
            if not tokens:
                raise ValueError("record has an empty token sequence")
            source = None
            if "source" in rec:
                src = rec["source"]
                if (
                    not isinstance(src, dict)
                    or not isinstance(src.get("forum"), str)
                    or not isinstance(src.get("post_id"), str)
                ):
                    raise ValueError("source must carry forum and post_id")
                source = (src["forum"], src["post_id"])
        except (ValueError, json.JSONDecodeError) as exc:
            rejections.append((line_no, str(exc)))
            log.warning("gold record rejected at %s:%d: %s", path.name, line_no, exc)
            continue
        records.append(
            GoldRecord(record_id=record_id, tokens=tokens, bin=bin_label, source=source)
        )

    if not records:
        raise DataFormatError(f"gold file {path} contains no usable records")
    if declared is None:
        declared = tuple(sorted({rec.bin for rec in records}))
    return GoldDataset(records=records, bins=declared, rejections=rejections)


def save_gold(records: list[GoldRecord], path) -> None:
    """Write gold records as JSON lines."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_record(), sort_keys=True, ensure_ascii=False))
            fh.write("\n")
