"""Rumour dataset loading: canonical JSONL and the PHEME thread layout.

The canonical interchange format is JSONL with one message object per line;
PHEME ingestion converts into it.  PHEME's two-level support annotation
(source tweet vs rumour, replies vs source tweet) is straightened into a
per-message stance in {-1, 0, 1} by :func:`resolve_stance`.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

from .errors import IngestError

log = logging.getLogger(__name__)

STANCE_AGAINST, STANCE_NEUTRAL, STANCE_SUPPORTING = -1, 0, 1
STANCES = (STANCE_AGAINST, STANCE_NEUTRAL, STANCE_SUPPORTING)

_SOURCE_STANCE = {"supporting": 1, "denying": -1, "underspecified": 0}
_RESPONSES = ("agreed", "disagreed", "appeal-for-more-info", "comment")
_CERTAIN = ("certain", "somewhat-certain")
_CERTAINTIES = ("certain", "somewhat-certain", "uncertain", "n/a")

REQUIRED_JSONL_FIELDS = ("id", "rumour_id", "claim", "timestamp", "text")

_TWITTER_TIME = "%a %b %d %H:%M:%S %z %Y"


@dataclass
class Message:
    """One social-media post within a rumour."""

    id: str
    timestamp: datetime
    text: str
    is_retweet: bool = False
    retweet_of: str | None = None
    language: str = "en"
    gold_stance: int | None = None
    thread_id: str | None = None

    def is_english(self) -> bool:
        """Trust the language tag when set, else an ASCII-ratio heuristic."""
        if self.language:
            return self.language.lower().startswith("en")
        text = self.text
        if not text:
            return False
        ascii_chars = sum(1 for ch in text if ord(ch) < 128)
        return ascii_chars / len(text) >= 0.9

    def is_classifiable(self) -> bool:
        """English and original; linkless retweets participate as originals."""
        return self.is_english() and (not self.is_retweet or self.retweet_of is None)


@dataclass
class Rumour:
    """A claim plus its ordered messages (ascending timestamp, then id)."""

    rumour_id: str
    claim_text: str
    messages: list[Message]
    story: str | None = None

    def __post_init__(self):
        self.messages.sort(key=lambda m: (m.timestamp, m.id))

    def classifiable_messages(self) -> list[Message]:
        return [m for m in self.messages if m.is_classifiable()]

    def original_english_count(self) -> int:
        return sum(1 for m in self.messages if m.is_english() and not m.is_retweet)


@dataclass
class ThreadAnnotation:
    """Support annotation of one PHEME tweet.

    Source tweets carry ``source_support``; replies carry ``reply_response``
    plus ``certainty``.  ``evidentiality`` is parsed but unused.
    """

    source_support: str | None = None
    reply_response: str | None = None
    certainty: str | None = None
    evidentiality: str | None = None


def _norm_enum(value, aliases: dict[str, str] | None = None) -> str | None:
    if value is None:
        return None
    v = str(value).strip().lower()
    if aliases and v in aliases:
        v = aliases[v]
    return v or None


_RESPONSE_ALIASES = {
    "appeal-for-more-information": "appeal-for-more-info",
    "appealformoreinformation": "appeal-for-more-info",
    "comments": "comment",
}


def resolve_stance(ann: ThreadAnnotation, is_source: bool, source_support: str | None = None) -> int:
    """Straighten PHEME's two-level support annotation into a stance.

    Sources map supporting/denying/underspecified to +1/-1/0.  Replies that
    agree inherit the source stance; replies that disagree with certainty
    invert it; uncertain disagreement, appeals for more information and
    comments are neutral.  Unknown enum values raise so release drift is
    caught loudly rather than silently mapped.
    """
    if is_source:
        support = _norm_enum(ann.source_support)
        if support not in _SOURCE_STANCE:
            raise IngestError(f"unknown source support value {ann.source_support!r}")
        return _SOURCE_STANCE[support]

    support = _norm_enum(source_support)
    if support not in _SOURCE_STANCE:
        raise IngestError(f"unknown source support value {source_support!r}")
    source_stance = _SOURCE_STANCE[support]

    response = _norm_enum(ann.reply_response, _RESPONSE_ALIASES)
    if response not in _RESPONSES:
        raise IngestError(f"unknown reply response value {ann.reply_response!r}")

    certainty = _norm_enum(ann.certainty)
    if certainty is not None and certainty not in _CERTAINTIES:
        raise IngestError(f"unknown certainty value {ann.certainty!r}")

    if response == "agreed":
        return source_stance
    if response == "disagreed":
        if certainty in _CERTAIN:
            return -source_stance
        return STANCE_NEUTRAL
    return STANCE_NEUTRAL


# ---------------------------------------------------------------------------
# canonical JSONL

def _parse_timestamp(raw, where: str) -> datetime:
    if isinstance(raw, (int, float)):
        return datetime.fromtimestamp(raw, tz=timezone.utc)
    if isinstance(raw, str):
        try:
            ts = datetime.fromisoformat(raw.replace("Z", "+00:00"))
        except ValueError:
            try:
                ts = datetime.strptime(raw, _TWITTER_TIME)
            except ValueError:
                raise IngestError(f"{where}: unparseable timestamp {raw!r}")
        return ts if ts.tzinfo else ts.replace(tzinfo=timezone.utc)
    raise IngestError(f"{where}: unparseable timestamp {raw!r}")


def load_jsonl(path: str | Path) -> list[Rumour]:
    """Load rumours from the canonical one-message-per-line format."""
    path = Path(path)
    grouped: dict[str, dict] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise IngestError(f"{where}: malformed JSON ({e.msg})")
            missing = [k for k in REQUIRED_JSONL_FIELDS if k not in obj]
            if missing:
                raise IngestError(f"{where}: missing required field(s) {missing}")
            gold = obj.get("gold_stance")
            if gold is not None and gold not in STANCES:
                raise IngestError(f"{where}: gold_stance must be one of {STANCES}")
            msg = Message(
                id=str(obj["id"]),
                timestamp=_parse_timestamp(obj["timestamp"], where),
                text=str(obj["text"]),
                is_retweet=bool(obj.get("is_retweet", False)),
                retweet_of=(None if obj.get("retweet_of") is None else str(obj["retweet_of"])),
                language=str(obj.get("language", "en")),
                gold_stance=gold,
                thread_id=(None if obj.get("thread_id") is None else str(obj["thread_id"])),
            )
            rid = str(obj["rumour_id"])
            bucket = grouped.setdefault(
                rid,
                {"claim": str(obj["claim"]), "story": obj.get("story"), "messages": [], "ids": set()},
            )
            if msg.id in bucket["ids"]:
                raise IngestError(f"{where}: duplicate message id {msg.id!r} in rumour {rid!r}")
            bucket["ids"].add(msg.id)
            bucket["messages"].append(msg)
    return [
        Rumour(rid, b["claim"], b["messages"], story=b["story"])
        for rid, b in sorted(grouped.items())
    ]


def message_record(msg: Message, rumour: Rumour) -> dict:
    """Canonical JSONL object for one message."""
    return {
        "id": msg.id,
        "rumour_id": rumour.rumour_id,
        "claim": rumour.claim_text,
        "story": rumour.story,
        "timestamp": msg.timestamp.isoformat(),
        "text": msg.text,
        "is_retweet": msg.is_retweet,
        "retweet_of": msg.retweet_of,
        "language": msg.language,
        "gold_stance": msg.gold_stance,
        "thread_id": msg.thread_id,
    }


def write_jsonl(rumours: Iterable[Rumour], path: str | Path) -> int:
    """Write rumours in the canonical format; returns the message count."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rumour in rumours:
            for msg in rumour.messages:
                fh.write(json.dumps(message_record(msg, rumour), sort_keys=True))
                fh.write("\n")
                count += 1
    return count


# ---------------------------------------------------------------------------
# PHEME thread layout

@dataclass
class IngestSummary:
    """Counts reported by PHEME ingestion; drop reasons partition the total."""

    stories: int = 0
    threads: int = 0
    threads_skipped: int = 0
    tweets_total: int = 0
    rumours: int = 0
    retweets: int = 0
    non_english_originals: int = 0
    original_english: int = 0
    unannotated: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _read_json(path: Path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise IngestError(f"{path}: malformed JSON ({e.msg})")


def _parse_tweet(path: Path, thread_id: str) -> Message:
    obj = _read_json(path)
    tweet_id = str(obj.get("id_str") or obj.get("id"))
    if tweet_id in (None, "None"):
        raise IngestError(f"{path}: tweet has no id")
    text = obj.get("text") or obj.get("full_text") or ""
    created = obj.get("created_at")
    if created is None:
        raise IngestError(f"{path}: tweet has no created_at")
    # retweet status comes from tweet metadata only; "RT @" text alone does
    # not demote an (annotated) message to retweet
    retweeted = obj.get("retweeted_status")
    retweet_of = None
    if isinstance(retweeted, dict):
        retweet_of = str(retweeted.get("id_str") or retweeted.get("id"))
    is_retweet = retweeted is not None
    lang = obj.get("lang") or ""
    return Message(
        id=tweet_id,
        timestamp=_parse_timestamp(created, str(path)),
        text=text,
        is_retweet=bool(is_retweet),
        retweet_of=retweet_of,
        language=str(lang),
        thread_id=thread_id,
    )


def _scheme_annotation(obj: dict) -> ThreadAnnotation:
    return ThreadAnnotation(
        source_support=obj.get("support"),
        reply_response=obj.get("responsetype-vs-source") or obj.get("response"),
        certainty=obj.get("certainty"),
        evidentiality=obj.get("evidentiality"),
    )


def _load_scheme_annotations(root: Path) -> dict[str, dict[str, ThreadAnnotation]]:
    """Per-thread, per-tweet annotations from annotations/*-scheme-annotations.json."""
    ann_dir = root / "annotations"
    result: dict[str, dict[str, ThreadAnnotation]] = {}
    if not ann_dir.is_dir():
        return result
    for ann_file in sorted(ann_dir.glob("*scheme-annotations.json*")):
        with open(ann_file, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as e:
                    raise IngestError(f"{ann_file}:{lineno}: malformed JSON ({e.msg})")
                thread = str(obj.get("threadid"))
                tweet = str(obj.get("tweetid"))
                result.setdefault(thread, {})[tweet] = _scheme_annotation(obj)
    return result


def _thread_annotation_file(thread_dir: Path) -> dict | None:
    for name in ("annotation.json", "annotation.js"):
        p = thread_dir / name
        if p.is_file():
            return _read_json(p)
    return None


def load_pheme_with_summary(root_path: str | Path) -> tuple[list[Rumour], IngestSummary]:
    """Walk a PHEME-layout directory tree and group threads into rumours.

    Layout: ``root/<story>/<thread_id>/source-tweets/<thread_id>.json`` plus
    ``reactions/*.json`` and a thread-level ``annotation.json``.  Per-tweet
    support annotations come from a root-level
    ``annotations/*scheme-annotations.json`` file when present, otherwise
    from the thread-level annotation file ("support" for the source,
    "responses" keyed by tweet id for replies).  Threads are grouped into
    rumours by the annotation's rumour/category field, falling back to one
    rumour per thread.
    """
    root = Path(root_path)
    summary = IngestSummary()
    if not root.is_dir():
        raise IngestError(f"{root}: not a directory")
    scheme = _load_scheme_annotations(root)

    buckets: dict[str, dict] = {}
    story_names: set[str] = set()

    for story_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        if story_dir.name in ("annotations",) or story_dir.name.startswith("."):
            continue
        thread_dirs = sorted(
            p for p in story_dir.iterdir() if p.is_dir() and not p.name.startswith(".")
        )
        if not thread_dirs:
            continue
        story = story_dir.name
        story_names.add(story)
        for thread_dir in thread_dirs:
            thread_id = thread_dir.name
            source_dir = thread_dir / "source-tweets"
            source_file = source_dir / f"{thread_id}.json"
            if not source_file.is_file():
                candidates = sorted(source_dir.glob("*.json")) if source_dir.is_dir() else []
                if len(candidates) != 1:
                    log.warning("skipping thread %s: no source tweet", thread_dir)
                    summary.threads_skipped += 1
                    continue
                source_file = candidates[0]

            thread_ann = _thread_annotation_file(thread_dir)
            per_tweet = dict(scheme.get(thread_id, {}))
            if thread_ann:
                if "support" in thread_ann and thread_id not in per_tweet:
                    per_tweet[thread_id] = ThreadAnnotation(
                        source_support=thread_ann.get("support"),
                        certainty=thread_ann.get("certainty"),
                        evidentiality=thread_ann.get("evidentiality"),
                    )
                for tid, resp in (thread_ann.get("responses") or {}).items():
                    per_tweet.setdefault(str(tid), _scheme_annotation(resp))
            if not per_tweet:
                log.warning("skipping thread %s: no annotation", thread_dir)
                summary.threads_skipped += 1
                continue

            try:
                source_msg = _parse_tweet(source_file, thread_id)
                reactions = []
                reactions_dir = thread_dir / "reactions"
                if reactions_dir.is_dir():
                    for rf in sorted(reactions_dir.glob("*.json")):
                        reactions.append(_parse_tweet(rf, thread_id))
            except IngestError:
                raise
            summary.threads += 1

            source_ann = per_tweet.get(source_msg.id)
            source_support = source_ann.source_support if source_ann else None
            try:
                if source_ann is not None:
                    source_msg.gold_stance = resolve_stance(source_ann, is_source=True)
                for msg in reactions:
                    ann = per_tweet.get(msg.id)
                    if ann is None or (
                        # deep replies annotated only against their parent
                        # carry no support-vs-source information
                        ann.source_support is None and ann.reply_response is None
                    ):
                        summary.unannotated += 1
                        continue
                    if ann.source_support is not None and ann.reply_response is None:
                        msg.gold_stance = resolve_stance(ann, is_source=True)
                    else:
                        msg.gold_stance = resolve_stance(
                            ann, is_source=False, source_support=source_support
                        )
            except IngestError as e:
                raise IngestError(f"thread {story}/{thread_id}: {e}")

            rumour_key = None
            if thread_ann:
                for key in ("rumour", "category", "title"):
                    if thread_ann.get(key):
                        rumour_key = str(thread_ann[key])
                        break
            if rumour_key is None:
                rumour_key = thread_id
            rid = f"{story}/{rumour_key}"
            bucket = buckets.setdefault(rid, {"story": story, "messages": [], "claim": None,
                                              "claim_ts": None, "ids": set()})
            for msg in [source_msg] + reactions:
                if msg.id in bucket["ids"]:  # same tweet reachable via two threads
                    continue
                bucket["ids"].add(msg.id)
                bucket["messages"].append(msg)
                summary.tweets_total += 1
                if msg.is_retweet:
                    summary.retweets += 1
                elif not msg.is_english():
                    summary.non_english_originals += 1
                else:
                    summary.original_english += 1
            if bucket["claim_ts"] is None or source_msg.timestamp < bucket["claim_ts"]:
                bucket["claim"] = source_msg.text
                bucket["claim_ts"] = source_msg.timestamp

    rumours = [
        Rumour(rid, b["claim"] or rid, b["messages"], story=b["story"])
        for rid, b in sorted(buckets.items())
    ]
    summary.stories = len(story_names)
    summary.rumours = len(rumours)
    return rumours, summary


def load_pheme(root_path: str | Path) -> list[Rumour]:
    return load_pheme_with_summary(root_path)[0]


def filter_rumours(rumours: Iterable[Rumour], min_original_english: int = 50) -> list[Rumour]:
    """Keep rumours with at least ``min_original_english`` original English messages."""
    return [r for r in rumours if r.original_english_count() >= min_original_english]


def inherit_retweet_predictions(
    rumour: Rumour, predictions: dict[str, int]
) -> dict[str, int]:
    """Extend predictions to linked retweets (same class as their original)."""
    extended = dict(predictions)
    for msg in rumour.messages:
        if msg.is_retweet and msg.retweet_of is not None:
            original = predictions.get(msg.retweet_of)
            if original is not None:
                extended.setdefault(msg.id, original)
    return extended
