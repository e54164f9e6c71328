import json
import random
from datetime import datetime, timedelta, timezone

import pytest

from stanceprop.data import Message, Rumour
from stanceprop.features import BrownClusterMap, Lexicons

# Word pools drawn from the bundled demo cluster file, one pool per stance,
# so synthetic rumours are separable in the brown feature space.
SUPPORT_WORDS = (
    "confirmed verified official true correct legit real evidence proof sources "
    "statement announced yes indeed exactly definitely absolutely police report"
).split()
AGAINST_WORDS = (
    "fake false hoax fabricated untrue debunked denied lie lies lying wrong "
    "incorrect nonsense rubbish misinformation no not never stop"
).split()
NEUTRAL_WORDS = (
    "really sure unsure unclear wonder wondering suppose confused doubt doubtful "
    "maybe perhaps possibly anyone know question questions why how what when"
).split()
FILLER_WORDS = "the a is are was people today just like time news twitter this that".split()

_POOLS = {1: SUPPORT_WORDS, -1: AGAINST_WORDS, 0: NEUTRAL_WORDS}

EPOCH = datetime(2015, 3, 1, 12, 0, 0, tzinfo=timezone.utc)


def synthetic_text(rng: random.Random, stance: int, n_words: int = 6) -> str:
    pool = _POOLS[stance]
    words = [rng.choice(pool) for _ in range(n_words)] + [rng.choice(FILLER_WORDS) for _ in range(2)]
    rng.shuffle(words)
    return " ".join(words)


def make_rumour(
    rumour_id: str,
    stances,
    seed: int = 0,
    texts=None,
    story: str | None = None,
) -> Rumour:
    """Synthetic rumour with one message per stance entry, in time order."""
    rng = random.Random(seed)
    messages = []
    for i, stance in enumerate(stances):
        text = texts[i] if texts is not None else synthetic_text(rng, stance)
        messages.append(
            Message(
                id=f"{rumour_id}-m{i:04d}",
                timestamp=EPOCH + timedelta(minutes=i),
                text=text,
                gold_stance=stance,
            )
        )
    return Rumour(rumour_id, "synthetic rumour claim", messages, story=story)


def mixed_stances(rng: random.Random, n: int, weights=(0.2, 0.2, 0.6)) -> list[int]:
    """Random stance sequence with all three classes forced into the prefix."""
    stances = [rng.choices((-1, 0, 1), weights=weights)[0] for _ in range(n)]
    stances[0], stances[1], stances[2] = 1, -1, 0
    return stances


@pytest.fixture(scope="session")
def cluster_map() -> BrownClusterMap:
    return BrownClusterMap.bundled_demo()


@pytest.fixture(scope="session")
def lexicons() -> Lexicons:
    return Lexicons.bundled()


# ---------------------------------------------------------------------------
# synthetic PHEME-layout tree

def _tweet_json(tweet_id: str, text: str, minutes: int, lang="en", retweet_of=None):
    created = (EPOCH + timedelta(minutes=minutes)).strftime("%a %b %d %H:%M:%S +0000 %Y")
    obj = {"id_str": tweet_id, "id": int(tweet_id), "text": text,
           "created_at": created, "lang": lang}
    if retweet_of:
        obj["retweeted_status"] = {"id_str": retweet_of}
        obj["text"] = "RT @x: " + text
    return obj


def build_pheme_fixture(root, stories):
    """Create a PHEME-layout tree.

    ``stories`` maps story name -> list of threads; each thread is a dict:
    {"id": str, "rumour": str, "support": str,
     "replies": [(tweet_id, response, certainty, lang, retweet_of), ...]}
    """
    scheme_lines = ["# synthetic scheme annotations"]
    minutes = 0
    for story, threads in stories.items():
        for thread in threads:
            tid = thread["id"]
            tdir = root / story / tid
            (tdir / "source-tweets").mkdir(parents=True)
            (tdir / "reactions").mkdir()
            src = _tweet_json(tid, f"source tweet of {tid} claim", minutes)
            minutes += 1
            (tdir / "source-tweets" / f"{tid}.json").write_text(json.dumps(src))
            (tdir / "annotation.json").write_text(
                json.dumps({"is_rumour": "rumour", "category": thread["rumour"]})
            )
            scheme_lines.append(json.dumps(
                {"event": story, "threadid": tid, "tweetid": tid,
                 "support": thread["support"]}
            ))
            for reply in thread.get("replies", []):
                rid, response, certainty, lang, retweet_of = reply
                obj = _tweet_json(rid, f"reply {rid}", minutes, lang=lang,
                                  retweet_of=retweet_of)
                minutes += 1
                (tdir / "reactions" / f"{rid}.json").write_text(json.dumps(obj))
                if response is not None:
                    scheme_lines.append(json.dumps(
                        {"event": story, "threadid": tid, "tweetid": rid,
                         "responsetype-vs-source": response, "certainty": certainty}
                    ))
    ann_dir = root / "annotations"
    ann_dir.mkdir()
    (ann_dir / "en-scheme-annotations.json").write_text("\n".join(scheme_lines) + "\n")
    return root


@pytest.fixture
def pheme_root(tmp_path):
    stories = {
        "storyA": [
            {"id": "100", "rumour": "claim-one", "support": "supporting",
             "replies": [("101", "agreed", None, "en", None),
                         ("102", "disagreed", "certain", "en", None),
                         ("103", "comment", None, "en", None),
                         ("104", None, None, "en", "100"),
                         ("105", "agreed", None, "fr", None)]},
            {"id": "200", "rumour": "claim-one", "support": "denying",
             "replies": [("201", "disagreed", "somewhat-certain", "en", None),
                         ("202", "disagreed", "uncertain", "en", None)]},
        ],
        "storyB": [
            {"id": "300", "rumour": "claim-two", "support": "underspecified",
             "replies": [("301", "appeal-for-more-information", None, "en", None)]},
        ],
    }
    return build_pheme_fixture(tmp_path / "pheme", stories)
