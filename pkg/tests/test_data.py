import json
from datetime import datetime, timezone

import pytest

from stanceprop.data import (
    Message,
    Rumour,
    ThreadAnnotation,
    filter_rumours,
    inherit_retweet_predictions,
    load_jsonl,
    load_pheme,
    load_pheme_with_summary,
    resolve_stance,
    write_jsonl,
)
from stanceprop.errors import IngestError

from .conftest import make_rumour


class TestResolveStance:
    @pytest.mark.parametrize("support,expected", [
        ("supporting", 1), ("denying", -1), ("underspecified", 0),
    ])
    def test_source_table(self, support, expected):
        ann = ThreadAnnotation(source_support=support)
        assert resolve_stance(ann, is_source=True) == expected

    def test_agreed_inherits_source_stance(self):
        ann = ThreadAnnotation(reply_response="agreed")
        assert resolve_stance(ann, False, "supporting") == 1
        assert resolve_stance(ann, False, "denying") == -1
        assert resolve_stance(ann, False, "underspecified") == 0

    @pytest.mark.parametrize("certainty", ["certain", "somewhat-certain"])
    def test_certain_disagreement_inverts(self, certainty):
        ann = ThreadAnnotation(reply_response="disagreed", certainty=certainty)
        assert resolve_stance(ann, False, "supporting") == -1
        assert resolve_stance(ann, False, "denying") == 1  # double negation

    @pytest.mark.parametrize("certainty", ["uncertain", None, "n/a"])
    def test_uncertain_disagreement_is_neutral(self, certainty):
        ann = ThreadAnnotation(reply_response="disagreed", certainty=certainty)
        assert resolve_stance(ann, False, "supporting") == 0

    @pytest.mark.parametrize("response", ["appeal-for-more-info",
                                          "appeal-for-more-information", "comment"])
    def test_queries_and_comments_are_neutral(self, response):
        ann = ThreadAnnotation(reply_response=response)
        assert resolve_stance(ann, False, "denying") == 0

    def test_exhaustive_reply_table_is_total(self):
        for support in ("supporting", "denying", "underspecified"):
            for response in ("agreed", "disagreed", "appeal-for-more-info", "comment"):
                for certainty in ("certain", "somewhat-certain", "uncertain", "n/a", None):
                    ann = ThreadAnnotation(reply_response=response, certainty=certainty)
                    stance = resolve_stance(ann, False, support)
                    assert stance in (-1, 0, 1)

    def test_unknown_enum_values_raise(self):
        with pytest.raises(IngestError):
            resolve_stance(ThreadAnnotation(source_support="mystery"), True)
        with pytest.raises(IngestError):
            resolve_stance(ThreadAnnotation(reply_response="shrug"), False, "supporting")
        with pytest.raises(IngestError):
            resolve_stance(
                ThreadAnnotation(reply_response="disagreed", certainty="kinda"),
                False, "supporting",
            )


class TestLoadJsonl:
    def _line(self, **kw):
        base = {"id": "m1", "rumour_id": "r1", "claim": "c", "timestamp":
                "2015-01-01T10:00:00+00:00", "text": "hello"}
        base.update(kw)
        return json.dumps(base)

    def test_groups_by_rumour(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text(self._line(id="a") + "\n" + self._line(id="b") + "\n")
        rumours = load_jsonl(p)
        assert len(rumours) == 1
        assert len(rumours[0].messages) == 2

    def test_out_of_order_timestamps_sorted(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text(
            self._line(id="late", timestamp="2015-01-02T00:00:00+00:00") + "\n"
            + self._line(id="early", timestamp="2015-01-01T00:00:00+00:00") + "\n"
        )
        rumour = load_jsonl(p)[0]
        assert [m.id for m in rumour.messages] == ["early", "late"]

    def test_timestamp_tie_broken_by_id(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text(self._line(id="b") + "\n" + self._line(id="a") + "\n")
        assert [m.id for m in load_jsonl(p)[0].messages] == ["a", "b"]

    def test_duplicate_id_rejected(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text(self._line() + "\n" + self._line() + "\n")
        with pytest.raises(IngestError, match="duplicate"):
            load_jsonl(p)

    def test_missing_field_names_line(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text(self._line() + "\n" + '{"id": "x"}' + "\n")
        with pytest.raises(IngestError, match=":2"):
            load_jsonl(p)

    def test_malformed_json_names_line(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text("{oops\n")
        with pytest.raises(IngestError, match=":1"):
            load_jsonl(p)

    def test_bad_gold_stance_rejected(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text(self._line(gold_stance=7) + "\n")
        with pytest.raises(IngestError):
            load_jsonl(p)

    def test_round_trip(self, tmp_path):
        rumour = make_rumour("r9", [1, -1, 0], seed=3)
        p = tmp_path / "out.jsonl"
        count = write_jsonl([rumour], p)
        assert count == 3
        back = load_jsonl(p)
        assert back[0].rumour_id == "r9"
        assert [m.gold_stance for m in back[0].messages] == [1, -1, 0]
        assert all(m.timestamp.tzinfo is not None for m in back[0].messages)


class TestFilterRumours:
    def _rumour_with(self, n_english_originals, extra=()):
        messages = [
            Message(f"m{i}", datetime(2015, 1, 1, tzinfo=timezone.utc), "text")
            for i in range(n_english_originals)
        ]
        messages += list(extra)
        return Rumour("r", "claim", messages)

    def test_threshold_boundary(self):
        assert filter_rumours([self._rumour_with(49)]) == []
        kept = filter_rumours([self._rumour_with(50)])
        assert len(kept) == 1

    def test_retweets_and_non_english_do_not_count(self):
        extra = [
            Message("rt1", datetime(2015, 1, 2, tzinfo=timezone.utc), "RT", is_retweet=True,
                    retweet_of="m0"),
            Message("fr1", datetime(2015, 1, 2, tzinfo=timezone.utc), "oui", language="fr"),
        ]
        assert filter_rumours([self._rumour_with(49, extra)]) == []

    def test_classifiable_excludes_linked_retweets_and_non_english(self):
        extra = [
            Message("rt1", datetime(2015, 1, 2, tzinfo=timezone.utc), "RT", is_retweet=True,
                    retweet_of="m0"),
            Message("rt2", datetime(2015, 1, 2, tzinfo=timezone.utc), "RT", is_retweet=True),
            Message("fr1", datetime(2015, 1, 2, tzinfo=timezone.utc), "oui", language="fr"),
        ]
        rumour = self._rumour_with(3, extra)
        ids = {m.id for m in rumour.classifiable_messages()}
        assert "rt1" not in ids  # linked retweet: inherits instead
        assert "rt2" in ids  # linkless retweet participates as original
        assert "fr1" not in ids

    def test_language_heuristic_when_tag_missing(self):
        eng = Message("e", datetime(2015, 1, 1, tzinfo=timezone.utc), "plain ascii text",
                      language="")
        non = Message("n", datetime(2015, 1, 1, tzinfo=timezone.utc), "θθθθθθθθθθ",
                      language="")
        assert eng.is_english()
        assert not non.is_english()

    def test_retweet_inheritance(self):
        rumour = self._rumour_with(2, [
            Message("rt1", datetime(2015, 1, 2, tzinfo=timezone.utc), "RT", is_retweet=True,
                    retweet_of="m0"),
            Message("rt9", datetime(2015, 1, 2, tzinfo=timezone.utc), "RT", is_retweet=True,
                    retweet_of="ghost"),
        ])
        extended = inherit_retweet_predictions(rumour, {"m0": 1, "m1": -1})
        assert extended["rt1"] == 1
        assert "rt9" not in extended  # broken link: no inheritance


class TestLoadPheme:
    def test_counts_on_fixture(self, pheme_root):
        rumours, summary = load_pheme_with_summary(pheme_root)
        assert summary.stories == 2
        assert summary.threads == 3
        assert summary.rumours == 2
        assert summary.tweets_total == 11
        assert summary.retweets == 1
        assert summary.non_english_originals == 1
        assert summary.original_english == 9
        # drop reasons partition the total
        assert (summary.retweets + summary.non_english_originals
                + summary.original_english) == summary.tweets_total

    def test_two_level_stance_resolution(self, pheme_root):
        rumours = load_pheme(pheme_root)
        by_id = {m.id: m for r in rumours for m in r.messages}
        assert by_id["100"].gold_stance == 1    # supporting source
        assert by_id["101"].gold_stance == 1    # agreed
        assert by_id["102"].gold_stance == -1   # disagreed + certain
        assert by_id["103"].gold_stance == 0    # comment
        assert by_id["104"].gold_stance is None  # unannotated retweet
        assert by_id["200"].gold_stance == -1   # denying source
        assert by_id["201"].gold_stance == 1    # certain disagreement inverts
        assert by_id["202"].gold_stance == 0    # uncertain disagreement
        assert by_id["300"].gold_stance == 0    # underspecified source
        assert by_id["301"].gold_stance == 0    # appeal for more info

    def test_threads_grouped_by_rumour(self, pheme_root):
        rumours = load_pheme(pheme_root)
        ids = sorted(r.rumour_id for r in rumours)
        assert ids == ["storyA/claim-one", "storyB/claim-two"]
        merged = next(r for r in rumours if r.rumour_id == "storyA/claim-one")
        assert len(merged.messages) == 9
        assert merged.claim_text == "source tweet of 100 claim"

    def test_empty_directory_gives_empty_list(self, tmp_path):
        empty = tmp_path / "nothing"
        empty.mkdir()
        rumours, summary = load_pheme_with_summary(empty)
        assert rumours == []
        assert summary.threads == 0

    def test_missing_root_raises(self, tmp_path):
        with pytest.raises(IngestError):
            load_pheme(tmp_path / "missing")

    def test_thread_without_annotation_skipped_with_warning(self, pheme_root, caplog):
        bare = pheme_root / "storyA" / "999"
        (bare / "source-tweets").mkdir(parents=True)
        (bare / "source-tweets" / "999.json").write_text(json.dumps(
            {"id_str": "999", "text": "hi", "created_at": "Sun Mar 01 12:00:00 +0000 2015",
             "lang": "en"}
        ))
        with caplog.at_level("WARNING"):
            _, summary = load_pheme_with_summary(pheme_root)
        assert summary.threads_skipped == 1
        assert summary.threads == 3

    def test_malformed_tweet_json_names_path(self, pheme_root):
        bad = pheme_root / "storyB" / "300" / "reactions" / "666.json"
        bad.write_text("{not json")
        with pytest.raises(IngestError, match="666"):
            load_pheme(pheme_root)

    def test_reply_annotated_only_vs_previous_is_unannotated(self, pheme_root):
        deep = pheme_root / "storyB" / "300" / "reactions" / "302.json"
        deep.write_text(json.dumps(
            {"id_str": "302", "text": "nested reply", "lang": "en",
             "created_at": "Sun Mar 01 13:00:00 +0000 2015"}
        ))
        ann = pheme_root / "annotations" / "en-scheme-annotations.json"
        with open(ann, "a") as fh:
            fh.write(json.dumps({"event": "storyB", "threadid": "300", "tweetid": "302",
                                 "responsetype-vs-previous": "agreed"}) + "\n")
        rumours, summary = load_pheme_with_summary(pheme_root)
        by_id = {m.id: m for r in rumours for m in r.messages}
        assert by_id["302"].gold_stance is None
        assert summary.unannotated == 2  # the linked retweet plus this one

    def test_rt_text_alone_is_not_a_retweet(self, pheme_root):
        quoted = pheme_root / "storyB" / "300" / "reactions" / "303.json"
        quoted.write_text(json.dumps(
            {"id_str": "303", "text": "RT @someone: manual quote style", "lang": "en",
             "created_at": "Sun Mar 01 13:01:00 +0000 2015"}
        ))
        rumours, _ = load_pheme_with_summary(pheme_root)
        by_id = {m.id: m for r in rumours for m in r.messages}
        assert by_id["303"].is_retweet is False

    def test_full_protocol_runs_on_pheme_layout(self, tmp_path, cluster_map):
        # same composition the dataset-gated acceptance uses:
        # load -> filter -> annotate-first-N experiment
        import random

        from stanceprop.experiment import ExperimentConfig, run_experiment

        from .conftest import build_pheme_fixture, synthetic_text

        rng = random.Random(17)
        replies = []
        for i in range(70):
            rid = str(5000 + i)
            response = rng.choice(["agreed", "disagreed", "comment"])
            replies.append((rid, response, "certain", "en", None))
        stories = {"bigstory": [
            {"id": "4999", "rumour": "big", "support": "supporting", "replies": replies},
        ]}
        root = build_pheme_fixture(tmp_path / "pheme", stories)
        # give the reaction tweets stance-correlated text so the graph is informative
        for i, (rid, response, _, _, _) in enumerate(replies):
            p = root / "bigstory" / "4999" / "reactions" / f"{rid}.json"
            obj = json.loads(p.read_text())
            stance = {"agreed": 1, "disagreed": -1, "comment": 0}[response]
            obj["text"] = synthetic_text(random.Random(i), stance)
            p.write_text(json.dumps(obj))

        rumours, summary = load_pheme_with_summary(root)
        kept = filter_rumours(rumours, 50)
        assert len(kept) == 1 and summary.original_english == 71
        cfg = ExperimentConfig(n_values=(10, 20), sigma_mode="fixed", sigma_fixed=0.85)
        report = run_experiment(kept, cfg, cluster_map)
        assert report.aggregate(0.85, 20) is not None
        assert report.aggregate_benchmark("majority", 20) is not None
