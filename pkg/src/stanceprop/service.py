"""HTTP annotation service for the human-in-the-loop workflow.

Endpoints (JSON in/out):

* ``GET  /rumours`` - rumour summaries.
* ``GET  /rumours/{id}/messages?cursor=&limit=`` - chronological pages with
  the current predictions.
* ``POST /rumours/{id}/annotations`` - store one stance annotation, re-run
  propagation synchronously, return the new revision.
* ``GET  /rumours/{id}/result?revision=`` - immutable snapshot per revision.

Every accepted write bumps the rumour's revision; snapshots are kept for the
most recent revisions so clients can read the exact state they were told
about.  Writes per rumour are serialized through a lock; different rumours
propagate independently.  Annotations are appended to a JSONL log per rumour
when a log directory is configured, and replayed on startup.
"""

from __future__ import annotations

import json
import logging
import threading
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel

from .data import Rumour
from .features import BrownClusterMap, Lexicons
from .metrics import compute_metrics
from .pipeline import ClassifyResult, PipelineSettings, RumourClassifier

log = logging.getLogger(__name__)

MAX_SNAPSHOTS = 64


class AnnotationIn(BaseModel):
    message_id: str
    stance: Literal[-1, 0, 1]
    expected_revision: int | None = None


def _uniform_fill(probs):
    import numpy as np

    out = probs.copy()
    empty = ~(out > 0).any(axis=1)
    out[empty] = 1.0 / 3.0
    return out


class RumourSession:
    """Annotations, revision counter and result snapshots for one rumour."""

    def __init__(self, rumour: Rumour, settings: PipelineSettings,
                 cluster_map, lexicons, log_path: Path | None):
        self.rumour = rumour
        self.classifier = RumourClassifier(rumour, settings, cluster_map, lexicons)
        self.annotations: dict[str, int] = {}
        self.annotation_revision: dict[str, int] = {}
        self.revision = 0
        self.snapshots: dict[int, dict] = {0: self._empty_snapshot()}
        self.latest_probs = None  # uniform-filled probs of the latest revision
        self.lock = threading.Lock()
        self.log_path = log_path

    # -- snapshots -----------------------------------------------------------

    def _empty_snapshot(self) -> dict:
        return {
            "rumour_id": self.rumour.rumour_id,
            "revision": 0,
            "annotated_count": 0,
            "assignments": {},
            "class_counts": {"-1": 0, "0": 0, "1": 0},
            "metrics_vs_gold": None,
            "flags": [],
            "param_used": None,
            "iterations": 0,
            "converged": True,
        }

    def _snapshot_from(self, result: ClassifyResult, revision: int) -> dict:
        assignments = {m.id: int(result.classes[i]) for i, m in enumerate(result.messages)}
        counts = {"-1": 0, "0": 0, "1": 0}
        for cls in assignments.values():
            counts[str(cls)] += 1
        metrics = self._metrics_vs_gold(result)
        return {
            "rumour_id": self.rumour.rumour_id,
            "revision": revision,
            "annotated_count": len(self.annotations),
            "assignments": assignments,
            "class_counts": counts,
            "metrics_vs_gold": metrics,
            "flags": list(result.flags),
            "param_used": result.param_used,
            "iterations": result.iterations,
            "converged": result.converged,
        }

    def _metrics_vs_gold(self, result: ClassifyResult) -> dict | None:
        """Score against gold on the messages that are not currently seeds."""
        import numpy as np

        rows, truth = [], []
        for i, msg in enumerate(result.messages):
            if msg.gold_stance is None or msg.id in self.annotations:
                continue
            rows.append(i)
            truth.append(msg.gold_stance)
        if not rows:
            return None
        probs = _uniform_fill(result.distribution.probs)[rows]
        pred = result.classes[rows]
        ms = compute_metrics(np.array(truth), pred, probs)
        return {**ms.as_dict(), "evaluated": len(rows)}

    # -- mutations -----------------------------------------------------------

    def annotate(self, message_id: str, stance: int, expected_revision: int | None) -> dict:
        with self.lock:
            if message_id not in self.classifier.index:
                raise HTTPException(404, f"message {message_id!r} not classifiable here")
            if expected_revision is not None and expected_revision < self.revision:
                changed_at = self.annotation_revision.get(message_id, 0)
                conflicting = (
                    changed_at > expected_revision
                    and self.annotations.get(message_id) != stance
                )
                if conflicting:
                    raise HTTPException(
                        409,
                        detail={
                            "message": "message was annotated concurrently; "
                            "re-read the latest result and retry",
                            "current_revision": self.revision,
                        },
                    )
            self.annotations[message_id] = stance
            self.revision += 1
            self.annotation_revision[message_id] = self.revision
            self._append_log(message_id, stance)
            snapshot = self._recompute(self.revision)
            return snapshot

    def _recompute(self, revision: int) -> dict:
        result = self.classifier.classify(dict(self.annotations))
        snapshot = self._snapshot_from(result, revision)
        self.snapshots[revision] = snapshot
        self.latest_probs = _uniform_fill(result.distribution.probs)
        while len(self.snapshots) > MAX_SNAPSHOTS:
            oldest = min(self.snapshots)
            del self.snapshots[oldest]
        return snapshot

    def _append_log(self, message_id: str, stance: int):
        if self.log_path is None:
            return
        with open(self.log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps({"message_id": message_id, "stance": stance}))
            fh.write("\n")

    def replay_log(self):
        """Rebuild annotation state from the append-only log, if present."""
        if self.log_path is None or not self.log_path.is_file():
            return
        with open(self.log_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                mid, stance = str(obj["message_id"]), int(obj["stance"])
                if mid in self.classifier.index and stance in (-1, 0, 1):
                    self.annotations[mid] = stance
                    self.revision += 1
                    self.annotation_revision[mid] = self.revision
        if self.annotations:
            self._recompute(self.revision)
            log.info("replayed %d annotation(s) for %s (revision %d)",
                     len(self.annotations), self.rumour.rumour_id, self.revision)

    # -- reads ---------------------------------------------------------------

    def latest_snapshot(self) -> dict:
        return self.snapshots[max(self.snapshots)]

    def summary(self) -> dict:
        return {
            "rumour_id": self.rumour.rumour_id,
            "claim": self.rumour.claim_text,
            "story": self.rumour.story,
            "message_count": len(self.classifier.messages),
            "total_message_count": len(self.rumour.messages),
            "annotated_count": len(self.annotations),
            "revision": self.revision,
        }

    def message_page(self, cursor: int, limit: int) -> dict:
        snapshot = self.latest_snapshot()
        assignments = snapshot["assignments"]
        page = []
        messages = self.classifier.messages
        for msg in messages[cursor : cursor + limit]:
            idx = self.classifier.index[msg.id]
            probs = None
            if snapshot["revision"] > 0 and self.latest_probs is not None:
                probs = [float(x) for x in self.latest_probs[idx]]
            page.append({
                "id": msg.id,
                "timestamp": msg.timestamp.isoformat(),
                "text": msg.text,
                "language": msg.language,
                "is_seed": msg.id in self.annotations,
                "annotation": self.annotations.get(msg.id),
                "gold_stance": msg.gold_stance,
                "predicted": assignments.get(msg.id),
                "probs": probs,
            })
        next_cursor = cursor + limit if cursor + limit < len(messages) else None
        return {
            "rumour_id": self.rumour.rumour_id,
            "revision": snapshot["revision"],
            "cursor": cursor,
            "next_cursor": next_cursor,
            "messages": page,
        }


def create_app(
    rumours: list[Rumour],
    settings: PipelineSettings | None = None,
    cluster_map: BrownClusterMap | None = None,
    lexicons: Lexicons | None = None,
    log_dir: str | Path | None = None,
) -> FastAPI:
    settings = settings or PipelineSettings()
    if cluster_map is None and settings.feature_space in ("brown", "brown_ling"):
        cluster_map = BrownClusterMap.bundled_demo()
    if lexicons is None and settings.feature_space in ("ling", "brown_ling"):
        lexicons = Lexicons.bundled()

    log_root = Path(log_dir) if log_dir else None
    if log_root:
        log_root.mkdir(parents=True, exist_ok=True)

    sessions: dict[str, RumourSession] = {}
    for rumour in rumours:
        log_path = None
        if log_root:
            log_path = log_root / (rumour.rumour_id.replace("/", "_") + ".jsonl")
        try:
            session = RumourSession(rumour, settings, cluster_map, lexicons, log_path)
        except Exception as e:  # rumours with no classifiable messages
            log.warning("skipping rumour %s: %s", rumour.rumour_id, e)
            continue
        session.replay_log()
        sessions[rumour.rumour_id] = session

    app = FastAPI(title="stanceprop annotation service")

    def _session(rumour_id: str) -> RumourSession:
        session = sessions.get(rumour_id)
        if session is None:
            raise HTTPException(404, f"unknown rumour {rumour_id!r}")
        return session

    @app.get("/rumours")
    def list_rumours():
        return [sessions[rid].summary() for rid in sorted(sessions)]

    @app.get("/rumours/{rumour_id:path}/messages")
    def get_messages(
        rumour_id: str,
        cursor: int = Query(0, ge=0),
        limit: int = Query(50, ge=1, le=500),
    ):
        return _session(rumour_id).message_page(cursor, limit)

    @app.post("/rumours/{rumour_id:path}/annotations")
    def post_annotation(rumour_id: str, body: AnnotationIn):
        session = _session(rumour_id)
        snapshot = session.annotate(body.message_id, body.stance, body.expected_revision)
        return {
            "rumour_id": rumour_id,
            "revision": snapshot["revision"],
            "annotated_count": snapshot["annotated_count"],
            "metrics_vs_gold": snapshot["metrics_vs_gold"],
            "class_counts": snapshot["class_counts"],
        }

    @app.get("/rumours/{rumour_id:path}/result")
    def get_result(rumour_id: str, revision: int | None = None):
        session = _session(rumour_id)
        if revision is None:
            return session.latest_snapshot()
        snapshot = session.snapshots.get(revision)
        if snapshot is None:
            raise HTTPException(404, f"revision {revision} not available")
        return snapshot

    app.state.sessions = sessions
    return app
