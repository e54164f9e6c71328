// Canned service payloads, shaped exactly like the HTTP API responses, so
// the UI is testable without a running service.

import type {
  AnnotationAck,
  MessagePage,
  MessageRecord,
  ResultSnapshot,
  RumourSummary,
} from "../src/types.js";

export const rumourList: RumourSummary[] = [
  {
    rumour_id: "storyA/claim-one",
    claim: "the bridge has collapsed",
    story: "storyA",
    message_count: 6,
    total_message_count: 8,
    annotated_count: 2,
    revision: 2,
  },
  {
    rumour_id: "storyB/claim-two",
    claim: "power is out downtown",
    story: "storyB",
    message_count: 4,
    total_message_count: 4,
    annotated_count: 0,
    revision: 0,
  },
];

export const messages: MessageRecord[] = [
  {
    id: "m1",
    timestamp: "2015-03-01T12:00:00+00:00",
    text: "officials confirmed the bridge collapse",
    language: "en",
    is_seed: true,
    annotation: 1,
    gold_stance: 1,
    predicted: 1,
    probs: [0.0, 0.0, 1.0],
  },
  {
    id: "m2",
    timestamp: "2015-03-01T12:01:00+00:00",
    text: "this is fake, the bridge is fine",
    language: "en",
    is_seed: true,
    annotation: -1,
    gold_stance: -1,
    predicted: -1,
    probs: [1.0, 0.0, 0.0],
  },
  {
    id: "m3",
    timestamp: "2015-03-01T12:02:00+00:00",
    text: "can anyone confirm this? <source needed>",
    language: "en",
    is_seed: false,
    annotation: null,
    gold_stance: 0,
    predicted: 0,
    probs: [0.2, 0.5, 0.3],
  },
  {
    id: "m4",
    timestamp: "2015-03-01T12:03:00+00:00",
    text: "confirmed by the police just now",
    language: "en",
    is_seed: false,
    annotation: null,
    gold_stance: 1,
    predicted: 1,
    probs: [0.1, 0.2, 0.7],
  },
  {
    id: "m5",
    timestamp: "2015-03-01T12:04:00+00:00",
    text: "total hoax, stop sharing",
    language: "en",
    is_seed: false,
    annotation: null,
    gold_stance: -1,
    predicted: -1,
    probs: [0.8, 0.1, 0.1],
  },
  {
    id: "m6",
    timestamp: "2015-03-01T12:05:00+00:00",
    text: "praying for everyone nearby",
    language: "en",
    is_seed: false,
    annotation: null,
    gold_stance: 0,
    predicted: 0,
    probs: [0.25, 0.5, 0.25],
  },
];

export const messagePage: MessagePage = {
  rumour_id: "storyA/claim-one",
  revision: 2,
  cursor: 0,
  next_cursor: null,
  messages,
};

export const resultSnapshot: ResultSnapshot = {
  rumour_id: "storyA/claim-one",
  revision: 2,
  annotated_count: 2,
  assignments: { m1: 1, m2: -1, m3: 0, m4: 1, m5: -1, m6: 0 },
  class_counts: { "-1": 2, "0": 2, "1": 2 },
  metrics_vs_gold: {
    accuracy: 1.0,
    weighted_accuracy: 1.0,
    f1_macro: 1.0,
    log_loss: 0.2107,
    evaluated: 4,
  },
  flags: [],
  param_used: 0.85,
  iterations: 7,
  converged: true,
};

export function ackForRevision(revision: number): AnnotationAck {
  return {
    rumour_id: "storyA/claim-one",
    revision,
    annotated_count: revision,
    metrics_vs_gold: {
      accuracy: 0.9,
      weighted_accuracy: 0.8,
      f1_macro: 0.75,
      log_loss: 0.4,
      evaluated: 6 - revision,
    },
    class_counts: { "-1": 2, "0": 2, "1": 2 },
  };
}
