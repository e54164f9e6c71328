// Payload shapes of the annotation service API. Field names follow the
// service's canonical JSON schema exactly; the UI never derives its own
// numbers from message text.

export type Stance = -1 | 0 | 1;

export interface RumourSummary {
  rumour_id: string;
  claim: string;
  story: string | null;
  message_count: number;
  total_message_count: number;
  annotated_count: number;
  revision: number;
}

export interface MessageRecord {
  id: string;
  timestamp: string;
  text: string;
  language: string;
  is_seed: boolean;
  annotation: Stance | null;
  gold_stance: Stance | null;
  predicted: Stance | null;
  probs: [number, number, number] | null;
}

export interface MessagePage {
  rumour_id: string;
  revision: number;
  cursor: number;
  next_cursor: number | null;
  messages: MessageRecord[];
}

export interface MetricsVsGold {
  accuracy: number;
  weighted_accuracy: number;
  f1_macro: number;
  log_loss: number;
  evaluated: number;
}

export interface ResultSnapshot {
  rumour_id: string;
  revision: number;
  annotated_count: number;
  assignments: Record<string, Stance>;
  class_counts: { "-1": number; "0": number; "1": number };
  metrics_vs_gold: MetricsVsGold | null;
  flags: string[];
  param_used: number | null;
  iterations: number;
  converged: boolean;
}

export interface AnnotationAck {
  rumour_id: string;
  revision: number;
  annotated_count: number;
  metrics_vs_gold: MetricsVsGold | null;
  class_counts: { "-1": number; "0": number; "1": number };
}

export const STANCE_NAMES: Record<Stance, string> = {
  [-1]: "against",
  [0]: "neutral",
  [1]: "supporting",
};
