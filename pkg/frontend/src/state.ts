// Client-side session state. Everything displayed comes from service
// responses; this module only tracks which rumour is open, the latest
// acknowledged revision, and the metric trend across annotation events.

import type { Api } from "./api.js";
import { ApiError } from "./api.js";
import type {
  MessageRecord,
  MetricsVsGold,
  ResultSnapshot,
  RumourSummary,
  Stance,
} from "./types.js";

export interface TrendPoint {
  revision: number;
  metrics: MetricsVsGold | null;
}

export interface UiSession {
  rumours: RumourSummary[];
  selected: string | null;
  messages: MessageRecord[];
  result: ResultSnapshot | null;
  revision: number;
  trend: TrendPoint[];
  banner: string | null; // error/info banner text, null when healthy
  conflict: boolean; // true after a 409 until the next successful refresh
}

export function emptySession(): UiSession {
  return {
    rumours: [],
    selected: null,
    messages: [],
    result: null,
    revision: 0,
    trend: [],
    banner: null,
    conflict: false,
  };
}

/** Earliest-first ids of messages that have no annotation yet. */
export function annotationQueue(messages: MessageRecord[]): string[] {
  return messages.filter((m) => !m.is_seed).map((m) => m.id);
}

export function nextUnlabeled(session: UiSession): MessageRecord | null {
  return session.messages.find((m) => !m.is_seed) ?? null;
}

/** Accept a snapshot only if it is not older than what we already show. */
export function applyResult(session: UiSession, snapshot: ResultSnapshot): UiSession {
  if (snapshot.revision < session.revision) {
    return session;
  }
  return {
    ...session,
    result: snapshot,
    revision: snapshot.revision,
    conflict: false,
    banner: null,
  };
}

export class SessionController {
  session: UiSession = emptySession();

  constructor(
    private api: Api,
    private onChange: (s: UiSession) => void = () => {},
  ) {}

  private commit(next: UiSession) {
    this.session = next;
    this.onChange(next);
  }

  async loadRumours(): Promise<void> {
    try {
      const rumours = await this.api.listRumours();
      this.commit({ ...this.session, rumours, banner: null });
    } catch (e) {
      this.commit({ ...this.session, banner: `could not load rumours: ${message(e)}` });
    }
  }

  async open(rumourId: string): Promise<void> {
    this.commit({ ...emptySession(), rumours: this.session.rumours, selected: rumourId });
    await this.refresh();
  }

  async refresh(): Promise<void> {
    const id = this.session.selected;
    if (!id) return;
    try {
      const [page, result] = await Promise.all([
        this.api.getMessages(id, 0, 500),
        this.api.getResult(id),
      ]);
      const next = applyResult(
        { ...this.session, messages: page.messages },
        result,
      );
      this.commit(next);
    } catch (e) {
      this.commit({ ...this.session, banner: `refresh failed: ${message(e)}` });
    }
  }

  /**
   * Annotate one message. On acknowledgment the prediction overlay is
   * refreshed from the service; a concurrent-write 409 triggers a refetch
   * and leaves a prompt banner, as the retry guidance requires.
   */
  async annotate(messageId: string, stance: Stance): Promise<void> {
    const id = this.session.selected;
    if (!id) return;
    try {
      const ack = await this.api.postAnnotation(id, messageId, stance, this.session.revision);
      this.session = {
        ...this.session,
        revision: ack.revision,
        trend: [...this.session.trend, { revision: ack.revision, metrics: ack.metrics_vs_gold }],
      };
      await this.refresh();
    } catch (e) {
      if (e instanceof ApiError && e.status === 409) {
        await this.refresh(); // refetch first, then prompt on top of fresh state
        this.commit({
          ...this.session,
          conflict: true,
          banner:
            "someone else annotated this message; the view was refreshed - retry if you disagree",
        });
        return;
      }
      this.commit({ ...this.session, banner: `annotation failed: ${message(e)}` });
    }
  }
}

function message(e: unknown): string {
  return e instanceof Error ? e.message : String(e);
}
