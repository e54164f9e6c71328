// Thin typed client for the four service endpoints. Errors become
// ApiError with the HTTP status so the UI can branch on 409 / 404.

import type {
  AnnotationAck,
  MessagePage,
  ResultSnapshot,
  RumourSummary,
  Stance,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

export interface Api {
  listRumours(): Promise<RumourSummary[]>;
  getMessages(rumourId: string, cursor?: number, limit?: number): Promise<MessagePage>;
  postAnnotation(
    rumourId: string,
    messageId: string,
    stance: Stance,
    expectedRevision?: number,
  ): Promise<AnnotationAck>;
  getResult(rumourId: string, revision?: number): Promise<ResultSnapshot>;
}

async function asJson<T>(res: Response): Promise<T> {
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = await res.json();
      detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
    } catch {
      // keep statusText
    }
    throw new ApiError(res.status, detail);
  }
  return (await res.json()) as T;
}

export function createApi(baseUrl = ""): Api {
  const root = baseUrl.replace(/\/$/, "");
  return {
    async listRumours() {
      return asJson(await fetch(`${root}/rumours`));
    },

    async getMessages(rumourId, cursor = 0, limit = 100) {
      const params = new URLSearchParams({ cursor: String(cursor), limit: String(limit) });
      return asJson(await fetch(`${root}/rumours/${encodeURIComponent(rumourId)}/messages?${params}`));
    },

    async postAnnotation(rumourId, messageId, stance, expectedRevision) {
      const body: Record<string, unknown> = { message_id: messageId, stance };
      if (expectedRevision !== undefined) {
        body.expected_revision = expectedRevision;
      }
      const res = await fetch(`${root}/rumours/${encodeURIComponent(rumourId)}/annotations`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      });
      return asJson(res);
    },

    async getResult(rumourId, revision) {
      const suffix = revision === undefined ? "" : `?revision=${revision}`;
      return asJson(await fetch(`${root}/rumours/${encodeURIComponent(rumourId)}/result${suffix}`));
    },
  };
}
