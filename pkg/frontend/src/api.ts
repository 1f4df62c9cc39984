/** Thin fetch client for the survey JSON API. */

import type { JudgementRecord, SessionInfo, TriplePayload } from "./types.js";

/** The server answered with a non-OK status. Network failures stay TypeError. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class SurveyApi {
  constructor(private readonly baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) {
      throw new ApiError(response.status, await describeError(response));
    }
    return (await response.json()) as T;
  }

  session(judgeId: string): Promise<SessionInfo> {
    return this.request(`/api/session/${encodeURIComponent(judgeId)}`);
  }

  triple(tripleId: string): Promise<TriplePayload> {
    return this.request(`/api/triple/${encodeURIComponent(tripleId)}`);
  }

  submitJudgement(
    judgeId: string,
    tripleId: string,
    scores: Record<string, number>,
  ): Promise<JudgementRecord> {
    return this.request("/api/judgement", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ judge_id: judgeId, triple_id: tripleId, scores }),
    });
  }
}

async function describeError(response: Response): Promise<string> {
  let detail: unknown = null;
  try {
    detail = ((await response.json()) as { detail?: unknown }).detail;
  } catch {
    // non-JSON error body; fall through to the status text
  }
  const text =
    typeof detail === "string"
      ? detail
      : detail == null
        ? response.statusText
        : JSON.stringify(detail);
  return `${response.status}: ${text}`;
}
