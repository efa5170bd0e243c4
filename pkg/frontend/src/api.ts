// Thin typed client over the scheduling service.  The UI never schedules
// anything itself: every pairing it shows came out of these calls verbatim.

import type { CreateSessionBody, RoundResult, SessionSummary } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  status: number;
  detail: unknown;

  constructor(status: number, detail: unknown) {
    super(typeof detail === "string" ? detail : JSON.stringify(detail));
    this.status = status;
    this.detail = detail;
  }
}

async function failureDetail(res: Response): Promise<unknown> {
  try {
    const body = await res.json();
    return body && typeof body === "object" && "detail" in body
      ? (body as { detail: unknown }).detail
      : body;
  } catch {
    return res.statusText;
  }
}

export class MatchplanClient {
  readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!res.ok) {
      throw new ApiError(res.status, await failureDetail(res));
    }
    if (res.status === 204) {
      return undefined as T;
    }
    return (await res.json()) as T;
  }

  createSession(body: CreateSessionBody): Promise<SessionSummary> {
    return this.request<SessionSummary>("POST", "/sessions", body);
  }

  getSession(id: string): Promise<SessionSummary> {
    return this.request<SessionSummary>("GET", `/sessions/${id}`);
  }

  /**
   * Submit one round with its explicit index.  A transport failure is retried
   * once with the same index; the service treats the repeat as idempotent.
   */
  async postRound(id: string, absent: string[], round: number): Promise<RoundResult> {
    const body = { absent, round };
    try {
      return await this.request<RoundResult>("POST", `/sessions/${id}/rounds`, body);
    } catch (err) {
      if (err instanceof ApiError) {
        throw err;
      }
      return await this.request<RoundResult>("POST", `/sessions/${id}/rounds`, body);
    }
  }

  timetableUrl(id: string, format: "csv" | "json"): string {
    return `${this.baseUrl}/sessions/${id}/timetable?format=${format}`;
  }

  async fetchTimetable(id: string, format: "csv" | "json"): Promise<string> {
    const res = await this.fetchImpl(this.timetableUrl(id, format));
    if (!res.ok) {
      throw new ApiError(res.status, await failureDetail(res));
    }
    return await res.text();
  }

  deleteSession(id: string): Promise<void> {
    return this.request<void>("DELETE", `/sessions/${id}`);
  }
}

/** "player X has no absences left" and similar budget conflicts. */
export function isBudgetConflict(err: unknown): err is ApiError {
  return err instanceof ApiError && err.status === 409 &&
    typeof err.detail === "string" && err.detail.includes("no absences left");
}

export function offendingPlayer(err: ApiError): string | null {
  if (typeof err.detail !== "string") {
    return null;
  }
  const match = err.detail.match(/player (\S+) has no absences left/);
  return match ? match[1] : null;
}
