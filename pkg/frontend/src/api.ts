// Thin HTTP client for the annotation service. All traffic goes through the
// JSON API; the fetch function is injectable so tests can stub transport.

import type {
  JudgmentSubmission,
  NextItemReply,
  Progress,
  RatingSubmission,
  SubmitReply,
  TaskListing,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

export class ServiceClient {
  baseUrl: string;
  private fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  imageUrl(imageId: string): string {
    return `${this.baseUrl}/api/images/${encodeURIComponent(imageId)}`;
  }

  async tasks(): Promise<TaskListing> {
    return this.getJson("/api/tasks");
  }

  async nextItem(taskId: string, raterId: string): Promise<NextItemReply> {
    const query = `?rater_id=${encodeURIComponent(raterId)}`;
    return this.getJson(`/api/tasks/${encodeURIComponent(taskId)}/next${query}`);
  }

  async progress(taskId: string, raterId?: string): Promise<Progress> {
    let query = `?task_id=${encodeURIComponent(taskId)}`;
    if (raterId !== undefined) {
      query += `&rater_id=${encodeURIComponent(raterId)}`;
    }
    return this.getJson(`/api/progress${query}`);
  }

  async submitRating(record: RatingSubmission): Promise<SubmitReply> {
    return this.postJson("/api/ratings", record);
  }

  async submitJudgment(record: JudgmentSubmission): Promise<SubmitReply> {
    return this.postJson("/api/judgments", record);
  }

  async exportLines(taskId: string): Promise<string[]> {
    const res = await this.fetchFn(
      `${this.baseUrl}/api/export?task_id=${encodeURIComponent(taskId)}`,
    );
    const text = await res.text();
    if (!res.ok) {
      throw new ServiceError(res.status, this.errorMessage(text, res.status));
    }
    return text.split("\n").filter((line) => line.trim() !== "");
  }

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchFn(this.baseUrl + path);
    return this.decode<T>(res);
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const res = await this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return this.decode<T>(res);
  }

  private async decode<T>(res: Response): Promise<T> {
    const text = await res.text();
    if (!res.ok) {
      throw new ServiceError(res.status, this.errorMessage(text, res.status));
    }
    return JSON.parse(text) as T;
  }

  private errorMessage(text: string, status: number): string {
    try {
      const obj = JSON.parse(text);
      if (obj && typeof obj.error === "string") {
        return obj.error;
      }
    } catch {
      // not JSON; fall through to the generic message
    }
    return `request failed with status ${status}`;
  }
}
