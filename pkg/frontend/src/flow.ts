// Annotation workflow state, kept free of DOM access so it can be tested
// headlessly. The UI layer renders these flows and forwards events to them.

import type { ServiceClient } from "./api.js";
import {
  CAPTION_TASK,
  DIMENSIONS,
  GRADES,
  VQA_TASK,
  type Dimension,
  type Grade,
  type JudgmentSubmission,
  type RatingSubmission,
  type SubmitReply,
  type TaskItem,
  type Verdict,
} from "./types.js";

export function generateId(): string {
  return `${Date.now().toString(36)}_${Math.random().toString(36).slice(2, 10)}`;
}

export function gradeForKey(key: string): Grade | null {
  const index = Number.parseInt(key, 10) - 1;
  if (index >= 0 && index < GRADES.length && key.length === 1) {
    return GRADES[index];
  }
  return null;
}

function nowSeconds(): number {
  return Date.now() / 1000;
}

// What the rating screen is allowed to show. The model identity is withheld
// so raters grade the caption blind.
export interface RatingView {
  imageId: string;
  caption: string;
  index: number;
}

export class RatingFlow {
  readonly taskId = CAPTION_TASK;
  exhausted = false;
  private client: ServiceClient;
  private raterId: string;
  private item: TaskItem | null = null;
  private grades: Map<Dimension, Grade> = new Map();
  private ratingIds: Map<Dimension, string> = new Map();

  constructor(client: ServiceClient, raterId: string) {
    this.client = client;
    this.raterId = raterId;
  }

  async loadNext(): Promise<void> {
    const reply = await this.client.nextItem(this.taskId, this.raterId);
    this.item = reply.item;
    this.exhausted = reply.exhausted;
    this.grades = new Map();
    // fix one id per dimension up front so a retried submit stays idempotent
    this.ratingIds = new Map();
    if (this.item !== null) {
      for (const dim of DIMENSIONS) {
        this.ratingIds.set(dim, generateId());
      }
    }
  }

  view(): RatingView | null {
    if (this.item === null) {
      return null;
    }
    return {
      imageId: this.item.image_id,
      caption: this.item.payload,
      index: this.item.index,
    };
  }

  setGrade(dimension: Dimension, grade: Grade): void {
    if (this.item === null) {
      throw new Error("no item loaded");
    }
    this.grades.set(dimension, grade);
  }

  gradeOf(dimension: Dimension): Grade | null {
    return this.grades.get(dimension) ?? null;
  }

  canSubmit(): boolean {
    return this.item !== null && DIMENSIONS.every((d) => this.grades.has(d));
  }

  pendingSubmissions(): RatingSubmission[] {
    if (!this.canSubmit() || this.item === null) {
      throw new Error("all dimensions must be graded before submitting");
    }
    const item = this.item;
    return DIMENSIONS.map((dimension) => ({
      rating_id: this.ratingIds.get(dimension)!,
      rater_id: this.raterId,
      model_id: item.model_id,
      image_id: item.image_id,
      dimension,
      grade: this.grades.get(dimension)!,
      created_at: nowSeconds(),
    }));
  }

  async submitAll(): Promise<SubmitReply[]> {
    const replies: SubmitReply[] = [];
    for (const record of this.pendingSubmissions()) {
      replies.push(await this.client.submitRating(record));
    }
    return replies;
  }
}

export interface AdjudicationView {
  imageId: string;
  question: string;
  modelAnswer: string;
  revealed: boolean;
  gold: string | null; // withheld (null) until revealed
  index: number;
}

export class AdjudicationFlow {
  readonly taskId = VQA_TASK;
  exhausted = false;
  private client: ServiceClient;
  private raterId: string;
  private item: TaskItem | null = null;
  private revealed = false;
  private judgmentId = "";

  constructor(client: ServiceClient, raterId: string) {
    this.client = client;
    this.raterId = raterId;
  }

  async loadNext(): Promise<void> {
    const reply = await this.client.nextItem(this.taskId, this.raterId);
    this.item = reply.item;
    this.exhausted = reply.exhausted;
    this.revealed = false;
    this.judgmentId = this.item === null ? "" : generateId();
  }

  view(): AdjudicationView | null {
    if (this.item === null) {
      return null;
    }
    return {
      imageId: this.item.image_id,
      question: this.item.question ?? "",
      modelAnswer: this.item.payload,
      revealed: this.revealed,
      gold: this.revealed ? this.item.gold : null,
      index: this.item.index,
    };
  }

  reveal(): void {
    if (this.item === null) {
      throw new Error("no item loaded");
    }
    this.revealed = true;
  }

  canJudge(): boolean {
    return this.item !== null && this.revealed;
  }

  pendingSubmission(verdict: Verdict): JudgmentSubmission {
    if (!this.canJudge() || this.item === null) {
      throw new Error("reveal the reference answer before judging");
    }
    return {
      judgment_id: this.judgmentId,
      question_id: this.item.question_id ?? "",
      model_id: this.item.model_id,
      verdict,
      source: "human",
      rater_id: this.raterId,
      created_at: nowSeconds(),
    };
  }

  async submitVerdict(verdict: Verdict): Promise<SubmitReply> {
    return this.client.submitJudgment(this.pendingSubmission(verdict));
  }
}
