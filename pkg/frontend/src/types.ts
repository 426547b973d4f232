// Wire types for the annotation service JSON API.

export type Grade = "A" | "B" | "C" | "D";
export type Dimension = "detail" | "position" | "hallucination";
export type Verdict = "correct" | "incorrect";

export const GRADES: readonly Grade[] = ["A", "B", "C", "D"];
export const DIMENSIONS: readonly Dimension[] = ["detail", "position", "hallucination"];

export const CAPTION_TASK = "caption-rating";
export const VQA_TASK = "vqa-adjudication";

// dimension -> grade -> description
export type Rubric = Record<string, Record<string, string>>;

export interface TaskSummary {
  task_id: string;
  kind: string;
  total: number;
}

export interface TaskListing {
  tasks: TaskSummary[];
  rubric: Rubric;
}

export interface TaskItem {
  index: number;
  image_id: string;
  model_id: string;
  payload: string;
  gold: string | null;
  question_id: string | null;
  question: string | null;
}

export interface NextItemReply {
  exhausted: boolean;
  item: TaskItem | null;
}

export interface SubmitReply {
  status: "stored" | "duplicate";
}

export interface Progress {
  task_id: string;
  total: number;
  per_rater: Record<string, number>;
  done?: number;
}

export interface RatingSubmission {
  rating_id: string;
  rater_id: string;
  model_id: string;
  image_id: string;
  dimension: Dimension;
  grade: Grade;
  created_at: number;
}

export interface JudgmentSubmission {
  judgment_id: string;
  question_id: string;
  model_id: string;
  verdict: Verdict;
  source: "human";
  rater_id: string;
  created_at: number;
}
