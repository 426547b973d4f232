// DOM wiring for the rating and adjudication screens. State transitions live
// in flow.ts; this module renders the flows and forwards events to them.

import type { ServiceClient } from "./api.js";
import { AdjudicationFlow, RatingFlow, gradeForKey } from "./flow.js";
import { DIMENSIONS, GRADES, type Dimension, type Rubric, type Verdict } from "./types.js";

const RATER_KEY = "skybench.rater";

let client: ServiceClient;
let ratingFlow: RatingFlow | null = null;
let adjudicationFlow: AdjudicationFlow | null = null;
let activeDimension: Dimension = DIMENSIONS[0];
let rubric: Rubric = {};
let lastAction: (() => Promise<void>) | null = null;

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
}

function show(id: string, visible: boolean): void {
  byId(id).hidden = !visible;
}

function showPanel(name: "welcome" | "rating" | "adjudication" | "done"): void {
  for (const panel of ["welcome", "rating", "adjudication", "done"]) {
    show(`${panel}-panel`, panel === name);
  }
}

function raterId(): string {
  return byId<HTMLInputElement>("rater-id").value.trim();
}

function saveRater(): void {
  try {
    window.localStorage.setItem(RATER_KEY, raterId());
  } catch {
    // storage may be unavailable; the session still works without it
  }
}

function showError(message: string): void {
  byId("error-text").textContent = message;
  show("error-banner", true);
}

function clearError(): void {
  show("error-banner", false);
  byId("error-text").textContent = "";
}

// Run an async UI action; failures land in the banner and the action is kept
// for the retry button. Submissions carry stable ids, so retrying is safe.
async function run(action: () => Promise<void>): Promise<void> {
  lastAction = action;
  try {
    await action();
    clearError();
  } catch (err) {
    showError(err instanceof Error ? err.message : String(err));
  }
}

async function refreshProgress(taskId: string): Promise<void> {
  const p = await client.progress(taskId, raterId());
  byId("progress").textContent = `${p.done ?? 0} of ${p.total} done`;
}

function renderDone(taskId: string, label: string): void {
  showPanel("done");
  byId("done-text").textContent = `All ${label} are in. Thank you.`;
  const link = byId<HTMLAnchorElement>("export-link");
  link.href = `${client.baseUrl}/api/export?task_id=${encodeURIComponent(taskId)}`;
}

// -- caption rating ---------------------------------------------------------

async function startRating(): Promise<void> {
  if (raterId() === "") {
    throw new Error("enter a rater id first");
  }
  saveRater();
  const listing = await client.tasks();
  rubric = listing.rubric;
  ratingFlow = new RatingFlow(client, raterId());
  adjudicationFlow = null;
  await ratingFlow.loadNext();
  activeDimension = DIMENSIONS[0];
  await refreshProgress(ratingFlow.taskId);
  renderRating();
}

function renderRating(): void {
  if (ratingFlow === null) {
    return;
  }
  const view = ratingFlow.view();
  if (view === null) {
    renderDone(ratingFlow.taskId, "caption ratings");
    return;
  }
  showPanel("rating");
  byId<HTMLImageElement>("rating-image").src = client.imageUrl(view.imageId);
  byId("rating-caption").textContent = view.caption;
  buildDimensionBlocks();
  updateRatingControls();
}

function buildDimensionBlocks(): void {
  const host = byId("dimension-blocks");
  host.innerHTML = "";
  for (const dimension of DIMENSIONS) {
    const block = document.createElement("div");
    block.className = "dimension";
    block.dataset.dimension = dimension;
    block.tabIndex = 0;
    const title = document.createElement("h3");
    title.textContent = dimension;
    block.appendChild(title);
    const row = document.createElement("div");
    row.className = "grade-row";
    for (const grade of GRADES) {
      const button = document.createElement("button");
      button.textContent = grade;
      button.dataset.grade = grade;
      const description = rubric[dimension]?.[grade];
      if (description !== undefined) {
        button.title = description;
      }
      button.addEventListener("click", () => {
        activeDimension = dimension;
        ratingFlow?.setGrade(dimension, grade);
        updateRatingControls();
      });
      row.appendChild(button);
    }
    block.appendChild(row);
    block.addEventListener("focus", () => {
      activeDimension = dimension;
      updateRatingControls();
    });
    block.addEventListener("click", () => {
      activeDimension = dimension;
      updateRatingControls();
    });
    host.appendChild(block);
  }
}

function updateRatingControls(): void {
  if (ratingFlow === null) {
    return;
  }
  const blocks = document.querySelectorAll<HTMLElement>("#dimension-blocks .dimension");
  for (const block of blocks) {
    const dimension = block.dataset.dimension as Dimension;
    block.classList.toggle("active", dimension === activeDimension);
    const chosen = ratingFlow.gradeOf(dimension);
    for (const button of block.querySelectorAll<HTMLButtonElement>("button")) {
      button.classList.toggle("chosen", button.dataset.grade === chosen);
    }
  }
  byId<HTMLButtonElement>("rating-submit").disabled = !ratingFlow.canSubmit();
}

function advanceDimension(): void {
  if (ratingFlow === null) {
    return;
  }
  const flow = ratingFlow;
  const next = DIMENSIONS.find((d) => flow.gradeOf(d) === null);
  if (next !== undefined) {
    activeDimension = next;
  }
}

async function submitRatings(): Promise<void> {
  if (ratingFlow === null || !ratingFlow.canSubmit()) {
    return;
  }
  await ratingFlow.submitAll();
  await refreshProgress(ratingFlow.taskId);
  await ratingFlow.loadNext();
  activeDimension = DIMENSIONS[0];
  renderRating();
}

// -- answer adjudication ----------------------------------------------------

async function startAdjudication(): Promise<void> {
  if (raterId() === "") {
    throw new Error("enter a rater id first");
  }
  saveRater();
  adjudicationFlow = new AdjudicationFlow(client, raterId());
  ratingFlow = null;
  await adjudicationFlow.loadNext();
  await refreshProgress(adjudicationFlow.taskId);
  renderAdjudication();
}

function renderAdjudication(): void {
  if (adjudicationFlow === null) {
    return;
  }
  const view = adjudicationFlow.view();
  if (view === null) {
    renderDone(adjudicationFlow.taskId, "answer judgments");
    return;
  }
  showPanel("adjudication");
  byId<HTMLImageElement>("adjudication-image").src = client.imageUrl(view.imageId);
  byId("adjudication-question").textContent = view.question;
  byId("adjudication-answer").textContent = view.modelAnswer;
  show("reveal-gold", !view.revealed);
  show("gold-answer", view.revealed);
  show("verdict-buttons", view.revealed);
  byId("gold-answer").textContent = view.revealed
    ? `Reference answer: ${view.gold ?? ""}`
    : "";
}

function revealGold(): void {
  if (adjudicationFlow === null) {
    return;
  }
  adjudicationFlow.reveal();
  renderAdjudication();
}

async function submitVerdict(verdict: Verdict): Promise<void> {
  if (adjudicationFlow === null || !adjudicationFlow.canJudge()) {
    return;
  }
  await adjudicationFlow.submitVerdict(verdict);
  await refreshProgress(adjudicationFlow.taskId);
  await adjudicationFlow.loadNext();
  renderAdjudication();
}

// -- events -----------------------------------------------------------------

function handleKey(event: KeyboardEvent): void {
  const target = event.target as HTMLElement | null;
  if (target !== null && target.tagName === "INPUT") {
    return;
  }
  if (ratingFlow !== null && !byId("rating-panel").hidden) {
    const grade = gradeForKey(event.key);
    if (grade !== null) {
      ratingFlow.setGrade(activeDimension, grade);
      advanceDimension();
      updateRatingControls();
      return;
    }
    if (event.key === "Enter" && ratingFlow.canSubmit()) {
      void run(submitRatings);
    }
    return;
  }
  if (adjudicationFlow !== null && !byId("adjudication-panel").hidden) {
    if (!adjudicationFlow.canJudge()) {
      if (event.key === "r") {
        revealGold();
      }
      return;
    }
    if (event.key === "1" || event.key === "c") {
      void run(() => submitVerdict("correct"));
    } else if (event.key === "2" || event.key === "i") {
      void run(() => submitVerdict("incorrect"));
    }
  }
}

export function setupUi(serviceClient: ServiceClient): void {
  client = serviceClient;
  ratingFlow = null;
  adjudicationFlow = null;
  lastAction = null;
  try {
    byId<HTMLInputElement>("rater-id").value =
      window.localStorage.getItem(RATER_KEY) ?? "";
  } catch {
    // storage may be unavailable; start with a blank rater id
  }
  byId("start-rating").addEventListener("click", () => void run(startRating));
  byId("start-adjudication").addEventListener("click", () => void run(startAdjudication));
  byId("rating-submit").addEventListener("click", () => void run(submitRatings));
  byId("reveal-gold").addEventListener("click", () => revealGold());
  byId("verdict-correct").addEventListener("click", () => void run(() => submitVerdict("correct")));
  byId("verdict-incorrect").addEventListener("click", () => void run(() => submitVerdict("incorrect")));
  byId("error-retry").addEventListener("click", () => {
    if (lastAction !== null) {
      void run(lastAction);
    }
  });
  // remove first so a repeated setup (fresh DOM, same document) binds once
  document.removeEventListener("keydown", handleKey);
  document.addEventListener("keydown", handleKey);
  showPanel("welcome");
  clearError();
}
