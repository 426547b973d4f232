// Shared fixtures and a launcher that runs the real annotation service in a
// child process, so every test exercises the same HTTP surface the browser
// UI talks to.

import { spawn, type ChildProcessWithoutNullStreams } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

// Model ids are deliberately unlike any caption or question text, so tests
// can assert they never leak into the rating screen.
export const CAPTION_PREDICTIONS = [
  { model_id: "m-alpha", image_id: "img-a", target: "caption", text: "A runway crosses a green field." },
  { model_id: "m-bravo", image_id: "img-a", target: "caption", text: "Two runways meet near a terminal." },
  { model_id: "m-alpha", image_id: "img-b", target: "caption", text: "Boats line the edge of a harbor." },
  { model_id: "m-bravo", image_id: "img-b", target: "caption", text: "A bridge spans the river mouth." },
];

export const QA_RECORDS = [
  { question_id: "q-1", image_id: "img-a", category: "presence", question: "Is there a runway in the scene?", answer: "yes" },
  { question_id: "q-2", image_id: "img-b", category: "quantity", question: "How many boats are visible?", answer: "6" },
];

export const VQA_PREDICTIONS = [
  { model_id: "m-alpha", image_id: "img-a", target: "q-1", text: "Yes, a long runway." },
  { model_id: "m-alpha", image_id: "img-b", target: "q-2", text: "There are five boats." },
];

// Items come back sorted by (image_id, model_id), captions first by image.
export const CAPTION_ORDER = [...CAPTION_PREDICTIONS].sort((a, b) =>
  a.image_id === b.image_id
    ? a.model_id.localeCompare(b.model_id)
    : a.image_id.localeCompare(b.image_id),
);

function jsonLines(records: object[]): string {
  return records.map((r) => JSON.stringify(r)).join("\n") + "\n";
}

export function writeServiceData(dir: string): void {
  writeFileSync(join(dir, "caption_predictions.jsonl"), jsonLines(CAPTION_PREDICTIONS));
  writeFileSync(join(dir, "qa.jsonl"), jsonLines(QA_RECORDS));
  writeFileSync(join(dir, "vqa_predictions.jsonl"), jsonLines(VQA_PREDICTIONS));
}

export interface TestService {
  baseUrl: string;
  dataDir: string;
  stop(): void;
}

export async function startService(): Promise<TestService> {
  const dataDir = mkdtempSync(join(tmpdir(), "rater-ui-"));
  writeServiceData(dataDir);
  const child: ChildProcessWithoutNullStreams = spawn(
    "python3",
    ["-m", "skybench", "serve", "--port", "0", "--data", dataDir],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  const baseUrl = await new Promise<string>((resolve, reject) => {
    let buffer = "";
    const timer = setTimeout(() => {
      child.kill();
      reject(new Error(`service did not announce a port:\n${buffer}`));
    }, 20000);
    const scan = (chunk: Buffer) => {
      buffer += chunk.toString();
      const match = buffer.match(/serving on (http:\/\/[^\s]+)/);
      if (match) {
        clearTimeout(timer);
        resolve(match[1]);
      }
    };
    child.stdout.on("data", scan);
    child.stderr.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
    });
    child.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`service exited early (code ${code}):\n${buffer}`));
    });
  });
  return {
    baseUrl,
    dataDir,
    stop() {
      child.kill();
    },
  };
}
