// Builds fixtures/response_payload.json by driving the real session code
// over the committed HIT fixture, answering every question from the
// display-space answer key (standing in for the worker's judgment).
// The server-side contract test posts this exact payload.

import { readFileSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { validateHitPayload, validateResponseSubmission } from "../src/schema.js";
import { HitSession, MemoryStore } from "../src/session.js";

const here = dirname(fileURLToPath(import.meta.url));
const fixtures = join(here, "..", "..", "fixtures");

const hit = validateHitPayload(
  JSON.parse(readFileSync(join(fixtures, "hit_payload.json"), "utf-8")),
);
const answerKey = JSON.parse(
  readFileSync(join(fixtures, "answer_key.json"), "utf-8"),
) as Record<string, string>;

const session = new HitSession(hit, "ui-worker", new MemoryStore());
for (const page of hit.pages) {
  for (const question of page.questions) {
    const answer = answerKey[question.question_id];
    if (answer === undefined) {
      throw new Error(`answer key is missing ${question.question_id}`);
    }
    session.select(question.question_id, answer);
  }
}

const submission = validateResponseSubmission(
  session.buildSubmission({ fixture: true }),
);
const sortedAnswers: Record<string, string> = {};
for (const key of Object.keys(submission.answers).sort()) {
  sortedAnswers[key] = submission.answers[key];
}
const doc = {
  worker_id: submission.worker_id,
  answers: sortedAnswers,
  client_hints: submission.client_hints,
};
writeFileSync(
  join(fixtures, "response_payload.json"),
  `${JSON.stringify(doc, null, 2)}\n`,
);
console.log(`wrote response payload for ${hit.hit_id}`);
