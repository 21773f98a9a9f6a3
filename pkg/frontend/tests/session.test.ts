import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { validateHitPayload } from "../src/schema.js";
import { HitSession, MemoryStore } from "../src/session.js";

const fixtures = join(dirname(fileURLToPath(import.meta.url)), "..", "fixtures");
const hit = validateHitPayload(
  JSON.parse(readFileSync(join(fixtures, "hit_payload.json"), "utf-8")),
);

function allQuestionIds(): string[] {
  return hit.pages.flatMap((p) => p.questions.map((q) => q.question_id));
}

describe("HitSession", () => {
  it("tracks per-page completion", () => {
    const session = new HitSession(hit, "w", new MemoryStore());
    expect(session.allAnswered()).toBe(false);
    expect(session.firstIncompletePage()).toBe(0);
    for (const q of hit.pages[0].questions) {
      session.select(q.question_id, q.kind === "pair_choice" ? "1" : (q.options as string[])[0]);
    }
    expect(session.pageComplete(0)).toBe(true);
    expect(session.firstIncompletePage()).toBe(1);
  });

  it("rejects selections for unknown questions", () => {
    const session = new HitSession(hit, "w", new MemoryStore());
    expect(() => session.select("nope", "1")).toThrow(/unknown question/);
  });

  it("refuses to build an incomplete submission", () => {
    const session = new HitSession(hit, "w", new MemoryStore());
    expect(() => session.buildSubmission()).toThrow(/unanswered/);
  });

  it("builds the exact server schema when complete", () => {
    const session = new HitSession(hit, "worker-7", new MemoryStore());
    for (const q of hit.pages.flatMap((p) => p.questions)) {
      session.select(q.question_id, q.kind === "pair_choice" ? "2" : (q.options as string[])[0]);
    }
    const submission = session.buildSubmission({ screen_width: 1920 });
    expect(Object.keys(submission).sort()).toEqual(["answers", "client_hints", "worker_id"]);
    expect(submission.worker_id).toBe("worker-7");
    expect(Object.keys(submission.answers).sort()).toEqual(allQuestionIds().sort());
    expect(submission.client_hints).toEqual({ screen_width: 1920 });
  });

  it("persists selections and restores them after a reload", () => {
    const store = new MemoryStore();
    const first = new HitSession(hit, "w", store);
    first.select(hit.pages[0].questions[0].question_id, "1");
    first.select(hit.pages[3].questions[0].question_id, "2");

    const reloaded = new HitSession(hit, "w", store);
    expect(reloaded.selection(hit.pages[0].questions[0].question_id)).toBe("1");
    expect(reloaded.selection(hit.pages[3].questions[0].question_id)).toBe("2");
    expect(reloaded.answeredCount()).toBe(2);
  });

  it("drops corrupt persisted snapshots", () => {
    const store = new MemoryStore();
    store.setItem(`dyneval-hit-${hit.hit_id}-w`, "{not json");
    const session = new HitSession(hit, "w", store);
    expect(session.answeredCount()).toBe(0);
  });

  it("keeps sessions separate per worker", () => {
    const store = new MemoryStore();
    const a = new HitSession(hit, "worker-a", store);
    a.select(hit.pages[0].questions[0].question_id, "1");
    const b = new HitSession(hit, "worker-b", store);
    expect(b.answeredCount()).toBe(0);
  });
});
