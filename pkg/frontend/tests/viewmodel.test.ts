import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { validateHitPayload } from "../src/schema.js";
import { HitSession, MemoryStore } from "../src/session.js";
import { pageViewModel, sessionViewModel } from "../src/viewmodel.js";

const fixtures = join(dirname(fileURLToPath(import.meta.url)), "..", "fixtures");
const hit = validateHitPayload(
  JSON.parse(readFileSync(join(fixtures, "hit_payload.json"), "utf-8")),
);

describe("page view models", () => {
  it("numbers pages 1/20 through 20/20", () => {
    const session = new HitSession(hit, "w", new MemoryStore());
    const labels = hit.pages.map((_, i) => pageViewModel(hit, session, i).progress);
    expect(labels[0]).toBe("1/20");
    expect(labels[19]).toBe("20/20");
    expect(new Set(labels).size).toBe(20);
  });

  it("renders pair choices as the two displayed videos in served order", () => {
    const session = new HitSession(hit, "w", new MemoryStore());
    const vm = pageViewModel(hit, session, 0);
    expect(vm.videoUrls).toHaveLength(2);
    const pairQuestion = vm.questions.find((q) => q.kind === "pair_choice");
    expect(pairQuestion?.options.map((o) => o.value)).toEqual(["1", "2"]);
  });

  it("renders mcq options verbatim", () => {
    const session = new HitSession(hit, "w", new MemoryStore());
    for (let i = 0; i < hit.pages.length; i += 1) {
      for (const q of pageViewModel(hit, session, i).questions) {
        if (q.kind === "mcq") {
          expect(q.options.length).toBeGreaterThanOrEqual(2);
          expect(q.options[0].value).toBe(q.options[0].label);
          return;
        }
      }
    }
    throw new Error("fixture has no mcq page");
  });

  it("reflects selections and gates submission readiness", () => {
    const session = new HitSession(hit, "w", new MemoryStore());
    let vm = sessionViewModel(hit, session);
    expect(vm.readyToSubmit).toBe(false);
    expect(vm.firstIncompletePage).toBe(0);

    for (const page of hit.pages) {
      for (const q of page.questions) {
        session.select(q.question_id, q.kind === "pair_choice" ? "1" : (q.options as string[])[0]);
      }
    }
    vm = sessionViewModel(hit, session);
    expect(vm.readyToSubmit).toBe(true);
    expect(vm.firstIncompletePage).toBeNull();
    expect(vm.answered).toBe(vm.totalQuestions);
    expect(pageViewModel(hit, session, 4).questions[0].selected).toBeDefined();
  });

  it("exposes nothing beyond the wire fields", () => {
    const session = new HitSession(hit, "w", new MemoryStore());
    const vm = pageViewModel(hit, session, 0);
    expect(Object.keys(vm).sort()).toEqual([
      "complete",
      "index",
      "progress",
      "questions",
      "total",
      "videoUrls",
    ]);
  });
});
