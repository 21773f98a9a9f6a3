import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import {
  SchemaError,
  validateHitPayload,
  validateQualificationForm,
  validateReceipt,
  validateResponseSubmission,
  validateStudyConfig,
} from "../src/schema.js";

const fixtures = join(dirname(fileURLToPath(import.meta.url)), "..", "fixtures");

function fixture(name: string): unknown {
  return JSON.parse(readFileSync(join(fixtures, name), "utf-8"));
}

describe("wire schema validation", () => {
  it("accepts the served HIT fixture", () => {
    const hit = validateHitPayload(fixture("hit_payload.json"));
    expect(hit.pages).toHaveLength(20);
    for (const page of hit.pages) {
      expect(page.videos).toHaveLength(2);
      expect(page.questions.length).toBeGreaterThanOrEqual(2);
    }
  });

  it("accepts the qualification form fixture", () => {
    const form = validateQualificationForm(fixture("qualification_form.json"));
    expect(form.mcqs).toHaveLength(10);
    expect(form.gold_pairs).toHaveLength(3);
  });

  it("accepts the config fixture", () => {
    const config = validateStudyConfig(fixture("config.json"));
    expect(config.pages_per_hit).toBe(20);
    expect(config.dimensions).toEqual(["background", "foreground"]);
  });

  it("rejects pages with a missing video", () => {
    const hit = fixture("hit_payload.json") as { pages: { videos: unknown[] }[] };
    hit.pages[0].videos = [hit.pages[0].videos[0]];
    expect(() => validateHitPayload(hit)).toThrow(SchemaError);
  });

  it("rejects unknown question kinds", () => {
    const hit = fixture("hit_payload.json") as {
      pages: { questions: { kind: string }[] }[];
    };
    hit.pages[2].questions[0].kind = "freeform";
    expect(() => validateHitPayload(hit)).toThrow(/unknown question kind/);
  });

  it("rejects out-of-order pages", () => {
    const hit = fixture("hit_payload.json") as { pages: { page_index: number }[] };
    hit.pages[5].page_index = 9;
    expect(() => validateHitPayload(hit)).toThrow(/order/);
  });

  it("round-trips a response submission", () => {
    const submission = validateResponseSubmission({
      worker_id: "w",
      answers: { q1: "1", q2: "dog" },
      client_hints: { screen_width: 1280 },
    });
    expect(submission.answers.q2).toBe("dog");
  });

  it("rejects non-string answers", () => {
    expect(() =>
      validateResponseSubmission({ worker_id: "w", answers: { q1: 3 } }),
    ).toThrow(SchemaError);
  });

  it("validates receipts including the duplicate flag", () => {
    const receipt = validateReceipt({
      hit_id: "h",
      accepted: true,
      reliability_score: 1.0,
      duplicate: true,
    });
    expect(receipt.duplicate).toBe(true);
    expect(() => validateReceipt({ hit_id: "h", accepted: "yes", reliability_score: 1 })).toThrow(
      SchemaError,
    );
  });

  it("serves no role markers anywhere in the HIT payload", () => {
    const raw = readFileSync(join(fixtures, "hit_payload.json"), "utf-8");
    for (const marker of ['"role"', '"answer"', '"swapped"', '"ref"', "gold", "sanity", "repeat"]) {
      expect(raw).not.toContain(marker);
    }
    const hit = validateHitPayload(JSON.parse(raw));
    for (const page of hit.pages) {
      expect(Object.keys(page).sort()).toEqual(["page_index", "questions", "videos"]);
      for (const question of page.questions) {
        expect(
          Object.keys(question).every((k) =>
            ["question_id", "kind", "text", "options"].includes(k),
          ),
        ).toBe(true);
      }
    }
  });
});
