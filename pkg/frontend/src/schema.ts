// Wire formats shared with the study server, with runtime validators.
// Dependency-free so the same module runs in the browser, in node
// scripts, and in the contract tests.

export interface VideoRef {
  url: string;
}

export type QuestionKind = "pair_choice" | "mcq";

export interface WireQuestion {
  question_id: string;
  kind: QuestionKind;
  text: string;
  options?: string[];
}

export interface WirePage {
  page_index: number;
  videos: VideoRef[];
  questions: WireQuestion[];
}

export interface HitPayload {
  hit_id: string;
  pages: WirePage[];
}

export interface ResponseSubmission {
  worker_id: string;
  answers: Record<string, string>;
  client_hints: Record<string, unknown>;
}

export interface Receipt {
  hit_id: string;
  accepted: boolean;
  reliability_score: number;
  duplicate?: boolean;
}

export interface StudyConfig {
  dimensions: string[];
  videos_base: string;
  pages_per_hit: number;
}

export interface QualificationGoldPair {
  pair_id: string;
  url_a: string;
  url_b: string;
  dimension: string;
  question: string;
}

export interface QualificationMcq {
  question_id: string;
  text: string;
  options: string[];
}

export interface QualificationForm {
  mcqs: QualificationMcq[];
  gold_pairs: QualificationGoldPair[];
}

export interface QualificationResult {
  worker_id: string;
  mcq_score: number;
  gold_correct: number;
  passed: boolean;
}

export class SchemaError extends Error {
  constructor(path: string, message: string) {
    super(`${path}: ${message}`);
    this.name = "SchemaError";
  }
}

function asObject(value: unknown, path: string): Record<string, unknown> {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    throw new SchemaError(path, "expected an object");
  }
  return value as Record<string, unknown>;
}

function asArray(value: unknown, path: string): unknown[] {
  if (!Array.isArray(value)) {
    throw new SchemaError(path, "expected an array");
  }
  return value;
}

function asString(value: unknown, path: string): string {
  if (typeof value !== "string" || value.length === 0) {
    throw new SchemaError(path, "expected a nonempty string");
  }
  return value;
}

function asNumber(value: unknown, path: string): number {
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new SchemaError(path, "expected a finite number");
  }
  return value;
}

function asBoolean(value: unknown, path: string): boolean {
  if (typeof value !== "boolean") {
    throw new SchemaError(path, "expected a boolean");
  }
  return value;
}

export function validateHitPayload(doc: unknown): HitPayload {
  const root = asObject(doc, "hit");
  const hitId = asString(root.hit_id, "hit.hit_id");
  const pages = asArray(root.pages, "hit.pages").map((rawPage, i) => {
    const page = asObject(rawPage, `hit.pages[${i}]`);
    const pageIndex = asNumber(page.page_index, `hit.pages[${i}].page_index`);
    const videos = asArray(page.videos, `hit.pages[${i}].videos`).map((v, j) => ({
      url: asString(asObject(v, `hit.pages[${i}].videos[${j}]`).url, `hit.pages[${i}].videos[${j}].url`),
    }));
    if (videos.length !== 2) {
      throw new SchemaError(`hit.pages[${i}].videos`, "a page shows exactly two videos");
    }
    const questions = asArray(page.questions, `hit.pages[${i}].questions`).map((q, j) => {
      const path = `hit.pages[${i}].questions[${j}]`;
      const obj = asObject(q, path);
      const kind = asString(obj.kind, `${path}.kind`);
      if (kind !== "pair_choice" && kind !== "mcq") {
        throw new SchemaError(`${path}.kind`, `unknown question kind ${kind}`);
      }
      const question: WireQuestion = {
        question_id: asString(obj.question_id, `${path}.question_id`),
        kind,
        text: asString(obj.text, `${path}.text`),
      };
      if (kind === "mcq") {
        question.options = asArray(obj.options, `${path}.options`).map((o, m) =>
          asString(o, `${path}.options[${m}]`),
        );
        if (question.options.length < 2) {
          throw new SchemaError(`${path}.options`, "an MCQ needs at least two options");
        }
      }
      return question;
    });
    if (questions.length === 0) {
      throw new SchemaError(`hit.pages[${i}].questions`, "a page needs questions");
    }
    return { page_index: pageIndex, videos, questions };
  });
  if (pages.length === 0) {
    throw new SchemaError("hit.pages", "a HIT needs pages");
  }
  pages.forEach((page, i) => {
    if (page.page_index !== i) {
      throw new SchemaError(`hit.pages[${i}].page_index`, "pages must arrive in order");
    }
  });
  return { hit_id: hitId, pages };
}

export function validateResponseSubmission(doc: unknown): ResponseSubmission {
  const root = asObject(doc, "response");
  const workerId = asString(root.worker_id, "response.worker_id");
  const answersObj = asObject(root.answers, "response.answers");
  const answers: Record<string, string> = {};
  for (const [key, value] of Object.entries(answersObj)) {
    answers[key] = asString(value, `response.answers[${key}]`);
  }
  const hints = root.client_hints === undefined ? {} : asObject(root.client_hints, "response.client_hints");
  return { worker_id: workerId, answers, client_hints: hints };
}

export function validateReceipt(doc: unknown): Receipt {
  const root = asObject(doc, "receipt");
  const receipt: Receipt = {
    hit_id: asString(root.hit_id, "receipt.hit_id"),
    accepted: asBoolean(root.accepted, "receipt.accepted"),
    reliability_score: asNumber(root.reliability_score, "receipt.reliability_score"),
  };
  if (root.duplicate !== undefined) {
    receipt.duplicate = asBoolean(root.duplicate, "receipt.duplicate");
  }
  return receipt;
}

export function validateStudyConfig(doc: unknown): StudyConfig {
  const root = asObject(doc, "config");
  return {
    dimensions: asArray(root.dimensions, "config.dimensions").map((d, i) =>
      asString(d, `config.dimensions[${i}]`),
    ),
    videos_base: asString(root.videos_base, "config.videos_base"),
    pages_per_hit: asNumber(root.pages_per_hit, "config.pages_per_hit"),
  };
}

export function validateQualificationForm(doc: unknown): QualificationForm {
  const root = asObject(doc, "qualification");
  const mcqs = asArray(root.mcqs, "qualification.mcqs").map((q, i) => {
    const obj = asObject(q, `qualification.mcqs[${i}]`);
    return {
      question_id: asString(obj.question_id, `qualification.mcqs[${i}].question_id`),
      text: asString(obj.text, `qualification.mcqs[${i}].text`),
      options: asArray(obj.options, `qualification.mcqs[${i}].options`).map((o, j) =>
        asString(o, `qualification.mcqs[${i}].options[${j}]`),
      ),
    };
  });
  const goldPairs = asArray(root.gold_pairs, "qualification.gold_pairs").map((g, i) => {
    const obj = asObject(g, `qualification.gold_pairs[${i}]`);
    return {
      pair_id: asString(obj.pair_id, `qualification.gold_pairs[${i}].pair_id`),
      url_a: asString(obj.url_a, `qualification.gold_pairs[${i}].url_a`),
      url_b: asString(obj.url_b, `qualification.gold_pairs[${i}].url_b`),
      dimension: asString(obj.dimension, `qualification.gold_pairs[${i}].dimension`),
      question: asString(obj.question, `qualification.gold_pairs[${i}].question`),
    };
  });
  return { mcqs, gold_pairs: goldPairs };
}
