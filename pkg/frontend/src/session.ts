// Session state for one HIT: selections, completion gating, and local
// persistence so a reload never loses work. Storage is injectable so the
// logic is testable without a browser.

import { HitPayload, ResponseSubmission } from "./schema.js";

export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export class MemoryStore implements KeyValueStore {
  private data = new Map<string, string>();
  getItem(key: string): string | null {
    return this.data.has(key) ? (this.data.get(key) as string) : null;
  }
  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }
  removeItem(key: string): void {
    this.data.delete(key);
  }
}

export class HitSession {
  readonly hit: HitPayload;
  readonly workerId: string;
  private selections = new Map<string, string>();
  private store: KeyValueStore;

  constructor(hit: HitPayload, workerId: string, store?: KeyValueStore) {
    this.hit = hit;
    this.workerId = workerId;
    this.store = store ?? new MemoryStore();
    this.restore();
  }

  private storageKey(): string {
    return `dyneval-hit-${this.hit.hit_id}-${this.workerId}`;
  }

  private knownQuestionIds(): Set<string> {
    const ids = new Set<string>();
    for (const page of this.hit.pages) {
      for (const q of page.questions) {
        ids.add(q.question_id);
      }
    }
    return ids;
  }

  restore(): void {
    const raw = this.store.getItem(this.storageKey());
    if (raw === null) {
      return;
    }
    try {
      const parsed = JSON.parse(raw) as Record<string, string>;
      const known = this.knownQuestionIds();
      for (const [key, value] of Object.entries(parsed)) {
        if (known.has(key) && typeof value === "string") {
          this.selections.set(key, value);
        }
      }
    } catch {
      this.store.removeItem(this.storageKey()); // corrupt snapshot
    }
  }

  persist(): void {
    this.store.setItem(
      this.storageKey(),
      JSON.stringify(Object.fromEntries(this.selections)),
    );
  }

  clearPersisted(): void {
    this.store.removeItem(this.storageKey());
  }

  select(questionId: string, value: string): void {
    if (!this.knownQuestionIds().has(questionId)) {
      throw new Error(`unknown question ${questionId}`);
    }
    this.selections.set(questionId, value);
    this.persist();
  }

  selection(questionId: string): string | undefined {
    return this.selections.get(questionId);
  }

  pageComplete(pageIndex: number): boolean {
    const page = this.hit.pages[pageIndex];
    return page.questions.every((q) => this.selections.has(q.question_id));
  }

  allAnswered(): boolean {
    return this.hit.pages.every((_, i) => this.pageComplete(i));
  }

  firstIncompletePage(): number | null {
    for (let i = 0; i < this.hit.pages.length; i += 1) {
      if (!this.pageComplete(i)) {
        return i;
      }
    }
    return null;
  }

  answeredCount(): number {
    return this.selections.size;
  }

  // Submission payload in the exact server schema; refuses to build while
  // any question is unanswered (the server re-validates).
  buildSubmission(clientHints: Record<string, unknown> = {}): ResponseSubmission {
    const incomplete = this.firstIncompletePage();
    if (incomplete !== null) {
      throw new Error(`page ${incomplete + 1} has unanswered questions`);
    }
    const answers: Record<string, string> = {};
    for (const page of this.hit.pages) {
      for (const q of page.questions) {
        answers[q.question_id] = this.selections.get(q.question_id) as string;
      }
    }
    return { worker_id: this.workerId, answers, client_hints: clientHints };
  }
}

export function defaultClientHints(): Record<string, unknown> {
  if (typeof window === "undefined" || typeof screen === "undefined") {
    return {};
  }
  return {
    screen_width: screen.width,
    screen_height: screen.height,
    device_pixel_ratio: window.devicePixelRatio,
    user_agent: navigator.userAgent,
  };
}
