// Presentation models for HIT pages. Pair-choice questions render the two
// displayed videos as options "1" and "2" in served order; the server owns
// any counterbalancing.

import { HitPayload, WireQuestion } from "./schema.js";
import { HitSession } from "./session.js";

export interface QuestionOptionVM {
  value: string;
  label: string;
}

export interface QuestionVM {
  questionId: string;
  kind: "pair_choice" | "mcq";
  text: string;
  options: QuestionOptionVM[];
  selected?: string;
}

export interface PageViewModel {
  index: number;
  total: number;
  progress: string; // "3/20"
  videoUrls: [string, string];
  questions: QuestionVM[];
  complete: boolean;
}

export interface SessionViewModel {
  hitId: string;
  pages: PageViewModel[];
  answered: number;
  totalQuestions: number;
  readyToSubmit: boolean;
  firstIncompletePage: number | null;
}

function questionOptions(question: WireQuestion): QuestionOptionVM[] {
  if (question.kind === "pair_choice") {
    return [
      { value: "1", label: "Video 1" },
      { value: "2", label: "Video 2" },
    ];
  }
  return (question.options ?? []).map((option) => ({ value: option, label: option }));
}

export function pageViewModel(
  hit: HitPayload,
  session: HitSession,
  index: number,
): PageViewModel {
  const page = hit.pages[index];
  return {
    index,
    total: hit.pages.length,
    progress: `${index + 1}/${hit.pages.length}`,
    videoUrls: [page.videos[0].url, page.videos[1].url],
    questions: page.questions.map((q) => ({
      questionId: q.question_id,
      kind: q.kind,
      text: q.text,
      options: questionOptions(q),
      selected: session.selection(q.question_id),
    })),
    complete: session.pageComplete(index),
  };
}

export function sessionViewModel(hit: HitPayload, session: HitSession): SessionViewModel {
  const pages = hit.pages.map((_, i) => pageViewModel(hit, session, i));
  const totalQuestions = hit.pages.reduce((n, p) => n + p.questions.length, 0);
  return {
    hitId: hit.hit_id,
    pages,
    answered: session.answeredCount(),
    totalQuestions,
    readyToSubmit: session.allAnswered(),
    firstIncompletePage: session.firstIncompletePage(),
  };
}
