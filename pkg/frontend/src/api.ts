// HTTP client for the study server. Submission retries are safe: the
// server treats a re-submitted HIT as a duplicate and replays the
// original receipt.

import {
  HitPayload,
  QualificationForm,
  QualificationResult,
  Receipt,
  ResponseSubmission,
  StudyConfig,
  validateHitPayload,
  validateQualificationForm,
  validateReceipt,
  validateStudyConfig,
} from "./schema.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly status: number;
  constructor(status: number, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
  }
}

async function readError(response: Response): Promise<ApiError> {
  let detail = response.statusText;
  try {
    const body = (await response.json()) as { detail?: string };
    if (body.detail) {
      detail = body.detail;
    }
  } catch {
    // keep the status text
  }
  return new ApiError(response.status, detail);
}

export class StudyApi {
  private baseUrl: string;
  private fetchImpl: FetchLike;

  constructor(baseUrl = "", fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async getJson(path: string): Promise<unknown> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`);
    if (!response.ok) {
      throw await readError(response);
    }
    return response.json();
  }

  private async postJson(path: string, body: unknown): Promise<unknown> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      throw await readError(response);
    }
    return response.json();
  }

  async config(): Promise<StudyConfig> {
    return validateStudyConfig(await this.getJson("/config"));
  }

  async qualificationForm(): Promise<QualificationForm> {
    return validateQualificationForm(await this.getJson("/qualification"));
  }

  async submitQualification(
    workerId: string,
    mcqAnswers: Record<string, string>,
    goldAnswers: Record<string, string>,
    clientHints: Record<string, unknown> = {},
  ): Promise<QualificationResult> {
    const result = await this.postJson(`/qualification/${encodeURIComponent(workerId)}`, {
      mcq_answers: mcqAnswers,
      gold_answers: goldAnswers,
      client_hints: clientHints,
    });
    return result as QualificationResult;
  }

  async fetchHit(workerId: string, seed = 0): Promise<HitPayload> {
    const query = `worker=${encodeURIComponent(workerId)}&seed=${seed}`;
    return validateHitPayload(await this.getJson(`/hit?${query}`));
  }

  // Retries only on transport failures; HTTP errors surface immediately.
  async submitResponse(
    hitId: string,
    submission: ResponseSubmission,
    retries = 3,
    backoffMs = 500,
    sleep: (ms: number) => Promise<void> = (ms) => new Promise((r) => setTimeout(r, ms)),
  ): Promise<Receipt> {
    let lastError: unknown;
    for (let attempt = 0; attempt < retries; attempt += 1) {
      try {
        const result = await this.postJson(
          `/hit/${encodeURIComponent(hitId)}/response`,
          submission,
        );
        return validateReceipt(result);
      } catch (error) {
        if (error instanceof ApiError) {
          throw error;
        }
        lastError = error;
        if (attempt + 1 < retries) {
          await sleep(backoffMs * 2 ** attempt);
        }
      }
    }
    throw lastError instanceof Error ? lastError : new Error(String(lastError));
  }
}
