// DOM wiring: qualification flow, paged HIT annotation, submit-all.
// All state lives in HitSession; this file only renders and forwards events.

import { StudyApi, ApiError } from "./api.js";
import { HitPayload, QualificationForm } from "./schema.js";
import { HitSession, defaultClientHints } from "./session.js";
import { pageViewModel, sessionViewModel } from "./viewmodel.js";

const api = new StudyApi("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function show(id: string): void {
  for (const section of document.querySelectorAll<HTMLElement>("main > section")) {
    section.hidden = section.id !== id;
  }
}

class StudyApp {
  private workerId = "";
  private hit: HitPayload | null = null;
  private session: HitSession | null = null;
  private currentPage = 0;
  private videoFailures = new Set<number>();

  start(): void {
    el<HTMLButtonElement>("worker-continue").addEventListener("click", () => {
      const value = el<HTMLInputElement>("worker-id").value.trim();
      if (!value) {
        return;
      }
      this.workerId = value;
      void this.enter();
    });
    el<HTMLButtonElement>("show-instructions").addEventListener("click", () => {
      el("instructions-panel").hidden = !el("instructions-panel").hidden;
    });
    el<HTMLButtonElement>("prev-page").addEventListener("click", () => this.goto(this.currentPage - 1));
    el<HTMLButtonElement>("next-page").addEventListener("click", () => this.goto(this.currentPage + 1));
    el<HTMLButtonElement>("submit-hit").addEventListener("click", () => void this.submit());
    el<HTMLButtonElement>("retry-videos").addEventListener("click", () => this.renderPage());
    show("enter-section");
  }

  private async enter(): Promise<void> {
    try {
      await this.loadHit();
    } catch (error) {
      if (error instanceof ApiError && error.status === 403) {
        await this.qualificationFlow();
        return;
      }
      this.banner(error instanceof Error ? error.message : String(error));
    }
  }

  private async qualificationFlow(): Promise<void> {
    const form = await api.qualificationForm();
    this.renderQualification(form);
    show("qualification-section");
  }

  private renderQualification(form: QualificationForm): void {
    const host = el("qualification-questions");
    host.innerHTML = "";
    for (const mcq of form.mcqs) {
      const block = document.createElement("fieldset");
      const legend = document.createElement("legend");
      legend.textContent = mcq.text;
      block.appendChild(legend);
      for (const option of mcq.options) {
        const label = document.createElement("label");
        const input = document.createElement("input");
        input.type = "radio";
        input.name = `mcq-${mcq.question_id}`;
        input.value = option;
        label.append(input, ` ${option}`);
        block.appendChild(label);
      }
      host.appendChild(block);
    }
    for (const gold of form.gold_pairs) {
      const block = document.createElement("fieldset");
      const legend = document.createElement("legend");
      legend.textContent = gold.question;
      block.appendChild(legend);
      const videos = document.createElement("div");
      videos.className = "video-row";
      for (const url of [gold.url_a, gold.url_b]) {
        const video = document.createElement("video");
        video.src = url;
        video.autoplay = true;
        video.loop = true;
        video.muted = true;
        videos.appendChild(video);
      }
      block.appendChild(videos);
      for (const [value, label] of [["1", "Video 1"], ["2", "Video 2"]] as const) {
        const wrap = document.createElement("label");
        const input = document.createElement("input");
        input.type = "radio";
        input.name = `gold-${gold.pair_id}`;
        input.value = value;
        wrap.append(input, ` ${label}`);
        block.appendChild(wrap);
      }
      host.appendChild(block);
    }
    el<HTMLButtonElement>("qualification-submit").onclick = () => void this.submitQualification(form);
  }

  private async submitQualification(form: QualificationForm): Promise<void> {
    const mcqAnswers: Record<string, string> = {};
    const goldAnswers: Record<string, string> = {};
    for (const mcq of form.mcqs) {
      const checked = document.querySelector<HTMLInputElement>(
        `input[name="mcq-${mcq.question_id}"]:checked`,
      );
      if (!checked) {
        this.banner("Please answer every qualification question.");
        return;
      }
      mcqAnswers[mcq.question_id] = checked.value;
    }
    for (const gold of form.gold_pairs) {
      const checked = document.querySelector<HTMLInputElement>(
        `input[name="gold-${gold.pair_id}"]:checked`,
      );
      if (!checked) {
        this.banner("Please answer every qualification question.");
        return;
      }
      goldAnswers[gold.pair_id] = checked.value;
    }
    const result = await api.submitQualification(
      this.workerId,
      mcqAnswers,
      goldAnswers,
      defaultClientHints(),
    );
    if (result.passed) {
      this.banner("Qualification passed. Loading your task...", false);
      await this.loadHit();
    } else {
      this.banner(
        `Qualification not passed (score ${result.mcq_score}/10, pairs ${result.gold_correct}/3).`,
      );
    }
  }

  private async loadHit(): Promise<void> {
    this.hit = await api.fetchHit(this.workerId);
    this.session = new HitSession(this.hit, this.workerId, window.localStorage);
    this.currentPage = 0;
    show("hit-section");
    this.renderPage();
  }

  private goto(index: number): void {
    if (!this.hit) {
      return;
    }
    this.currentPage = Math.max(0, Math.min(this.hit.pages.length - 1, index));
    this.renderPage();
  }

  private renderPage(): void {
    if (!this.hit || !this.session) {
      return;
    }
    this.videoFailures.clear();
    const vm = pageViewModel(this.hit, this.session, this.currentPage);
    el("page-progress").textContent = vm.progress;
    const videoRow = el("hit-videos");
    videoRow.innerHTML = "";
    vm.videoUrls.forEach((url, slot) => {
      const wrap = document.createElement("div");
      wrap.className = "video-slot";
      const title = document.createElement("h3");
      title.textContent = `Video ${slot + 1}`;
      const video = document.createElement("video");
      video.src = url;
      video.autoplay = true;
      video.loop = true;
      video.muted = true;
      video.playsInline = true;
      video.addEventListener("error", () => {
        this.videoFailures.add(slot);
        el("video-error").hidden = false;
        this.renderSubmitState();
      });
      const fullscreen = document.createElement("button");
      fullscreen.textContent = "Fullscreen";
      fullscreen.addEventListener("click", () => void video.requestFullscreen());
      wrap.append(title, video, fullscreen);
      videoRow.appendChild(wrap);
    });
    el("video-error").hidden = true;

    const questionHost = el("hit-questions");
    questionHost.innerHTML = "";
    for (const question of vm.questions) {
      const block = document.createElement("fieldset");
      const legend = document.createElement("legend");
      legend.textContent = question.text;
      block.appendChild(legend);
      for (const option of question.options) {
        const label = document.createElement("label");
        const input = document.createElement("input");
        input.type = "radio";
        input.name = question.questionId;
        input.value = option.value;
        input.checked = question.selected === option.value;
        input.addEventListener("change", () => {
          this.session?.select(question.questionId, option.value);
          this.renderSubmitState();
        });
        label.append(input, ` ${option.label}`);
        block.appendChild(label);
      }
      questionHost.appendChild(block);
    }
    this.renderSubmitState();
  }

  private renderSubmitState(): void {
    if (!this.hit || !this.session) {
      return;
    }
    const vm = sessionViewModel(this.hit, this.session);
    el("answer-progress").textContent = `${vm.answered}/${vm.totalQuestions} answered`;
    const submit = el<HTMLButtonElement>("submit-hit");
    submit.disabled = !vm.readyToSubmit || this.videoFailures.size > 0;
    const jump = el<HTMLButtonElement>("jump-incomplete");
    if (vm.firstIncompletePage !== null) {
      jump.hidden = false;
      jump.textContent = `Go to unanswered page ${vm.firstIncompletePage + 1}`;
      jump.onclick = () => this.goto(vm.firstIncompletePage as number);
    } else {
      jump.hidden = true;
    }
  }

  private async submit(): Promise<void> {
    if (!this.hit || !this.session) {
      return;
    }
    const submission = this.session.buildSubmission(defaultClientHints());
    const receipt = await api.submitResponse(this.hit.hit_id, submission);
    this.session.clearPersisted();
    el("receipt-status").textContent = receipt.accepted
      ? `Submission accepted (reliability ${(receipt.reliability_score * 100).toFixed(0)}%). Thank you!`
      : `Submission rejected (reliability ${(receipt.reliability_score * 100).toFixed(0)}%).`;
    show("done-section");
  }

  private banner(message: string, isError = true): void {
    const node = el("banner");
    node.textContent = message;
    node.className = isError ? "banner error" : "banner";
    node.hidden = false;
  }
}

if (typeof document !== "undefined") {
  new StudyApp().start();
}
