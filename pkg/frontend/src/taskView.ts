/**
 * Annotation task view.
 *
 * Walks one annotator through a round's pending comments. The server is
 * the source of truth: the pending list comes from the tasks endpoint, so
 * a reload resumes exactly where the server says. Submissions that fail
 * on the network are kept in a local queue and retried, never dropped.
 */

import { ApiError, HatescopeClient, TaskItem, TaskPage } from "./api.js";
import { LEVELS, TARGETS } from "./guidelines.js";

interface QueuedRecord {
  commentId: string;
  codes: number[];
}

export class TaskView {
  private page: TaskPage | null = null;
  private queue: TaskItem[] = [];
  private pending: QueuedRecord[] = [];
  private readOnlyReason: string | null = null;
  private errorNote: string | null = null;
  private loadError: string | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: HatescopeClient,
    readonly roundId: string,
    readonly annotator: string,
  ) {}

  get pendingCount(): number {
    return this.pending.length;
  }

  get isReadOnly(): boolean {
    return this.readOnlyReason !== null;
  }

  async start(): Promise<void> {
    try {
      this.page = await this.client.tasks(this.roundId, this.annotator);
      this.queue = [...this.page.tasks];
      if (this.page.status !== "Open") {
        this.readOnlyReason = `this round is ${this.page.status}; labeling is closed`;
      }
    } catch (err) {
      this.loadError = describeError(err);
    }
    this.render();
  }

  private doneCount(): number {
    if (this.page === null) {
      return 0;
    }
    return this.page.nTotal - this.queue.length;
  }

  private render(): void {
    if (this.loadError !== null) {
      this.root.innerHTML = `
        <div class="task-view">
          <div class="banner banner-error"></div>
        </div>`;
      this.setText(".banner-error", `could not load tasks: ${this.loadError}`);
      return;
    }
    const page = this.page;
    if (page === null) {
      this.root.innerHTML = `<div class="task-view"><p>loading…</p></div>`;
      return;
    }

    const current = this.queue[0];
    const finished = current === undefined;
    this.root.innerHTML = `
      <div class="task-view">
        <header class="task-head">
          <span class="round-name"></span>
          <span class="annotator-name"></span>
          <span class="progress-text"></span>
        </header>
        <div class="progress-bar"><div class="progress-fill"></div></div>
        <div class="banner banner-closed" hidden></div>
        <div class="banner banner-queue" hidden>
          <span class="queue-text"></span>
          <button type="button" class="retry-btn">Retry now</button>
        </div>
        <div class="banner banner-error" hidden></div>
        <section class="comment-card" ${finished ? "hidden" : ""}>
          <p class="comment-text"></p>
        </section>
        <form class="label-form" ${finished ? "hidden" : ""}>
          ${TARGETS.map((_, i) => this.fieldsetHtml(i)).join("")}
          <button type="submit" class="submit-btn">Save labels</button>
        </form>
        <section class="done-card" ${finished ? "" : "hidden"}>
          <p class="done-text"></p>
          <a class="dashboard-link">Open the round dashboard</a>
        </section>
      </div>`;

    this.setText(".round-name", page.roundId);
    this.setText(".annotator-name", this.annotator);
    const done = this.doneCount();
    this.setText(".progress-text", `${done} of ${page.nTotal} labeled`);
    const fill = this.root.querySelector<HTMLElement>(".progress-fill");
    if (fill !== null && page.nTotal > 0) {
      fill.style.width = `${Math.round((done / page.nTotal) * 100)}%`;
    }

    // Static scaffolding went through innerHTML; everything user-authored
    // is assigned through textContent so markup and emoji survive as text.
    for (const [i, target] of TARGETS.entries()) {
      this.setText(`.target-name-${i}`, target.name);
      const legend = this.root.querySelector<HTMLElement>(`.legend-${i}`);
      if (legend !== null) {
        legend.title = target.hint;
      }
    }

    if (!finished) {
      this.setText(".comment-text", current.text);
    } else {
      this.setText(".done-text", `You labeled all ${page.nTotal} comments in this round.`);
      const link = this.root.querySelector<HTMLAnchorElement>(".dashboard-link");
      if (link !== null) {
        link.href = `#/dashboard/${encodeURIComponent(page.roundId)}`;
      }
    }

    const closedBanner = this.root.querySelector<HTMLElement>(".banner-closed");
    if (closedBanner !== null && this.readOnlyReason !== null) {
      closedBanner.hidden = false;
      closedBanner.textContent = this.readOnlyReason;
    }
    const queueBanner = this.root.querySelector<HTMLElement>(".banner-queue");
    if (queueBanner !== null && this.pending.length > 0) {
      queueBanner.hidden = false;
      this.setText(
        ".queue-text",
        `${this.pending.length} submission${this.pending.length === 1 ? "" : "s"} ` +
          "waiting on the network; they will be retried, nothing is lost.",
      );
    }
    const errorBanner = this.root.querySelector<HTMLElement>(".banner-error");
    if (errorBanner !== null && this.errorNote !== null) {
      errorBanner.hidden = false;
      errorBanner.textContent = this.errorNote;
    }

    const form = this.root.querySelector<HTMLFormElement>(".label-form");
    if (form !== null) {
      form.addEventListener("submit", (event) => {
        event.preventDefault();
        void this.submitCurrent();
      });
      form.addEventListener("change", () => this.updateSubmitState());
    }
    const retry = this.root.querySelector<HTMLButtonElement>(".retry-btn");
    if (retry !== null) {
      retry.addEventListener("click", () => void this.retryPending());
    }
    if (this.readOnlyReason !== null) {
      this.disableInputs();
    }
    this.updateSubmitState();
  }

  private fieldsetHtml(index: number): string {
    const options = LEVELS.map(
      (level) => `
        <label class="level-option" title="${escapeAttr(level.tooltip)}">
          <input type="radio" name="level-${index}" value="${level.code}"
                 ${level.code === 0 ? "checked" : ""}>
          <span class="level-name">${level.name}</span>
        </label>`,
    ).join("");
    return `
      <fieldset class="target-group" data-target="${index}">
        <legend class="legend-${index}"><span class="target-name-${index}"></span></legend>
        ${options}
      </fieldset>`;
  }

  private setText(selector: string, text: string): void {
    const node = this.root.querySelector<HTMLElement>(selector);
    if (node !== null) {
      node.textContent = text;
    }
  }

  private disableInputs(): void {
    for (const input of this.root.querySelectorAll<HTMLInputElement>("input, button.submit-btn")) {
      input.disabled = true;
    }
  }

  /** A task is submittable only when every target has a selected level. */
  private collectCodes(): number[] | null {
    const codes: number[] = [];
    for (let i = 0; i < TARGETS.length; i++) {
      const checked = this.root.querySelector<HTMLInputElement>(
        `input[name="level-${i}"]:checked`,
      );
      if (checked === null) {
        return null;
      }
      codes.push(Number(checked.value));
    }
    return codes;
  }

  private updateSubmitState(): void {
    const button = this.root.querySelector<HTMLButtonElement>(".submit-btn");
    if (button !== null && this.readOnlyReason === null) {
      button.disabled = this.collectCodes() === null;
    }
  }

  private async submitCurrent(): Promise<void> {
    const current = this.queue[0];
    const codes = this.collectCodes();
    if (current === undefined || codes === null || this.readOnlyReason !== null) {
      return;
    }
    this.errorNote = null;
    await this.flushPending();
    if (this.readOnlyReason !== null) {
      this.render();
      return;
    }
    try {
      await this.client.submitAnnotation(
        this.roundId,
        this.annotator,
        current.id,
        codes,
      );
      this.queue.shift();
    } catch (err) {
      if (err instanceof ApiError) {
        if (err.status === 409) {
          this.readOnlyReason = err.message;
        } else {
          this.errorNote = `submission rejected: ${err.message}`;
        }
      } else {
        // Network failure. Keep the record and move on; it is retried
        // before the next submit and from the banner button.
        this.pending.push({ commentId: current.id, codes });
        this.queue.shift();
      }
    }
    if (this.queue.length === 0 && this.pending.length === 0) {
      await this.reconcile();
      return;
    }
    this.render();
  }

  private async flushPending(): Promise<void> {
    while (this.pending.length > 0) {
      const record = this.pending[0];
      try {
        await this.client.submitAnnotation(
          this.roundId,
          this.annotator,
          record.commentId,
          record.codes,
        );
        this.pending.shift();
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          this.readOnlyReason = err.message;
        }
        return;
      }
    }
  }

  private async retryPending(): Promise<void> {
    await this.flushPending();
    if (this.queue.length === 0 && this.pending.length === 0) {
      await this.reconcile();
      return;
    }
    this.render();
  }

  /** Re-read server state once the local queue drains. */
  private async reconcile(): Promise<void> {
    try {
      this.page = await this.client.tasks(this.roundId, this.annotator);
      this.queue = [...this.page.tasks];
      if (this.page.status !== "Open" && this.queue.length > 0) {
        this.readOnlyReason = `this round is ${this.page.status}; labeling is closed`;
      }
    } catch {
      // keep the optimistic local view; the next retry reconciles
    }
    this.render();
  }
}

function escapeAttr(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/"/g, "&quot;").replace(/</g, "&lt;");
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    return err.message;
  }
  return err instanceof Error ? err.message : String(err);
}
