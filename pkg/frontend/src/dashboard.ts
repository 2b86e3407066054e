/**
 * Round dashboard: agreement heatmap, gate banner, adjudication queue.
 *
 * Every value on screen comes from a service response. Kappas render the
 * exact lexeme from the agreement body (see rawJson.ts); the gate state
 * comes from the round summary and the gate endpoint. Nothing here
 * recomputes agreement or votes.
 */

import {
  AgreementPayload,
  AgreementView,
  ApiError,
  HatescopeClient,
  RoundSummary,
  VotesPayload,
} from "./api.js";
import { RawNum } from "./rawJson.js";
import { TARGETS } from "./guidelines.js";

type HeatmapMode = "with" | "without";

export class RoundDashboard {
  private summary: RoundSummary | null = null;
  private agreement: AgreementPayload | null = null;
  private votes: VotesPayload | null = null;
  private mode: HeatmapMode = "with";
  private gateNotice: string | null = null;
  private loadError: string | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: HatescopeClient,
    readonly roundId: string,
  ) {}

  /** Exact body of the last agreement response used for rendering. */
  get lastAgreementBody(): string | null {
    return this.agreement?.body ?? null;
  }

  async refresh(): Promise<void> {
    try {
      this.summary = await this.client.round(this.roundId);
      this.agreement = await this.client.agreement(this.roundId);
      this.loadError = null;
      if (this.summary.status === "Passed") {
        this.votes = await this.client.votes(this.roundId);
      } else {
        this.votes = null;
      }
    } catch (err) {
      this.loadError =
        err instanceof ApiError ? err.message : err instanceof Error ? err.message : String(err);
    }
    this.render();
  }

  private async runGate(): Promise<void> {
    this.gateNotice = null;
    try {
      await this.client.gate(this.roundId);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // Either the agreement is indeterminate or the round was already
        // decided; the refreshed summary settles which banner shows.
        this.gateNotice = err.message;
      } else {
        throw err;
      }
    }
    await this.refresh();
  }

  private view(): AgreementView | null {
    if (this.agreement === null) {
      return null;
    }
    return this.mode === "with" ? this.agreement.withLevels : this.agreement.withoutLevels;
  }

  private render(): void {
    if (this.loadError !== null) {
      this.root.innerHTML = `<div class="dashboard"><div class="banner banner-error"></div></div>`;
      this.setText(".banner-error", `could not load round: ${this.loadError}`);
      return;
    }
    const summary = this.summary;
    const view = this.view();
    if (summary === null || view === null) {
      this.root.innerHTML = `<div class="dashboard"><p>loading…</p></div>`;
      return;
    }

    this.root.innerHTML = `
      <div class="dashboard">
        <header class="dash-head">
          <span class="round-name"></span>
          <span class="status-chip"></span>
          <span class="record-count"></span>
        </header>
        ${this.gateBannerHtml(summary)}
        <section class="agreement-section">
          <div class="heatmap-controls">
            <button type="button" class="mode-btn mode-with"
                    aria-pressed="${this.mode === "with"}">Targets with levels</button>
            <button type="button" class="mode-btn mode-without"
                    aria-pressed="${this.mode === "without"}">Target mention only</button>
          </div>
          ${this.heatmapHtml(view)}
          <p class="undefined-note"></p>
        </section>
        ${this.adjudicationHtml()}
      </div>`;

    this.setText(".round-name", summary.roundId);
    this.setText(".status-chip", summary.status);
    this.setText(
      ".record-count",
      `${summary.nRecords} records from ${summary.annotators.length} annotators`,
    );
    this.fillDynamicText(summary, view);

    const gateBtn = this.root.querySelector<HTMLButtonElement>(".gate-btn");
    if (gateBtn !== null) {
      gateBtn.addEventListener("click", () => void this.runGate());
    }
    this.root
      .querySelector<HTMLButtonElement>(".mode-with")
      ?.addEventListener("click", () => this.setMode("with"));
    this.root
      .querySelector<HTMLButtonElement>(".mode-without")
      ?.addEventListener("click", () => this.setMode("without"));
  }

  private setMode(mode: HeatmapMode): void {
    if (this.mode !== mode) {
      this.mode = mode;
      this.render();
    }
  }

  private gateBannerHtml(summary: RoundSummary): string {
    if (summary.status === "Passed") {
      return `
        <div class="banner gate-banner gate-passed">
          <strong>Passed.</strong>
          <span class="gate-detail"></span>
        </div>`;
    }
    if (summary.status === "Revise") {
      return `
        <div class="banner gate-banner gate-revise">
          <strong>Revise.</strong>
          <span class="gate-detail"></span>
          <p class="weakest-intro">Weakest targets first; discuss these before the next pass:</p>
          <ol class="weakest-list"></ol>
        </div>`;
    }
    return `
      <div class="banner gate-banner gate-pending">
        <strong>Gate pending.</strong>
        <span class="gate-detail"></span>
        <button type="button" class="gate-btn">Run the gate</button>
        ${this.gateNotice !== null ? `<p class="gate-notice"></p>` : ""}
      </div>`;
  }

  private heatmapHtml(view: AgreementView): string {
    const heads = TARGETS.map(() => `<th class="target-head"></th>`).join("");
    const rows = view.pairs
      .map((_, row) => {
        const cells = TARGETS.map(
          (__, col) =>
            `<td class="kappa-cell" data-row="${row}" data-col="${col}"></td>`,
        ).join("");
        return `<tr><th class="pair-head" data-row="${row}"></th>${cells}<td class="overlap-cell" data-row="${row}"></td></tr>`;
      })
      .join("");
    const avgCells = TARGETS.map(
      (__, col) => `<td class="avg-cell" data-col="${col}"></td>`,
    ).join("");
    return `
      <table class="heatmap">
        <thead>
          <tr><th>pair</th>${heads}<th>overlap</th></tr>
        </thead>
        <tbody>${rows}</tbody>
        <tfoot>
          <tr><th>average</th>${avgCells}<td class="overall-cell"></td></tr>
        </tfoot>
      </table>`;
  }

  private adjudicationHtml(): string {
    if (this.votes === null) {
      return "";
    }
    const items = this.votes.ties
      .map(
        (_, i) => `
          <li class="tie-item" data-tie="${i}">
            <span class="tie-comment"></span>
            <span class="tie-targets"></span>
            <span class="tie-terms"></span>
          </li>`,
      )
      .join("");
    return `
      <section class="adjudication">
        <h2>Adjudication queue</h2>
        ${
          this.votes.ties.length === 0
            ? `<p class="no-ties">No tie-flagged comments.</p>`
            : `<ul class="tie-list">${items}</ul>`
        }
      </section>`;
  }

  private fillDynamicText(summary: RoundSummary, view: AgreementView): void {
    for (const [col, target] of TARGETS.entries()) {
      const head = this.root.querySelectorAll<HTMLElement>(".target-head")[col];
      if (head !== undefined) {
        head.textContent = target.slug;
      }
    }
    for (const [row, pair] of view.pairs.entries()) {
      this.setText(`.pair-head[data-row="${row}"]`, `${pair.a} × ${pair.b}`);
      this.setText(`.overlap-cell[data-row="${row}"]`, pair.overlap.raw);
      for (const [col, target] of TARGETS.entries()) {
        const cell = this.root.querySelector<HTMLElement>(
          `.kappa-cell[data-row="${row}"][data-col="${col}"]`,
        );
        if (cell !== null) {
          paintKappa(cell, pair.kappas[target.slug] ?? null);
        }
      }
    }
    for (const [col, target] of TARGETS.entries()) {
      const cell = this.root.querySelector<HTMLElement>(`.avg-cell[data-col="${col}"]`);
      if (cell !== null) {
        paintKappa(cell, view.perTarget[target.slug] ?? null);
      }
    }
    const overallCell = this.root.querySelector<HTMLElement>(".overall-cell");
    if (overallCell !== null) {
      overallCell.textContent =
        view.overall === null ? "n/a" : `k̄ ${view.overall.raw}`;
    }
    this.setText(
      ".undefined-note",
      `${view.undefinedCount.raw} undefined pair kappas excluded from averages.`,
    );

    const threshold = String(summary.kappaThreshold);
    const overallRaw = view.overall === null ? "n/a" : view.overall.raw;
    if (summary.status === "Passed") {
      this.setText(
        ".gate-detail",
        `Average kappa ${overallRaw} is above the ${threshold} threshold. Votes are final.`,
      );
    } else if (summary.status === "Revise") {
      this.setText(
        ".gate-detail",
        `Average kappa ${overallRaw} did not exceed the ${threshold} threshold.`,
      );
      this.fillWeakestList(view);
    } else {
      this.setText(
        ".gate-detail",
        `Average kappa must exceed ${threshold} before votes can be finalized.`,
      );
      if (this.gateNotice !== null) {
        this.setText(".gate-notice", this.gateNotice);
      }
    }

    if (this.votes !== null) {
      const byComment = new Map(this.votes.votes.map((v) => [v.commentId, v]));
      for (const [i, tie] of this.votes.ties.entries()) {
        const item = this.root.querySelector<HTMLElement>(`.tie-item[data-tie="${i}"]`);
        if (item === null) {
          continue;
        }
        const vote = byComment.get(tie.commentId);
        const comment = item.querySelector<HTMLElement>(".tie-comment");
        const targets = item.querySelector<HTMLElement>(".tie-targets");
        const terms = item.querySelector<HTMLElement>(".tie-terms");
        if (comment !== null) {
          comment.textContent = tie.commentId;
        }
        if (targets !== null) {
          targets.textContent = `tied on ${tie.targets.join(", ")}`;
        }
        if (terms !== null && vote !== undefined) {
          terms.textContent =
            vote.terms.length > 0 ? `current vote: ${vote.terms.join(", ")}` : "current vote: no terms";
        }
      }
    }
  }

  /** Defined per-target averages, weakest first. */
  private fillWeakestList(view: AgreementView): void {
    const list = this.root.querySelector<HTMLElement>(".weakest-list");
    if (list === null) {
      return;
    }
    const defined = TARGETS.map((t) => ({
      slug: t.slug,
      kappa: view.perTarget[t.slug] ?? null,
    })).filter((entry): entry is { slug: string; kappa: RawNum } => entry.kappa !== null);
    defined.sort((a, b) => a.kappa.value - b.kappa.value);
    for (const entry of defined) {
      const item = document.createElement("li");
      item.className = "weakest-item";
      item.textContent = `${entry.slug}: ${entry.kappa.raw}`;
      list.appendChild(item);
    }
  }

  private setText(selector: string, text: string): void {
    const node = this.root.querySelector<HTMLElement>(selector);
    if (node !== null) {
      node.textContent = text;
    }
  }
}

/** Cell text is the service's number lexeme; color is presentation only. */
function paintKappa(cell: HTMLElement, kappa: RawNum | null): void {
  if (kappa === null) {
    cell.textContent = "n/a";
    cell.classList.add("kappa-undefined");
    return;
  }
  cell.textContent = kappa.raw;
  const clamped = Math.max(-1, Math.min(1, kappa.value));
  const hue = Math.round(((clamped + 1) / 2) * 120);
  cell.style.backgroundColor = `hsl(${hue}, 55%, 24%)`;
}
