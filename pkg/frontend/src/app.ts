/** Hash-routed shell tying the task view and the round dashboard together. */

import { HatescopeClient } from "./api.js";
import { RoundDashboard } from "./dashboard.js";
import { TaskView } from "./taskView.js";

export type Route =
  | { kind: "home" }
  | { kind: "annotate"; roundId: string; annotator: string }
  | { kind: "dashboard"; roundId: string };

export function parseRoute(hash: string): Route {
  const parts = hash.replace(/^#\/?/, "").split("/");
  if (parts[0] === "annotate" && parts.length === 3) {
    return {
      kind: "annotate",
      roundId: decodeURIComponent(parts[1]),
      annotator: decodeURIComponent(parts[2]),
    };
  }
  if (parts[0] === "dashboard" && parts.length === 2) {
    return { kind: "dashboard", roundId: decodeURIComponent(parts[1]) };
  }
  return { kind: "home" };
}

export class App {
  constructor(
    private readonly root: HTMLElement,
    private readonly client: HatescopeClient,
  ) {}

  start(): void {
    window.addEventListener("hashchange", () => {
      void this.route(window.location.hash);
    });
    void this.route(window.location.hash);
  }

  async route(hash: string): Promise<void> {
    const route = parseRoute(hash);
    if (route.kind === "annotate") {
      const view = new TaskView(this.root, this.client, route.roundId, route.annotator);
      await view.start();
      return;
    }
    if (route.kind === "dashboard") {
      const dashboard = new RoundDashboard(this.root, this.client, route.roundId);
      await dashboard.refresh();
      return;
    }
    this.renderHome();
  }

  private renderHome(): void {
    this.root.innerHTML = `
      <div class="home">
        <h1>hatescope workbench</h1>
        <p class="home-hint">
          Label comments per target, then watch agreement and run the gate.
        </p>
        <form class="open-form">
          <label>Round id
            <input type="text" name="round" placeholder="round-…" required>
          </label>
          <label>Annotator
            <input type="text" name="annotator" placeholder="your id">
          </label>
          <div class="home-actions">
            <button type="submit" class="annotate-btn">Annotate</button>
            <button type="button" class="dashboard-btn">Dashboard</button>
          </div>
        </form>
        <p class="api-note">service: <code class="api-base"></code></p>
      </div>`;
    const base = this.root.querySelector<HTMLElement>(".api-base");
    if (base !== null) {
      base.textContent = this.client.baseUrl === "" ? "same origin" : this.client.baseUrl;
    }
    const form = this.root.querySelector<HTMLFormElement>(".open-form");
    const roundInput = this.root.querySelector<HTMLInputElement>("input[name=round]");
    const annotatorInput = this.root.querySelector<HTMLInputElement>("input[name=annotator]");
    form?.addEventListener("submit", (event) => {
      event.preventDefault();
      const round = roundInput?.value.trim() ?? "";
      const annotator = annotatorInput?.value.trim() ?? "";
      if (round !== "" && annotator !== "") {
        window.location.hash = `#/annotate/${encodeURIComponent(round)}/${encodeURIComponent(annotator)}`;
      }
    });
    this.root.querySelector<HTMLButtonElement>(".dashboard-btn")?.addEventListener("click", () => {
      const round = roundInput?.value.trim() ?? "";
      if (round !== "") {
        window.location.hash = `#/dashboard/${encodeURIComponent(round)}`;
      }
    });
  }
}
