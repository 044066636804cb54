/** Hash router wiring the views together; one view mounted at a time. */

import { ApiClient } from "./api.js";
import { clear, el } from "./dom.js";
import { mountRecordingsView } from "./views/recordings.js";
import { mountSubmitView } from "./views/submit.js";
import { mountTimelineView } from "./views/timeline.js";
import { mountWaveformView } from "./views/waveform.js";

export class App {
  private cleanup: (() => void) | null = null;
  private readonly outlet: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {
    const nav = el("nav", {}, [
      el("a", { href: "#/recordings", class: "brand" }, ["ecgflow"]),
      el("a", { href: "#/recordings" }, ["Recordings"]),
      el("a", { href: "#/submit" }, ["Submit"]),
    ]);
    this.outlet = el("main", { "data-role": "outlet" });
    this.root.append(nav, this.outlet);
  }

  start(): void {
    window.addEventListener("hashchange", () => this.render());
    this.render();
  }

  render(): void {
    if (this.cleanup) this.cleanup();
    clear(this.outlet);
    const hash = window.location.hash || "#/recordings";
    const parts = hash.replace(/^#\//, "").split("/");
    if (parts[0] === "recordings" && parts[1]) {
      this.cleanup = mountWaveformView(this.outlet, this.api, parts[1]);
    } else if (parts[0] === "submit") {
      this.cleanup = mountSubmitView(this.outlet, this.api);
    } else if (parts[0] === "studies" && parts[1]) {
      this.cleanup = mountTimelineView(this.outlet, this.api, parts[1]);
    } else {
      this.cleanup = mountRecordingsView(this.outlet, this.api);
    }
  }
}
