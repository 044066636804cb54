/** Study timeline: one study's recordings and results, by recorded_at. */

import { ApiClient, ApiError } from "../api.js";
import { clear, deviceLabel, el } from "../dom.js";
import { isPrediction } from "../types.js";

export function mountTimelineView(
  container: HTMLElement,
  api: ApiClient,
  studyId: string,
): () => void {
  container.append(el("h1", {}, [`Study ${studyId}`]));
  const list = el("div", { class: "timeline", "data-role": "timeline" });
  container.append(list);

  void (async () => {
    try {
      const timeline = await api.timeline(studyId);
      clear(list);
      if (!timeline.items.length) {
        list.append(el("p", { class: "empty" }, ["no recordings for this study yet"]));
      }
      for (const item of timeline.items) {
        const summary = item.models
          .map((m) =>
            isPrediction(m) ? `${m.model_id}=${String(m.probability)}` : `${m.model_id}: ${m.error}`,
          )
          .join("  ");
        list.append(
          el("div", { class: "timeline-item" }, [
            el("a", { href: `#/recordings/${item.recording.recording_id}` }, [
              item.recording.recorded_at,
            ]),
            el("span", { class: "badge" }, [deviceLabel(item.recording.device)]),
            el("span", { class: `status ${item.status}` }, [item.status]),
            el("span", { class: "summary" }, [summary]),
          ]),
        );
      }
    } catch (error) {
      clear(list);
      if (error instanceof ApiError && error.status === 404) {
        list.append(el("p", { "data-role": "not-found" }, ["study not found"]));
      } else {
        list.append(el("p", { class: "banner" }, [`failed to load timeline: ${String(error)}`]));
      }
    }
  })();

  return () => undefined;
}
