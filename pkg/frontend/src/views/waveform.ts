/**
 * Waveform page: the plotted trace plus one prediction card per model.
 *
 * The plot maps samples to pixels; every number shown in the cards is the
 * API response value rendered verbatim (String(value)), never recomputed.
 * Pending cards auto-refresh until the recording reaches a terminal state.
 */

import { ApiClient, ApiError } from "../api.js";
import { clear, deviceLabel, el } from "../dom.js";
import { Poller } from "../poller.js";
import type { ModelResult, ResultsResponse, StageTimings, Waveform } from "../types.js";
import { isPrediction } from "../types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const PLOT_W = 860;
const PLOT_H = 260;
const PAD = 12;

export function plotPath(samples: number[], rateHz: number): string {
  let min = Infinity;
  let max = -Infinity;
  for (const v of samples) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
  const span = max - min || 1;
  const n = samples.length;
  const points: string[] = [];
  for (let i = 0; i < n; i++) {
    const x = PAD + ((PLOT_W - 2 * PAD) * i) / Math.max(n - 1, 1);
    const y = PLOT_H - PAD - ((PLOT_H - 2 * PAD) * (samples[i] - min)) / span;
    points.push(`${x.toFixed(2)},${y.toFixed(2)}`);
  }
  void rateHz;
  return points.join(" ");
}

function renderPlot(waveform: Waveform): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${PLOT_W} ${PLOT_H}`);
  svg.setAttribute("class", "waveform-plot");
  const polyline = document.createElementNS(SVG_NS, "polyline");
  polyline.setAttribute("points", plotPath(waveform.samples, waveform.sample_rate_hz));
  polyline.setAttribute("fill", "none");
  polyline.setAttribute("stroke", "#0a7");
  polyline.setAttribute("stroke-width", "1");
  svg.append(polyline);
  return svg;
}

function timingsList(timings: StageTimings): HTMLElement {
  const rows: Array<[string, number]> = [
    ["acquisition_s", timings.acquisition_s],
    ["upload_s", timings.upload_s],
    ["pickup_s", timings.pickup_s],
    ["inference_s", timings.inference_s],
    ["publish_s", timings.publish_s],
    ["total_s", timings.total_s],
  ];
  return el(
    "dl",
    { class: "timings" },
    rows.flatMap(([name, value]) => [
      el("dt", {}, [name]),
      el("dd", { "data-stage": name }, [String(value)]),
    ]),
  );
}

function modelCard(result: ModelResult): HTMLElement {
  if (!isPrediction(result)) {
    return el("div", { class: "card model error", "data-model": result.model_id }, [
      el("h3", {}, [result.model_id]),
      el("p", { class: "error-code" }, [result.error]),
      el("p", {}, [result.detail ?? ""]),
    ]);
  }
  return el("div", { class: "card model", "data-model": result.model_id }, [
    el("h3", {}, [result.model_id]),
    el("p", { class: "probability", "data-field": "probability" }, [String(result.probability)]),
    el("p", { class: result.label ? "label positive" : "label negative" }, [
      result.label ? "positive" : "negative",
    ]),
    el("p", { class: "threshold" }, ["threshold ", el("span", { "data-field": "threshold" }, [String(result.threshold)])]),
    timingsList(result.timings),
  ]);
}

function renderCards(section: HTMLElement, results: ResultsResponse): void {
  clear(section);
  if (results.status === "pending") {
    section.append(
      el("div", { class: "card pending", "data-role": "pending" }, [
        el("div", { class: "spinner" }),
        el("p", {}, ["analysis pending - the pipeline picks new data up on its next poll"]),
      ]),
    );
    return;
  }
  if (results.status === "rejected" || results.status === "failed") {
    section.append(
      el("div", { class: "card rejected", "data-role": "rejection" }, [
        el("h3", {}, [results.status]),
        el("p", {}, [results.reason ?? "no reason recorded"]),
      ]),
    );
    return;
  }
  for (const result of results.models) {
    section.append(modelCard(result));
  }
}

export function mountWaveformView(
  container: HTMLElement,
  api: ApiClient,
  recordingId: string,
  pollMs = 2000,
): () => void {
  const title = el("h1", {}, ["Recording"]);
  const meta = el("p", { class: "meta" });
  const plotHolder = el("div", { class: "plot-holder" });
  const cards = el("div", { class: "cards", "data-role": "cards" });
  container.append(title, meta, plotHolder, cards);

  const poller = new Poller<ResultsResponse>(
    () => api.results(recordingId),
    pollMs,
    {
      onData: (results) => {
        renderCards(cards, results);
        if (results.status !== "pending") poller.stop();
      },
      onError: () => {
        /* keep last cards; list view owns the global banner */
      },
    },
  );

  void (async () => {
    try {
      const [detail, waveform] = await Promise.all([
        api.recordingDetail(recordingId),
        api.waveform(recordingId),
      ]);
      title.textContent = `${deviceLabel(detail.device)} recording ${recordingId.slice(0, 12)}`;
      meta.textContent =
        `study ${detail.study_id} | ${String(detail.n_samples)} samples @ ` +
        `${String(detail.sample_rate_hz)} Hz | recorded ${detail.recorded_at} | lead ${detail.lead}`;
      plotHolder.append(renderPlot(waveform));
      poller.start();
    } catch (error) {
      clear(container);
      if (error instanceof ApiError && error.status === 404) {
        container.append(
          el("div", { class: "not-found", "data-role": "not-found" }, [
            el("h1", {}, ["Not found"]),
            el("p", {}, [`recording ${recordingId} does not exist`]),
          ]),
        );
      } else {
        container.append(el("div", { class: "banner" }, [`failed to load recording: ${String(error)}`]));
      }
    }
  })();

  return () => poller.stop();
}
