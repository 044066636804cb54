import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { mountWaveformView, plotPath } from "../src/views/waveform.js";
import { fixtures, flushPromises, stubFetch } from "./helpers.js";

let container: HTMLElement;
let cleanup: (() => void) | null = null;

const RID = fixtures.detail.recording_id as string;

beforeEach(() => {
  container = document.createElement("div");
  document.body.append(container);
});

afterEach(() => {
  cleanup?.();
  cleanup = null;
  container.remove();
  vi.unstubAllGlobals();
  vi.useRealTimers();
});

function happyRoutes(results: () => { status: number; body: unknown }) {
  return {
    [`GET /v1/recordings/${RID}`]: () => ({ status: 200, body: fixtures.detail }),
    [`GET /v1/recordings/${RID}/waveform`]: () => ({ status: 200, body: fixtures.waveform }),
    [`GET /v1/results/${RID}`]: results,
  };
}

describe("waveform view", () => {
  it("plots the trace and renders one card per model, values verbatim", async () => {
    stubFetch(happyRoutes(() => ({ status: 200, body: fixtures.results_done })));
    cleanup = mountWaveformView(container, new ApiClient("http://api"), RID, 60_000);
    await flushPromises();
    await flushPromises();

    const polyline = container.querySelector("polyline");
    expect(polyline).not.toBeNull();
    const points = polyline!.getAttribute("points")!.split(" ");
    expect(points.length).toBe(fixtures.waveform.samples.length);

    const cards = [...container.querySelectorAll(".card.model")];
    expect(cards.length).toBe(fixtures.results_done.models.length);
    for (const model of fixtures.results_done.models) {
      const card = container.querySelector(`[data-model="${model.model_id}"]`)!;
      // Displayed numbers must be the API's values verbatim - no rounding,
      // no recomputation.
      expect(card.querySelector('[data-field="probability"]')!.textContent).toBe(
        String(model.probability),
      );
      expect(card.querySelector('[data-field="threshold"]')!.textContent).toBe(
        String(model.threshold),
      );
      for (const [stage, value] of Object.entries(model.timings)) {
        expect(card.querySelector(`[data-stage="${stage}"]`)!.textContent).toBe(String(value));
      }
    }
  });

  it("auto-refreshes pending cards until the status turns terminal", async () => {
    vi.useFakeTimers();
    let state = "pending";
    const calls = stubFetch(
      happyRoutes(() =>
        state === "pending"
          ? { status: 200, body: { recording_id: RID, status: "pending", models: [] } }
          : { status: 200, body: fixtures.results_done },
      ),
    );
    cleanup = mountWaveformView(container, new ApiClient("http://api"), RID, 2000);
    await vi.advanceTimersByTimeAsync(1);
    expect(container.querySelector('[data-role="pending"]')).not.toBeNull();

    state = "done";
    await vi.advanceTimersByTimeAsync(2001);
    expect(container.querySelector('[data-role="pending"]')).toBeNull();
    expect(container.querySelectorAll(".card.model").length).toBe(3);

    const resultCalls = calls.filter((c) => c.url.includes("/v1/results/")).length;
    await vi.advanceTimersByTimeAsync(10_000);
    const after = calls.filter((c) => c.url.includes("/v1/results/")).length;
    expect(after).toBe(resultCalls); // polling stopped once terminal
  });

  it("shows the rejection reason card without probabilities", async () => {
    const rej = fixtures.results_rejected;
    stubFetch({
      [`GET /v1/recordings/${rej.recording_id}`]: () => ({ status: 200, body: fixtures.detail }),
      [`GET /v1/recordings/${rej.recording_id}/waveform`]: () => ({
        status: 200,
        body: fixtures.waveform,
      }),
      [`GET /v1/results/${rej.recording_id}`]: () => ({ status: 200, body: rej }),
    });
    cleanup = mountWaveformView(container, new ApiClient("http://api"), rej.recording_id, 60_000);
    await flushPromises();
    await flushPromises();
    const card = container.querySelector('[data-role="rejection"]')!;
    expect(card.textContent).toContain("rejected");
    expect(card.textContent).toContain(rej.reason);
    expect(container.querySelectorAll(".card.model").length).toBe(0);
  });

  it("renders a not-found view on 404", async () => {
    stubFetch({});
    cleanup = mountWaveformView(container, new ApiClient("http://api"), "0".repeat(64), 60_000);
    await flushPromises();
    await flushPromises();
    expect(container.querySelector('[data-role="not-found"]')).not.toBeNull();
  });

  it("plotPath maps samples into the viewbox without dropping any", () => {
    const path = plotPath([0, 1, -1, 0.5], 100);
    expect(path.split(" ").length).toBe(4);
    for (const pair of path.split(" ")) {
      const [x, y] = pair.split(",").map(Number);
      expect(x).toBeGreaterThanOrEqual(0);
      expect(x).toBeLessThanOrEqual(860);
      expect(y).toBeGreaterThanOrEqual(0);
      expect(y).toBeLessThanOrEqual(260);
    }
  });
});
