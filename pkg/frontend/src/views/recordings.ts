/**
 * Recordings list: newest first, device filter tabs, live via polling.
 * When the API is unreachable a stale-data banner appears and polling backs
 * off; the list keeps showing the last good data.
 */

import { ApiClient } from "../api.js";
import { clear, deviceLabel, el } from "../dom.js";
import { Poller } from "../poller.js";
import type { DeviceKind, RecordingEntry, RecordingList } from "../types.js";

const FILTERS: Array<{ key: DeviceKind | null; label: string }> = [
  { key: null, label: "All devices" },
  { key: "apple_watch", label: "Apple Watch" },
  { key: "kardia", label: "Kardia" },
  { key: "fitbit", label: "Fitbit" },
];

export function mountRecordingsView(
  container: HTMLElement,
  api: ApiClient,
  pollMs = 5000,
): () => void {
  let device: DeviceKind | null = null;

  const banner = el("div", { class: "banner hidden", "data-role": "stale-banner" });
  const tabs = el("div", { class: "tabs" });
  const tbody = el("tbody", { "data-role": "rows" });
  const table = el("table", { class: "recordings" }, [
    el("thead", {}, [
      el("tr", {}, [
        el("th", {}, ["#"]),
        el("th", {}, ["Device"]),
        el("th", {}, ["Study"]),
        el("th", {}, ["Received"]),
        el("th", {}, ["Status"]),
      ]),
    ]),
    tbody,
  ]);
  container.append(el("h1", {}, ["Recordings"]), banner, tabs, table);

  function renderRows(list: RecordingList): void {
    clear(tbody);
    const newestFirst = [...list.entries].sort((a, b) => b.index_seq - a.index_seq);
    for (const entry of newestFirst) {
      tbody.append(renderRow(entry));
    }
    if (!newestFirst.length) {
      tbody.append(el("tr", {}, [el("td", { colspan: "5", class: "empty" }, ["no recordings yet"])]));
    }
  }

  function renderRow(entry: RecordingEntry): HTMLTableRowElement {
    const link = el("a", { href: `#/recordings/${entry.recording_id}` }, [
      entry.recording_id.slice(0, 12),
    ]);
    return el("tr", { "data-recording": entry.recording_id }, [
      el("td", {}, [link]),
      el("td", {}, [el("span", { class: `badge ${entry.device}` }, [deviceLabel(entry.device)])]),
      el("td", {}, [el("a", { href: `#/studies/${entry.study_id}` }, [entry.study_id])]),
      el("td", {}, [entry.received_at]),
      el("td", { class: `status ${entry.status}` }, [entry.status]),
    ]);
  }

  const poller = new Poller<RecordingList>(
    () => api.listRecordings(device),
    pollMs,
    {
      onData: (list) => {
        banner.classList.add("hidden");
        renderRows(list);
      },
      onError: (_error, failures) => {
        banner.textContent = `API unreachable (attempt ${failures}); showing stale data, retrying...`;
        banner.classList.remove("hidden");
      },
    },
  );

  for (const { key, label } of FILTERS) {
    const button = el("button", { class: key === device ? "tab active" : "tab" }, [label]);
    button.addEventListener("click", () => {
      device = key;
      tabs.querySelectorAll("button").forEach((b) => b.classList.remove("active"));
      button.classList.add("active");
      poller.stop();
      poller.start();
    });
    tabs.append(button);
  }

  poller.start();
  return () => poller.stop();
}
