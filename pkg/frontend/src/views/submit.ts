/**
 * Submit page: pick a device-format file plus an external id, POST it, and
 * jump to the new recording's page. Parser rejections (422) are surfaced
 * verbatim; duplicates link to the already-ingested recording.
 */

import { ApiClient, ApiError } from "../api.js";
import { clear, el } from "../dom.js";
import type { DeviceKind } from "../types.js";

export function mountSubmitView(
  container: HTMLElement,
  api: ApiClient,
  navigate: (hash: string) => void = (hash) => {
    window.location.hash = hash;
  },
): () => void {
  const deviceSelect = el("select", { "data-role": "device" }, []);
  for (const value of ["apple_watch", "kardia", "fitbit"]) {
    deviceSelect.append(el("option", { value }, [value]));
  }
  const externalInput = el("input", {
    type: "text",
    placeholder: "external id (never stored with the ECG)",
    "data-role": "external-id",
  });
  const fileInput = el("input", { type: "file", "data-role": "file" });
  const submitButton = el("button", { type: "submit" }, ["Submit for analysis"]);
  const notice = el("div", { class: "notice hidden", "data-role": "notice" });

  const form = el("form", { class: "submit-form" }, [
    el("label", {}, ["Device", deviceSelect]),
    el("label", {}, ["External id", externalInput]),
    el("label", {}, ["Recording file", fileInput]),
    submitButton,
  ]);
  container.append(el("h1", {}, ["Submit an ECG"]), form, notice);

  function showNotice(kind: string, children: (Node | string)[]): void {
    clear(notice);
    notice.className = `notice ${kind}`;
    notice.append(...children);
  }

  // File.arrayBuffer is missing in some environments (older WebKit, jsdom)
  async function readFileBytes(file: File): Promise<Uint8Array> {
    if (typeof file.arrayBuffer === "function") {
      return new Uint8Array(await file.arrayBuffer());
    }
    return new Promise((resolve, reject) => {
      const reader = new FileReader();
      reader.onload = () => resolve(new Uint8Array(reader.result as ArrayBuffer));
      reader.onerror = () => reject(reader.error);
      reader.readAsArrayBuffer(file);
    });
  }

  async function onSubmit(event: Event): Promise<void> {
    event.preventDefault();
    const file = fileInput.files?.[0];
    const externalId = externalInput.value.trim();
    if (!file || !externalId) {
      showNotice("error", ["choose a file and enter an external id"]);
      return;
    }
    submitButton.disabled = true;
    try {
      const payload = await readFileBytes(file);
      const device = deviceSelect.value as DeviceKind;
      const { body } = await api.submitRecording(payload, device, externalId);
      if (body.duplicate) {
        showNotice("duplicate", [
          "already ingested: ",
          el("a", { href: `#/recordings/${body.recording_id}` }, [body.recording_id.slice(0, 12)]),
        ]);
      } else {
        navigate(`#/recordings/${body.recording_id}`);
      }
    } catch (error) {
      if (error instanceof ApiError) {
        showNotice("error", [
          el("strong", { "data-role": "error-code" }, [error.body.error]),
          el("span", { "data-role": "error-detail" }, [
            error.body.detail ? ` ${error.body.detail}` : "",
          ]),
        ]);
      } else {
        showNotice("error", [`upload failed: ${String(error)}`]);
      }
    } finally {
      submitButton.disabled = false;
    }
  }

  form.addEventListener("submit", (event) => void onSubmit(event));
  return () => undefined;
}
