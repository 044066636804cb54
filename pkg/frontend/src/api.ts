/**
 * Typed client for the platform API.
 *
 * Concurrent in-flight GETs for the same URL are coalesced into one fetch,
 * so overlapping view refreshes never stampede the backend.
 */

import type {
  ApiErrorBody,
  DeviceKind,
  Health,
  IngestResponse,
  RecordingDetail,
  RecordingList,
  ResultsResponse,
  Timeline,
  Waveform,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiErrorBody,
  ) {
    super(`${body.error}${body.detail ? `: ${body.detail}` : ""}`);
  }
}

export class ApiClient {
  private inflight = new Map<string, Promise<unknown>>();

  constructor(private readonly baseUrl: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const url = this.baseUrl + path;
    const existing = this.inflight.get(url);
    if (existing) return existing as Promise<T>;
    const promise = (async () => {
      const resp = await fetch(url);
      const body = await resp.json();
      if (!resp.ok) throw new ApiError(resp.status, body as ApiErrorBody);
      return body as T;
    })();
    this.inflight.set(url, promise);
    try {
      return await promise;
    } finally {
      this.inflight.delete(url);
    }
  }

  listRecordings(device?: DeviceKind | null, since = 0): Promise<RecordingList> {
    const params = new URLSearchParams({ since: String(since) });
    if (device) params.set("device", device);
    return this.getJson(`/v1/recordings?${params}`);
  }

  recordingDetail(recordingId: string): Promise<RecordingDetail> {
    return this.getJson(`/v1/recordings/${recordingId}`);
  }

  waveform(recordingId: string): Promise<Waveform> {
    return this.getJson(`/v1/recordings/${recordingId}/waveform`);
  }

  results(recordingId: string): Promise<ResultsResponse> {
    return this.getJson(`/v1/results/${recordingId}`);
  }

  timeline(studyId: string): Promise<Timeline> {
    return this.getJson(`/v1/studies/${studyId}/timeline`);
  }

  health(): Promise<Health> {
    return this.getJson("/v1/health");
  }

  async submitRecording(
    payload: Uint8Array | string,
    device: DeviceKind,
    externalId: string,
  ): Promise<{ status: number; body: IngestResponse }> {
    const requestBody: BodyInit =
      typeof payload === "string" ? payload : new Blob([payload as BlobPart]);
    const resp = await fetch(`${this.baseUrl}/v1/recordings`, {
      method: "POST",
      headers: {
        "X-Device-Kind": device,
        "X-External-Id": externalId,
        "Content-Type": "application/octet-stream",
      },
      body: requestBody,
    });
    const body = await resp.json();
    if (!resp.ok) throw new ApiError(resp.status, body as ApiErrorBody);
    return { status: resp.status, body: body as IngestResponse };
  }
}
