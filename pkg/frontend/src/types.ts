/** Response shapes of the platform API (mirrors its published schemas). */

export type DeviceKind = "apple_watch" | "kardia" | "fitbit";
export type RecordingStatus = "pending" | "done" | "rejected" | "failed";

export interface IngestResponse {
  recording_id: string;
  study_id: string;
  duplicate: boolean;
}

export interface RecordingEntry {
  index_seq: number;
  recording_id: string;
  device: DeviceKind;
  study_id: string;
  received_at: string;
  status: RecordingStatus;
}

export interface RecordingList {
  entries: RecordingEntry[];
}

export interface RecordingDetail extends RecordingEntry {
  recorded_at: string;
  sample_rate_hz: number;
  lead: string;
  duration_seconds: number;
  n_samples: number;
}

export interface Waveform {
  recording_id: string;
  device: DeviceKind;
  sample_rate_hz: number;
  unit: "mV";
  samples: number[];
}

export interface StageTimings {
  acquisition_s: number;
  upload_s: number;
  pickup_s: number;
  inference_s: number;
  publish_s: number;
  total_s: number;
}

export interface ModelPrediction {
  model_id: string;
  probability: number;
  label: boolean;
  threshold: number;
  timings: StageTimings;
  produced_at: string;
}

export interface ModelError {
  model_id: string;
  error: string;
  detail?: string;
  produced_at: string;
}

export type ModelResult = ModelPrediction | ModelError;

export function isPrediction(result: ModelResult): result is ModelPrediction {
  return (result as ModelPrediction).probability !== undefined;
}

export interface ResultsResponse {
  recording_id: string;
  status: RecordingStatus;
  reason?: string;
  models: ModelResult[];
}

export interface TimelineItem {
  recording: RecordingDetail;
  status: RecordingStatus;
  models: ModelResult[];
}

export interface Timeline {
  study_id: string;
  items: TimelineItem[];
}

export interface Health {
  status: "ok" | "degraded";
  lake: { reachable: boolean; entries: number };
  poller: { alive: boolean; last_tick_at: string | null; last_tick_age_s: number | null };
}

export interface ApiErrorBody {
  error: string;
  detail?: string;
}
