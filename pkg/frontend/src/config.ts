/** One setting: the API base URL (empty string means same origin). */

declare global {
  interface Window {
    ECGFLOW_API_BASE?: string;
  }
}

export function apiBase(): string {
  return window.ECGFLOW_API_BASE ?? "";
}
