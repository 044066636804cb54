/**
 * Interval poller with failure backoff.
 *
 * On consecutive errors the effective interval doubles (capped), and the
 * error handler receives the failure count so views can show a stale-data
 * banner; the first success resets the cadence.
 */

export interface PollerHandlers<T> {
  onData: (data: T) => void;
  onError: (error: unknown, consecutiveFailures: number) => void;
}

export class Poller<T> {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private stopped = true;
  private failures = 0;

  constructor(
    private readonly fetchFn: () => Promise<T>,
    private readonly intervalMs: number,
    private readonly handlers: PollerHandlers<T>,
    private readonly maxBackoffMs: number = 60_000,
  ) {}

  get consecutiveFailures(): number {
    return this.failures;
  }

  start(): void {
    this.stopped = false;
    void this.run();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
  }

  private currentDelay(): number {
    if (this.failures === 0) return this.intervalMs;
    return Math.min(this.intervalMs * 2 ** this.failures, this.maxBackoffMs);
  }

  private async run(): Promise<void> {
    if (this.stopped) return;
    try {
      const data = await this.fetchFn();
      this.failures = 0;
      if (!this.stopped) this.handlers.onData(data);
    } catch (error) {
      this.failures += 1;
      if (!this.stopped) this.handlers.onError(error, this.failures);
    }
    if (!this.stopped) {
      this.timer = setTimeout(() => void this.run(), this.currentDelay());
    }
  }
}
