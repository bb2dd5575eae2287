/** Debounce + single-in-flight render scheduling.
 *
 * The UI issues at most one request per debounce window and keeps at most
 * one request in flight; stale responses are dropped by sequence number so
 * the latest slider value always wins.
 */

export type Clock = {
  setTimeout: (fn: () => void, ms: number) => unknown;
  clearTimeout: (handle: unknown) => void;
};

const realClock: Clock = {
  setTimeout: (fn, ms) => setTimeout(fn, ms),
  clearTimeout: (h) => clearTimeout(h as Parameters<typeof clearTimeout>[0]),
};

export class Debouncer<T> {
  private handle: unknown = null;
  private pending: T | undefined;

  constructor(
    private readonly delayMs: number,
    private readonly fire: (value: T) => void,
    private readonly clock: Clock = realClock,
  ) {}

  /** Schedule `value`; earlier unsent values in the window are replaced. */
  push(value: T): void {
    this.pending = value;
    if (this.handle !== null) {
      this.clock.clearTimeout(this.handle);
    }
    this.handle = this.clock.setTimeout(() => {
      this.handle = null;
      this.fire(this.pending as T);
    }, this.delayMs);
  }

  /** Fire immediately (e.g. slider release), cancelling the timer. */
  flush(): void {
    if (this.handle !== null) {
      this.clock.clearTimeout(this.handle);
      this.handle = null;
      this.fire(this.pending as T);
    }
  }
}

export interface RenderOutcome<R> {
  seq: number;
  result: R;
}

/**
 * Serialize render requests: one in flight, newest queued request wins.
 * `submit` resolves through `onResult` only for non-stale responses.
 */
export class RenderQueue<Q, R> {
  private seq = 0;
  private delivered = 0;
  private inFlight = false;
  private queued: Q | null = null;

  constructor(
    private readonly send: (request: Q) => Promise<R>,
    private readonly onResult: (outcome: RenderOutcome<R>) => void,
    private readonly onError: (err: unknown) => void = () => undefined,
  ) {}

  get busy(): boolean {
    return this.inFlight;
  }

  submit(request: Q): void {
    if (this.inFlight) {
      this.queued = request; // latest value wins
      return;
    }
    void this.dispatch(request);
  }

  private async dispatch(request: Q): Promise<void> {
    const seq = ++this.seq;
    this.inFlight = true;
    try {
      const result = await this.send(request);
      if (seq > this.delivered) {
        this.delivered = seq;
        this.onResult({ seq, result });
      }
    } catch (err) {
      this.onError(err);
    } finally {
      this.inFlight = false;
      if (this.queued !== null) {
        const next = this.queued;
        this.queued = null;
        void this.dispatch(next);
      }
    }
  }
}
