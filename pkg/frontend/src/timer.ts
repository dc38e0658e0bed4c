// Active-time tracking for trial mode: the clock runs only while the tab
// has focus; blur pauses it, focus resumes. Submitted elapsed_seconds is
// the accumulated active time only.

export class ActiveTimer {
  private accumulatedMs = 0;
  private runningSince: number | null = null;
  private now: () => number;
  private detach: (() => void) | null = null;

  constructor(now: () => number = () => Date.now()) {
    this.now = now;
  }

  start(): void {
    if (this.runningSince === null) this.runningSince = this.now();
  }

  pause(): void {
    if (this.runningSince !== null) {
      this.accumulatedMs += this.now() - this.runningSince;
      this.runningSince = null;
    }
  }

  elapsedSeconds(): number {
    const running = this.runningSince === null ? 0 : this.now() - this.runningSince;
    return (this.accumulatedMs + running) / 1000;
  }

  /** Pause on window blur, resume on focus. */
  attach(target: Window): void {
    const onBlur = () => this.pause();
    const onFocus = () => this.start();
    target.addEventListener("blur", onBlur);
    target.addEventListener("focus", onFocus);
    this.detach = () => {
      target.removeEventListener("blur", onBlur);
      target.removeEventListener("focus", onFocus);
    };
  }

  stop(): void {
    this.pause();
    if (this.detach) {
      this.detach();
      this.detach = null;
    }
  }
}
