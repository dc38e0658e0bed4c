// Active-time contract: time while the window is blurred is excluded from
// elapsed_seconds.

import { describe, expect, it } from "vitest";

import { ActiveTimer } from "../src/timer.js";

function fakeClock(start = 0): { now: () => number; advance: (ms: number) => void } {
  let time = start;
  return {
    now: () => time,
    advance: (ms: number) => {
      time += ms;
    },
  };
}

describe("active timer", () => {
  it("accumulates only while running", () => {
    const clock = fakeClock();
    const timer = new ActiveTimer(clock.now);
    timer.start();
    clock.advance(30_000);
    timer.pause();
    clock.advance(60_000); // away from the tab
    timer.start();
    clock.advance(12_500);
    expect(timer.elapsedSeconds()).toBeCloseTo(42.5, 9);
  });

  it("pauses on blur and resumes on focus", () => {
    const clock = fakeClock();
    const timer = new ActiveTimer(clock.now);
    timer.attach(window);
    timer.start();
    clock.advance(10_000);
    window.dispatchEvent(new Event("blur"));
    clock.advance(500_000); // blurred time must not count
    window.dispatchEvent(new Event("focus"));
    clock.advance(5_000);
    timer.stop();
    expect(timer.elapsedSeconds()).toBeCloseTo(15.0, 9);
  });

  it("double start and double pause are harmless", () => {
    const clock = fakeClock();
    const timer = new ActiveTimer(clock.now);
    timer.start();
    timer.start();
    clock.advance(1_000);
    timer.pause();
    timer.pause();
    expect(timer.elapsedSeconds()).toBeCloseTo(1.0, 9);
  });
});
