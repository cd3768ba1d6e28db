"""Piecewise-constant bandwidth traces and the simulated channel.

A trace holds breakpoints (t, rate); the rate at a breakpoint applies until
the next one. Deliverable bytes over an interval are the exact integral of
the rate; blocks are granted by inverting that integral.
"""

import csv
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from pnc.errors import ConfigError, TraceRangeError


@dataclass(frozen=True)
class BandwidthTrace:
    times: tuple        # breakpoint instants, seconds, strictly increasing
    rates: tuple        # bytes/second, rates[i] holds on [times[i], times[i+1])
    duration: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        rates = np.asarray(self.rates, dtype=np.float64)
        if times.size == 0 or times.size != rates.size:
            raise ConfigError("trace needs matching, non-empty times and rates")
        if np.any(np.diff(times) <= 0.0):
            raise ConfigError("breakpoints must be strictly increasing")
        if np.any(rates < 0.0):
            raise ConfigError("rates must be >= 0")
        if self.duration <= times[-1] and times.size > 1:
            raise ConfigError("duration must extend past the last breakpoint")

    @classmethod
    def constant(cls, rate: float, duration: float) -> "BandwidthTrace":
        return cls((0.0,), (float(rate),), float(duration))

    @classmethod
    def from_segments(cls, segments, duration=None) -> "BandwidthTrace":
        """segments: [(start_time, rate), ...] with increasing start times.

        Without an explicit duration the final segment lasts one mean
        segment length (one extra second for a single segment).
        """
        times = tuple(float(t) for t, _ in segments)
        rates = tuple(float(r) for _, r in segments)
        if duration is None:
            if len(times) > 1:
                duration = times[-1] + (times[-1] - times[0]) / (len(times) - 1)
            else:
                duration = times[0] + 1.0
        return cls(times, rates, float(duration))

    def rate_at(self, t: float) -> float:
        self._check_range(t, t)
        i = bisect_right(self.times, t) - 1
        return self.rates[max(i, 0)]

    def mean_rate(self) -> float:
        return available_bytes(self, self.times[0], self.duration) / \
            (self.duration - self.times[0])

    def _check_range(self, t_start, t_end):
        if t_start < self.times[0] or t_end > self.duration:
            raise TraceRangeError(
                f"interval [{t_start}, {t_end}] outside trace "
                f"[{self.times[0]}, {self.duration}]")


def available_bytes(trace: BandwidthTrace, t_start: float, t_end: float) -> float:
    """Exact integral of the rate over [t_start, t_end]."""
    if t_start > t_end:
        raise TraceRangeError(f"t_start {t_start} exceeds t_end {t_end}")
    trace._check_range(t_start, t_end)
    times = trace.times
    rates = trace.rates
    total = 0.0
    i = max(bisect_right(times, t_start) - 1, 0)
    t = t_start
    while t < t_end:
        seg_end = times[i + 1] if i + 1 < len(times) else trace.duration
        upto = min(seg_end, t_end)
        total += rates[i] * (upto - t)
        t = upto
        i += 1
    return total


class SimChannel:
    """Cursor over a trace that grants byte blocks at exact completion times."""

    def __init__(self, trace: BandwidthTrace, start_time: float = None):
        self.trace = trace
        self.cursor = trace.times[0] if start_time is None else float(start_time)

    def peek_completion(self, nbytes: float, now: float = None):
        """Earliest t with available_bytes(now, t) == nbytes; None if the
        trace ends first. Does not move the cursor."""
        if nbytes <= 0:
            raise ConfigError(f"block size must be positive, got {nbytes}")
        trace = self.trace
        t = self.cursor if now is None else max(float(now), self.cursor)
        trace._check_range(t, t)
        times, rates = trace.times, trace.rates
        i = max(bisect_right(times, t) - 1, 0)
        remaining = float(nbytes)
        while True:
            seg_end = times[i + 1] if i + 1 < len(times) else trace.duration
            rate = rates[i]
            if rate > 0.0:
                span = seg_end - t
                deliverable = rate * span
                if deliverable >= remaining:
                    return t + remaining / rate
                remaining -= deliverable
            if seg_end >= trace.duration:
                return None
            t = seg_end
            i += 1

    def grant_block(self, nbytes: float, now: float = None):
        """Commit a block; advances the cursor to its completion time."""
        done = self.peek_completion(nbytes, now)
        if done is not None:
            self.cursor = done
        return done


SCENARIOS = ("no_jamming", "light_jamming", "heavy_jamming")
DEFAULT_JAM_FACTORS = {"no_jamming": 1.0, "light_jamming": 0.55,
                       "heavy_jamming": 0.25}


@dataclass(frozen=True)
class ScenarioConfig:
    """Bandwidth regime: a base rate scaled by per-scenario jamming factors.

    ``pattern`` lists the scenario of each successive segment; a single entry
    yields one constant segment, several entries cycle with
    ``segment_duration`` until ``duration`` is covered.
    """
    base_rate: float
    pattern: tuple
    segment_duration: float = 10.0
    jam_factors: tuple = tuple(sorted(DEFAULT_JAM_FACTORS.items()))

    def __post_init__(self):
        factors = dict(self.jam_factors)
        for name in self.pattern:
            if name not in factors:
                raise ConfigError(f"unknown scenario {name!r}")
            if not 0.0 <= factors[name] <= 1.0:
                raise ConfigError(f"jam factor for {name} outside [0, 1]")
        if self.base_rate <= 0.0:
            raise ConfigError("base_rate must be positive")
        if self.segment_duration <= 0.0:
            raise ConfigError("segment_duration must be positive")

    @classmethod
    def single(cls, scenario: str, base_rate: float) -> "ScenarioConfig":
        return cls(base_rate=base_rate, pattern=(scenario,))

    @classmethod
    def alternating(cls, scenarios, base_rate: float,
                    segment_duration: float = 10.0) -> "ScenarioConfig":
        return cls(base_rate=base_rate, pattern=tuple(scenarios),
                   segment_duration=segment_duration)

    def rate_for(self, scenario: str) -> float:
        return self.base_rate * dict(self.jam_factors)[scenario]


def build_scenario_trace(config: ScenarioConfig, duration: float) -> BandwidthTrace:
    """Materialize a scenario schedule as a trace covering ``duration``."""
    if len(config.pattern) == 1:
        return BandwidthTrace.constant(config.rate_for(config.pattern[0]), duration)
    segments = []
    t = 0.0
    i = 0
    while t < duration:
        segments.append((t, config.rate_for(config.pattern[i % len(config.pattern)])))
        t += config.segment_duration
        i += 1
    return BandwidthTrace.from_segments(segments, duration)


@dataclass(frozen=True)
class ArrivalSchedule:
    """Periodic image captures: t_i = first_arrival + (i - 1) * period."""
    period: float
    image_count: int
    first_arrival: float = 0.0

    def __post_init__(self):
        if self.period <= 0.0:
            raise ConfigError("period must be positive")
        if self.image_count < 1:
            raise ConfigError("image_count must be >= 1")

    def arrival(self, index: int) -> float:
        return self.first_arrival + index * self.period

    def arrivals(self):
        return [self.arrival(i) for i in range(self.image_count)]


def save_trace_csv(path, trace: BandwidthTrace) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_seconds", "rate_bytes_per_second"])
        for t, r in zip(trace.times, trace.rates):
            writer.writerow([repr(t), repr(r)])


def load_trace_csv(path, duration: float = None) -> BandwidthTrace:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        segments = [(float(row["t_seconds"]),
                     float(row["rate_bytes_per_second"])) for row in reader]
    if not segments:
        raise ConfigError(f"trace file {path} has no segments")
    return BandwidthTrace.from_segments(segments, duration)
