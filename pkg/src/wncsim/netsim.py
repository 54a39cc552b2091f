"""Delay-channel emulation and the fine-step motor plant.

Messages carry integer-millisecond timestamps; the plant integrates at a
1 ms step so every drawn delay lands exactly on the grid. The plant side is
time-driven and the controller side samples every 20 ms, both driven by the
harness loop. A reply message can be given the originating request's send
stamp (the `origin` argument), which is how a round trip stays measurable
from the controller's own clock.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field


@dataclass
class TimedMessage:
    payload: float
    seq: int
    sent_at: int
    delivery: int


@dataclass
class ChannelConfig:
    forward: tuple = (0, 0)
    backward: tuple = (0, 0)
    seed: int = 0
    distribution: str = "uniform"

    def __post_init__(self):
        for lo, hi in (self.forward, self.backward):
            if not 0 <= lo <= hi:
                raise ValueError("delay bounds must satisfy 0 <= lo <= hi")
        if self.distribution != "uniform":
            raise ValueError(f"unknown delay distribution {self.distribution!r}")


@dataclass
class SimClock:
    now_ms: int = 0
    period_ms: int = 20
    dt_ms: int = 1

    def __post_init__(self):
        if self.period_ms % self.dt_ms:
            raise ValueError("controller period must be a multiple of the plant step")

    def tick(self):
        self.now_ms += self.dt_ms
        return self.now_ms

    def at_sample(self):
        return self.now_ms % self.period_ms == 0


def poll_deliveries(queue, now):
    """Remove and return all messages due by `now`, delivery order, ties by sequence."""
    due = sorted((m for m in queue if m.delivery <= now), key=lambda m: (m.delivery, m.seq))
    for m in due:
        queue.remove(m)
    return due


class DelayChannel:
    """Two one-way message pipes with seeded uniform integer-ms delays."""

    def __init__(self, config=None):
        self.config = config if config is not None else ChannelConfig()
        self.rng = random.Random(self.config.seed)
        self._queues = {"forward": [], "backward": []}
        self._seq = {"forward": 0, "backward": 0}

    def _bounds(self, direction):
        try:
            return getattr(self.config, direction)
        except AttributeError:
            raise ValueError(f"unknown direction {direction!r}") from None

    def draw_delay(self, direction):
        lo, hi = self._bounds(direction)
        return int(round(self.rng.uniform(lo, hi)))

    def send(self, direction, payload, now, delay=None, origin=None):
        if now < 0:
            raise ValueError("send time must be nonnegative")
        if delay is None:
            delay = self.draw_delay(direction)
        self._bounds(direction)
        msg = TimedMessage(
            payload=payload,
            seq=self._seq[direction],
            sent_at=now if origin is None else origin,
            delivery=now + delay,
        )
        self._seq[direction] += 1
        self._queues[direction].append(msg)
        return msg

    def poll(self, direction, now):
        self._bounds(direction)
        return poll_deliveries(self._queues[direction], now)

    def pending(self, direction):
        return len(self._queues[direction])


def channel_send(channel, direction, payload, now):
    """Free-function form of Channel.send."""
    return channel.send(direction, payload, now)


def draw_round_trip(rng, lo_ms, hi_ms, split=(0.3, 0.7)):
    """One round trip: total t_d ~ U[lo, hi] ms, split t1 = fraction * t_d.

    The split fraction is uniform in [0.3, 0.7]; only the total affects the
    estimator, but the split decides when the drive lands at the plant.
    """
    t_d = int(round(rng.uniform(lo_ms, hi_ms)))
    t1 = int(round(rng.uniform(*split) * t_d))
    return t_d, t1, t_d - t1


class MotorPlant:
    """Exact zero-order-hold discretization of K/(s + a) at the fine step."""

    def __init__(self, gain=4.159, pole=3.888, dt=0.001):
        if dt <= 0 or pole == 0:
            raise ValueError("plant needs dt > 0 and a nonzero pole")
        self.gain = gain
        self.pole = pole
        self.dt = dt
        self._decay = math.exp(-pole * dt)
        self._drive = (gain / pole) * (1.0 - self._decay)
        self.speed = 0.0

    def tick(self, u):
        self.speed = self._decay * self.speed + self._drive * u
        return self.speed

    def reset(self):
        self.speed = 0.0


def plant_tick(plant, u, dt=None):
    """Free-function form of MotorPlant.tick with a fine-step guard."""
    if dt is not None and dt != plant.dt:
        raise ValueError("plant was built for a different fine step")
    return plant.tick(u)
