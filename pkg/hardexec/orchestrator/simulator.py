# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Module providing the discrete-event simulation of a replicated service.

Time is kept in integer microseconds.  Requests wait in one cluster queue
and are handed round-robin to idle instances; crashed instances and
instances caught missing a deadline are killed and replaced after
respawn_delay, and a long queue adds instances up to max_instances."""

import collections
import heapq
import logging
import numbers

import six

from .. import ConfigError
from ..util.report import write_json
from ..util.rng import stream, check_seed, KEY_SIMULATION

USEC = 1000000

ARRIVAL = 'arrival'
COMPLETION = 'completion'
CRASH = 'crash'
SLOW_DETECT = 'slow-detect'
RESPAWN_DONE = 'respawn-done'
SCALE_UP = 'scale-up'
DEGRADE = 'degrade'

# tie-break of events scheduled for the same microsecond
KIND_ORDER = {CRASH: 0, SLOW_DETECT: 1, RESPAWN_DONE: 2, SCALE_UP: 3,
              COMPLETION: 4, DEGRADE: 5, ARRIVAL: 6}

SimEvent = collections.namedtuple('SimEvent', ['time', 'kind', 'instance'])


def to_usec(seconds):
    return int(round(seconds * USEC))


class ServiceSpec(object):

    """The simulated service and its failure behaviour.  Times in
    seconds; mttf_mean and slow_mttf_mean of None mean never"""

    def __init__(self, name='service', target_instances=1, mttf_mean=None,
                 service_time=0.05, deadline=1.0, respawn_delay=5.0,
                 scale_up_queue_threshold=10, max_instances=4,
                 slow_mttf_mean=None, slow_factor=10.0, crash_script=()):
        if deadline <= service_time:
            raise ConfigError("deadline (%s) must exceed service_time (%s)"
                              % (deadline, service_time))
        if respawn_delay <= 0:
            raise ConfigError("respawn_delay must be positive")
        if service_time <= 0:
            raise ConfigError("service_time must be positive")
        if not 1 <= target_instances <= max_instances:
            raise ConfigError("need 1 <= target_instances (%d) <= "
                              "max_instances (%d)"
                              % (target_instances, max_instances))
        if scale_up_queue_threshold < 0:
            raise ConfigError("scale_up_queue_threshold must be >= 0")
        for label, mean in (('mttf_mean', mttf_mean),
                            ('slow_mttf_mean', slow_mttf_mean)):
            if mean is not None and mean <= 0:
                raise ConfigError("%s must be positive or null" % label)
        if slow_factor < 1:
            raise ConfigError("slow_factor must be >= 1")
        if not isinstance(crash_script, (list, tuple)):
            raise ConfigError("crash_script must be a list of [time, slot]")
        script = []
        for entry in crash_script:
            if not isinstance(entry, (list, tuple)) or len(entry) != 2:
                raise ConfigError("crash_script entries are [time, slot], "
                                  "got %r" % (entry,))
            time, slot = entry
            if isinstance(time, bool) or isinstance(slot, bool) \
                    or not isinstance(time, numbers.Real) \
                    or not isinstance(slot, six.integer_types) \
                    or time < 0 or not 0 <= slot < max_instances:
                raise ConfigError("bad crash_script entry %r" % (entry,))
            script.append((time, int(slot)))
        self.name = name
        self.target_instances = target_instances
        self.mttf_mean = mttf_mean
        self.service_time = service_time
        self.deadline = deadline
        self.respawn_delay = respawn_delay
        self.scale_up_queue_threshold = scale_up_queue_threshold
        self.max_instances = max_instances
        self.slow_mttf_mean = slow_mttf_mean
        self.slow_factor = slow_factor
        self.crash_script = tuple(sorted(script))

    FIELDS = ('name', 'target_instances', 'mttf_mean', 'service_time',
              'deadline', 'respawn_delay', 'scale_up_queue_threshold',
              'max_instances', 'slow_mttf_mean', 'slow_factor',
              'crash_script')

    @classmethod
    def from_config(cls, config):
        """Spec from a parsed cluster configuration"""
        return cls(**dict((field, config[field]) for field in cls.FIELDS
                          if field in config))

    def to_dict(self):
        spec = dict((field, getattr(self, field)) for field in self.FIELDS)
        spec['crash_script'] = [list(entry) for entry in self.crash_script]
        return spec


class SimReport(object):

    """Outcome of one simulation.  events is the processed event log; it
    is not part of the serialized report"""

    def __init__(self, params, seed, completed, failed, availability,
                 respawns, scale_ups, arrivals, max_queue, events):
        self.params = params
        self.seed = seed
        self.completed = completed
        self.failed = failed
        self.availability = availability
        self.respawns = respawns
        self.scale_ups = scale_ups
        self.arrivals = arrivals
        self.max_queue = max_queue
        self.events = events

    def to_dict(self):
        return {'params': self.params,
                'seed': self.seed,
                'completed': self.completed,
                'failed': self.failed,
                'availability': self.availability,
                'respawns': self.respawns,
                'scale_ups': self.scale_ups,
                'arrivals': self.arrivals,
                'max_queue': self.max_queue,
                'events': len(self.events)}

    def write(self, path):
        write_json(path, self.to_dict())


class _Instance(object):

    __slots__ = ('slot', 'generation', 'ready', 'busy', 'degraded')

    def __init__(self, slot):
        self.slot = slot
        self.generation = 0
        self.ready = False
        self.busy = False
        self.degraded = False


class _Cluster(object):

    """State and event handlers of one run"""

    def __init__(self, spec, arrival_rate, end, seed):
        self.spec = spec
        self.arrival_rate = arrival_rate
        self.end = end
        self.seed = seed
        self.queue = collections.deque()
        self.heap = []
        self.seq = 0
        self.instances = []
        self.pending = 0
        self.rr_next = 0
        self.now = 0
        self.down_since = None
        self.downtime = 0
        self.events = []
        self.completed = 0
        self.failed = 0
        self.respawns = 0
        self.scale_ups = 0
        self.arrivals = 0
        self.max_queue = 0
        self.arrival_rng = stream(seed, KEY_SIMULATION, 0)

    def schedule(self, time, kind, slot=-1, generation=None):
        self.seq += 1
        heapq.heappush(self.heap, (time, KIND_ORDER[kind], slot, self.seq,
                                   kind, generation))

    def ready_count(self):
        return sum(1 for inst in self.instances if inst.ready)

    def _account(self):
        """Track the intervals with no ready instance"""
        healthy = self.ready_count() > 0
        if healthy and self.down_since is not None:
            self.downtime += self.now - self.down_since
            self.down_since = None
        elif not healthy and self.down_since is None:
            self.down_since = self.now

    def _failure_draws(self, inst):
        rng = stream(self.seed, KEY_SIMULATION, 1, inst.slot,
                     inst.generation)
        if self.spec.mttf_mean is not None:
            delay = to_usec(rng.exponential(self.spec.mttf_mean))
            self.schedule(self.now + max(delay, 1), CRASH, inst.slot,
                          inst.generation)
        if self.spec.slow_mttf_mean is not None:
            delay = to_usec(rng.exponential(self.spec.slow_mttf_mean))
            self.schedule(self.now + max(delay, 1), DEGRADE, inst.slot,
                          inst.generation)

    def start_instance(self, inst):
        inst.generation += 1
        inst.ready = True
        inst.busy = False
        inst.degraded = False
        self._failure_draws(inst)

    def next_arrival(self):
        if self.arrival_rate > 0:
            mean = 1.0 / self.arrival_rate
            gap = to_usec(self.arrival_rng.exponential(mean))
            self.schedule(self.now + max(gap, 1), ARRIVAL)

    def dispatch(self):
        count = len(self.instances)
        while self.queue and count:
            for shift in range(count):
                inst = self.instances[(self.rr_next + shift) % count]
                if inst.ready and not inst.busy:
                    break
            else:
                return
            self.rr_next = (inst.slot + 1) % count
            self.queue.popleft()
            inst.busy = True
            service = to_usec(self.spec.service_time)
            if inst.degraded:
                service = to_usec(self.spec.service_time
                                  * self.spec.slow_factor)
            deadline = to_usec(self.spec.deadline)
            if service > deadline:
                self.schedule(self.now + deadline, SLOW_DETECT, inst.slot,
                              inst.generation)
            else:
                self.schedule(self.now + service, COMPLETION, inst.slot,
                              inst.generation)

    def maybe_scale(self):
        size = len(self.instances) + self.pending
        if len(self.queue) > self.spec.scale_up_queue_threshold \
                and size < self.spec.max_instances:
            self.pending += 1
            self.schedule(self.now + to_usec(self.spec.respawn_delay),
                          SCALE_UP)

    def kill(self, inst, kind):
        if inst.busy:
            self.failed += 1
        inst.ready = False
        inst.busy = False
        logging.debug("%s of instance %d at %d us, respawn scheduled", kind,
                      inst.slot, self.now)
        self.schedule(self.now + to_usec(self.spec.respawn_delay),
                      RESPAWN_DONE, inst.slot)

    def live(self, slot, generation):
        """The instance an event addresses, None if it went away since"""
        if not 0 <= slot < len(self.instances):
            return None
        inst = self.instances[slot]
        if not inst.ready:
            return None
        if generation is not None and generation != inst.generation:
            return None
        return inst

    def handle(self, kind, slot, generation):
        if kind == ARRIVAL:
            self.arrivals += 1
            self.queue.append(self.now)
            self.max_queue = max(self.max_queue, len(self.queue))
            self.dispatch()
            self.maybe_scale()
            self.next_arrival()
            return True
        if kind == SCALE_UP:
            self.pending -= 1
            inst = _Instance(len(self.instances))
            self.instances.append(inst)
            self.start_instance(inst)
            self.scale_ups += 1
            logging.debug("scaled up to %d instances", len(self.instances))
            self.dispatch()
            return True
        if kind == RESPAWN_DONE:
            self.start_instance(self.instances[slot])
            self.respawns += 1
            self.dispatch()
            return True
        inst = self.live(slot, generation)
        if inst is None:
            return False
        if kind == COMPLETION:
            inst.busy = False
            self.completed += 1
            self.dispatch()
        elif kind == DEGRADE:
            inst.degraded = True
        else:
            self.kill(inst, kind)
            self.dispatch()
        return True

    def run(self):
        for _ in range(self.spec.target_instances):
            inst = _Instance(len(self.instances))
            self.instances.append(inst)
            self.start_instance(inst)
        for time, slot in self.spec.crash_script:
            self.schedule(to_usec(time), CRASH, slot)
        self.next_arrival()
        while self.heap and self.heap[0][0] <= self.end:
            time, _, slot, _, kind, generation = heapq.heappop(self.heap)
            self.now = time
            if self.handle(kind, slot, generation):
                self.events.append(SimEvent(time, kind, slot))
            self._account()
        self.now = self.end
        if self.down_since is not None:
            self.downtime += self.end - self.down_since
            self.down_since = None


def simulate(spec, arrival_rate, duration, seed):
    """Run the cluster of spec for duration seconds under Poisson
    arrivals.  Deterministic given seed"""
    if duration <= 0:
        raise ConfigError("duration must be positive, got %s" % duration)
    if arrival_rate < 0:
        raise ConfigError("arrival_rate must be >= 0, got %s" % arrival_rate)
    check_seed(seed)
    end = to_usec(duration)
    cluster = _Cluster(spec, arrival_rate, end, seed)
    cluster.run()
    availability = float(end - cluster.downtime) / end
    params = spec.to_dict()
    params.update({'arrival_rate': arrival_rate, 'duration': duration,
                   'time_unit': 'us'})
    logging.info("simulated %s for %ss: %d completed, %d failed, "
                 "availability %.4f", spec.name, duration, cluster.completed,
                 cluster.failed, availability)
    return SimReport(params, seed, cluster.completed, cluster.failed,
                     availability, cluster.respawns, cluster.scale_ups,
                     cluster.arrivals, cluster.max_queue, cluster.events)
