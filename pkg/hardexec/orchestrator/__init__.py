"""Discrete-event simulation of a self-healing, elastic service cluster"""

from .simulator import ServiceSpec, SimEvent, SimReport, simulate
