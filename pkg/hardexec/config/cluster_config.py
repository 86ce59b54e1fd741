# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Module providing the cluster (simulated service) configuration parser"""

from .configparser import ConfigParser


class ClusterConfigParser(ConfigParser):

    """Parser for the cluster JSON configuration.  Times are in simulated
    seconds"""

    def __init__(self):
        super(ClusterConfigParser, self).__init__(
            description="Cluster configuration options")
        service_options = [
            {'name': 'name',
             'default': 'service',
             'help': "Name of the simulated service",
             'type': ''},
            {'name': 'target_instances',
             'default': 1,
             'help': "Instances kept alive by the orchestrator",
             'type': 0},
            {'name': 'max_instances',
             'default': 4,
             'help': "Upper bound for elastic scaling",
             'type': 0},
            {'name': 'service_time',
             'default': 0.05,
             'help': "Seconds a healthy instance spends per request",
             'type': 0.0},
            {'name': 'deadline',
             'default': 1.0,
             'help': "A request in service longer than this marks its "
             "instance slow",
             'type': 0.0},
            {'name': 'respawn_delay',
             'default': 5.0,
             'help': "Seconds until a replacement instance is ready",
             'type': 0.0},
            {'name': 'scale_up_queue_threshold',
             'default': 10,
             'help': "Queue length above which an instance is added",
             'type': 0}]
        self.add_option_list(service_options)
        self.add_delimiter()
        failure_options = [
            {'name': 'mttf_mean',
             'default': None,
             'help': "Mean time to crash per instance, null: never",
             'type': 0.0},
            {'name': 'slow_mttf_mean',
             'default': None,
             'help': "Mean time until an instance degrades, null: never",
             'type': 0.0},
            {'name': 'slow_factor',
             'default': 10.0,
             'help': "Service-time multiplier of a degraded instance",
             'type': 0.0},
            {'name': 'crash_script',
             'default': [],
             'help': "Forced crashes as [time, instance slot] pairs",
             'type': []}]
        self.add_option_list(failure_options)
        self.add_type('mttf_mean', type_new=None)
        self.add_type('slow_mttf_mean', type_new=None)
        self.add_delimiter()
        load_options = [
            {'name': 'arrival_rate',
             'default': 0.0,
             'help': "Poisson request arrivals per second",
             'type': 0.0},
            {'name': 'duration',
             'default': 100.0,
             'help': "Simulated seconds",
             'type': 0.0}]
        self.add_option_list(load_options)


def load_cluster_config(path):
    """Parse the cluster configuration at path"""
    return ClusterConfigParser().parse(path)
