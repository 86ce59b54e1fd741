# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Module providing the control-flow graph export"""

import json
import logging

from .action import Action
from .. import ConfigError
from ..ir.program import basic_blocks, block_successors


class ActionGraph(Action):

    """Class providing methods to build the basic-block graph of a program
    and to export it"""

    def __init__(self, *args):
        super(ActionGraph, self).__init__(*args)

    def build_graph(self, program):
        """networkx DiGraph of the basic blocks, keyed by start index"""
        try:
            import networkx as nx
        except ImportError as error_import:
            raise ConfigError("cfg needs networkx: %s" % error_import)
        graph = nx.DiGraph()
        for block in basic_blocks(program):
            start, end = block
            graph.add_node(start, end=end, instructions=[
                ins.render() for ins in program.instructions[start:end]])
            for successor in block_successors(program, block):
                graph.add_edge(start, successor)
        return graph

    def _graph_data(self, graph, entry):
        from networkx.readwrite import json_graph
        import networkx as nx
        if self.options.mode == 'dfs':
            return json_graph.tree_data(nx.dfs_tree(graph, entry), root=entry)
        if self.options.mode == 'bfs':
            return json_graph.tree_data(nx.bfs_tree(graph, entry), root=entry)
        if self.options.mode == 'blocks':
            try:
                return json_graph.node_link_data(graph, edges="links")
            except TypeError:
                # networkx before 3.4 knows no edges keyword
                return json_graph.node_link_data(graph)
        raise ConfigError("Unknown cfg mode: %s" % self.options.mode)

    def generate_cfg(self):
        """Write the basic-block graph of --in as JSON"""
        program = self.load_program(self.options.input_file)
        graph = self.build_graph(program)
        if not len(program):
            data = {'nodes': [], 'links': []}
        else:
            data = self._graph_data(graph, program.entry)
        with open(self.options.output, "w") as json_file:
            json_file.write(json.dumps(data, sort_keys=True) + "\n")
        logging.info("%d blocks, %d edges written to %s",
                     graph.number_of_nodes(), graph.number_of_edges(),
                     self.options.output)
