"""The set of actions reachable from the command line"""

from .action import Action, ContractViolation
from .graph import ActionGraph
from .commands import Commands
