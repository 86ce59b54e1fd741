"""Current Hardexec version"""

__version__ = "1.0"
