"""Overflow-tolerant memory"""

from .memory import (SafetyPolicy, OverflowTable, BoundlessMemory, mem_read,
                     mem_write, run_boundless, UNSAFE_OOB)
