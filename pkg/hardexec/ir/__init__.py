"""The register-based IR: instructions, programs, parser and interpreter"""

from .instruction import Instruction
from .program import IRProgram, serialize_canonical, basic_blocks
from .ir_parser import parse_program, load_program, IRSyntaxError
from .interpreter import execute, ExecResult, Limits, Interpreter
