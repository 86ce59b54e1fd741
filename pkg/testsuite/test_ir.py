# Hardexec testsuite: IR parsing, serialization and the interpreter.

import logging
import os.path

import pytest

from hardexec.ir.instruction import Instruction
from hardexec.ir.interpreter import ExecResult, Interpreter, Limits, execute
from hardexec.ir.ir_parser import IRSyntaxError, load_program, parse_program
from hardexec.ir.program import (basic_blocks, block_successors,
                                 serialize_canonical)

CORPUS = os.path.join(os.path.dirname(__file__), "corpus")


def corpus(name):
    return load_program(os.path.join(CORPUS, name + ".ir"))


def test_sum_loop_parses():
    program = corpus("sum_loop")
    assert len(program) == 9
    assert program.labels == {'loop': 3}
    assert program[6] == Instruction('br', (5, 3))


def test_sum_loop_runs():
    result = execute(corpus("sum_loop"))
    assert result.status == ExecResult.HALTED
    assert result.output == (55,)
    assert result.dyn_insts == 45
    assert result.cycles == 45


@pytest.mark.parametrize("name, inputs, output", [
    ("matmul", (), (16128,)),
    ("strcopy", (), (5, 532)),
    ("fsm", (1, 2, 1, 1, 2, 3, 2, 1), (2, 1)),
    ("kvlookup", (12, 5, 52), (36, -1, 156)),
    ("const_out", (), (7,)),
    ("xor", (), (5,)),
])
def test_corpus_outputs(name, inputs, output):
    result = execute(corpus(name), inputs)
    assert result.halted
    assert result.output == output


def test_canonical_round_trip():
    for name in ("sum_loop", "matmul", "strcopy", "fsm", "kvlookup"):
        program = corpus(name)
        again = parse_program(serialize_canonical(program))
        assert again == program
        assert serialize_canonical(again) == serialize_canonical(program)


def test_canonical_text():
    text = serialize_canonical(corpus("sum_loop")).decode("ascii")
    lines = text.splitlines()
    assert lines[3] == "add r1, r1, r2"
    assert lines[6] == "br r5, 3"
    assert text.endswith("halt\n")


def test_empty_program():
    program = parse_program("# nothing here\n\n")
    assert len(program) == 0
    assert serialize_canonical(program) == b""
    assert basic_blocks(program) == []


def test_header_is_kept():
    program = parse_program("#! haft max_retries=2 region_blocks=1\n"
                            "#! delta A2=257 A1=251\nhalt\n")
    assert program.delta_params == (251, 257)
    assert serialize_canonical(program) == (
        b"#! delta A1=251 A2=257\n#! haft region_blocks=1 max_retries=2\n"
        b"halt\n")


@pytest.mark.parametrize("source, line", [
    ("halt\nfrobnicate r1\n", 2),
    ("const r64, 1\n", 1),
    ("add r1, r2\n", 1),
    ("jmp nowhere\n", 1),
    ("a: halt\na: halt\n", 2),
    ("const r1, x\n", 1),
    ("#! haft region_blocks=1\nhalt\n", 1),
    ("#! turbo on=1\n", 1),
])
def test_syntax_errors(source, line):
    with pytest.raises(IRSyntaxError) as error:
        parse_program(source)
    assert error.value.line == line
    assert isinstance(error.value, SyntaxError)


def test_basic_blocks():
    program = corpus("sum_loop")
    blocks = basic_blocks(program)
    assert blocks == [(0, 3), (3, 7), (7, 9)]
    assert block_successors(program, (3, 7)) == [3, 7]
    assert block_successors(program, (7, 9)) == []


def test_hang_limit():
    program = parse_program("top: jmp top\n")
    result = execute(program, limits=Limits(100))
    assert result.status == ExecResult.HANG
    assert result.dyn_insts == 100


def test_division_by_zero_crashes():
    result = execute(corpus("div_zero"))
    assert result.status == ExecResult.CRASHED
    assert result.reason == 'div-by-zero'
    assert result.describe() == "Crashed(div-by-zero)"


def test_out_of_bounds_crashes():
    result = execute(corpus("overflow"))
    assert result.status == ExecResult.CRASHED
    assert result.reason == 'out-of-bounds'


def test_invalid_handle_crashes():
    result = execute(parse_program("const r1, 9\nload r2, r1, r0\nhalt\n"))
    assert result.reason == 'invalid-handle'


def test_missing_input_reads_zero():
    result = execute(parse_program("in r1, 3\nout r1\nhalt\n"), (1, 2))
    assert result.output == (0,)


def test_arithmetic_wraps():
    source = ("const r1, 9223372036854775807\nconst r2, 1\n"
              "add r3, r1, r2\nout r3\nconst r4, -7\nconst r5, 2\n"
              "divs r6, r4, r5\nout r6\nconst r7, 63\nshr r8, r4, r7\n"
              "out r8\nhalt\n")
    result = execute(parse_program(source))
    assert result.output == (-(1 << 63), -3, 1)


def test_pc_out_of_range_crashes():
    result = execute(parse_program("const r1, 1\n"))
    assert result.reason == 'pc-out-of-range'


def test_invalid_utf8_is_a_syntax_error(tmpdir):
    with pytest.raises(IRSyntaxError) as error:
        parse_program(b"halt\nconst r1, 1 \xff\n")
    assert error.value.line == 2
    path = tmpdir.join("bad.ir")
    path.write_binary(b"\xfe\xff")
    with pytest.raises(IRSyntaxError):
        load_program(str(path))
    path.write_binary(u"# caf\u00e9\nhalt\n".encode("utf-8"))
    assert len(load_program(str(path))) == 1


def test_live_registers():
    program = corpus("sum_loop")
    assert program.live_in(0) == frozenset([1])
    assert program.live_in(2) == frozenset([1, 2, 3])
    assert program.live_in(6) == frozenset([1, 2, 3, 4, 5])
    assert program.live_in(7) == frozenset([1])
    assert program.live_in(9) == frozenset()


def test_out_of_range_input_is_quiet_under_injection(caplog):
    program = parse_program("in r1, 3\nout r1\nhalt\n")
    with caplog.at_level(logging.DEBUG):
        Interpreter(program, (1,), step_hook=lambda machine, step: None).run()
    assert not [record for record in caplog.records
                if record.levelno >= logging.WARNING]
    caplog.clear()
    execute(program, (1,))
    assert [record for record in caplog.records
            if record.levelno == logging.WARNING]
