# Hardexec testsuite: lock-step and encoded-processing transforms.

import os.path

import pytest

from hardexec import ConfigError
from hardexec.encoding.an_code import EncodingParams
from hardexec.inject.injector import (FaultHook, FaultSpec, REG_BITFLIP,
                                      run_program)
from hardexec.ir.interpreter import ExecResult, Interpreter, Limits, execute
from hardexec.ir.ir_parser import load_program, parse_program
from hardexec.ir.program import serialize_canonical
from hardexec.transforms import (HaftConfig, TransactionUnit, TransformError,
                                 UnsupportedInstruction, harden,
                                 instruction_ratio, load_transform,
                                 run_protected, transform_delta,
                                 transform_haft)

CORPUS = os.path.join(os.path.dirname(__file__), "corpus")

PROGRAMS = [
    ("sum_loop", ()),
    ("matmul", ()),
    ("strcopy", ()),
    ("fsm", (1, 2, 1, 1, 2, 3, 2, 1)),
    ("kvlookup", (12, 5, 52)),
]


def corpus(name):
    return load_program(os.path.join(CORPUS, name + ".ir"))


def test_haft_const_out_layout():
    hardened = transform_haft(corpus("const_out"))
    assert serialize_canonical(hardened) == (
        b"#! haft region_blocks=1 max_retries=3\n"
        b"txbegin\n"
        b"const r1, 7\n"
        b"const r33, 7\n"
        b"chk r1, r33\n"
        b"txend\n"
        b"out r1\n"
        b"halt\n")
    assert instruction_ratio(corpus("const_out"), hardened) == 7.0 / 3


def test_haft_sum_loop():
    program = corpus("sum_loop")
    hardened = transform_haft(program)
    assert len(hardened) == 23
    assert hardened.labels == {'loop': 8}
    result = run_protected(hardened)
    assert result.output == (55,)
    assert result.dyn_insts == 113
    assert result.rollbacks == 0


@pytest.mark.parametrize("name, inputs", PROGRAMS)
def test_haft_is_transparent(name, inputs):
    program = corpus(name)
    golden = execute(program, inputs)
    result = run_protected(transform_haft(program), inputs)
    assert result.halted
    assert result.output == golden.output
    ratio = float(result.dyn_insts) / golden.dyn_insts
    assert 1.8 <= ratio <= 2.8


@pytest.mark.parametrize("name, inputs", PROGRAMS)
def test_delta_is_transparent(name, inputs):
    program = corpus(name)
    golden = execute(program, inputs)
    result = execute(transform_delta(program), inputs)
    assert result.halted
    assert result.output == golden.output
    ratio = float(result.dyn_insts) / golden.dyn_insts
    assert 2.0 <= ratio <= 5.0


@pytest.mark.parametrize("name, inputs", PROGRAMS)
def test_both_is_transparent(name, inputs):
    program = corpus(name)
    hardened = harden(program, 'both', seed=11)
    assert sorted(hardened.header) == ['delta', 'haft']
    result = run_program(hardened, inputs)
    assert result.output == execute(program, inputs).output


def test_delta_sum_loop_ratio():
    program = corpus("sum_loop")
    result = execute(transform_delta(program))
    assert result.dyn_insts == 99


def test_delta_header_and_params():
    params = EncodingParams(263, 269)
    hardened = transform_delta(corpus("const_out"), params)
    assert hardened.delta_params == (263, 269)
    text = serialize_canonical(hardened).decode("ascii")
    assert text.splitlines()[:3] == ["#! delta A1=263 A2=269",
                                     "const r1, %d" % (7 * 263),
                                     "const r33, %d" % (7 * 269)]


def test_delta_seeded_build_is_reproducible():
    program = corpus("sum_loop")
    first = serialize_canonical(harden(program, 'delta', seed=3))
    assert first == serialize_canonical(harden(program, 'delta', seed=3))


def test_delta_rejects_xor():
    with pytest.raises(UnsupportedInstruction) as error:
        transform_delta(corpus("xor"))
    assert error.value.opcode == 'xor'
    assert error.value.index == 2


def test_delta_rejects_wide_constants():
    with pytest.raises(TransformError):
        transform_delta(parse_program("const r1, 4294967296\nhalt\n"))


def test_haft_rejects_shadow_registers():
    with pytest.raises(TransformError):
        transform_haft(parse_program("const r40, 1\nhalt\n"))


def test_haft_rejects_hardened_input():
    hardened = transform_haft(corpus("const_out"))
    with pytest.raises(TransformError):
        transform_haft(hardened)


def test_empty_program_unchanged():
    empty = corpus("empty")
    for mode in ('haft', 'delta', 'both'):
        hardened = harden(empty, mode, seed=1)
        assert len(hardened) == 0
        assert instruction_ratio(empty, hardened) == 1.0


def test_unknown_transform():
    with pytest.raises(TransformError):
        load_transform('triple')
    with pytest.raises(TransformError):
        harden(corpus("const_out"), 'triple')


def test_haft_config_validation():
    with pytest.raises(ConfigError):
        HaftConfig(region_blocks=0)
    with pytest.raises(ConfigError):
        HaftConfig(max_retries=0)


def test_region_blocks_header():
    cfg = HaftConfig(region_blocks=2, max_retries=5)
    hardened = transform_haft(corpus("sum_loop"), cfg)
    assert hardened.header['haft'] == {'region_blocks': 2, 'max_retries': 5}
    assert repr(HaftConfig.from_header(hardened)) == repr(cfg)
    assert run_protected(hardened).output == (55,)


ALLOC_SOURCE = """
const r1, 2
alloc r2, r1
const r3, 0
const r4, 5
store r2, r3, r4
load r5, r2, r3
out r5
halt
"""


def _protected(program, fault):
    hardened = transform_haft(program)
    unit = TransactionUnit(HaftConfig.from_header(hardened))
    return Interpreter(hardened, (), tx=unit, step_hook=FaultHook(fault))


def test_rollback_restores_memory_and_handles():
    # step 16 is the check of r5 against its shadow
    interpreter = _protected(parse_program(ALLOC_SOURCE),
                             FaultSpec(REG_BITFLIP, 16, 37, 0))
    result = interpreter.run()
    assert result.status == ExecResult.HALTED
    assert result.output == (5,)
    assert result.rollbacks == 1
    memory = interpreter.state.memory
    assert sorted(memory.objects) == [1]
    assert memory.next_handle == 2
    assert memory.peek(1, 0) == 5


def test_persistent_fault_exhausts_retries():
    interpreter = _protected(parse_program(ALLOC_SOURCE),
                             FaultSpec(REG_BITFLIP, 16, 37, 0,
                                       persistent=True))
    result = interpreter.run()
    assert result.status == ExecResult.DETECTED
    assert result.reason == 'check-divergence'
    assert result.rollbacks == 3
    assert result.output == ()


def test_trap_inside_region_rolls_back():
    # step 14 is the master load; handle 1 ^ 8 = 9 was never issued
    interpreter = _protected(parse_program(ALLOC_SOURCE),
                             FaultSpec(REG_BITFLIP, 14, 2, 3))
    result = interpreter.run()
    assert result.status == ExecResult.HALTED
    assert result.output == (5,)
    assert result.rollbacks == 1


def test_repeated_trap_still_crashes():
    hardened = transform_haft(parse_program(
        "const r1, 1\nconst r2, 0\ndivs r3, r1, r2\nout r3\nhalt\n"))
    result = run_protected(hardened)
    assert result.status == ExecResult.CRASHED
    assert result.reason == 'div-by-zero'
    assert result.rollbacks == 3


class RecordingUnit(TransactionUnit):

    """Checks every rollback against the state seen when the region
    began"""

    def __init__(self, cfg):
        super(RecordingUnit, self).__init__(cfg)
        self.recorded = None
        self.compared = 0

    def begin(self, interpreter, pc_at_begin):
        super(RecordingUnit, self).begin(interpreter, pc_at_begin)
        # registers, memory and output
        self.recorded = interpreter.state.snapshot()[:3]

    def rollback(self, interpreter):
        resume = super(RecordingUnit, self).rollback(interpreter)
        assert interpreter.state.snapshot()[:3] == self.recorded
        assert resume == self.checkpoint.pc_at_begin
        self.compared += 1
        return resume


@pytest.mark.parametrize("name, inputs", PROGRAMS)
def test_rollback_restores_region_entry_state(name, inputs):
    hardened = transform_haft(corpus(name))
    golden = run_protected(hardened, inputs)
    limits = Limits(20 * golden.dyn_insts)
    compared = 0
    for step in range(1, golden.dyn_insts + 1, golden.dyn_insts // 40 + 1):
        for register in (1, 2, 3, 4, 33, 34):
            unit = RecordingUnit(HaftConfig.from_header(hardened))
            fault = FaultSpec(REG_BITFLIP, step, register, 2)
            Interpreter(hardened, inputs, limits, tx=unit,
                        step_hook=FaultHook(fault)).run()
            compared += unit.compared
    assert compared > 0


def test_delta_detects_corruption():
    hardened = transform_delta(corpus("sum_loop"))
    # step 7 is the first encoded add into r1
    result = execute(hardened, step_hook=FaultHook(
        FaultSpec(REG_BITFLIP, 7, 1, 3)))
    assert result.status == ExecResult.DETECTED
    assert result.reason == 'code-violation:residue1'
