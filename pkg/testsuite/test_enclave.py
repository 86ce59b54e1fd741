# Hardexec testsuite: the simulated secure container.

import os.path

import pytest

from hardexec import ConfigError
from hardexec.config import load_envelope_config
from hardexec.enclave import (AttestationError, Channel, EnclaveEnvelope,
                              EpcModel, IntegrityError, Measurement,
                              ReplayError, SyscallDenied, attest_handshake,
                              chan_recv, chan_send, epc_access, measure,
                              seal_file, syscall_gate, unseal_file)
from hardexec.enclave.channel import respond, verify_response
from hardexec.ir.interpreter import ExecResult, execute
from hardexec.ir.ir_parser import load_program, parse_program
from hardexec.util.rng import stream

HERE = os.path.dirname(__file__)
PSK = b"k" * 32


def corpus(name):
    return load_program(os.path.join(HERE, "corpus", name + ".ir"))


def envelope(program, seed=1, **options):
    return EnclaveEnvelope(program, rng=stream(seed, 3), **options)


def flips(blob, positions=64):
    """blob with one bit flipped, for positions bits spread over it"""
    total = len(blob) * 8
    for index in range(positions):
        bit = index * total // positions
        tampered = bytearray(blob)
        tampered[bit // 8] ^= 1 << (bit % 8)
        yield bytes(tampered)


def test_measurement_ignores_labels():
    first = parse_program("start: const r1, 1\nout r1\nhalt\n")
    second = parse_program("begin: const r1, 1\nout r1\nhalt\n")
    third = parse_program("const r1, 2\nout r1\nhalt\n")
    assert measure(first) == measure(second)
    assert measure(first) != measure(third)
    digest = measure(first).hexdigest()
    assert Measurement.from_hex(digest) == measure(first)


def test_bad_measurement_text():
    with pytest.raises(ConfigError):
        Measurement.from_hex("zz")
    with pytest.raises(ConfigError):
        Measurement(b"short")


def test_sealed_file_round_trip():
    env = envelope(corpus("const_out"))
    sealed = seal_file(env, "db/state", b"counter=7")
    assert len(sealed) == 12 + 9 + 16
    assert unseal_file(env, "db/state", sealed) == b"counter=7"


def test_envelope_needs_seeded_stream():
    with pytest.raises(ConfigError):
        EnclaveEnvelope(corpus("const_out"))
    with pytest.raises(ConfigError):
        EnclaveEnvelope(corpus("const_out"), master_key=PSK)


def test_sealing_is_reproducible_from_seed():
    first = envelope(corpus("const_out"), seed=8)
    second = envelope(corpus("const_out"), seed=8)
    assert first.master_key == second.master_key
    assert first.seal_file("a", b"x") == second.seal_file("a", b"x")


def test_sealed_file_rejects_tampering():
    env = envelope(corpus("const_out"))
    sealed = env.seal_file("db/state", b"counter=7" * 8)
    for tampered in flips(sealed):
        with pytest.raises(IntegrityError):
            env.unseal_file("db/state", tampered)
    with pytest.raises(IntegrityError):
        env.unseal_file("db/state", sealed[:20])
    with pytest.raises(IntegrityError):
        env.unseal_file("db/other", sealed)


def test_file_calls_are_gated():
    env = envelope(corpus("const_out"), allowlist=['file_put'])
    env.file_put("log", b"entry")
    with pytest.raises(SyscallDenied) as error:
        env.file_get("log")
    assert error.value.call == 'file_get'
    assert error.value.EXIT_CODE == 3


def test_denied_output_is_detected():
    program = corpus("const_out")
    config = load_envelope_config(os.path.join(HERE, "configs",
                                               "envelope_no_out.json"))
    env = EnclaveEnvelope.from_config(program, config, rng=stream(1, 3))
    result = env.run()
    assert result.status == ExecResult.DETECTED
    assert result.reason == 'denied-syscall'


def test_envelope_run_matches_plain_run():
    program = corpus("sum_loop")
    result = envelope(program).run()
    assert result.output == (55,)
    assert result.cycles == execute(program).cycles


def _sweep(words, stride, sweeps):
    program = corpus("epc_sweep")
    inputs = (words, stride, sweeps)
    plain = execute(program, inputs)
    enclosed = envelope(program).run(inputs)
    assert enclosed.output == plain.output == (0,)
    return float(enclosed.cycles) / plain.cycles


def test_small_working_set_is_near_native():
    # 4 pages, streamed 10 times
    assert _sweep(2048, 1, 10) <= 1.05


def test_large_working_set_thrashes():
    # 88 pages, four times the cache, one word per page
    assert _sweep(88 * 512, 512, 3) > 10


def test_epc_lru():
    epc = EpcModel(epc_pages=2, fault_penalty=100)
    assert epc_access(epc, 'a') == 100
    assert epc_access(epc, 'b') == 100
    assert epc_access(epc, 'a') == 0
    assert epc_access(epc, 'c') == 100      # evicts b
    assert epc_access(epc, 'a') == 0
    assert epc_access(epc, 'b') == 100
    assert epc.stats()['misses'] == 4
    with pytest.raises(ConfigError):
        EpcModel(epc_pages=0)


def test_unbounded_epc():
    epc = EpcModel(epc_pages=None)
    for page in range(1000):
        epc.access(page)
    assert sum(epc.access(page) for page in range(1000)) == 0


def _pair(responder_program=None, expected=None):
    initiator = envelope(corpus("const_out"), seed=1)
    responder = envelope(responder_program or corpus("sum_loop"), seed=2)
    if expected is None:
        expected = [responder.measurement]
    keys = attest_handshake(initiator, responder, expected, PSK)
    return Channel.pair(initiator, responder, keys)


def test_channel_round_trip():
    client, server = _pair()
    frame = chan_send(client, b"GET key")
    assert chan_recv(server, frame) == b"GET key"
    assert client.recv(server.send(b"VALUE 7")) == b"VALUE 7"
    assert server.recv(client.send(b"PUT key 8")) == b"PUT key 8"
    assert client.send_seq == 2
    assert server.last_recv == 1


def test_channel_rejects_replay():
    client, server = _pair()
    first = client.send(b"one")
    second = client.send(b"two")
    assert server.recv(second) == b"two"
    with pytest.raises(ReplayError):
        server.recv(first)
    with pytest.raises(ReplayError):
        server.recv(second)


def test_channel_rejects_tampering():
    client, server = _pair()
    frame = client.send(b"PUT key value" * 4)
    for tampered in flips(frame):
        with pytest.raises(IntegrityError):
            server.recv(tampered)
    with pytest.raises(IntegrityError):
        server.recv(frame[:30])
    # the untouched frame is still accepted afterwards
    assert server.recv(frame) == b"PUT key value" * 4


def test_directions_use_separate_keys():
    client, server = _pair()
    frame = client.send(b"hello")
    with pytest.raises(IntegrityError):
        client.recv(frame)


def test_unexpected_measurement():
    other = measure(corpus("matmul"))
    with pytest.raises(AttestationError) as error:
        _pair(expected=[other])
    assert error.value.reason == 'unexpected-measurement'


def test_wrong_key():
    initiator = envelope(corpus("const_out"), seed=1)
    responder = envelope(corpus("sum_loop"), seed=2)
    response = respond(responder, b"x" * 32, b"n" * 16, b"m" * 16)
    with pytest.raises(AttestationError) as error:
        verify_response(response, [responder.measurement], PSK, b"n" * 16)
    assert error.value.reason == 'bad-mac'
    assert initiator.measurement != responder.measurement


def test_channel_calls_are_gated():
    initiator = envelope(corpus("const_out"), seed=1,
                         allowlist=['chan_recv'])
    responder = envelope(corpus("sum_loop"), seed=2)
    keys = attest_handshake(initiator, responder, [responder.measurement],
                            PSK)
    client, _ = Channel.pair(initiator, responder, keys)
    with pytest.raises(SyscallDenied):
        client.send(b"hello")


def test_sealed_bytes_hide_the_plaintext():
    env = envelope(corpus("const_out"))
    plaintext = b"\x00" * 1024
    sealed = env.seal_file("zeros", plaintext)
    body = sealed[12:-16]
    assert b"\x00" * 16 not in body
    ones = sum(bin(byte).count("1") for byte in bytearray(body))
    assert 0.45 <= float(ones) / (len(body) * 8) <= 0.55
    client, _ = _pair()
    frame = client.send(b"secret payload, sixteen+ bytes")
    assert b"secret payload" not in frame


def test_truncated_frame():
    client, server = _pair()
    frame = client.send(b"ping")
    with pytest.raises(IntegrityError):
        server.recv(frame[:-1])
    assert server.recv(frame) == b"ping"


def test_both_sides_agree_on_keys():
    initiator = envelope(corpus("const_out"), seed=1)
    responder = envelope(corpus("sum_loop"), seed=2)
    initiator_keys, responder_keys = attest_handshake(
        initiator, responder, [responder.measurement], PSK)
    assert initiator_keys == responder_keys
    assert initiator_keys.i2r != initiator_keys.r2i


def test_empty_allowlist_denies_everything():
    env = envelope(corpus("const_out"), allowlist=[])
    for call in ('file_get', 'file_put', 'chan_send', 'chan_recv', 'out',
                 'spawn'):
        assert not syscall_gate(env, call)
    assert syscall_gate(envelope(corpus("const_out")), 'file_get')
    assert not syscall_gate(envelope(corpus("const_out")), 'spawn')


def test_empty_program_measurement():
    digest = measure(corpus("empty")).hexdigest()
    assert digest == ("e3b0c44298fc1c149afbf4c8996fb924"
                      "27ae41e4649b934ca495991b7852b855")


def test_epc_cost_is_monotonic():
    pages = stream(8, 0).integers(0, 40, size=2000)
    totals = []
    for epc_pages in range(1, 45):
        epc = EpcModel(epc_pages=epc_pages)
        totals.append(sum(epc.access(int(page)) for page in pages))
    assert all(a >= b for a, b in zip(totals, totals[1:]))
    assert totals[-1] == 40 * 1000


def test_cyclic_sweep_always_misses():
    epc = EpcModel(epc_pages=4, fault_penalty=7)
    costs = [epc.access(page % 8) for page in range(80)]
    assert costs == [7] * 80
