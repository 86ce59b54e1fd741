# Hardexec testsuite: the command line.
# Just run 'pytest' in the top directory.

import json
import os.path
import shutil
import warnings

import pytest

import hardexec.main

HERE = os.path.dirname(os.path.abspath(__file__))


def corpus(name):
    return os.path.join(HERE, "corpus", name + ".ir")


def configs(name):
    return os.path.join(HERE, "configs", name + ".json")


def run_exit(args):
    with pytest.raises(SystemExit) as error:
        hardexec.main.hardexec(args)
    return error.value.code


def test_harden_haft(tmpdir, capsys):
    out = str(tmpdir.join("sum_loop.haft.ir"))
    hardexec.main.hardexec(["harden", "--in", corpus("sum_loop"),
                            "--out", out])
    assert capsys.readouterr().out == "static ratio 2.556, 8 markers\n"
    with open(out) as ir_file:
        text = ir_file.read()
    assert text.startswith("#! haft region_blocks=1 max_retries=3\n")


def test_harden_default_output(tmpdir, capsys):
    source = str(tmpdir.join("const_out.ir"))
    shutil.copy(corpus("const_out"), source)
    hardexec.main.hardexec(["harden", "--in", source, "--mode", "delta",
                            "--seed", "4"])
    assert os.path.isfile(str(tmpdir.join("const_out.delta.ir")))
    assert capsys.readouterr().out.startswith("static ratio ")


def test_harden_both_empty(tmpdir, capsys):
    out = str(tmpdir.join("empty.both.ir"))
    hardexec.main.hardexec(["harden", "--in", corpus("empty"), "--out", out,
                            "--mode", "both", "--seed", "1"])
    assert capsys.readouterr().out == "static ratio 1.000, 0 markers\n"


def test_harden_delta_needs_seed(tmpdir):
    out = str(tmpdir.join("x.ir"))
    assert run_exit(["harden", "--in", corpus("sum_loop"), "--out", out,
                     "--mode", "delta"]) == 2


def test_harden_delta_rejects_xor(tmpdir):
    out = str(tmpdir.join("xor.delta.ir"))
    assert run_exit(["harden", "--in", corpus("xor"), "--out", out,
                     "--mode", "delta", "--seed", "1"]) == 2
    assert not os.path.exists(out)


def test_harden_missing_file(tmpdir):
    assert run_exit(["harden", "--in", str(tmpdir.join("none.ir"))]) == 2


def test_run(tmpdir, capsys):
    report = str(tmpdir.join("run.json"))
    hardexec.main.hardexec(["run", "--in", corpus("kvlookup"),
                            "--input", "[12, 5, 52]", "--report", report])
    assert capsys.readouterr().out == "36\n-1\n156\n"
    with open(report) as json_file:
        document = json.load(json_file)
    assert document['status'] == 'Halted'
    assert document['output'] == [36, -1, 156]


def test_run_hardened(tmpdir, capsys):
    out = str(tmpdir.join("sum_loop.both.ir"))
    hardexec.main.hardexec(["harden", "--in", corpus("sum_loop"), "--out",
                            out, "--mode", "both", "--seed", "2"])
    capsys.readouterr()
    hardexec.main.hardexec(["run", "--in", out])
    assert capsys.readouterr().out == "55\n"


def test_run_boundless(tmpdir, capsys):
    log = str(tmpdir.join("oob.jsonl"))
    hardexec.main.hardexec(["run", "--in", corpus("overflow"), "--boundless",
                            "--oob-log", log])
    assert capsys.readouterr().out == "20\n5350\n"
    with open(log) as log_file:
        assert len(log_file.readlines()) == 200


def test_run_out_of_bounds_fails():
    assert run_exit(["run", "--in", corpus("overflow")]) == 3
    assert run_exit(["run", "--in", corpus("overflow"), "--boundless",
                     "--horizon", "50"]) == 3


def test_run_enclave(capsys):
    hardexec.main.hardexec(["run", "--in", corpus("sum_loop"), "--enclave",
                            configs("envelope"), "--seed", "1"])
    assert capsys.readouterr().out == "55\n"


def test_run_enclave_denied_output():
    assert run_exit(["run", "--in", corpus("const_out"), "--enclave",
                     configs("envelope_no_out"), "--seed", "1"]) == 3


def test_run_enclave_needs_seed():
    assert run_exit(["run", "--in", corpus("sum_loop"), "--enclave",
                     configs("envelope")]) == 2


def test_run_crash_exit_code():
    assert run_exit(["run", "--in", corpus("div_zero")]) == 3


def test_run_hang_exit_code():
    assert run_exit(["run", "--in", corpus("sum_loop"),
                     "--max-steps", "10"]) == 3


def test_run_bad_input():
    assert run_exit(["run", "--in", corpus("fsm"), "--input", "[1,"]) == 2
    assert run_exit(["run", "--in", corpus("fsm"), "--input",
                     "{\"a\": 1}"]) == 2


def test_inject_is_reproducible(tmpdir, capsys):
    hardened = str(tmpdir.join("sum_loop.haft.ir"))
    hardexec.main.hardexec(["harden", "--in", corpus("sum_loop"),
                            "--out", hardened])
    capsys.readouterr()
    reports = []
    for attempt in range(2):
        report = str(tmpdir.join("campaign%d.json" % attempt))
        hardexec.main.hardexec(["inject", "--in", corpus("sum_loop"),
                                "--hardened", hardened, "--model",
                                "reg-bitflip", "--runs", "50", "--seed", "5",
                                "--report", report])
        with open(report, "rb") as report_file:
            reports.append(report_file.read())
    assert reports[0] == reports[1]
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("crashed ")
    assert lines[5].startswith("crashed ")
    assert json.loads(reports[0].decode("utf-8"))['runs'] == 50


def test_inject_csv(tmpdir):
    csv_path = str(tmpdir.join("campaign.csv"))
    records = str(tmpdir.join("records.csv"))
    hardexec.main.hardexec(["inject", "--in", corpus("strcopy"), "--model",
                            "mem-bitflip", "--runs", "10", "--seed", "1",
                            "--report", str(tmpdir.join("c.json")),
                            "--csv", csv_path, "--records", records])
    with open(records) as records_file:
        assert len(records_file.readlines()) == 11


def test_inject_needs_seed(tmpdir):
    assert run_exit(["inject", "--in", corpus("sum_loop"), "--model",
                     "reg-bitflip", "--report",
                     str(tmpdir.join("c.json"))]) == 2


def test_inject_golden_failure(tmpdir):
    assert run_exit(["inject", "--in", corpus("div_zero"), "--model",
                     "reg-bitflip", "--seed", "1", "--report",
                     str(tmpdir.join("c.json"))]) == 4


def test_inject_unknown_model(tmpdir):
    assert run_exit(["inject", "--in", corpus("sum_loop"), "--model",
                     "cosmic-ray", "--seed", "1", "--report",
                     str(tmpdir.join("c.json"))]) == 2


def test_simulate(tmpdir, capsys):
    report = str(tmpdir.join("sim.json"))
    hardexec.main.hardexec(["simulate", "--config", configs("crash_once"),
                            "--seed", "1", "--report", report])
    assert capsys.readouterr().out.startswith("availability 0.950000 ")
    with open(report) as json_file:
        document = json.load(json_file)
    assert document['respawns'] == 1
    assert document['params']['name'] == 'kv'


def test_simulate_duration_override(tmpdir):
    report = str(tmpdir.join("sim.json"))
    hardexec.main.hardexec(["simulate", "--config", configs("crash_once"),
                            "--seed", "1", "--report", report,
                            "--duration", "50"])
    with open(report) as json_file:
        document = json.load(json_file)
    assert document['availability'] == 0.9
    assert document['params']['duration'] == 50.0


def test_simulate_bad_config(tmpdir):
    assert run_exit(["simulate", "--config", configs("bad_key"), "--seed",
                     "1", "--report", str(tmpdir.join("sim.json"))]) == 2


@pytest.mark.parametrize("script", [[5], [["a", 0]], [[1.0, 0, 2]]])
def test_simulate_bad_crash_script(tmpdir, script):
    config = tmpdir.join("cluster.json")
    config.write(json.dumps({"crash_script": script}))
    assert run_exit(["simulate", "--config", str(config), "--seed", "1",
                     "--report", str(tmpdir.join("sim.json"))]) == 2


def test_measure(tmpdir, capsys):
    hardened = str(tmpdir.join("sum_loop.haft.ir"))
    report = str(tmpdir.join("measure.json"))
    hardexec.main.hardexec(["harden", "--in", corpus("sum_loop"),
                            "--out", hardened])
    capsys.readouterr()
    hardexec.main.hardexec(["measure", "--baseline", corpus("sum_loop"),
                            "--hardened", hardened, "--report", report])
    assert capsys.readouterr().out.startswith("dyn_inst_ratio 2.511 ")
    with open(report) as json_file:
        document = json.load(json_file)
    assert document['baseline']['dyn_insts'] == 45
    assert document['hardened']['dyn_insts'] == 113


def test_measure_enclave(tmpdir, capsys):
    report = str(tmpdir.join("measure.json"))
    hardexec.main.hardexec(["measure", "--baseline", corpus("epc_sweep"),
                            "--hardened", corpus("epc_sweep"), "--enclave",
                            configs("envelope"), "--input", "[2048, 1, 10]",
                            "--report", report, "--seed", "5"])
    with open(report) as json_file:
        document = json.load(json_file)
    assert document['dyn_inst_ratio'] == 1.0
    assert 1.0 < document['cycle_ratio'] <= 1.05


def test_measure_enclave_needs_seed():
    assert run_exit(["measure", "--baseline", corpus("sum_loop"),
                     "--hardened", corpus("sum_loop"), "--enclave",
                     configs("envelope")]) == 2


def test_cfg(tmpdir):
    out = str(tmpdir.join("cfg.json"))
    hardexec.main.hardexec(["cfg", "--in", corpus("sum_loop"), "--out", out])
    with open(out) as json_file:
        document = json.load(json_file)
    assert sorted(node['id'] for node in document['nodes']) == [0, 3, 7]


def test_cfg_links_without_future_warning(tmpdir):
    out = str(tmpdir.join("cfg.json"))
    with warnings.catch_warnings():
        warnings.simplefilter("error", FutureWarning)
        hardexec.main.hardexec(["cfg", "--in", corpus("sum_loop"),
                                "--out", out])
    with open(out) as json_file:
        document = json.load(json_file)
    assert sorted((link['source'], link['target'])
                  for link in document['links']) == [(0, 3), (3, 3), (3, 7)]


def test_cfg_dfs(tmpdir):
    out = str(tmpdir.join("cfg.json"))
    hardexec.main.hardexec(["cfg", "--in", corpus("sum_loop"), "--out", out,
                            "--mode", "dfs"])
    with open(out) as json_file:
        document = json.load(json_file)
    assert document['id'] == 0


def test_cfg_bad_mode(tmpdir):
    out = str(tmpdir.join("cfg.json"))
    assert run_exit(["cfg", "--in", corpus("sum_loop"), "--out", out,
                     "--mode", "sideways"]) == 2


def test_config_help(capsys):
    hardexec.main.hardexec(["config-help"])
    out = capsys.readouterr().out
    assert "fault_penalty" in out
    assert "respawn_delay" in out


def test_no_command():
    assert run_exit([]) == 2


def test_bad_log_level():
    assert run_exit(["--log", "bogus", "config-help"]) == 2


def test_unknown_flag():
    assert run_exit(["run", "--in", corpus("sum_loop"), "--turbo"]) == 2


def test_version(capsys):
    assert run_exit(["--version"]) == 0
    assert capsys.readouterr().out.startswith("hardexec ")
