# Hardexec testsuite: JSON configuration files.

import os.path

import pytest

from hardexec import ConfigError
from hardexec.config import (ClusterConfigParser, ConfigParser,
                             EnvelopeConfigParser, load_cluster_config,
                             load_envelope_config)

CONFIGS = os.path.join(os.path.dirname(__file__), "configs")


def path(name):
    return os.path.join(CONFIGS, name + ".json")


def test_envelope_defaults():
    config = load_envelope_config(path("envelope_no_out"))
    assert config['allowlist'] == ['file_get', 'file_put']
    assert config['epc_pages'] == 22
    assert config['fault_penalty'] == 1000
    assert config['expected_measurements'] == []


def test_cluster_defaults():
    config = load_cluster_config(path("crash_once"))
    assert config['name'] == 'kv'
    assert config['crash_script'] == [[10.0, 0]]
    assert config['mttf_mean'] is None
    assert config['max_instances'] == 4
    assert config['scale_up_queue_threshold'] == 10


def test_unknown_key():
    with pytest.raises(ConfigError) as error:
        load_envelope_config(path("bad_key"))
    assert 'page_size' in str(error.value)


def test_wrong_type():
    parser = EnvelopeConfigParser()
    with pytest.raises(ConfigError):
        parser.parse_text('{"epc_pages": "many"}')
    with pytest.raises(ConfigError):
        parser.parse_text('{"fault_penalty": true}')
    with pytest.raises(ConfigError):
        parser.parse_text('{"allowlist": "out"}')


def test_nullable_and_integer_floats():
    envelope = EnvelopeConfigParser().parse_text('{"epc_pages": null}')
    assert envelope['epc_pages'] is None
    cluster = ClusterConfigParser().parse_text(
        '{"duration": 60, "mttf_mean": null}')
    assert cluster['duration'] == 60
    with pytest.raises(ConfigError):
        ClusterConfigParser().parse_text('{"target_instances": 1.5}')


def test_missing_file(tmpdir):
    with pytest.raises(ConfigError):
        load_cluster_config(str(tmpdir.join("absent.json")))


def test_bad_json(tmpdir):
    broken = tmpdir.join("broken.json")
    broken.write("{\"epc_pages\": ")
    with pytest.raises(ConfigError):
        load_envelope_config(str(broken))
    with pytest.raises(ConfigError):
        EnvelopeConfigParser().parse_text("[1, 2]")


def test_registry():
    parser = ConfigParser(description="test options")
    parser.add_option("colour", type='', default='red', help="A colour")
    parser.add_delimiter()
    parser.add_option("shades", type={})
    parser.add_allowed_key("shades", "dark")
    assert parser.parse_text('{"shades": {"dark": 1}}') == {
        'colour': 'red', 'shades': {'dark': 1}}
    with pytest.raises(ConfigError):
        parser.parse_text('{"shades": {"light": 1}}')
    with pytest.raises(ValueError):
        parser.add_option("colour", type='')
    with pytest.raises(RuntimeError):
        parser.add_allowed_key("colour", "dark")


def test_help_lists_options(capsys):
    EnvelopeConfigParser().help()
    ClusterConfigParser().help()
    out = capsys.readouterr().out
    assert "epc_pages" in out
    assert "crash_script" in out
    assert out.startswith("Envelope configuration options")
