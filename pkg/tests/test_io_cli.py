import json

import numpy as np
import pytest

from mpvkit import cli
from mpvkit.examples import example, example_names
from mpvkit.fileio import (
    TensorFile,
    TensorFormatError,
    parse_tensor_text,
    serialize_tensor,
    write_tensor,
)
from mpvkit.sampling import random_normal_tensor, rng_from
from mpvkit.tensors import MpdoTensor, MpvTensor, mpdo_dense


def test_round_trip_examples_bit_exact():
    for name in example_names():
        t = example(name, 0.25) if name == "zcl-no-sal" else example(name)
        text = serialize_tensor(t)
        back = parse_tensor_text(text).to_tensor()
        assert type(back) is type(t)
        assert np.array_equal(back.entries, t.entries)
        assert serialize_tensor(back) == text


def test_round_trip_random_tensors():
    rng = rng_from(41)
    for _ in range(50):
        d = int(rng.integers(1, 5))
        D = int(rng.integers(1, 5))
        t = MpvTensor(rng.normal(size=(d, D, D)) + 1j * rng.normal(size=(d, D, D)))
        back = parse_tensor_text(serialize_tensor(t)).to_tensor()
        assert np.array_equal(back.entries, t.entries)


def test_file_round_trip(tmp_path):
    t = example("aklt")
    path = tmp_path / "aklt.tensor"
    write_tensor(path, t, metadata={"note": "spin-1 chain"})
    tf = parse_tensor_text(path.read_text())
    assert tf.metadata["note"] == "spin-1 chain"
    assert np.array_equal(tf.to_tensor().entries, t.entries)


def test_parse_error_wrong_entry_count():
    t = MpvTensor(np.ones((1, 2, 2)))
    lines = serialize_tensor(t).splitlines()
    with pytest.raises(TensorFormatError) as exc:
        parse_tensor_text("\n".join(lines[:-1]))
    assert exc.value.line is not None


def test_parse_error_non_finite():
    t = MpvTensor(np.ones((1, 1, 1)))
    text = serialize_tensor(t).replace("1 0", "nan 0")
    with pytest.raises(TensorFormatError):
        parse_tensor_text(text)


def test_parse_error_bad_kind():
    text = serialize_tensor(MpvTensor(np.ones((1, 1, 1)))).replace("mpv", "spam")
    with pytest.raises(TensorFormatError) as exc:
        parse_tensor_text(text)
    assert exc.value.line == 2


def test_parse_error_bad_header():
    with pytest.raises(TensorFormatError) as exc:
        parse_tensor_text("banana v1\n")
    assert exc.value.line == 1


def test_mpdo_file_regenerates_ring(tmp_path):
    m = example("toric-boundary")
    path = tmp_path / "toric.tensor"
    write_tensor(path, m)
    from mpvkit.fileio import parse_tensor

    back = parse_tensor(str(path))
    assert isinstance(back, MpdoTensor)
    rho = mpdo_dense(back, 3)
    # ring of three sites: identity plus the all-sites spin-flip parity term
    z = np.diag([1.0, -1.0])
    zzz = np.kron(np.kron(z, z), z)
    expect = np.eye(8) + zzz
    assert np.max(np.abs(rho - expect)) < 1e-12


def _run(capsys, argv):
    code = cli.run(argv)
    out = capsys.readouterr().out
    return code, out


def test_cli_rfp_pure_ghz(capsys):
    code, out = _run(capsys, ["rfp-pure", "ghz", "--json"])
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == 1
    assert doc["verdicts"]["rfp"] is True


def test_cli_mutual_info_matches_published_profile(capsys):
    code, out = _run(
        capsys, ["mutual-info", "zcl-no-sal", "--p", "0.25", "--n", "4", "--json"]
    )
    assert code == 0
    doc = json.loads(out)
    ent = doc["verdicts"]["entropies"]
    assert np.allclose(ent, [2.0, 2.9544, 3.8802], atol=5e-4)
    mi = doc["verdicts"]["mutual_info"]
    assert abs(mi[0] - 3.0963) < 5e-4
    assert abs(mi[1] - 3.1250) < 5e-4


def test_cli_algebra_toric(capsys):
    code, out = _run(capsys, ["algebra", "toric", "--json"])
    assert code == 0
    doc = json.loads(out)
    assert doc["verdicts"]["verdict"] == "closed"
    assert doc["verdicts"]["closed"] is True
    assert doc["verdicts"]["idempotent"] is True


def test_cli_json_deterministic(capsys):
    _, out1 = _run(capsys, ["canon", "aklt", "--json"])
    _, out2 = _run(capsys, ["canon", "aklt", "--json"])
    assert out1 == out2


def test_cli_reads_tensor_file(tmp_path, capsys):
    path = tmp_path / "ghz.tensor"
    write_tensor(path, example("ghz"))
    code, out = _run(capsys, ["rfp-pure", str(path), "--json"])
    assert code == 0
    assert json.loads(out)["verdicts"]["rfp"] is True


def test_cli_usage_errors(capsys):
    assert cli.run(["no-such-command", "ghz"]) == 1
    capsys.readouterr()
    assert cli.run(["rfp-pure", "no-such-example"]) == 1
    capsys.readouterr()


def test_cli_numerical_failure_exit_code(capsys):
    # channel construction fails on a tensor that is not a fixed point
    code = cli.run(["channels", "aklt"])
    assert code == 2
    capsys.readouterr()


def test_cli_seed_reproducible(capsys):
    code1, out1 = _run(capsys, ["gauge", "ghz", "--seed", "5", "--json"])
    code2, out2 = _run(capsys, ["gauge", "ghz", "--seed", "5", "--json"])
    assert code1 == code2
    assert out1 == out2
