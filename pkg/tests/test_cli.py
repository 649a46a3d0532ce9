import json

import numpy as np
import pytest

from qutritlocc.cli import main
from qutritlocc.config import default_tol, set_default_tol
from qutritlocc.pauli import PAULIS, dagger
from qutritlocc.statefile import load_state, protocol_from_json
from qutritlocc.states import GenericState, positive_factor, span_factor
from qutritlocc.protocols import simulate_branches


@pytest.fixture(autouse=True)
def _restore_tolerance():
    before = default_tol()
    yield
    set_default_tol(before)


def pair_mat(w, z=0.08):
    return np.eye(3) / 3 + z * (PAULIS[w] + dagger(PAULIS[w]))


def two_pair_mat(w1, w2, z=0.05):
    return (
        np.eye(3) / 3
        + z * (PAULIS[w1] + dagger(PAULIS[w1]))
        + z * (PAULIS[w2] + dagger(PAULIS[w2]))
    )


@pytest.fixture(scope="module")
def files(tmp_path_factory, params):
    """A small zoo of state files shared by the CLI tests."""
    from qutritlocc.statefile import save_state

    root = tmp_path_factory.mktemp("states")
    rng = np.random.default_rng(17)
    dense = lambda: rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) + 3 * np.eye(3)

    zoo = {
        "seed": GenericState(params, (np.eye(3),) * 3),
        "confined": GenericState(
            params,
            (
                dense(),
                span_factor(pair_mat((0, 1)), (0, 1)),
                span_factor(pair_mat((0, 1), 0.04), (0, 1)),
            ),
        ),
        "tiling": GenericState(
            params,
            (
                positive_factor(two_pair_mat((1, 0), (0, 1))),
                positive_factor(two_pair_mat((1, 1), (1, 2))),
                np.eye(3),
            ),
        ),
        "dense": GenericState(params, (dense(), dense(), dense())),
    }
    paths = {}
    for name, state in zoo.items():
        paths[name] = str(root / f"{name}.json")
        save_state(paths[name], state)

    degenerate = root / "degenerate-seed.json"
    degenerate.write_text(json.dumps({"a": [1.0, 0.0], "b": [1.0, 0.0], "c": [0.3, 0.0]}))
    paths["degenerate"] = str(degenerate)
    paths["root"] = root
    return paths


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------


def test_generate_writes_parseable_state(capsys, tmp_path):
    out_file = tmp_path / "state.json"
    code, out, _ = run(
        capsys, "generate", "dense", "--out", str(out_file), "--rng-seed", "5", "--json"
    )
    assert code == 0
    assert json.loads(out)["written"] == str(out_file)
    state = load_state(out_file)
    assert state.factors[0].shape == (3, 3)


def test_generate_stdout_is_a_state_document(capsys):
    code, out, _ = run(capsys, "generate", "seed", "--rng-seed", "3", "--label", "demo")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == "1"
    assert doc["metadata"] == {"kind": "seed", "label": "demo"}


def test_generate_params_from_reuses_seed(capsys, tmp_path, files):
    out_file = tmp_path / "reuse.json"
    code, _, _ = run(
        capsys,
        "generate",
        "confined",
        "--params-from",
        files["seed"],
        "--out",
        str(out_file),
    )
    assert code == 0
    assert load_state(out_file).seed == load_state(files["seed"]).seed


def test_check_generic_accepts_good_seed(capsys, files):
    code, out, _ = run(capsys, "check-generic", files["seed"])
    assert code == 0
    assert "generic" in out and "NOT" not in out


def test_check_generic_rejects_degenerate_seed(capsys, files):
    code, out, _ = run(capsys, "check-generic", files["degenerate"], "--json")
    assert code == 2
    report = json.loads(out)
    assert report["generic"] is False
    assert report["violations"]


def test_check_generic_multiple_files_json(capsys, files):
    code, out, _ = run(
        capsys, "--json", "check-generic", files["seed"], files["degenerate"]
    )
    assert code == 2
    reports = json.loads(out)
    assert [r["generic"] for r in reports] == [True, False]


def test_standard_form_of_seed(capsys, files):
    code, out, _ = run(capsys, "standard-form", files["seed"], "--json")
    assert code == 0
    report = json.loads(out)
    assert report["gauge"] == [0, 0]
    coords = np.array(report["coords"])
    assert np.abs(coords).max() <= 1e-9


def test_lu_equiv_detects_dressing(capsys, files, tmp_path, params):
    from qutritlocc.generate import random_unitary
    from qutritlocc.statefile import save_state

    rng = np.random.default_rng(23)
    base = load_state(files["confined"])
    dressed = GenericState(
        params, tuple(random_unitary(rng) @ f for f in base.factors)
    )
    dressed_file = tmp_path / "dressed.json"
    save_state(dressed_file, dressed)

    code, out, _ = run(capsys, "lu-equiv", files["confined"], str(dressed_file))
    assert code == 0
    assert "locally equivalent" in out

    code, out, _ = run(capsys, "lu-equiv", files["confined"], files["dense"])
    assert code == 2
    assert "not locally equivalent" in out


def test_classify_confined(capsys, files):
    code, out, _ = run(capsys, "classify", files["confined"], "--json")
    assert code == 0
    report = json.loads(out)
    assert report["sep_reachable"] and report["locc_reachable"]
    assert report["locc_convertible"]
    assert not report["isolated"]
    assert report["case"] == "confined"
    assert report["pair"] == [0, 1]


def test_classify_tiling_text(capsys, files):
    code, out, _ = run(capsys, "classify", files["tiling"])
    assert code == 0
    for flag in ("support_tiling", "sep_only", "in_mes", "isolated"):
        assert flag in out


def test_sep_decide_feasible(capsys, files):
    code, out, _ = run(
        capsys, "sep-decide", "--from", files["seed"], "--to", files["tiling"], "--json"
    )
    assert code == 0
    report = json.loads(out)
    assert report["feasible"] and report["unique"] and report["nontrivial"]
    assert sum(report["witness"]) == pytest.approx(1.0, abs=1e-9)


def test_sep_decide_infeasible(capsys, files):
    code, out, _ = run(capsys, "sep-decide", "--from", files["seed"], "--to", files["dense"])
    assert code == 2
    assert "infeasible" in out


def test_sep_decide_with_oracle(capsys, files):
    code, out, _ = run(
        capsys,
        "sep-decide",
        "--from",
        files["seed"],
        "--to",
        files["tiling"],
        "--oracle",
        "--json",
    )
    assert code == 0
    report = json.loads(out)
    assert report["oracle"]["feasible"] is True


def test_synth_protocol_reachable_target(capsys, files):
    code, out, _ = run(capsys, "synth-protocol", "--target", files["confined"])
    assert code == 0
    proto = protocol_from_json(json.loads(out))
    assert proto.construction == "locc-one-round"
    assert simulate_branches(proto).all_matched


def test_synth_protocol_unreachable_target(capsys, files):
    code, _, err = run(capsys, "synth-protocol", "--target", files["tiling"])
    assert code == 2
    assert "not synthesized" in err


def test_synth_then_verify_protocol(capsys, files, tmp_path):
    proto_file = tmp_path / "proto.json"
    code, _, _ = run(
        capsys,
        "synth-protocol",
        "--target",
        files["tiling"],
        "--source",
        files["seed"],
        "--out",
        str(proto_file),
    )
    assert code == 0
    code, out, _ = run(capsys, "verify-protocol", str(proto_file))
    assert code == 0
    assert "ok" in out


def test_verify_protocol_catches_tampering(capsys, files, tmp_path):
    proto_file = tmp_path / "proto.json"
    run(
        capsys,
        "synth-protocol",
        "--target",
        files["tiling"],
        "--source",
        files["seed"],
        "--out",
        str(proto_file),
    )
    doc = json.loads(proto_file.read_text())
    entry = doc["elements"][0]["factors"][0][0][0]
    entry[0] *= 1.01
    proto_file.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "verify-protocol", str(proto_file))
    assert code == 2
    assert "FAILED" in out


def test_symmetry_audit_clean_seed(capsys, files):
    code, out, _ = run(capsys, "symmetry-audit", files["seed"], "--json")
    assert code == 0
    report = json.loads(out)
    assert report["clean"] is True
    assert len(report["survivors"]) == 9
    assert report["surplus"] == 0


def test_symmetry_audit_refuses_degenerate_seed(capsys, files):
    with pytest.raises(ValueError, match="generic"):
        run(capsys, "symmetry-audit", files["degenerate"])


def test_tolerance_flag_positions(capsys, files):
    code, _, _ = run(capsys, "--tolerance", "1e-6", "classify", files["confined"])
    assert code == 0
    code, _, _ = run(capsys, "classify", files["confined"], "--tolerance", "1e-6")
    assert code == 0


def test_tolerance_must_be_positive(capsys, files):
    code, _, err = run(capsys, "--tolerance", "-1", "classify", files["confined"])
    assert code == 1
    assert "positive" in err


def test_usage_errors_exit_one(capsys, files):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 1
    capsys.readouterr()
    with pytest.raises(SystemExit) as exc:
        main(["sep-decide", "--from", files["seed"]])
    assert exc.value.code == 1
    capsys.readouterr()


def test_schema_error_exits_one(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema_version": "1"}')
    code, _, err = run(capsys, "classify", str(bad))
    assert code == 1
    assert "error" in err
