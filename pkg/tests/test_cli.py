import json

import pytest

from tickforge import generators
from tickforge.cli import main
from tickforge.syntax import parse_spec, print_spec


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    assert main(["gen", "corpus", "-o", str(d)]) == 0
    return d


def test_gen_corpus_sidecars(corpus_dir):
    side = json.loads((corpus_dir / "Tprime.expected.json").read_text())
    assert side["expected"]["L"] is False
    sat = json.loads((corpus_dir / "sat_np.expected.json").read_text())
    assert sat["bounded"] == {"Z@4": True, "S@4": False, "L@4": False}
    assert len(list(corpus_dir.glob("*.tmsr"))) == 6


def test_check_v_tdoubleprime(corpus_dir, capsys):
    code = main(["check", str(corpus_dir / "Tdoubleprime.tmsr"), "--property", "v", "--no-timing"])
    out = json.loads(capsys.readouterr().out)
    assert code == 1
    assert out["counterexample"][-1]["state"] == "[Time |1| C]"


@pytest.mark.parametrize("name, prop, code", [("Tprime", "s", 0), ("Tprime", "l", 1),
                                              ("L_not_S_pts", "L", 0), ("drone", "s", 1)])
def test_check_exit_codes(corpus_dir, capsys, name, prop, code):
    assert main(["check", str(corpus_dir / f"{name}.tmsr"), "-p", prop, "--no-timing"]) == code


def test_check_outputs_byte_stable(corpus_dir, tmp_path, capsys):
    f = corpus_dir / "drone.tmsr"
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["check", str(f), "-p", "z", "--no-timing", "--json", str(a), "--dot", str(tmp_path / "g.dot")])
    main(["check", str(f), "-p", "z", "--no-timing", "--json", str(b), "--threads", "4"])
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "g.dot").read_text().startswith("digraph")


def test_check_ticks_zero(tmp_path, capsys):
    f = tmp_path / "x.tmsr"
    f.write_text("spec x; pred A; init { Time@0, A@0 }\n")
    assert main(["check", str(f), "--property", "z", "--ticks", "0"]) == 0


def test_check_v_bounded_is_usage_error(corpus_dir, capsys):
    assert main(["check", str(corpus_dir / "Tprime.tmsr"), "-p", "v", "--ticks", "2"]) == 2


def test_resource_exit(corpus_dir, capsys, monkeypatch):
    monkeypatch.setenv("TICKFORGE_NODE_BUDGET", "2")
    assert main(["check", str(corpus_dir / "drone.tmsr"), "-p", "z"]) == 3


def test_validate_drone(tmp_path, capsys):
    f = tmp_path / "drone.tmsr"
    assert main(["gen", "drone", "-o", str(f)]) == 0
    assert main(["validate", str(f)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["progressing"] is True and out["dmax"] == 1


def test_parse_error_exit(tmp_path, capsys):
    f = tmp_path / "bad.tmsr"
    f.write_text("spec b; pred A; init { Time@0 }\nrule r: Time@T, A@T1 | { U > T } -> Time@T, A@T;\n")
    assert main(["validate", str(f)]) == 2
    assert "bad.tmsr:2:26: guard variable not in pre-condition: U" in capsys.readouterr().err


def test_missing_file(capsys):
    assert main(["validate", "/nonexistent/x.tmsr"]) == 2


def test_usage_error():
    with pytest.raises(SystemExit) as e:
        main(["check"])
    assert e.value.code == 2


def test_trace_first_policy(corpus_dir, capsys):
    assert main(["trace", str(corpus_dir / "Tprime.tmsr"), "--steps", "2", "--policy", "first"]) == 0
    assert capsys.readouterr().out.splitlines() == [
        "0 init {} -> {C@1, Time@0}",
        "1 Tick {T=0} -> {C@1, Time@1}",
        "2 r6a {T=1, T1=1} -> {D@1, Time@1}",
    ]


def test_trace_seeded(corpus_dir, capsys):
    f = str(corpus_dir / "drone.tmsr")
    main(["trace", f, "--steps", "15", "--seed", "4", "--json"])
    a = capsys.readouterr().out
    main(["trace", f, "--steps", "15", "--seed", "4", "--json"])
    assert capsys.readouterr().out == a
    assert len(json.loads(a)["steps"]) == 15


def test_gen_sat(tmp_path, capsys):
    f = tmp_path / "sat.tmsr"
    assert main(["gen", "sat", "--cnf", "1 1 1; -1 -1 -1", "-o", str(f)]) == 0
    assert "n_ticks = 4" in capsys.readouterr().err
    assert main(["check", str(f), "-p", "z", "--ticks", "4"]) == 1
    assert main(["gen", "sat", "--cnf", "1 2", "-o", str(f)]) == 2


def test_oracle_subcommand(corpus_dir, capsys):
    f = str(corpus_dir / "Tdoubleprime.tmsr")
    assert main(["oracle", f, "-p", "z", "--horizon", "2"]) == 0
    assert main(["oracle", f, "-p", "v"]) == 1
    assert main(["oracle", f, "-p", "v", "--horizon", "2"]) == 2


def test_print_round_trip(corpus_dir, capsys):
    main(["print", str(corpus_dir / "sat_conp.tmsr")])
    text = capsys.readouterr().out
    assert print_spec(parse_spec(text)) == text
