import json
import random
from fractions import Fraction as F

import pytest

from rosenthal.amalgam import corrupt_phi, bundle_from_json
from rosenthal.cli import _random_window, main
from rosenthal.ell1 import FnWindow
from rosenthal.families import projection_functions, schreier_restricted
from rosenthal.stepfn import AtomSpace, StepFn


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def members(tmp_path):
    rng = random.Random(0)
    ms = [{"eps": "1/4", "window": _random_window(rng, 3, 3).to_json()} for _ in range(2)]
    p = tmp_path / "members.json"
    p.write_text(json.dumps({"members": ms}))
    one = tmp_path / "one.json"
    one.write_text(json.dumps({"members": ms[:1]}))
    return p, one


def test_family_schreier(capsys):
    code, out, _ = run(capsys, "family", "schreier", 9)
    assert code == 0 and "order(T_F) = 6" in out and "[PASS]" in out


def test_family_uniform(capsys):
    code, out, _ = run(capsys, "family", "uniform", 3, 2)
    assert code == 0 and "order(T_F) = 3" in out


def test_family_bad_files(capsys, tmp_path):
    p = tmp_path / "f.txt"
    p.write_text("# ground 2\n{}\n{0,x}\n")
    assert run(capsys, "family", "file", p)[0] == 2
    p.write_text("# ground 2\n{}\n{0,1}\n")
    code, _, err = run(capsys, "family", "file", p)
    assert code == 2 and "hereditary" in err
    assert run(capsys, "family", "file", tmp_path / "missing.txt")[0] == 2


def test_family_file_ok(capsys, tmp_path):
    p = tmp_path / "f.txt"
    p.write_text(schreier_restricted(5).to_text())
    code, out, _ = run(capsys, "family", "file", p)
    assert code == 0 and "order(T_F) = 4" in out


def test_rank_single_function(capsys, tmp_path):
    p = tmp_path / "w.json"
    p.write_text(json.dumps(FnWindow([StepFn(AtomSpace.dyadic(1), [1, F(-1, 2)])]).to_json()))
    code, out, _ = run(capsys, "rank", p, "--d", 1)
    assert code == 0 and "glued rank (d = 1..1, length <= 1): 3" in out


def test_rank_matches_family(capsys, tmp_path):
    p = tmp_path / "w.json"
    p.write_text(json.dumps(projection_functions(schreier_restricted(5)).to_json()))
    code, out, _ = run(capsys, "rank", p, "--d", 2)
    fam = run(capsys, "family", "schreier", 5)[1]
    assert code == 0 and "T^d increases with d" in out
    t2 = next(l for l in out.splitlines() if l.startswith("T^2:")).split("order ")[1]
    assert f"order(T^2) = {t2} " in fam


def test_rank_rejects_big_norm(capsys, tmp_path):
    p = tmp_path / "w.json"
    p.write_text(json.dumps({"fns": [{"space": {"dyadic": 1}, "values": ["2", "0"]}]}))
    assert run(capsys, "rank", p)[0] == 2


def test_embed_identity_eps_zero(capsys, tmp_path):
    sp = AtomSpace.dyadic(2)
    w = FnWindow([StepFn(sp, [1, 0, 0, 0]), StepFn(sp, [0, F(1, 2), -1, 0])])
    p = tmp_path / "g.json"
    p.write_text(json.dumps(w.to_json()))
    code, out, _ = run(capsys, "embed", p, p, "--eps", 0)
    assert code == 0 and out.count("[PASS]") == 2


def test_embed_failure_prints_witness(capsys, tmp_path):
    sp = AtomSpace.dyadic(1)
    g, f = tmp_path / "g.json", tmp_path / "f.json"
    g.write_text(json.dumps(FnWindow([StepFn(sp, [1, 0])]).to_json()))
    f.write_text(json.dumps(FnWindow([StepFn(sp, [F(1, 2), 0])]).to_json()))
    code, out, _ = run(capsys, "embed", g, f, "--eps", "1/2")
    assert code == 1 and "witness a = (1)" in out and "lhs 1 > rhs 3/4" in out


def test_amalgam_pipeline(capsys, tmp_path, members):
    path, one = members
    b1 = tmp_path / "b1.json"
    assert run(capsys, "amalgam", "build", one, "--depth", 6, "--out", b1)[0] == 0
    b = tmp_path / "b.json"
    code, built, _ = run(capsys, "amalgam", "build", path, "--depth", 8, "--out", b)
    assert code == 0 and built.count("[PASS]") == 5
    assert run(capsys, "amalgam", "verify", b)[0] == 0
    code, out, _ = run(capsys, "embed", "--bundle", b, "--member", 1, "--iv", 1)
    assert code == 0 and "monotone map" in out
    # determinism: identical inputs give byte-identical outputs
    b2 = tmp_path / "b2.json"
    again = run(capsys, "amalgam", "build", path, "--depth", 8, "--out", b2)[1]
    assert again == built
    assert b.read_bytes() == b2.read_bytes()


def test_corrupted_bundle(capsys, tmp_path, members):
    path, _ = members
    b = tmp_path / "b.json"
    run(capsys, "amalgam", "build", path, "--depth", 8, "--out", b)
    bundle = json.loads(b.read_text())
    ms, out = bundle_from_json(bundle)
    L = bundle["selections"]["0"]
    phi = corrupt_phi(out, L)
    bundle["phi"] = [phi[t] for t in out.nodes]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(bundle))
    code, text, _ = run(capsys, "amalgam", "verify", bad)
    assert code == 1 and "witness a = (" in text
    code, text, _ = run(capsys, "embed", "--bundle", bad, "--member", 0)
    assert code == 1 and "witness a = (" in text


def test_amalgam_coarse_dense_fails_honestly(capsys, tmp_path, members):
    _, one = members
    d = tmp_path / "dense.json"
    d.write_text(json.dumps([StepFn(AtomSpace.dyadic(3), [1] * 8).to_json()]))
    code, out, _ = run(capsys, "amalgam", "build", one, "--dense", d, "--depth", 4, "--eps", "1/1000")
    assert code == 1 and "[FAIL] encoding" in out


def test_input_errors(capsys, tmp_path, members):
    path, _ = members
    with pytest.raises(SystemExit) as e:
        main(["amalgam", "build", str(path), "--depth", "4", "--eps", "0.25x"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["selftest"])
    assert e.value.code == 2
    assert run(capsys, "amalgam", "build", path)[0] == 2
    bad = tmp_path / "x.json"
    bad.write_text("{not json")
    assert run(capsys, "amalgam", "verify", bad)[0] == 2


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest", "--seed", 0)
    assert code == 0 and "FAIL" not in out
    assert run(capsys, "selftest", "--seed", 0)[1] == out
