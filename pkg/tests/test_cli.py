import io

import pytest

from sppl_exact import corpus, serialize
from sppl_exact.cli import EXIT_OK, EXIT_TRANSLATE, EXIT_USAGE, EXIT_ZERO, main
from sppl_exact.inference import condition
from sppl_exact.spe import prob, validate
from sppl_exact.translator import State, parse_expr, to_event, translate


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def gpa(tmp_path):
    prog = tmp_path / "gpa.sppl"
    prog.write_text(corpus.INDIAN_GPA)
    spe = tmp_path / "prior.json"
    code, out, _ = run("translate", "--program", str(prog), "--spe-out", str(spe), "--stats")
    assert code == EXIT_OK
    return prog, spe, out


def test_translate_stats(gpa):
    _, _, out = gpa
    lines = dict(line.split(" ", 1) for line in out.splitlines())
    assert lines["nodes_pre_dedup"] == "19"
    assert lines["nodes"] == "17"
    assert float(lines["seconds"]) >= 0


def test_translate_hmm_validates(tmp_path):
    prog, spe = tmp_path / "hmm.sppl", tmp_path / "hmm.json"
    prog.write_text(corpus.hmm(2))
    assert run("translate", "--program", str(prog), "--spe-out", str(spe))[0] == EXIT_OK
    assert validate(serialize.load(str(spe))) == []


def test_query_prob_and_density(gpa):
    _, spe, _ = gpa
    code, out, _ = run("query", "--spe-in", str(spe), "--query", "prob(GPA <= 4)")
    assert code == EXIT_OK and out == "0.68000000000000005\n"
    code, out, _ = run("query", "--spe-in", str(spe),
                       "--query", "density({'Nationality': 'USA', 'GPA': 3.5})")
    assert code == EXIT_OK and out == "1 0.10625\n"


def test_staged_equals_monolithic(gpa, tmp_path):
    _, spe, _ = gpa
    post = tmp_path / "post.json"
    code, _, _ = run("condition", "--spe-in", str(spe), "--event", corpus.INDIAN_GPA_EVENT,
                     "--spe-out", str(post))
    assert code == EXIT_OK
    code, out, _ = run("query", "--spe-in", str(post), "--query", "prob(Nationality == 'USA')")
    g = translate(corpus.INDIAN_GPA)
    ev = lambda text, root: to_event(parse_expr(text), State(root, {}))
    p = condition(g.root, ev(corpus.INDIAN_GPA_EVENT, g.root))
    expected = prob(p, ev("Nationality == 'USA'", p))
    assert out == format(expected, ".17g") + "\n"


def test_full_space_condition_is_unchanged(gpa, tmp_path):
    _, spe, _ = gpa
    post = tmp_path / "post.json"
    assert run("condition", "--spe-in", str(spe), "--event", "GPA > -1000",
               "--spe-out", str(post))[0] == EXIT_OK
    a = run("query", "--spe-in", str(spe), "--query", "prob(GPA <= 4)")[1]
    b = run("query", "--spe-in", str(post), "--query", "prob(GPA <= 4)")[1]
    assert a == b


def test_simulate_is_deterministic(gpa, tmp_path):
    _, spe, _ = gpa
    files = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for f in files:
        assert run("query", "--spe-in", str(spe), "--query", "simulate(GPA, Nationality)",
                   "--samples", "10", "--seed", "0", "--out", str(f))[0] == EXIT_OK
    assert files[0].read_bytes() == files[1].read_bytes()
    assert len(files[0].read_text().splitlines()) == 11


def test_exit_codes(gpa, tmp_path):
    _, spe, _ = gpa
    assert run()[0] == EXIT_USAGE
    assert run("query", "--spe-in", str(spe), "--query", "prob(GPA <=")[0] == EXIT_USAGE
    assert run("query", "--spe-in", str(spe), "--query", "frobnicate(GPA)")[0] == EXIT_USAGE
    bad = tmp_path / "r3.sppl"
    bad.write_text("X ~ normal(0, 1)\nY ~ normal(0, 1)\nZ ~ X/Y**2\n")
    code, _, err = run("translate", "--program", str(bad), "--spe-out", str(tmp_path / "x.json"))
    assert code == EXIT_TRANSLATE and "R3" in err
    code, _, _ = run("condition", "--spe-in", str(spe), "--event", "GPA > 20",
                     "--spe-out", str(tmp_path / "z.json"))
    assert code == EXIT_ZERO
