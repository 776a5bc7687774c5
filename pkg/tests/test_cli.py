import io
import shutil
import subprocess
import sys

import pytest

from euslem.cli import main
from euslem.corpus import read_cohorts
from euslem.pipeline import DATA_ENV, package_data_dir


def run(capsys, monkeypatch, argv, stdin=""):
    monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    rc = main(argv)
    out, err = capsys.readouterr()
    return rc, out, err


@pytest.fixture
def cli(capsys, monkeypatch):
    return lambda argv, stdin="": run(capsys, monkeypatch, argv, stdin)


def test_count_only(cli):
    rc, out, _ = cli(["generate", "--lemma", "seme", "--depth", "0", "--count-only"])
    assert rc == 0
    assert out == "total=135 closed=77 genitive=58\n"


def test_generate_spec(cli):
    rc, out, _ = cli(["generate", "--lemma", "seme", "--spec", "case=INE,number=SG,det=yes"])
    assert (rc, out) == (0, "semean\n")


def test_generate_listing_has_one_line_per_cell(cli):
    rc, out, _ = cli(["generate", "--lemma", "seme"])
    assert rc == 0 and len(out.splitlines()) == 135
    assert all(len(line.split("\t")) == 3 for line in out.splitlines())


def test_generate_unknown_lemma_is_a_data_error(cli):
    rc, _, err = cli(["generate", "--lemma", "zzz", "--count-only"])
    assert rc == 2 and "zzz" in err


def test_analyze_gizonak(cli):
    rc, out, _ = cli(["analyze"], "gizonak\n")
    assert rc == 0
    corpus = read_cohorts(out)
    (c,) = corpus.cohorts
    assert c.surface == "gizonak" and len(c.readings) == 2


def test_analyze_with_level_writes_tags(cli):
    rc, out, _ = cli(["analyze", "--level", "3", "--l3-params", "case,number",
                      "--format", "lines"], "gizonak")
    assert rc == 0
    assert sorted(line.split("\t")[1] for line in out.splitlines() if line) == \
        ["NOUN+ABS+PL", "NOUN+ERG+SG"]


def test_empty_input_gives_empty_output(cli):
    rc, out, _ = cli(["tag"], "")
    assert (rc, out) == (0, "")


def test_tag_gives_one_reading_per_token(cli):
    rc, out, _ = cli(["tag"], "Aitaren etxea handia da. Gizonak etxean ikusi ditu.")
    assert rc == 0
    corpus = read_cohorts(out)
    assert len(corpus) == 2 and corpus.is_disambiguated()
    assert [c.surface for c in corpus.sentences[0]] == ["Aitaren", "etxea", "handia", "da", "."]


def test_unknown_words_still_get_a_reading(cli):
    rc, out, _ = cli(["tag", "--format", "lines"], "blargetan « zzz")
    assert rc == 0
    labels = [line.split("\t")[1] for line in out.splitlines() if line]
    assert labels == ["RESIDUAL", "PUNCTUATION", "RESIDUAL"]


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["analyze", "--l3-params", "case"],
    ["analyze", "--level", "2", "--l3-params", "case"],
    ["analyze", "--jobs", "0"],
    ["generate", "--lemma", "seme", "--depth", "-1"],
    ["generate", "--lemma", "seme", "--spec", "case"],
    ["train", "x.coh", "--lambda", "zero"],
    ["compile"],
])
def test_usage_errors_exit_one(cli, argv):
    rc, out, err = cli(argv)
    assert rc == 1 and out == ""
    assert "usage error" in err


def test_missing_file_exits_two(cli, tmp_path):
    missing = tmp_path / "nope.lex"
    rc, out, err = cli(["analyze", "--lexicon", str(missing)], "gizonak")
    assert (rc, out) == (2, "")
    assert "nope.lex" in err


def test_bad_rules_file_names_file_and_line(cli, tmp_path):
    bad = tmp_path / "bad.rul"
    bad.write_text('ALPHABET a e ;\n\nRULE "x" a => V _ ;\n')
    rc, out, err = cli(["tag", "--rules", str(bad)], "gizonak")
    assert (rc, out) == (2, "")
    assert f"{bad}:3" in err


def test_bad_model_fails_before_any_output(cli, tmp_path):
    bad = tmp_path / "broken.mod"
    bad.write_text("MODEL order=2 level=2 lambda=1\nBOGUS\n")
    rc, out, err = cli(["tag", "--model", str(bad)], "Gizonak etxean daude.")
    assert (rc, out) == (2, "")
    assert "broken.mod:2" in err


def test_bad_cohort_file_in_stats(cli, tmp_path):
    bad = tmp_path / "bad.coh"
    bad.write_text('\t"x" SRC=lexicon\n')
    rc, _, err = cli(["stats", str(bad)])
    assert rc == 2 and "bad.coh:1" in err


def test_compiled_network_round_trip(cli, tmp_path):
    netfile = tmp_path / "basque.net"
    rc, out, _ = cli(["compile", "-o", str(netfile)])
    assert rc == 0 and out.startswith("entries=") and netfile.exists()
    rc1, direct, _ = cli(["analyze"], "semearena etxean")
    rc2, loaded, _ = cli(["analyze", "--net", str(netfile)], "semearena etxean")
    assert rc1 == rc2 == 0 and direct == loaded


def test_net_and_lexicon_conflict(cli, tmp_path):
    rc, _, _ = cli(["analyze", "--net", "x.net", "--lexicon", "y.lex"])
    assert rc == 1


def test_corrupt_network_file(cli, tmp_path):
    bad = tmp_path / "bad.net"
    bad.write_bytes(b"not a network")
    rc, _, err = cli(["analyze", "--net", str(bad)], "gizonak")
    assert rc == 2 and "bad.net" in err


def test_train_stats_eval(cli, tmp_path):
    gold = str(package_data_dir() / "gold.coh")
    model = tmp_path / "m.mod"
    rc, _, _ = cli(["train", gold, "--level", "3", "--l3-params", "case,number",
                    "-o", str(model)])
    assert rc == 0 and model.read_text().startswith("MODEL")

    rc, out, _ = cli(["stats", gold])
    assert rc == 0 and "ambiguity_rate" in out

    rc, out, _ = cli(["eval", gold, gold, "--level", "1"])
    assert rc == 0 and "accuracy  1.0000" in out


def test_eval_misaligned(cli, tmp_path):
    a, b = tmp_path / "a.coh", tmp_path / "b.coh"
    a.write_text('"<x>"\n\t"x" category=NOUN SRC=lexicon TAG1=NOUN\n')
    b.write_text('"<y>"\n\t"y" category=NOUN SRC=lexicon TAG1=NOUN\n')
    rc, _, err = cli(["eval", str(a), str(b), "--level", "1"])
    assert rc == 2 and "diverge" in err


def test_data_dir_override(cli, tmp_path, monkeypatch):
    data = tmp_path / "data"
    shutil.copytree(package_data_dir(), data)
    lex = data / "basque.lex"
    text = lex.read_text()
    assert 'seme    "son"' in text
    lex.write_text(text.replace('seme    "son"', 'semex   "son"'))
    monkeypatch.setenv(DATA_ENV, str(data))
    rc, _, _ = cli(["generate", "--lemma", "semex", "--count-only"])
    assert rc == 0
    rc, _, _ = cli(["generate", "--lemma", "seme", "--count-only"])
    assert rc == 2


def test_console_script_and_module_entry():
    out = subprocess.run([sys.executable, "-m", "euslem", "generate", "--lemma", "seme",
                          "--count-only"], capture_output=True, text=True, check=True)
    assert out.stdout == "total=135 closed=77 genitive=58\n"
    rc = subprocess.run([sys.executable, "-m", "euslem"], capture_output=True).returncode
    assert rc == 1
