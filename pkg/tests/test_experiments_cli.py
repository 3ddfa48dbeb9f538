import json
import math

import numpy as np
import pytest

from heraldgen import cli
from heraldgen.experiments import (
    RESULTS_HEADER,
    ConfigError,
    DegenerateDataError,
    ExperimentDef,
    RecordNotFoundError,
    Row,
    RunRecord,
    analyze,
    append_record,
    apply_source_noise,
    default_cutoff,
    find_record,
    fmt,
    parse_config,
    quality_score,
    read_records,
    run_experiment,
)

# three-mode cat optima: (single photons, 1-F, p)
REFERENCE_ROWS = [
    (0, 3.1e-2, 0.085), (0, 2.1e-3, 0.027), (0, 3.1e-3, 0.028), (0, 6.1e-4, 0.015),
    (1, 4.2e-3, 0.10), (1, 6.4e-4, 0.061),
    (2, 3.2e-2, 0.25), (2, 2.3e-3, 0.10),
    (3, 3.6e-2, 0.39),
]

SMALL = """\
[heraldgen]
version = 1
cutoff = 12
results = {results}

[experiment tiny]
modes = 2
photons = 0
pattern = 1
target = fock
fock_n = 1
alpha = 1
restarts = 2
seed = 3
"""


def test_parse_config_defaults():
    settings, exps = parse_config(SMALL.format(results="r.txt"))
    assert settings["results"] == "r.txt"
    (e,) = exps
    assert e.name == "tiny" and e.s == 0 and e.cutoff == 12 and e.pattern == (1,)


@pytest.mark.parametrize("text,needle", [
    ("[heraldgen]\nversion = 2\n", ":2: unsupported config version"),
    ("[other]\nx = 1\n", "missing [heraldgen]"),
    ("[heraldgen]\nversion = 1\n", "no [experiment"),
    ("[heraldgen]\nversion = 1\n[experiment a]\nmodes = two\npattern = 1\n", ":4: [experiment a] key 'modes'"),
    ("[heraldgen]\nversion = 1\n[experiment a]\nmodes = 2\n", "key 'pattern'"),
    ("[heraldgen]\nversion = 1\n[experiment a]\nmodes = 2\npattern = 1\ntarget = x\n", ":6: [experiment a] key 'target'"),
    ("[heraldgen]\nversion = 1\n[bogus]\n", ":3: unknown section"),
    ("[heraldgen]\nversion = 1\n[experiment a]\nmodes = 2\npattern = 1\ninclude_displacement = maybe\n",
     "include_displacement"),
])
def test_config_errors_name_line_and_key(text, needle):
    with pytest.raises(ConfigError) as exc:
        parse_config(text, source="c.ini")
    assert needle in str(exc.value)


def test_cutoff_env(monkeypatch):
    monkeypatch.setenv("HERALDGEN_CUTOFF", "16")
    assert default_cutoff() == 16
    monkeypatch.setenv("HERALDGEN_CUTOFF", "x")
    with pytest.raises(ConfigError):
        default_cutoff()


def test_experiment_roundtrip():
    e = ExperimentDef("a", 2, (0,), (1,), target="fock", cutoff=10)
    assert ExperimentDef.from_dict(json.loads(json.dumps(e.to_dict()))) == e


def test_run_append_read(tmp_path):
    path = tmp_path / "res.txt"
    _, (e,) = parse_config(SMALL.format(results=path))
    rec, results = run_experiment(e)
    assert len(results) == 2 and rec.one_minus_F < 1e-6
    append_record(str(path), rec)
    append_record(str(path), rec)
    lines = path.read_text().splitlines()
    assert lines[0] == RESULTS_HEADER and len(lines) == 3
    back = read_records(str(path))
    assert back[0] == back[1]
    assert back[0].params == rec.params and back[0].definition == e
    assert find_record(back, "tiny").id == "tiny"
    with pytest.raises(RecordNotFoundError):
        find_record(back, "nope")


def test_rerun_reproduces_record(tmp_path):
    _, (e,) = parse_config(SMALL.format(results="x"))
    a, _ = run_experiment(e)
    b, _ = run_experiment(RunRecord.from_json(a.to_json()).definition)
    assert a.params == b.params and a.reward == b.reward


def test_read_records_needs_header(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("{}\n")
    with pytest.raises(Exception):
        read_records(str(p))


def test_analysis_of_reference_rows():
    rep = analyze([Row(*r) for r in REFERENCE_ROWS])
    assert rep.pearson_r == pytest.approx(0.92, abs=0.02)
    assert rep.slope == pytest.approx(6.7e-2, rel=0.15)
    assert rep.intercept == pytest.approx(-4.0e-2, rel=0.15)


def test_analysis_order_invariant(rng):
    rows = [Row(*r) for r in REFERENCE_ROWS]
    base = analyze(rows)
    for _ in range(5):
        perm = [rows[i] for i in rng.permutation(len(rows))]
        rep = analyze(perm)
        assert (rep.pearson_r, rep.slope, rep.intercept) == (base.pearson_r, base.slope, base.intercept)


def test_analysis_degenerate():
    with pytest.raises(DegenerateDataError):
        analyze([Row(1, 0.1, 0.2), Row(1, 0.2, 0.3)])
    with pytest.raises(Exception):
        analyze([Row(1, 0.1, 0.2)])


def test_quality_score_sign():
    assert quality_score(0.0, 0.3) == pytest.approx(0.3)
    assert quality_score(0.5, 0.0) == pytest.approx(-math.pi / 4)


def test_source_noise_model():
    F, p = apply_source_noise(Row(2, 0.1, 0.5), 0.84, 0.993, 0.98)
    assert p == pytest.approx(0.5 * 0.84**2)
    assert F == pytest.approx(0.9 * (0.993 * 0.98) ** 2)
    assert apply_source_noise(Row(0, 0.1, 0.5), 0.5) == (0.9, 0.5)
    with pytest.raises(Exception):
        apply_source_noise(Row(1, 0.1, 0.5), 1.5)


def test_fmt():
    assert fmt(3) == "3" and fmt(0.123456789) == "0.123457" and fmt(float("nan")) == "nan"


# ---------------------------------------------------------------- CLI

def run(argv, capsys):
    rc = cli.main(argv)
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_cli_sps_verify(capsys):
    rc, out, _ = run(["sps-verify", "--cutoff", "20"], capsys)
    assert rc == 0 and "oracle: agree" in out and "analytic probability 0.25" in out


def test_cli_sps_verify_non_cancelling(capsys):
    rc, out, _ = run(["sps-verify", "--phi", "0"], capsys)
    assert rc == 0 and "leading non-zero higher coefficient" in out


def test_cli_wigner_cat(tmp_path, capsys):
    out_file = tmp_path / "w.txt"
    rc, _, _ = run(["wigner", "cat", "--res", "5", "--out", str(out_file)], capsys)
    assert rc == 0
    rows = out_file.read_text().splitlines()
    assert rows[0] == "# q p W" and len(rows) == 26


def test_cli_wigner_density_and_closed_form(capsys):
    rc, out, _ = run(["wigner", "gkp-canonical", "--density", "--res", "3"], capsys)
    assert rc == 0 and out.startswith("# q density")
    rc, out, _ = run(["wigner", "cat", "--closed-form", "--res", "3"], capsys)
    assert rc == 0 and len(out.splitlines()) == 10


def test_cli_wigner_record(tmp_path, capsys):
    path = tmp_path / "res.txt"
    cfg = tmp_path / "c.ini"
    cfg.write_text(SMALL.format(results=path))
    rc, out, _ = run(["optimize", str(cfg)], capsys)
    assert rc == 0 and "tiny" in out and "best-reward" in out
    rc, out, _ = run(["wigner", "tiny", "--results", str(path), "--res", "3"], capsys)
    assert rc == 0
    rc, _, err = run(["wigner", "missing", "--results", str(path)], capsys)
    assert rc == 2 and "missing" in err
    rc, _, err = run(["wigner", "tiny"], capsys)
    assert rc == 2


def test_cli_analyze_rows(tmp_path, capsys):
    p = tmp_path / "rows.txt"
    p.write_text("# n 1-F p\n" + "\n".join(f"{a} {b} {c}" for a, b, c in REFERENCE_ROWS) + "\n")
    rc, out, _ = run(["analyze", str(p)], capsys)
    assert rc == 0
    vals = dict(line.split() for line in out.splitlines() if line.split()[0] in ("pearson_r", "slope", "intercept"))
    assert float(vals["pearson_r"]) == pytest.approx(0.92, abs=0.02)


def test_cli_analyze_bad_rows(tmp_path, capsys):
    p = tmp_path / "rows.txt"
    p.write_text("1 x 0.2\n")
    rc, _, err = run(["analyze", str(p)], capsys)
    assert rc == 2 and ":1:" in err


def test_cli_noise(tmp_path, capsys):
    p = tmp_path / "rows.txt"
    p.write_text("1 0.05 0.38\n")
    rc, out, _ = run(["noise", str(p)], capsys)
    assert rc == 0 and "not asserted" in out


def test_cli_bad_config(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[heraldgen]\nversion = 1\n[experiment a]\nmodes = two\npattern = 1\n")
    rc, _, err = run(["optimize", str(cfg)], capsys)
    assert rc == 2 and "bad.ini:4" in err and "'modes'" in err


def test_cli_infeasible_exit_code(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[heraldgen]\nversion = 1\ncutoff = 12\nresults = %s\n"
                   "[experiment odd]\nmodes = 2\npattern = 1\ntarget = cat\nalpha = 1\nrestarts = 1\n"
                   % (tmp_path / "r.txt"))
    rc, _, err = run(["optimize", str(cfg)], capsys)
    assert rc == 4 and "no convergence" in err


def test_cli_oracle_exit_code(monkeypatch, capsys):
    from heraldgen import sps
    from heraldgen.errors import OracleMismatchError

    def boom(*a, **k):
        raise OracleMismatchError("forced", 1.0, 0.5)

    monkeypatch.setattr(sps, "verify_against_fock", boom)
    rc, _, err = run(["sps-verify"], capsys)
    assert rc == 3 and "forced" in err


def test_cli_version(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
