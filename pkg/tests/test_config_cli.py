import json

import pytest

from rrreplay.cli import main
from rrreplay.config import load_config, parse_config, read_pairs, resolve
from rrreplay.sim import ConfigError, preset


def test_parse_with_preset_and_comments():
    cfg = parse_config("# fig3 with RR-C\npreset=fig3\nsampler = rrc  # inline\n\nseeds=50\n")
    assert cfg == preset("fig3", sampler="rrc", seeds=50)


def test_preset_position_does_not_matter():
    assert parse_config("seeds=5\npreset=fig6") == preset("fig6", seeds=5)


def test_overrides_beat_file():
    cfg = resolve("preset=fig3\nsampler=wr\nseeds=10", "fig5", sampler="rrc", seeds=None)
    assert cfg.batch == 8 and cfg.sampler == "rrc" and cfg.seeds == 10


@pytest.mark.parametrize("text, needle", [
    ("seeds=ten", "<config>:1: seeds"),
    ("sampler=wr\nbogus=1", "<config>:2: unknown field 'bogus'"),
    ("just words", "<config>:1: expected key=value"),
    ("seeds=2.5", "seeds"),
    ("preset=fig9", "preset"),
    ("batch=40", "batch"),
])
def test_config_errors(text, needle):
    with pytest.raises(ConfigError, match=needle.replace("(", r"\(")):
        parse_config(text)


def test_int_accepts_scientific_notation():
    assert read_pairs("seeds=1e3")[1] == {"seeds": 1000}


def test_load_config(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("preset=fig3\nsampler=wor\n")
    assert load_config(path).sampler == "wor"


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate_rrc_max_column(tmp_path, capsys):
    code, out, _ = run(["simulate", "--preset", "fig3", "--sampler", "rrc", "--out", tmp_path], capsys)
    assert code == 0
    rows = (tmp_path / "stats.csv").read_text().splitlines()[1:]
    assert max(float(r.split(",")[4]) for r in rows) <= 6
    summary = json.loads((tmp_path / "summary.json").read_text())["rrc"]
    assert summary["conserved"] and summary["max_count"] <= 6
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert len(manifest["config_digest"]) == 64
    assert "sampler=rrc" in manifest["config"]


def test_simulate_raw_one_row_reproducible(tmp_path, capsys):
    args = ["simulate", "--preset", "fig3", "--sampler", "wr", "--seeds", 1, "--raw"]
    assert run(args + ["--out", tmp_path / "a"], capsys)[0] == 0
    assert run(args + ["--out", tmp_path / "b"], capsys)[0] == 0
    a = (tmp_path / "a" / "matrix.csv").read_bytes()
    assert a == (tmp_path / "b" / "matrix.csv").read_bytes()
    assert len(a.decode().splitlines()) == 2
    assert b"\r" not in a


def test_simulate_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("preset=fig3\nsampler=per_wr\nseeds=5\n")
    code, out, _ = run(["simulate", "--config", cfg, "--out", tmp_path / "o"], capsys)
    assert code == 0 and "per_wr: 5 seeds" in out


def test_simulate_bad_config_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("preset=fig3\nseeds=zero\n")
    code, _, err = run(["simulate", "--config", cfg, "--out", tmp_path / "o"], capsys)
    assert code == 2 and "bad.cfg:2: seeds" in err
    code, _, err = run(["simulate", "--out", tmp_path / "o"], capsys)
    assert code == 2
    code, _, _ = run(["simulate", "--config", tmp_path / "missing.cfg", "--out", tmp_path], capsys)
    assert code == 2


def test_simulate_io_error_exit_3(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run(["simulate", "--preset", "fig3", "--seeds", 2, "--out", blocker / "sub"], capsys)
    assert code == 3


def test_verify_exit_codes(capsys):
    code, out, _ = run(["verify", "rrc-bias-example"], capsys)
    assert code == 0 and "1.25" in out and "1.5" in out
    code, out, _ = run(["verify", "rrm-table3", "--seeds", 10], capsys)
    assert code == 0 and "[2, 1, 4]" in out
    code, _, err = run(["verify", "nonsense"], capsys)
    assert code == 2 and "unknown suite" in err


def test_verify_rrm_bias_prints_values(capsys):
    code, out, _ = run(["verify", "rrm-bias-example", "--seeds", 2000], capsys)
    assert code == 0 and "1.000000" in out and "1.2" in out


def test_bench_size_below_batch(capsys):
    code, _, err = run(["bench", "--sizes", "4,100", "--batch", 8, "--secs", 0.01], capsys)
    assert code == 2 and "sizes" in err


def test_bench_report(tmp_path, capsys):
    out_file = tmp_path / "bench.json"
    code, out, _ = run(["bench", "--sizes", "1e2,1e3", "--sampler", "rrm", "--batch", 4,
                        "--secs", 0.05, "--out", out_file], capsys)
    assert code == 0
    report = json.loads(out_file.read_text())
    assert [r["size"] for r in report["results"]] == [100, 1000]
    assert "ratio_in_band" in report and report["review"]


def test_bad_sizes_argument(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bench", "--sizes", "abc"])
    assert exc.value.code == 2
