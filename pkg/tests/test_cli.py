import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from oracles import numpy_raw, numpy_seeded
from vmt19937 import cli
from vmt19937.jump import jump_state
from vmt19937.matrix_file import read_checkpoint, read_jump_matrix, write_checkpoint, write_jump_matrix
from vmt19937.mt import seed_state


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# -- jump ---------------------------------------------------------------------


def test_jump_q0_is_F(tmp_path, capsys, F):
    out = tmp_path / "f.vmtj"
    code, stdout, _ = run(capsys, "jump", "-q", "0", "-o", str(out))
    assert code == 0 and stdout.strip() == str(out)
    stored = read_jump_matrix(out)
    assert stored.exponent == 0 and stored.matrix == F


def test_jump_q10_skips_1024(tmp_path, capsys):
    out = tmp_path / "j10.vmtj"
    assert run(capsys, "jump", "-q", "10", "-o", str(out))[0] == 0
    B = read_jump_matrix(out, exponent=10).matrix
    jumped = jump_state(seed_state(5489), B)
    assert np.array_equal(numpy_raw(jumped.words, 1000), numpy_seeded(5489, 2024)[1024:])
    assert not (tmp_path / "j10.vmtj.ckpt").exists()


def test_jump_default_output_uses_env_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("VMT_JUMP_DIR", str(tmp_path))
    code, stdout, _ = run(capsys, "jump", "-q", "1")
    assert code == 0
    assert (tmp_path / "jump_q1.vmtj").exists()


def test_jump_resume_is_byte_identical(tmp_path, capsys, monkeypatch):
    full = tmp_path / "full.vmtj"
    assert run(capsys, "jump", "-q", "10", "-o", str(full))[0] == 0

    # interrupt a second run right after its checkpoint at squaring 5
    class Interrupted(Exception):
        pass

    def write_then_die(path, matrix, q, completed):
        write_checkpoint(path, matrix, q, completed)
        raise Interrupted

    part = tmp_path / "part.vmtj"
    ckpt = tmp_path / "part.ckpt"
    monkeypatch.setattr(cli, "write_checkpoint", write_then_die)
    with pytest.raises(Interrupted):
        cli.main(["jump", "-q", "10", "-o", str(part), "--checkpoint-every", "5", "--checkpoint", str(ckpt)])
    monkeypatch.undo()
    assert not part.exists()
    assert read_checkpoint(ckpt).completed == 5

    code, _, _ = run(capsys, "jump", "-q", "10", "-o", str(part), "--resume", str(ckpt))
    assert code == 0
    assert part.read_bytes() == full.read_bytes()


def test_jump_resume_header_mismatch(tmp_path, capsys, F):
    ckpt = tmp_path / "c.ckpt"
    write_checkpoint(ckpt, F, 12, 3)
    code, _, err = run(capsys, "jump", "-q", "10", "-o", str(tmp_path / "x"), "--resume", str(ckpt))
    assert code == 1 and "q=12" in err
    ckpt.write_bytes(b"junk" * 10)
    assert run(capsys, "jump", "-q", "10", "--resume", str(ckpt))[0] == 1


def test_jump_io_failure(tmp_path, capsys):
    code, _, _ = run(capsys, "jump", "-q", "0", "-o", str(tmp_path / "missing" / "f.vmtj"))
    assert code == 1


def test_jump_usage_errors(capsys):
    assert run(capsys, "jump", "-q", "-1")[0] == 2
    assert run(capsys, "jump", "-q", "3", "--checkpoint-every", "0")[0] == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["jump"])
    assert exc.value.code == 2


# -- bench --------------------------------------------------------------------


def parse_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_bench_scalar_and_vmt_m1_agree(capsys):
    _, scalar, _ = run(capsys, "bench", "--generator", "scalar", "-n", "100000", "--format", "csv")
    _, vmt, _ = run(capsys, "bench", "--lanes", "1", "--block", "1", "16", "state", "-n", "100000", "--format", "csv")
    sums = {r["checksum"] for r in parse_csv(scalar) + parse_csv(vmt)}
    expected = f"{int(np.bitwise_xor.reduce(numpy_seeded(5489, 100000))):08x}"
    assert sums == {expected}


def test_bench_csv_columns(capsys):
    code, out, _ = run(capsys, "bench", "--lanes", "2", "--block", "16", "-n", "5000", "--format", "csv")
    assert code == 0
    header, *rows = out.strip().splitlines()
    assert header == "generator,M,block,N,seconds,words_per_sec,checksum"
    (row,) = parse_csv(out)
    assert row["generator"] == "vmt" and row["M"] == "2" and row["block"] == "16" and row["N"] == "5000"
    assert float(row["seconds"]) >= 0 and float(row["words_per_sec"]) > 0


def test_bench_checksum_independent_of_block_mode(capsys):
    _, out, _ = run(capsys, "bench", "--lanes", "4", "--block", "1", "16", "state", "-n", "50000", "--format", "csv")
    assert len({r["checksum"] for r in parse_csv(out)}) == 1


def test_bench_state_block_size_reported(capsys):
    code, out, _ = run(capsys, "bench", "--lanes", "4", "--block", "state", "-n", "10000")
    assert code == 0 and "state(2496)" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["bench", "--generator", "scalar", "--lanes", "4"],
        ["bench", "--generator", "scalar", "--block", "16"],
        ["bench", "-n", "-5"],
    ],
)
def test_bench_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


@pytest.mark.parametrize("argv", [["bench", "--lanes", "3"], ["bench", "--block", "8"]])
def test_bench_bad_choices(argv):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 2


def test_bench_uses_stored_production_matrix(tmp_path, capsys, monkeypatch, ladder):
    # a file under the production name is picked up without the fallback warning
    write_jump_matrix(tmp_path / "jump_q19936.vmtj", ladder[4], 19936)
    monkeypatch.setenv("VMT_JUMP_DIR", str(tmp_path))
    code, _, err = run(capsys, "bench", "--lanes", "2", "-n", "1000")
    assert code == 0 and "no precomputed" not in err


# -- stat ---------------------------------------------------------------------


def test_stat_passes_on_generator(capsys, monkeypatch, stat_jump_dir):
    monkeypatch.setenv("VMT_JUMP_DIR", str(stat_jump_dir))
    code, out, _ = run(capsys, "stat", "--lanes", "4", "-n", "10000000", "--tests", "monobit,chi2")
    assert code == 0
    assert out.count("PASS") == 2


def test_stat_lanes_never_overlap(monkeypatch, stat_jump_dir):
    monkeypatch.setenv("VMT_JUMP_DIR", str(stat_jump_dir))
    assert cli.disjoint_exponent(2_500_000) == 22
    assert cli.disjoint_exponent(10) == cli.FALLBACK_EXPONENT
    g = cli.make_stat_generator(5489, 4, 10**7)
    assert g.config.jump_exponent == 22


def test_stat_constant_source_fails(capsys):
    code, out, _ = run(capsys, "stat", "--source", "constant", "-n", "1000000")
    assert code == 1 and "FAIL" in out


def test_stat_unknown_test(capsys):
    code, _, err = run(capsys, "stat", "--tests", "monobit,runs")
    assert code == 2 and "runs" in err


def test_stat_count_too_small(capsys):
    assert run(capsys, "stat", "--tests", "monobit", "-n", "1000")[0] == 2


def test_stat_xcorr_needs_lanes(capsys):
    assert run(capsys, "stat", "--lanes", "1", "--tests", "xcorr")[0] == 2


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "vmt19937.cli", "stat", "--tests", "bogus"], capture_output=True, text=True)
    assert proc.returncode == 2
