import numpy as np
import pytest

from pemcodec import cli
from pemcodec.imaging import read_pgm, write_pgm

from conftest import identity_nodes, nnpw_bytes, smooth_plane


@pytest.fixture
def cover_path(tmp_path):
    img = smooth_plane(np.random.default_rng(40))
    path = tmp_path / "cover.pgm"
    write_pgm(img, path)
    return path


def run(*argv):
    return cli.main([str(a) for a in argv])


class TestEmbedExtract:
    def test_round_trip(self, tmp_path, cover_path, capsys):
        message = tmp_path / "msg.bin"
        message.write_bytes(b"attack at dawn")
        stego = tmp_path / "stego.pgm"
        assert run("embed", "--cover", cover_path, "--message", message,
                   "--stego", stego, "--theta", 2) == 0
        out = capsys.readouterr().out
        assert "bits=112" in out and "psnr_db=" in out and "ssim=" in out

        restored = tmp_path / "restored.pgm"
        extracted = tmp_path / "extracted.bin"
        assert run("extract", "--stego", stego, "--cover", restored,
                   "--message", extracted, "--theta", 2) == 0
        assert extracted.read_bytes() == b"attack at dawn"
        assert np.array_equal(read_pgm(restored), read_pgm(cover_path))

    def test_nn_predictor_round_trip(self, tmp_path, cover_path):
        weights = tmp_path / "id.nnpw"
        weights.write_bytes(nnpw_bytes(identity_nodes()))
        message = tmp_path / "msg.bin"
        message.write_bytes(b"x" * 8)
        stego = tmp_path / "stego.pgm"
        spec = f"nn:{weights}"
        assert run("embed", "--cover", cover_path, "--message", message,
                   "--stego", stego, "--theta", 2, "--predictor", spec) == 0
        restored = tmp_path / "r.pgm"
        extracted = tmp_path / "e.bin"
        assert run("extract", "--stego", stego, "--cover", restored,
                   "--message", extracted, "--theta", 2, "--predictor", spec) == 0
        assert extracted.read_bytes() == b"x" * 8

    def test_oversized_message_exits_2(self, tmp_path, cover_path, capsys):
        message = tmp_path / "big.bin"
        message.write_bytes(bytes(5000))
        assert run("embed", "--cover", cover_path, "--message", message,
                   "--stego", tmp_path / "s.pgm", "--theta", 1) == 2
        assert "capacity exceeded by" in capsys.readouterr().err

    def test_wrong_theta_exits_3(self, tmp_path, cover_path):
        message = tmp_path / "msg.bin"
        message.write_bytes(b"hello")
        stego = tmp_path / "stego.pgm"
        assert run("embed", "--cover", cover_path, "--message", message,
                   "--stego", stego, "--theta", 2) == 0
        code = run("extract", "--stego", stego, "--cover", tmp_path / "r.pgm",
                   "--message", tmp_path / "e.bin", "--theta", 3)
        assert code == 3

    def test_theta_zero_is_usage_error(self, tmp_path, cover_path):
        message = tmp_path / "msg.bin"
        message.write_bytes(b"a")
        assert run("embed", "--cover", cover_path, "--message", message,
                   "--stego", tmp_path / "s.pgm", "--theta", 0) == 64

    def test_missing_weight_file_is_usage_error(self, tmp_path, cover_path):
        message = tmp_path / "msg.bin"
        message.write_bytes(b"a")
        assert run("embed", "--cover", cover_path, "--message", message,
                   "--stego", tmp_path / "s.pgm", "--predictor",
                   "nn:/nonexistent.nnpw") == 64

    def test_unknown_predictor_is_usage_error(self, tmp_path, cover_path):
        message = tmp_path / "msg.bin"
        message.write_bytes(b"a")
        assert run("embed", "--cover", cover_path, "--message", message,
                   "--stego", tmp_path / "s.pgm", "--predictor", "psychic") == 64

    def test_missing_cover_file_exits_1(self, tmp_path):
        message = tmp_path / "msg.bin"
        message.write_bytes(b"a")
        assert run("embed", "--cover", tmp_path / "nope.pgm", "--message", message,
                   "--stego", tmp_path / "s.pgm") == 1


class TestCapacity:
    def test_constant_plane(self, tmp_path, capsys):
        path = tmp_path / "flat.pgm"
        write_pgm(np.full((64, 64), 128, dtype=np.uint8), path)
        assert run("capacity", "--cover", path, "--theta", 1) == 0
        out = capsys.readouterr().out
        assert "capacity_bits=4064" in out
        assert "bpp=0.992188" in out

    def test_saturated_plane(self, tmp_path, capsys):
        path = tmp_path / "sat.pgm"
        write_pgm(np.full((64, 64), 255, dtype=np.uint8), path)
        assert run("capacity", "--cover", path, "--theta", 1) == 0
        assert "capacity_bits=0" in capsys.readouterr().out


class TestCsvCommands:
    def test_analyze_schema(self, tmp_path, cover_path, capsys):
        out_csv = tmp_path / "stats.csv"
        assert run("analyze", cover_path, "--theta", 2, "--out", out_csv) == 0
        lines = out_csv.read_text().splitlines()
        assert lines[0] == "# pem-codec v1, seed=0"
        assert lines[1] == cli.CSV_HEADER
        row = lines[2].split(",")
        assert row[0] == "cover.pgm" and row[1] == "lmi" and row[2] == "2"
        assert len(row) == 10

    def test_analyze_directory_sorted(self, tmp_path, capsys):
        rng = np.random.default_rng(41)
        d = tmp_path / "imgs"
        d.mkdir()
        for name in ("b.pgm", "a.pgm"):
            write_pgm(smooth_plane(rng, (32, 32)), d / name)
        assert run("analyze", d, "--theta", 1) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[2].startswith("a.pgm") and lines[3].startswith("b.pgm")

    def test_constant_image_analyze(self, tmp_path, capsys):
        path = tmp_path / "flat.pgm"
        write_pgm(np.full((64, 64), 128, dtype=np.uint8), path)
        assert run("analyze", path, "--theta", 1) == 0
        row = capsys.readouterr().out.splitlines()[2].split(",")
        assert row[4] == "inf"  # predicted-image PSNR marker
        assert float(row[6]) == 0.0  # entropy

    def test_rdcurve_deterministic(self, tmp_path, cover_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert run("rdcurve", "--cover", cover_path, "--thetas", "1,2",
                       "--steps", 3, "--seed", 7, "--out", out) == 0
        assert a.read_text() == b.read_text()
        lines = a.read_text().splitlines()
        assert lines[0] == "# pem-codec v1, seed=7"
        assert len(lines) == 2 + 2 * 3
