import numpy as np
import pytest
from PIL import Image

from potts_sva import imageio, phantom, sva
from potts_sva.cli import cli_main
from potts_sva.grid import tv_isotropic


@pytest.fixture
def phantom_png(tmp_path):
    assert cli_main(["phantom", "--shape", "48x40", "--classes", "2", "--noise", "0.05",
                     "--seed", "7", str(tmp_path / "ph")]) == 0
    return tmp_path / "ph"


class TestLoad:
    def test_binary_pgm(self, tmp_path):
        p = tmp_path / "a.pgm"
        p.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255, 255, 0]))
        np.testing.assert_array_equal(imageio.load_image(p), [[0, 1], [1, 0]])

    def test_ascii_pgm(self, tmp_path):
        p = tmp_path / "a.pgm"
        p.write_text("P2\n# comment\n3 1\n15\n0 5 15\n")
        np.testing.assert_allclose(imageio.load_image(p), [[0, 1 / 3, 1]])

    def test_16bit_pgm(self, tmp_path):
        p = tmp_path / "b.pgm"
        p.write_bytes(b"P5\n2 1\n65535\n" + np.array([1000, 65535], ">u2").tobytes())
        np.testing.assert_array_equal(imageio.load_image(p), [[0, 1]])

    def test_constant_warns(self, tmp_path):
        p = tmp_path / "c.pgm"
        p.write_bytes(b"P5\n2 2\n255\n" + bytes([7, 7, 7, 7]))
        with pytest.warns(imageio.ConstantImageWarning):
            a = imageio.load_image(p)
        assert not a.any()

    def test_colour_uses_luma(self, tmp_path):
        rgb = np.zeros((1, 3, 3), np.uint8)
        rgb[0, 1] = [255, 0, 0]
        rgb[0, 2] = [0, 255, 0]
        Image.fromarray(rgb).save(tmp_path / "c.png")
        raw = imageio.read_raw(tmp_path / "c.png")
        np.testing.assert_allclose(raw, [[0, 76, 150]], atol=1)

    def test_missing_file(self, tmp_path):
        with pytest.raises(imageio.ImageIOError, match="nope.png"):
            imageio.load_image(tmp_path / "nope.png")

    def test_unsupported_format(self, tmp_path):
        Image.new("L", (2, 2)).save(tmp_path / "a.bmp")
        with pytest.raises(imageio.ImageIOError, match="unsupported format"):
            imageio.load_image(tmp_path / "a.bmp")

    def test_garbage(self, tmp_path):
        (tmp_path / "g.png").write_bytes(b"not an image")
        with pytest.raises(imageio.ImageIOError):
            imageio.load_image(tmp_path / "g.png")


class TestSave:
    def test_palette(self, tmp_path):
        z = np.array([[1, 2], [2, 1]])
        p = imageio.save_labels(z, 2, tmp_path / "l.png")
        im = Image.open(p)
        assert im.mode == "P"
        assert im.getpalette()[:6] == [0, 0, 0, 255, 255, 255]

    @pytest.mark.parametrize("K", [2, 7, 255])
    def test_label_roundtrip(self, tmp_path, K):
        z = np.random.default_rng(K).integers(1, K + 1, (9, 11))
        imageio.save_labels(z, K, tmp_path / "l.png")
        np.testing.assert_array_equal(imageio.load_labels(tmp_path / "l.png"), z)

    def test_field_roundtrip(self, tmp_path):
        x = np.random.default_rng(0).standard_normal((13, 17)) * 40
        imageio.save_field(x, tmp_path / "x.png")
        np.testing.assert_array_equal(imageio.load_field(tmp_path / "x.png"), x)
        # the pixels alone reproduce x up to 16-bit quantisation after normalisation
        loaded = imageio.load_image(tmp_path / "x.png")
        expected = (x - x.min()) / (x.max() - x.min())
        assert np.abs(loaded - expected).max() <= 0.5 / 65535 + 1e-12

    def test_result_files(self, tmp_path):
        y, _ = phantom.make_phantom(32, 32, 2, 0.05, 1)
        res = sva.segment(y, sva.SvaConfig(K=2))
        paths = imageio.save_result(res, tmp_path / "out", config=sva.SvaConfig(K=2).as_dict())
        assert sorted(p.name for p in (tmp_path / "out").iterdir()) == ["labels.png", "trace.tsv", "x.png"]
        header, records = imageio.read_trace(paths["trace"])
        n_inner = sum(r.kind == "inner" for r in res.trace)
        assert len(records) == n_inner + res.outer_iterations
        assert records == res.trace
        x = imageio.load_field(paths["x"])
        lam = float(header["lambda_final"])
        assert lam == pytest.approx(x.size / (tv_isotropic(x) + 1), abs=1e-9)
        assert [float(m) for m in header["mu"]] == list(res.mu)
        assert header["config.max_outer"] == "50"

    def test_unwritable(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        y, _ = phantom.make_phantom(16, 16, 2, 0.05, 1)
        res = sva.segment(y, sva.SvaConfig(K=2))
        with pytest.raises(imageio.ImageIOError):
            imageio.save_result(res, blocker / "sub")


class TestPhantom:
    def test_levels(self):
        np.testing.assert_array_equal(phantom.plateau_levels(2), [0.25, 0.75])

    @pytest.mark.parametrize("K", [2, 3, 4])
    def test_all_classes_present(self, K):
        y, z = phantom.make_phantom(64, 48, K, 0.0, 5)
        assert set(np.unique(z)) == set(range(1, K + 1))
        np.testing.assert_array_equal(y, phantom.plateau_levels(K)[z - 1])

    def test_accuracy_is_permutation_invariant(self):
        z = np.array([[1, 1, 2, 3]])
        assert phantom.label_accuracy(4 - z, z) == 1.0
        assert phantom.label_accuracy(np.array([[1, 2, 2, 3]]), z) == 0.75


class TestCLI:
    def test_segment_phantom(self, phantom_png, tmp_path):
        out = tmp_path / "out"
        assert cli_main(["segment", "--classes", "2", str(phantom_png / "image.png"), str(out)]) == 0
        assert len(list(out.iterdir())) == 3
        acc = phantom.label_accuracy(imageio.load_labels(out / "labels.png"),
                                     imageio.load_labels(phantom_png / "truth.png"))
        assert acc >= 0.99

    def test_tsa_zero_lambda_is_clustering(self, phantom_png, tmp_path):
        out = tmp_path / "tsa"
        assert cli_main(["tsa", "--classes", "2", "--lambda", "0", str(phantom_png / "image.png"), str(out)]) == 0
        from potts_sva import cluster
        y = imageio.load_image(phantom_png / "image.png")
        np.testing.assert_array_equal(imageio.load_labels(out / "labels.png"), cluster.kmeans(y * 255, 2).labels)
        header, _ = imageio.read_trace(out / "trace.tsv")
        assert header["mode"] == "tsa" and float(header["lambda_used"]) == 0.0

    def test_not_converged_exit_code(self, phantom_png, tmp_path):
        rc = cli_main(["segment", "--classes", "3", "--max-outer", "1", str(phantom_png / "image.png"),
                       str(tmp_path / "o")])
        assert rc == 2
        assert (tmp_path / "o" / "labels.png").exists()

    @pytest.mark.parametrize("argv", [
        [], ["segment"], ["segment", "--classes", "x", "a", "b"], ["bogus"],
        ["segment", "--classes", "2", "--tol", "-1", "a", "b"], ["phantom", "--shape", "3by3", "--classes", "2", "o"],
    ])
    def test_bad_flags(self, argv, capsys):
        assert cli_main(argv) == 1
        assert "usage" in capsys.readouterr().err

    def test_missing_input(self, tmp_path, capsys):
        assert cli_main(["segment", "--classes", "2", str(tmp_path / "none.png"), str(tmp_path / "o")]) == 1
        assert "none.png" in capsys.readouterr().err

    def test_too_many_classes(self, tmp_path):
        p = tmp_path / "a.pgm"
        p.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255, 255, 0]))
        assert cli_main(["segment", "--classes", "3", str(p), str(tmp_path / "o")]) == 1

    def test_help(self, capsys):
        assert cli_main(["--help"]) == 0

    def test_verify(self, capsys):
        assert cli_main(["verify"]) == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 7 and "FAIL" not in out
