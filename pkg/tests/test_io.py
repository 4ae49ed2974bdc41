import json

import numpy as np
import pytest
from PIL import Image as PILImage

from smattr import io as sio
from smattr.config import config_from_dict, load_config
from smattr.exceptions import FormatError, InvalidConfigError
from smattr.geometry import divide
from smattr.instances import make_instance
from smattr.search import greedy_maximize


class TestImages:
    def test_black_png(self, tmp_path):
        PILImage.new("RGB", (3, 2)).save(tmp_path / "b.png")
        img = sio.read_image(tmp_path / "b.png")
        assert img.shape == (2, 3, 3) and not img.any()

    def test_white_is_one(self, tmp_path):
        PILImage.new("L", (2, 2), color=255).save(tmp_path / "w.png")
        img = sio.read_image(tmp_path / "w.png")
        assert img.shape == (2, 2, 1) and np.all(img == 1.0)

    @pytest.mark.parametrize("channels", [1, 3])
    def test_roundtrip_bytes(self, tmp_path, channels):
        data = np.random.default_rng(0).integers(0, 256, size=(5, 7, channels), dtype=np.uint8)
        mode = "L" if channels == 1 else "RGB"
        PILImage.fromarray(data[:, :, 0] if channels == 1 else data, mode=mode).save(tmp_path / "a.png")
        img = sio.read_image(tmp_path / "a.png")
        sio.write_image(img, tmp_path / "b.png")
        with PILImage.open(tmp_path / "a.png") as a, PILImage.open(tmp_path / "b.png") as b:
            assert a.tobytes() == b.tobytes()

    def test_rejects_unsupported(self, tmp_path):
        PILImage.new("RGBA", (2, 2)).save(tmp_path / "a.png")
        with pytest.raises(FormatError):
            sio.read_image(tmp_path / "a.png")
        PILImage.new("I;16", (2, 2)).save(tmp_path / "d.png")
        with pytest.raises(FormatError):
            sio.read_image(tmp_path / "d.png")
        (tmp_path / "junk.png").write_bytes(b"not a png")
        with pytest.raises(FormatError, match="junk.png"):
            sio.read_image(tmp_path / "junk.png")


class TestFloatMaps:
    def test_byte_layout(self):
        raw = sio.encode_float_map(np.array([[0.5]], dtype=np.float32))
        assert len(raw) == 20
        assert raw[:4] == b"SMAP"
        assert raw[16:] == bytes([0x00, 0x00, 0x00, 0x3F])
        assert raw == b"SMAP\x01\x00\x00\x00\x01\x00\x00\x00\x01\x00\x00\x00\x00\x00\x00\x3f"

    def test_roundtrip_bitwise(self, tmp_path):
        values = np.random.default_rng(1).normal(size=(3, 5)).astype(np.float32)
        values[0, 0] = np.float32(1e-40)  # subnormal
        sio.write_float_map(values, tmp_path / "m.smap")
        back = sio.read_float_map(tmp_path / "m.smap")
        assert back.shape == (3, 5)
        assert back.tobytes() == values.tobytes()

    @pytest.mark.parametrize("mutate", [
        lambda raw: raw[:-1],
        lambda raw: raw[:10],
        lambda raw: b"XMAP" + raw[4:],
        lambda raw: raw[:4] + b"\x02\x00" + raw[6:],
        lambda raw: raw + b"\x00\x00\x00\x00",
    ])
    def test_malformed(self, tmp_path, mutate):
        raw = sio.encode_float_map(np.ones((2, 2), dtype=np.float32))
        (tmp_path / "m.smap").write_bytes(mutate(raw))
        with pytest.raises(FormatError):
            sio.read_float_map(tmp_path / "m.smap")

    def test_csv_converter(self, tmp_path):
        (tmp_path / "s.csv").write_text("3,2\n0,1,2\n3,4,5.5\n")
        sio.csv_to_float_map(tmp_path / "s.csv", tmp_path / "s.smap")
        assert sio.read_float_map(tmp_path / "s.smap").tolist() == [[0, 1, 2], [3, 4, 5.5]]
        assert sio.read_saliency(tmp_path / "s.csv").tolist() == [[0, 1, 2], [3, 4, 5.5]]
        (tmp_path / "bad.csv").write_text("3,2\n0,1\n3,4,5\n")
        with pytest.raises(FormatError):
            sio.read_csv_map(tmp_path / "bad.csv")


class TestRegionsAndResults:
    def test_regions_roundtrip(self, tmp_path):
        inst = make_instance(0, n=4, m=8, patch=2)
        sio.write_regions(inst.regions, tmp_path / "r.json")
        doc = json.loads((tmp_path / "r.json").read_text())
        assert {"n", "m", "d", "elements"} <= set(doc) and doc["d"] == 2
        assert sio.read_regions(tmp_path / "r.json") == inst.regions

    def test_regions_rejects_overlap(self, tmp_path):
        doc = {"n": 2, "m": 2, "d": 2, "patch_h": 1, "patch_w": 1, "elements": [[0, 1], [1, 2]]}
        (tmp_path / "r.json").write_text(json.dumps(doc))
        with pytest.raises(FormatError):
            sio.read_regions(tmp_path / "r.json")

    def test_result_roundtrip_is_exact(self, tmp_path):
        ctx = make_instance(2, n=4, m=8, patch=2).context()
        result = greedy_maximize(ctx, 5)
        sio.write_result(result, tmp_path / "r.json", config={"k": 5})
        back = sio.read_result(tmp_path / "r.json")
        assert back.order == result.order
        assert back.gains == result.gains and back.values == result.values
        assert back.breakdowns == result.breakdowns
        assert back.timing_ms == result.timing_ms
        doc = json.loads((tmp_path / "r.json").read_text())
        assert doc["config"] == {"k": 5} and doc["tool_version"]

    def test_result_without_timing(self, tmp_path):
        result = greedy_maximize(make_instance(2, n=2, m=4, patch=2).context(), 2)
        sio.write_result(result, tmp_path / "r.json", include_timing=False)
        assert "timing_ms" not in json.loads((tmp_path / "r.json").read_text())
        assert sio.read_result(tmp_path / "r.json").timing_ms == []

    @pytest.mark.parametrize("field", ["order", "gains", "base_value"])
    def test_result_schema_errors(self, tmp_path, field):
        result = greedy_maximize(make_instance(2, n=2, m=4, patch=2).context(), 2)
        doc = sio.result_to_dict(result)
        del doc[field]
        (tmp_path / "r.json").write_text(json.dumps(doc))
        with pytest.raises(FormatError, match=field):
            sio.read_result(tmp_path / "r.json")

    def test_result_invariant_violation(self, tmp_path):
        result = greedy_maximize(make_instance(2, n=2, m=4, patch=2).context(), 2)
        doc = sio.result_to_dict(result)
        doc["gains"][1] += 1.0
        (tmp_path / "r.json").write_text(json.dumps(doc))
        with pytest.raises(FormatError):
            sio.read_result(tmp_path / "r.json")


class TestConfig:
    def test_profiles(self):
        assert (config_from_dict({"profile": "face"}).n, config_from_dict({"profile": "face"}).m) == (28, 98)
        cfg = config_from_dict({"profile": "fine", "m": 50})
        assert (cfg.n, cfg.m) == (10, 50)

    @pytest.mark.parametrize("doc", [
        {"n": 4, "m": 3},
        {"n": 4, "m": 4, "k": 5},
        {"lambdas": [1, -1, 1, 1]},
        {"target_mode": "category"},
        {"oracle": {"backend": "external"}},
        {"oracle": {"backend": "quantum"}},
        {"oracle": {"backend": "synthetic", "command": "x"}},
        {"frobnicate": 1},
        {"division": "superpixel"},
    ])
    def test_invalid(self, doc, monkeypatch):
        monkeypatch.delenv("SMATTR_ORACLE_CMD", raising=False)
        with pytest.raises(InvalidConfigError):
            config_from_dict(doc)

    def test_env_oracle_command(self, monkeypatch):
        monkeypatch.setenv("SMATTR_ORACLE_CMD", "my-oracle --flag")
        assert config_from_dict({}).oracle["command"] == "my-oracle --flag"
        cfg = config_from_dict({"oracle": {"backend": "external", "command": "other"}})
        assert cfg.oracle["command"] == "other"
        cfg = config_from_dict({"oracle": {"backend": "external"}})
        assert cfg.oracle["command"] == "my-oracle --flag"

    def test_paths_relative_to_config(self, tmp_path):
        (tmp_path / "c.json").write_text(json.dumps({"image": "img.png"}))
        cfg = load_config(tmp_path / "c.json")
        assert cfg.resolve(cfg.image) == tmp_path / "img.png"

    def test_bad_json(self, tmp_path):
        (tmp_path / "c.json").write_text("{")
        with pytest.raises(FormatError):
            load_config(tmp_path / "c.json")


def test_divide_document_from_files(tmp_path):
    inst = make_instance(4, n=4, m=4, patch=2)
    sio.write_float_map(inst.saliency, tmp_path / "s.smap")
    sal = sio.read_float_map(tmp_path / "s.smap")
    assert divide(inst.image, sal, 4, 4) == inst.regions
