import json
import math

import numpy as np

from puzzleforge.dynamics.strong_regularity import Verdict
from puzzleforge.utils.output_utils import (
    OutputSet,
    RunManifest,
    csv_cell,
    dumps,
    format_float,
    load_manifest,
    make_output_filename,
    sha256_file,
    write_csv,
)


def test_float_format():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(math.nan) == "NaN"
    assert format_float(-math.inf) == "-Infinity"


def test_dumps_sorts_keys_and_keeps_float_markers():
    assert dumps({"b": 1, "a": 0.5}) == '{\n  "a": 0.5,\n  "b": 1\n}\n'
    assert dumps({"x": 2.0}) == '{\n  "x": 2.0\n}\n'


def test_dumps_plain_values():
    text = dumps({"v": Verdict.EXCLUDED, "n": np.int64(3), "arr": np.array([0.25]), "t": (1, 2)})
    assert json.loads(text) == {"arr": [0.25], "n": 3, "t": [1, 2], "v": "excluded"}


def test_csv_cell():
    assert csv_cell(np.float64(0.5)) == "0.5"
    assert csv_cell([1, 2]) == "[1,2]"
    assert csv_cell(None) is None


def test_output_filename():
    assert make_output_filename("puzzle", [("a", -2.0), ("order", 1)]) == "output/puzzle_a--2p0_order-1.csv"
    assert make_output_filename("classify", [("lo", -2.0), ("skip", None)], "out", "json") == "out/classify_lo--2p0.json"


def test_write_csv_uses_unix_newlines(tmp_path):
    target = str(tmp_path / "t.csv")
    write_csv(target, [{"a": 0.1, "b": 2}, {"a": 1.0, "b": 3}])
    assert open(target, "rb").read() == b"a,b\n0.10000000000000001,2\n1,3\n"


def test_manifest_lists_outputs_with_hashes(tmp_path):
    config_file = tmp_path / "run.env"
    config_file.write_text("A=-2\n")
    outputs = OutputSet(str(tmp_path / "out"), "puzzle")
    csv_path = outputs.csv([("a", -2.0)], [{"x": 1}])
    json_path = outputs.json([("a", -2.0)], {"y": 2})
    manifest = outputs.finalize({"a": -2.0}, str(config_file))
    loaded = load_manifest(str(tmp_path / "out"))
    assert loaded["command"] == "puzzle"
    assert loaded["precision_mode"] == "binary64"
    assert loaded["input_hashes"] == {"run.env": sha256_file(str(config_file))}
    assert loaded["outputs"] == [
        {"file": "puzzle_a--2p0.csv", "sha256": sha256_file(csv_path)},
        {"file": "puzzle_a--2p0.json", "sha256": sha256_file(json_path)},
    ]
    assert manifest.to_dict(include_wall_time=False) == {k: v for k, v in loaded.items() if k != "wall_time_s"}


def test_manifest_without_wall_time():
    assert "wall_time_s" not in RunManifest("measure", {}).to_dict(include_wall_time=False)
