import json

import numpy as np
import pytest

from oamlink import io
from oamlink.io import ArtifactIOError


def test_csv_roundtrip_and_formatting(tmp_path):
    p = io.write_csv(tmp_path / "sub" / "t.csv", ("a", "b", "c"), [(1, 0.1, True), (np.int64(2), np.float64(1e-300), False)])
    text = p.read_text()
    assert text.splitlines() == ["a,b,c", "1,0.1,true", "2,1e-300,false"]
    head, rows = io.read_csv(p)
    assert head == ["a", "b", "c"] and rows[1] == ["2", "1e-300", "false"]
    assert not any(f.name.endswith(".tmp") for f in p.parent.iterdir())


def test_lens_dump_roundtrip(tmp_path):
    a = np.arange(12, dtype=float).reshape(3, 4) / 7
    p = io.write_lens_dump(tmp_path / "l.oamlens", a, 0.004, "phase_rad")
    assert p.read_bytes().startswith(b"OAMLENS v1 4 3 0.004 phase_rad\n")
    back, pitch, q = io.read_lens_dump(p)
    np.testing.assert_array_equal(back, a)
    assert pitch == 0.004 and q == "phase_rad"
    with pytest.raises(ValueError):
        io.write_lens_dump(tmp_path / "x", a, 0.004, "height")


def test_field_dump_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    u = rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))
    p = io.write_field_dump(tmp_path / "f.oamfield", u, 0.004, 2.0794, 0.0186)
    back, pitch, z, lam = io.read_field_dump(p)
    np.testing.assert_array_equal(back, u)
    assert (pitch, z, lam) == (0.004, 2.0794, 0.0186)
    with pytest.raises(ArtifactIOError):
        io.read_lens_dump(p)


def test_missing_files(tmp_path):
    with pytest.raises(ArtifactIOError):
        io.read_csv(tmp_path / "nope.csv")
    with pytest.raises(OSError):
        io.read_field_dump(tmp_path / "nope")


def test_unwritable_target(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(ArtifactIOError):
        io.atomic_write_text(blocker / "child.txt", "y")


def test_manifest(tmp_path):
    a = io.atomic_write_text(tmp_path / "a.txt", "hello")
    b = io.atomic_write_text(tmp_path / "d" / "b.txt", "world")
    m = io.write_manifest(tmp_path, "abc", 7, [b, a, a], {"k": 1})
    data = json.loads(m.read_text())
    assert data["scenario_hash"] == "abc" and data["seed"] == 7
    assert list(data["artifacts"]) == ["a.txt", "d/b.txt"]
    assert data["artifacts"]["a.txt"] == io.sha256_file(a)
    assert data["metadata"] == {"k": 1}
