"""Tests for the .npz artifact format and JSON report files."""
import numpy as np
import pytest

from sentibench.artifacts import (
    FORMAT_VERSION,
    check_fingerprint,
    load_artifact,
    prefixed,
    read_json,
    save_artifact,
    write_json,
)
from sentibench.errors import ArtifactError, ArtifactMismatchError


@pytest.fixture
def artifact_path(tmp_path):
    arrays = {**prefixed("nb", {"prior": np.array([0.1, 0.2, 0.7])}), "words": np.array(["a", "b"])}
    return save_artifact(tmp_path / "nb.model", "nb", arrays, {"vocabulary_hash": "abc"})


class TestSaveLoad:
    """Test writing and reading artifacts."""

    def test_written_at_exact_path(self, artifact_path, tmp_path):
        assert artifact_path == tmp_path / "nb.model"
        assert artifact_path.is_file()

    def test_round_trip(self, artifact_path):
        artifact = load_artifact(artifact_path, kind="nb")
        assert artifact.kind == "nb"
        assert artifact.meta["format_version"] == FORMAT_VERSION
        assert artifact.meta["vocabulary_hash"] == "abc"
        assert artifact.subset("nb")["prior"].tolist() == [0.1, 0.2, 0.7]
        assert artifact.arrays["words"].tolist() == ["a", "b"]
        assert "__meta__" not in artifact.arrays

    def test_reserved_array_name(self, tmp_path):
        with pytest.raises(ArtifactError, match="reserved"):
            save_artifact(tmp_path / "x.model", "nb", {"__meta__": np.zeros(1)}, {})


class TestRejections:
    """Test version, kind and corruption checks."""

    def test_version_skew(self, tmp_path):
        path = save_artifact(tmp_path / "old.model", "nb", {}, {"format_version": FORMAT_VERSION + 1})
        with pytest.raises(ArtifactError, match="format version"):
            load_artifact(path)

    def test_kind_mismatch(self, artifact_path):
        with pytest.raises(ArtifactError, match="'nb' model, expected 'bilstm'"):
            load_artifact(artifact_path, kind="bilstm")

    def test_garbage_file(self, tmp_path):
        path = tmp_path / "junk.model"
        path.write_bytes(b"definitely not a zip archive")
        with pytest.raises(ArtifactError, match="cannot read"):
            load_artifact(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ArtifactError, match="cannot read"):
            load_artifact(tmp_path / "none.model")

    def test_missing_metadata(self, tmp_path):
        path = tmp_path / "bare.npz"
        np.savez(path, x=np.zeros(2))
        with pytest.raises(ArtifactError, match="no metadata"):
            load_artifact(path)

    def test_corrupt_metadata(self, tmp_path):
        path = tmp_path / "bad.npz"
        np.savez(path, __meta__=np.array("{not json"))
        with pytest.raises(ArtifactError, match="corrupt metadata"):
            load_artifact(path)

    def test_fingerprint_check(self):
        check_fingerprint("lexicon", "abc", "abc")
        with pytest.raises(ArtifactMismatchError, match="lexicon fingerprint mismatch"):
            check_fingerprint("lexicon", "abc", "def")
        with pytest.raises(ArtifactMismatchError):
            check_fingerprint("lexicon", None, "def")


class TestJson:
    """Test report files."""

    def test_identical_data_identical_bytes(self, tmp_path):
        data = {"accuracy": 0.75, "model": "nb", "note": "größe"}
        a = write_json(tmp_path / "a" / "m.json", data)
        b = write_json(tmp_path / "b" / "m.json", dict(data))
        assert a.read_bytes() == b.read_bytes()
        assert read_json(a) == data
