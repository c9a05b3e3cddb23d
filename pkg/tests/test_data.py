"""Data model and interchange format tests."""

import math
import struct

import numpy as np
import pytest

from csiwave.data import (
    ACTIVITY_NAMES,
    ActivityLabel,
    CsiRecording,
    Dataset,
    StreamLayout,
    complex_magnitude,
    load_binary,
    load_csv,
    save_binary,
    save_csv,
    stream_matrix,
)
from csiwave.errors import FormatError, InvalidValue


def make_recording(t=240, layout=StreamLayout(1, 3, 30), rate=30.0, label_id=0, seed=0):
    rng = np.random.default_rng(seed)
    streams = rng.uniform(0.1, 5.0, size=(t, layout.total_streams))
    return CsiRecording(
        sample_rate_hz=rate,
        streams=streams,
        layout=layout,
        label=ActivityLabel.from_id(label_id),
    )


class TestComplexMagnitude:
    def test_pythagorean(self):
        assert complex_magnitude(3, 4) == 5

    def test_zero(self):
        assert complex_magnitude(0, 0) == 0

    def test_random_pairs_match_formula(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            re, im = rng.uniform(-1e3, 1e3, size=2)
            expected = math.sqrt(re * re + im * im)
            assert complex_magnitude(re, im) == pytest.approx(expected, rel=1e-12)

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidValue):
            complex_magnitude(float("nan"), 0.0)
        with pytest.raises(InvalidValue):
            complex_magnitude(0.0, float("inf"))


class TestTypes:
    def test_label_bijection(self):
        for i, name in enumerate(ACTIVITY_NAMES):
            lab = ActivityLabel.from_id(i)
            assert lab.name == name
            assert ActivityLabel.from_name(name) == lab

    def test_label_mismatch_rejected(self):
        with pytest.raises(InvalidValue):
            ActivityLabel(0, "Squat")
        with pytest.raises(InvalidValue):
            ActivityLabel.from_id(16)

    def test_recording_invariants(self):
        with pytest.raises(InvalidValue):  # one sample only
            CsiRecording(30.0, np.ones((1, 3)), StreamLayout(1, 1, 3))
        with pytest.raises(InvalidValue):  # negative amplitude
            CsiRecording(30.0, -np.ones((5, 3)), StreamLayout(1, 1, 3))
        with pytest.raises(InvalidValue):  # non-finite
            CsiRecording(30.0, np.full((5, 3), np.nan), StreamLayout(1, 1, 3))
        with pytest.raises(InvalidValue):  # layout mismatch
            CsiRecording(30.0, np.ones((5, 3)), StreamLayout(1, 2, 2))
        with pytest.raises(InvalidValue):  # bad rate
            CsiRecording(0.0, np.ones((5, 3)), StreamLayout(1, 1, 3))

    def test_recording_immutable(self):
        rec = make_recording(t=5, layout=StreamLayout(1, 1, 4))
        with pytest.raises(ValueError):
            rec.streams[0, 0] = 3.0

    def test_dataset_consistency(self):
        recs = [make_recording(seed=i, t=10) for i in range(3)]
        ds = Dataset(recordings=recs, class_count=16)
        assert len(ds) == 3
        other = make_recording(t=10, layout=StreamLayout(1, 1, 4))
        with pytest.raises(InvalidValue):
            Dataset(recordings=recs + [other], class_count=16)
        with pytest.raises(InvalidValue):
            Dataset(recordings=recs, class_count=0)  # labels out of range


class TestStreamMatrix:
    def test_column_order_1x3x30(self):
        layout = StreamLayout(1, 3, 30)
        for rx in range(3):
            for sub in range(30):
                assert layout.column_index(0, rx, sub) == rx * 30 + sub

    def test_degenerate_layout(self):
        rec = make_recording(t=8, layout=StreamLayout(1, 1, 1))
        assert stream_matrix(rec).shape == (8, 1)

    def test_index_arithmetic_oracle(self):
        layout = StreamLayout(2, 3, 5)
        rec = make_recording(t=20, layout=layout, seed=3)
        mat = stream_matrix(rec)
        rng = np.random.default_rng(5)
        seen = set()
        for _ in range(1000):
            tx = rng.integers(0, 2)
            rx = rng.integers(0, 3)
            sub = rng.integers(0, 5)
            t = rng.integers(0, 20)
            col = layout.column_index(tx, rx, sub)
            seen.add(col)
            assert mat[t, col] == rec.streams[t, (tx * 3 + rx) * 5 + sub]
        assert seen == set(range(30))  # bijection onto all columns

    def test_out_of_range_rejected(self):
        with pytest.raises(InvalidValue):
            StreamLayout(1, 3, 30).column_index(1, 0, 0)


class TestCsvFormat:
    def test_header_roundtrip_240x90(self, tmp_path):
        rec = make_recording(t=240, layout=StreamLayout(1, 3, 30), rate=30.0)
        path = tmp_path / "rec.csv"
        save_csv(rec, path)
        header = path.read_text().splitlines()[0]
        assert header.startswith("# csiwave v1;")
        back = load_csv(path)
        assert back.n_samples == 240
        assert back.n_streams == 90
        assert back.sample_rate_hz == 30.0
        assert back.label == rec.label
        np.testing.assert_allclose(back.streams, rec.streams, atol=1e-9)

    def test_roundtrip_many(self, tmp_path):
        for seed in range(5):
            rec = make_recording(t=13, layout=StreamLayout(1, 2, 3), seed=seed)
            path = tmp_path / f"r{seed}.csv"
            save_csv(rec, path)
            back = load_csv(path)
            np.testing.assert_allclose(back.streams, rec.streams, atol=1e-9)

    def test_non_numeric_token_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "# csiwave v1; rate=30; ntx=1; nrx=1; nsub=2; label=none\n"
            "1.0,2.0\n"
            "1.0,abc\n"
            "3.0,4.0\n"
        )
        with pytest.raises(FormatError, match=r":3"):
            load_csv(path)

    def test_wrong_field_count(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "# csiwave v1; rate=30; ntx=1; nrx=1; nsub=2; label=none\n1.0,2.0\n1.0\n"
        )
        with pytest.raises(FormatError, match=r":3"):
            load_csv(path)

    def test_missing_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,2.0\n3.0,4.0\n")
        with pytest.raises(FormatError, match="header"):
            load_csv(path)

    def test_negative_amplitude(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "# csiwave v1; rate=30; ntx=1; nrx=1; nsub=2; label=none\n1.0,2.0\n-1.0,4.0\n"
        )
        with pytest.raises(InvalidValue):
            load_csv(path)


class TestBinaryFormat:
    def test_roundtrip_f32_exact(self, tmp_path):
        rec = make_recording(t=50, seed=2)
        path = tmp_path / "rec.csiw"
        save_binary(rec, path)
        back = load_binary(path)
        np.testing.assert_array_equal(
            back.streams, rec.streams.astype(np.float32).astype(np.float64)
        )
        assert back.sample_rate_hz == rec.sample_rate_hz
        assert back.label == rec.label
        assert back.layout == rec.layout

    def test_double_roundtrip_bit_exact(self, tmp_path):
        rec = make_recording(t=50, seed=4)
        p1, p2 = tmp_path / "a.csiw", tmp_path / "b.csiw"
        save_binary(rec, p1)
        save_binary(load_binary(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.csiw"
        rec = make_recording(t=5, layout=StreamLayout(1, 1, 2))
        save_binary(rec, path)
        blob = bytearray(path.read_bytes())
        blob[:4] = b"XXXX"
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError, match="magic"):
            load_binary(path)

    def test_bad_version(self, tmp_path):
        path = tmp_path / "bad.csiw"
        save_binary(make_recording(t=5, layout=StreamLayout(1, 1, 2)), path)
        blob = bytearray(path.read_bytes())
        blob[4] = 9
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError, match="version"):
            load_binary(path)

    def test_truncation_reports_byte_counts(self, tmp_path):
        path = tmp_path / "bad.csiw"
        # header says T=100 but payload holds only 50 rows
        header = struct.pack("<IIIIdi", 100, 1, 1, 2, 30.0, -1)
        payload = np.zeros((50, 2), dtype="<f4").tobytes()
        path.write_bytes(b"CSIW" + bytes([1]) + header + payload)
        with pytest.raises(FormatError) as err:
            load_binary(path)
        expected = 5 + 28 + 4 * 100 * 2
        actual = 5 + 28 + 4 * 50 * 2
        assert str(expected) in str(err.value)
        assert str(actual) in str(err.value)
