import struct

import numpy as np
import pytest

from pcdal import (AxisRole, FormatError, LayoutError, ShapeError,
                   TruncationError, image_roles, prediction_roles,
                   read_tensor, softmax, write_tensor)


class TestTensorIO:
    def test_round_trip_f32(self, tmp_path):
        t = np.arange(24, dtype=np.float32).reshape(2, 3, 4)
        path = tmp_path / "t.ptns"
        write_tensor(t, path)
        back = read_tensor(path)
        assert back.dtype == np.float32
        assert back.shape == (2, 3, 4)
        assert np.array_equal(back, t)

    def test_round_trip_f64_all_ranks(self, tmp_path):
        rng = np.random.default_rng(0)
        for rank in (1, 2, 3, 4):
            shape = tuple(rng.integers(1, 5, size=rank))
            t = rng.normal(size=shape)
            path = tmp_path / f"r{rank}.ptns"
            write_tensor(t, path)
            back = read_tensor(path)
            assert back.shape == shape
            assert np.array_equal(back, t)

    def test_header_layout_exact(self, tmp_path):
        t = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=np.float32)
        path = tmp_path / "h.ptns"
        write_tensor(t, path)
        raw = path.read_bytes()
        expected = (b"PTNS" + bytes([1, 0x01, 2]) + b"\x00" * 5
                    + struct.pack("<2Q", 2, 2)
                    + t.astype("<f4").tobytes(order="C"))
        assert raw == expected

    def test_payload_offset_is_12_plus_8_rank(self, tmp_path):
        t = np.arange(6, dtype=np.float64).reshape(2, 3)
        path = tmp_path / "o.ptns"
        write_tensor(t, path)
        raw = path.read_bytes()
        offset = 12 + 8 * 2
        assert np.frombuffer(raw[offset:], dtype="<f8").tolist() == list(range(6))

    def test_non_contiguous_and_big_endian_inputs(self, tmp_path):
        t = np.arange(12, dtype=np.float64).reshape(3, 4)
        path = tmp_path / "v.ptns"
        write_tensor(t.T, path)  # Fortran-ordered view
        assert np.array_equal(read_tensor(path), t.T)
        be = np.arange(4, dtype=">f4").reshape(2, 2)
        write_tensor(be, path)
        back = read_tensor(path)
        assert back.dtype == np.dtype("float32")
        assert np.array_equal(back, be.astype("<f4"))


class TestTensorErrors:
    def _valid_bytes(self):
        t = np.ones((2, 2), dtype=np.float32)
        return (b"PTNS" + bytes([1, 0x01, 2]) + b"\x00" * 5
                + struct.pack("<2Q", 2, 2) + t.tobytes())

    def _expect(self, tmp_path, raw, exc):
        path = tmp_path / "bad.ptns"
        path.write_bytes(raw)
        with pytest.raises(exc):
            read_tensor(path)

    def test_bad_magic(self, tmp_path):
        raw = self._valid_bytes()
        self._expect(tmp_path, b"XTNS" + raw[4:], FormatError)

    def test_bad_version(self, tmp_path):
        raw = bytearray(self._valid_bytes())
        raw[4] = 2
        self._expect(tmp_path, bytes(raw), FormatError)

    def test_bad_dtype_code(self, tmp_path):
        raw = bytearray(self._valid_bytes())
        raw[5] = 0x03
        self._expect(tmp_path, bytes(raw), FormatError)

    def test_bad_rank(self, tmp_path):
        raw = bytearray(self._valid_bytes())
        raw[6] = 5
        self._expect(tmp_path, bytes(raw), FormatError)

    def test_nonzero_reserved(self, tmp_path):
        raw = bytearray(self._valid_bytes())
        raw[9] = 1
        self._expect(tmp_path, bytes(raw), FormatError)

    def test_zero_extent(self, tmp_path):
        raw = (b"PTNS" + bytes([1, 0x01, 2]) + b"\x00" * 5
               + struct.pack("<2Q", 0, 2))
        self._expect(tmp_path, raw, FormatError)

    def test_truncated_payload(self, tmp_path):
        raw = self._valid_bytes()
        self._expect(tmp_path, raw[:-4], TruncationError)

    def test_trailing_garbage(self, tmp_path):
        raw = self._valid_bytes()
        self._expect(tmp_path, raw + b"\x00", TruncationError)

    def test_truncated_header_is_malformed(self, tmp_path):
        # incomplete fixed header is a format problem, not a payload length one
        self._expect(tmp_path, b"PTNS\x01", FormatError)

    def test_truncated_extent_table_is_malformed(self, tmp_path):
        raw = self._valid_bytes()
        self._expect(tmp_path, raw[:16], FormatError)

    def test_write_rejects_bad_dtype(self, tmp_path):
        with pytest.raises(FormatError):
            write_tensor(np.ones((2, 2), dtype=np.int32), tmp_path / "i.ptns")

    def test_write_rejects_rank_5(self, tmp_path):
        with pytest.raises(ShapeError):
            write_tensor(np.ones((1, 1, 1, 1, 1)), tmp_path / "r5.ptns")


class TestSoftmax:
    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(1)
        t = rng.normal(size=(4, 5)) * 50
        s = softmax(t, axis=1)
        assert np.allclose(s.sum(axis=1), 1.0)
        assert (s > 0).all()

    def test_shift_invariance(self):
        t = np.array([1.0, 2.0, 3.0])
        assert np.allclose(softmax(t, 0), softmax(t + 100.0, 0))

    def test_overflow_guard(self):
        s = softmax(np.array([1e4, 0.0]), 0)
        assert np.isfinite(s).all()
        assert s[0] > 0.999

    def test_bad_axis(self):
        with pytest.raises(ShapeError):
            softmax(np.ones(3), axis=2)


class TestAxisRoles:
    def test_prediction_roles(self):
        r = prediction_roles("segmentation-3d")
        assert (r.class_axis, r.depth, r.height, r.width) == (0, 1, 2, 3)
        assert prediction_roles("classification").class_axis == 0

    def test_image_roles(self):
        assert image_roles(2).named() == {"height": 0, "width": 1}
        assert image_roles(3).named() == {"depth": 0, "height": 1, "width": 2}
        with pytest.raises(ShapeError):
            image_roles(4)

    def test_validate_rejects_duplicates_and_range(self):
        with pytest.raises(LayoutError):
            AxisRole(height=0, width=0).validate(2)
        with pytest.raises(LayoutError):
            AxisRole(height=3, width=1).validate(2)

    def test_unknown_role_lookup(self):
        with pytest.raises(LayoutError):
            AxisRole(height=0, width=1).axis_for("class_axis")
