import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from monodist.detect import (
    BoundingBox,
    Detection,
    DetectionSet,
    filter_confidence,
    iou,
    nms,
    parse_detections,
    serialize_detections,
)
from monodist.errors import DataError, DetectionFormatError


def det(x0, y0, x1, y1, conf=0.9, class_id=0, class_name="person"):
    return Detection(class_id, class_name, conf, BoundingBox(x0, y0, x1, y1))


def det_set(*dets, width=640, height=480):
    return DetectionSet("img", width, height, tuple(dets))


def doc_bytes(doc):
    return json.dumps(doc).encode()


BASE_DOC = {
    "image": "img",
    "width": 640,
    "height": 480,
    "detections": [
        {
            "class_id": 0,
            "class_name": "person",
            "confidence": 0.9,
            "bbox": [10, 20, 50, 120],
        }
    ],
}


class TestParse:
    def test_single_detection(self):
        ds = parse_detections(doc_bytes(BASE_DOC))
        assert len(ds.detections) == 1
        d = ds.detections[0]
        assert d.class_name == "person"
        assert d.bbox == BoundingBox(10, 20, 50, 120)

    def test_inverted_box_rejected(self):
        doc = dict(BASE_DOC)
        doc["detections"] = [dict(BASE_DOC["detections"][0], bbox=[50, 20, 10, 120])]
        with pytest.raises(DetectionFormatError):
            parse_detections(doc_bytes(doc))

    def test_out_of_bounds_clamped(self):
        doc = dict(BASE_DOC)
        doc["detections"] = [dict(BASE_DOC["detections"][0], bbox=[-5, 0, 650, 480])]
        ds = parse_detections(doc_bytes(doc))
        assert ds.detections[0].bbox == BoundingBox(0, 0, 640, 480)

    @pytest.mark.parametrize("missing", ["image", "width", "height", "detections"])
    def test_missing_field(self, missing):
        doc = {k: v for k, v in BASE_DOC.items() if k != missing}
        with pytest.raises(DetectionFormatError):
            parse_detections(doc_bytes(doc))

    def test_bad_confidence(self):
        doc = dict(BASE_DOC)
        doc["detections"] = [dict(BASE_DOC["detections"][0], confidence=1.5)]
        with pytest.raises(DetectionFormatError):
            parse_detections(doc_bytes(doc))

    def test_malformed_json(self):
        with pytest.raises(DetectionFormatError):
            parse_detections(b"{not json")

    def test_round_trip_preserves_floats(self):
        doc = dict(BASE_DOC)
        doc["detections"] = [
            dict(BASE_DOC["detections"][0], confidence=0.123456789123, bbox=[10.25, 20.125, 50.75, 120.0625])
        ]
        ds = parse_detections(doc_bytes(doc))
        again = parse_detections(serialize_detections(ds))
        assert again == ds

    def test_second_write_byte_identical(self):
        first = serialize_detections(parse_detections(doc_bytes(BASE_DOC)))
        second = serialize_detections(parse_detections(first))
        assert first == second


class TestIou:
    def test_identity(self):
        b = BoundingBox(0, 0, 2, 2)
        assert iou(b, b) == 1.0

    def test_disjoint(self):
        assert iou(BoundingBox(0, 0, 1, 1), BoundingBox(5, 5, 6, 6)) == 0.0

    def test_unit_overlap(self):
        assert iou(BoundingBox(0, 0, 2, 2), BoundingBox(1, 1, 3, 3)) == pytest.approx(
            1 / 7, abs=1e-12
        )

    boxes = st.builds(
        lambda x0, y0, dx, dy: BoundingBox(x0, y0, x0 + dx, y0 + dy),
        st.floats(0, 100),
        st.floats(0, 100),
        st.floats(0.5, 100),
        st.floats(0.5, 100),
    )

    @given(boxes, boxes)
    def test_symmetric_and_bounded(self, a, b):
        v = iou(a, b)
        assert v == iou(b, a)
        assert 0.0 <= v <= 1.0


class TestFilterConfidence:
    def test_keeps_above_threshold(self):
        ds = det_set(det(0, 0, 1, 1, conf=0.9), det(2, 2, 3, 3, conf=0.1))
        out = filter_confidence(ds, 0.25)
        assert [d.confidence for d in out.detections] == [0.9]

    def test_zero_threshold_is_identity(self):
        ds = det_set(det(0, 0, 1, 1, conf=0.5))
        assert filter_confidence(ds, 0.0) == ds

    def test_one_threshold_empties(self):
        ds = det_set(det(0, 0, 1, 1, conf=0.99))
        assert filter_confidence(ds, 1.0).detections == ()

    @given(st.lists(st.floats(0, 1), max_size=10), st.floats(0, 1), st.floats(0, 1))
    def test_monotone(self, confs, t1, t2):
        lo, hi = min(t1, t2), max(t1, t2)
        ds = det_set(*(det(i, i, i + 1, i + 1, conf=c) for i, c in enumerate(confs)))
        kept_hi = filter_confidence(ds, hi).detections
        kept_lo = filter_confidence(ds, lo).detections
        assert set(kept_hi) <= set(kept_lo)


class TestNms:
    def test_duplicate_suppressed(self):
        ds = det_set(det(0, 0, 10, 10, conf=0.9), det(0, 0, 10, 10, conf=0.8))
        out = nms(ds, 0.45)
        assert [d.confidence for d in out.detections] == [0.9]

    def test_disjoint_kept(self):
        ds = det_set(det(0, 0, 10, 10, conf=0.9), det(50, 50, 60, 60, conf=0.8))
        assert len(nms(ds, 0.45).detections) == 2

    def test_chain_keeps_ends(self):
        # A-B and B-C overlap above threshold, A-C below: greedy keeps A then C
        a = det(0, 0, 10, 10, conf=0.9)
        b = det(0, 2.5, 10, 12.5, conf=0.8)
        c = det(0, 6, 10, 16, conf=0.7)
        assert iou(a.bbox, b.bbox) == pytest.approx(0.6)
        assert iou(b.bbox, c.bbox) > 0.45
        assert iou(a.bbox, c.bbox) < 0.45
        out = nms(det_set(a, b, c), 0.45)
        assert out.detections == (a, c)

    def test_classes_do_not_suppress_each_other(self):
        a = det(0, 0, 10, 10, conf=0.9, class_id=1, class_name="car")
        b = det(0, 0, 10, 10, conf=0.8, class_id=2, class_name="person")
        assert len(nms(det_set(a, b), 0.45).detections) == 2

    def test_tie_broken_by_input_order(self):
        a = det(0, 0, 10, 10, conf=0.9)
        b = det(0, 0, 10, 10, conf=0.9)
        out = nms(det_set(a, b), 0.45)
        assert out.detections == (a,)

    def test_threshold_validation(self):
        with pytest.raises(DataError):
            nms(det_set(), 0.0)

    dets = st.lists(
        st.tuples(
            st.floats(0, 50), st.floats(0, 50), st.floats(0, 1), st.integers(0, 2)
        ).map(lambda t: det(t[0], t[1], t[0] + 5, t[1] + 5, conf=t[2], class_id=t[3])),
        max_size=12,
    )

    @given(dets, st.floats(0.05, 0.95))
    def test_subset_bound_idempotent(self, dets, thr):
        ds = det_set(*dets)
        out = nms(ds, thr)
        assert set(out.detections) <= set(ds.detections)
        for i, a in enumerate(out.detections):
            for b in out.detections[i + 1 :]:
                if a.class_id == b.class_id:
                    assert iou(a.bbox, b.bbox) <= thr
        assert nms(out, thr) == out
