import math
import os
import pathlib

import pytest

import slvideo

FIXTURES = pathlib.Path(os.environ.get("SLVIDEO_FIXTURES_DIR", pathlib.Path(__file__).parents[2] / "tests" / "fixtures"))


def unit(v):
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]


def test_normalize_text():
    assert slvideo.normalize_text("Dúvida") == slvideo.normalize_text("duvida")
    assert slvideo.normalize_text("Lobo") == "lobo"


def test_parse_eaf_and_errors():
    tiers = str(FIXTURES / "tier_config.json")
    anns = slvideo.parse_eaf((FIXTURES / "lobo_single.eaf").read_text(), "lobo", tiers)
    assert len(anns) == 1
    assert anns[0]["gloss"] == "Lobo"
    assert (anns[0]["start_ms"], anns[0]["end_ms"]) == (1000, 2500)
    with pytest.raises(slvideo.SlvideoError) as err:
        slvideo.parse_eaf((FIXTURES / "dangling.eaf").read_text(), "v", tiers)
    assert err.value.code == "dangling_reference"


def test_keyframes_and_metrics():
    assert slvideo.keyframe_timestamps(1000, 1100) == [1000, 1040, 1080]
    assert slvideo.median([0, 0, 0.02, 0.03, 0.05, 0.02, 0]) == pytest.approx(0.02)
    assert slvideo.f1_score(0.8, 2 / 3) == pytest.approx(0.7273, abs=1e-4)


def test_mock_encoder_is_deterministic():
    a = slvideo.MockEncoder(16)
    b = slvideo.MockEncoder(16)
    assert a.encode_text("Lobo") == b.encode_text("Lobo")
    assert a.encode_text("Lobo") != a.encode_text("Lebre")
    assert sum(x * x for x in a.encode_text("Lobo")) == pytest.approx(1.0)


def test_index_round_trip(tmp_path):
    fields = ["base", "average", "best", "summed", "all", "annotation"]
    index = slvideo.VectorIndex(2)
    for doc_id, v in [("v_d1", [1, 0]), ("v_d2", [0, 1]), ("v_d3", unit([0.6, 0.8]))]:
        index.index_document(doc_id, {f: v for f in fields})
    hits = index.knn_search([1.0, 0.0], "all", 3)
    assert [h.doc_id for h in hits] == ["v_d1", "v_d3", "v_d2"]
    assert hits[0].score == pytest.approx(1.0, abs=1e-9)
    assert hits[2].score == pytest.approx(0.5, abs=1e-9)
    index.persist(str(tmp_path / "index.bin"))
    loaded = slvideo.VectorIndex.load(str(tmp_path / "index.bin"))
    assert [h.doc_id for h in loaded.knn_search([1.0, 0.0], "all", 3)] == ["v_d1", "v_d3", "v_d2"]
    with pytest.raises(slvideo.SlvideoError) as err:
        index.knn_search([1.0, 0.0], "elbow", 3)
    assert err.value.code == "unknown_field"


def test_cli_usage_error():
    code, _, err = slvideo.run_cli(["frobnicate"])
    assert code == 2
    assert "frobnicate" in err
