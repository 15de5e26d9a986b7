import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dingdate.catalog import (
    ArtifactRecord,
    CatalogManifest,
    CatalogStore,
    DuplicateIdError,
    InvalidRecordError,
    ManifestEntry,
    ManifestParseError,
    NotFoundError,
    load_manifest,
    parse_manifest_text,
    render_manifest_text,
)
from dingdate.detect import DetectionBox, PartLabel
from dingdate.periods import Dynasty, InvalidPeriodError, Period, Phase

from conftest import make_photo


@pytest.fixture()
def store(tmp_path):
    return CatalogStore(tmp_path / "cat")


def record_for(store, rid="d001", period="Shang.Late", **overrides):
    ref = overrides.pop("image_ref", None) or store.put_image(make_photo(1))
    base = dict(
        id=rid,
        period=Period.parse(period),
        shape="round ding",
        literature="bronzes vol. 1",
        excavation="Anyang",
        museum="Museum A",
        image_ref=ref,
    )
    base.update(overrides)
    return ArtifactRecord(**base)


class TestRegisterAndGet:
    def test_round_trip_identity(self, store):
        record = record_for(store)
        assert store.register_artifact(record) == "d001"
        assert store.get_artifact("d001") == record

    def test_duplicate_id(self, store):
        store.register_artifact(record_for(store))
        with pytest.raises(DuplicateIdError):
            store.register_artifact(record_for(store))

    def test_shang_mid_cannot_even_exist(self):
        # Table-layout validation fires at the Period level
        with pytest.raises(InvalidPeriodError):
            Period(Dynasty.SHANG, Phase.MID)

    def test_non_period_rejected_naming_field(self, store):
        ref = store.put_image(make_photo(2))
        record = ArtifactRecord(
            id="d009", period="Shang.Late",  # type: ignore[arg-type]
            shape="", literature="", excavation="", museum="", image_ref=ref,
        )
        with pytest.raises(InvalidRecordError) as excinfo:
            store.register_artifact(record)
        assert excinfo.value.field_name == "period"

    def test_unresolvable_image_ref(self, store):
        record = record_for(store, image_ref="deadbeef.png")
        with pytest.raises(InvalidRecordError) as excinfo:
            store.register_artifact(record)
        assert excinfo.value.field_name == "image_ref"

    def test_missing_record_not_found(self, store):
        with pytest.raises(NotFoundError):
            store.get_artifact("missing")

    def test_empty_annotation_strings_allowed(self, store):
        record = record_for(store, shape="", literature="", excavation="", museum="")
        store.register_artifact(record)
        assert store.get_artifact("d001").shape == ""

    def test_restart_round_trip(self, tmp_path):
        root = tmp_path / "cat"
        store = CatalogStore(root)
        embedding = np.arange(8, dtype=np.float32)
        boxes = (DetectionBox(PartLabel.HANDLE, 0.9, 0.1, 0.1, 0.4, 0.3),)
        record = record_for(store, embedding=embedding, feature_boxes=boxes)
        store.register_artifact(record)

        reopened = CatalogStore(root, create=False)
        assert reopened.get_artifact("d001") == record

    def test_image_bytes_round_trip(self, store):
        data = make_photo(3)
        ref = store.put_image(data)
        assert store.open_image(ref) == data


class TestListByPeriod:
    def test_empty_catalog(self, store):
        assert store.list_by_period(Period.parse("Shang.Late")) == []

    def test_filtering_matches_brute_force(self, store):
        target = Period.parse("WesternZhou.Early")
        records = [
            record_for(store, "a2", "WesternZhou.Early", image_ref=store.put_image(make_photo(10))),
            record_for(store, "a1", "Shang.Late", image_ref=store.put_image(make_photo(11))),
            record_for(store, "a3", "WesternZhou.Early", image_ref=store.put_image(make_photo(12))),
        ]
        for r in records:
            store.register_artifact(r)
        expected = sorted(r.id for r in records if r.period == target)
        assert store.list_by_period(target) == expected == ["a2", "a3"]

    def test_period_without_records(self, store):
        store.register_artifact(record_for(store))
        assert store.list_by_period(Period.parse("WarringStates.Mid")) == []


class TestManifest:
    def test_three_line_manifest(self, tmp_path):
        root = tmp_path / "cat"
        store = CatalogStore(root)
        for i in range(3):
            store.register_artifact(
                record_for(store, f"d{i}", image_ref=store.put_image(make_photo(20 + i)))
            )
        loaded = load_manifest(root / "manifest.tsv")
        assert len(loaded) == 3

    def test_malformed_line_number_reported(self):
        text = (
            "# ding-catalog v1\n"
            "a1\tShang.Late\ts\tl\te\tm\tblob.png\n"
            "not\tnearly\tenough\n"
        )
        with pytest.raises(ManifestParseError) as excinfo:
            parse_manifest_text(text)
        assert excinfo.value.line_no == 3

    def test_bad_period_line_number(self):
        text = "a1\tShang.Mid\ts\tl\te\tm\tblob.png\n"
        with pytest.raises(ManifestParseError) as excinfo:
            parse_manifest_text(text)
        assert excinfo.value.line_no == 1

    def test_empty_file_is_empty_catalog(self, tmp_path):
        root = tmp_path / "cat"
        root.mkdir()
        (root / "manifest.tsv").write_text("", "utf-8")
        assert len(load_manifest(root / "manifest.tsv")) == 0

    def test_missing_manifest_is_io_error(self, tmp_path):
        from dingdate.catalog import CatalogIOError

        with pytest.raises(CatalogIOError):
            load_manifest(tmp_path / "nope" / "manifest.tsv")

    def test_duplicate_ids_rejected(self):
        line = "a1\tShang.Late\ts\tl\te\tm\tblob.png"
        with pytest.raises(ManifestParseError):
            parse_manifest_text(f"{line}\n{line}\n")


free_text = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",)), max_size=30
)
ids = st.text(
    alphabet=st.characters(min_codepoint=33, max_codepoint=126, blacklist_characters="\t\\"),
    min_size=1,
    max_size=12,
)


@st.composite
def manifest_entries(draw):
    n = draw(st.integers(0, 6))
    entry_ids = draw(st.lists(ids, min_size=n, max_size=n, unique=True))
    entries = []
    for entry_id in entry_ids:
        entries.append(
            ManifestEntry(
                id=entry_id,
                period=draw(st.sampled_from(list(__import__("dingdate.periods", fromlist=["PERIODS"]).PERIODS))),
                shape=draw(free_text),
                literature=draw(free_text),
                excavation=draw(free_text),
                museum=draw(free_text),
                image_ref="blob.png",
                embedding_ref=draw(st.none() | st.just("embeddings/x.f32")),
            )
        )
    return CatalogManifest(version=1, entries=tuple(entries))


class TestManifestRoundTrip:
    @given(manifest_entries())
    @settings(max_examples=60, deadline=None)
    def test_serialize_parse_round_trip(self, manifest):
        text = render_manifest_text(manifest)
        reparsed = parse_manifest_text(text)
        assert reparsed == manifest

    def test_cjk_and_control_characters_survive(self):
        entry = ManifestEntry(
            id="d42",
            period=Period.parse("WarringStates.Late"),
            shape="鼎\t三足",     # embedded tab
            literature="line\nbreak",  # embedded newline
            excavation="宝鸡",
            museum="故宫博物院",
            image_ref="blob.png",
        )
        manifest = CatalogManifest(version=1, entries=(entry,))
        assert parse_manifest_text(render_manifest_text(manifest)) == manifest
