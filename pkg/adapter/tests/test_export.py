import json

import pytest

from lmadapter import (
    AdapterError,
    Row,
    export_for_external,
    load_bundle_rows,
    read_exported,
)


def _jsonl(path):
    return [json.loads(line)
            for line in path.read_text(encoding="utf-8").splitlines()]


class TestProjection:
    def test_rows_carry_no_feature_stamps(self, bundles):
        _, rows = load_bundle_rows(str(bundles["ambiguous"]))
        assert Row._fields == ("uid", "text", "label")
        sample = rows["training"][0]
        assert not hasattr(sample, "l_l") and not hasattr(sample, "l_s")

    def test_withheld_pool_is_not_loaded(self, bundles):
        _, rows = load_bundle_rows(str(bundles["ambiguous"]))
        assert set(rows) == {"training", "test", "auxiliary"}


class TestExport:
    def test_counts_preserved_per_condition(self, bundles, tmp_path):
        written = export_for_external(str(bundles["control"]),
                                      str(tmp_path / "exported"))
        manifest = json.loads(
            (bundles["control"] / "manifest.json").read_text())
        assert set(written) == {"control_train", "control_eval_in",
                                "control_eval_out"}
        for condition, path in written.items():
            rows = read_exported(path)
            assert len(rows) == manifest["counts"][condition], condition

    def test_round_trip_preserves_uids_in_order(self, bundles, tmp_path):
        written = export_for_external(str(bundles["ambiguous"]),
                                      str(tmp_path / "exported"))
        _, rows = load_bundle_rows(str(bundles["ambiguous"]))
        for condition, path in written.items():
            exported = [r.uid for r in read_exported(path)]
            assert exported == [r.uid for r in rows[condition]]

    def test_header_is_exactly_uid_text_label(self, bundles, tmp_path):
        written = export_for_external(str(bundles["control"]),
                                      str(tmp_path / "exported"))
        for path in written.values():
            with open(path, encoding="utf-8") as handle:
                assert handle.readline().strip() == "uid,text,label"

    def test_swapped_training_rows_keep_linguistic_label(self, bundles,
                                                         tmp_path):
        task_dir = bundles["inoculated"]
        written = export_for_external(str(task_dir), str(tmp_path / "x"))
        manifest = json.loads((task_dir / "manifest.json").read_text())
        assert manifest["inoculated_count"] == 4  # half_up(0.1 * 40)
        raw_train = _jsonl(
            task_dir / manifest["condition_files"]["training"])
        swapped = {r["uid"]: r for r in raw_train
                   if r["condition"] == "inoculating"}
        assert len(swapped) == 4
        exported = {r.uid: r for r in read_exported(written["training"])}
        assert len(exported) == len(raw_train)
        for uid, record in swapped.items():
            assert record["l_l"] == record["label"] != record["l_s"]
            assert exported[uid].label == record["l_l"]

    def test_missing_bundle_has_remediation_hint(self, tmp_path):
        with pytest.raises(AdapterError, match="generate the bundle"):
            export_for_external(str(tmp_path / "missing"), str(tmp_path))

    def test_bad_header_rejected_on_import(self, tmp_path):
        path = tmp_path / "rows.csv"
        path.write_text("uid,sentence,label\n", encoding="utf-8")
        with pytest.raises(AdapterError, match="header"):
            read_exported(str(path))
