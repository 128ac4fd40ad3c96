import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from visa_agent.errors import SchemaError
from visa_agent.evaluation import (
    OutcomeRow,
    STAGES,
    build_report,
    canonical_params,
    category_sr,
    cross_category_sr,
    dataset_distribution,
    emit_report,
    load_dataset,
    load_outcome_rows,
    normalize_text,
    rows_for,
    stage_accuracy,
    success_rate,
    validate_report,
    wilson_ci,
)
from visa_agent import resources

from conftest import DATA

GOLDEN = str(DATA / "stage_outcomes_35.json")


def make_row(i=0, ic=0, **overrides) -> OutcomeRow:
    base = {s: 1 for s in STAGES}
    base.update(overrides)
    base["ad"] = int(base["af"] and base["ap"])
    return OutcomeRow(id=f"r{i}", ic=ic, **base)


outcome_rows = st.builds(
    lambda stt, cc, cr, af, ap, of, ic: OutcomeRow(
        id="x", stt=stt, cc=cc, cr=cr, af=af, ap=ap, ad=int(af and ap), of=of, ic=ic
    ),
    st.integers(0, 1), st.integers(0, 1), st.integers(0, 1),
    st.integers(0, 1), st.integers(0, 1), st.integers(0, 1),
    st.integers(0, 6),
)


class TestNormalization:
    def test_case_and_punctuation_insensitive(self):
        assert normalize_text("Can you move CT forward?") == normalize_text(
            "can you move ct forward"
        )

    def test_whitespace_collapsed(self):
        assert normalize_text("  a   b ") == "a b"

    def test_none_is_empty(self):
        assert normalize_text(None) == ""


class TestCanonicalParams:
    def test_empty_forms_are_equal(self):
        assert canonical_params(None) == canonical_params({}) == canonical_params(
            {"moves": {}, "main_view": None, "reset": False, "fields": []}
        )

    def test_string_lists_are_order_insensitive(self):
        assert canonical_params({"add": ["RUL", "LLL"]}) == canonical_params(
            {"add": ["LLL", "RUL"]}
        )

    def test_nested_moves_compare_structurally(self):
        a = {"moves": {"coronal": {"rel": 100}, "axial": {"to": "middle"}}}
        b = {"moves": {"axial": {"to": "middle"}, "coronal": {"rel": 100}}}
        assert canonical_params(a) == canonical_params(b)

    def test_true_flags_survive(self):
        assert canonical_params({"reset": True}) != canonical_params({})


class TestOutcomeRow:
    def test_ad_consistency_enforced(self):
        with pytest.raises(ValueError):
            OutcomeRow(id="x", stt=1, cc=1, cr=1, af=1, ap=0, ad=1, of=1, ic=0)

    def test_binary_domain_enforced(self):
        with pytest.raises(ValueError):
            OutcomeRow(id="x", stt=2, cc=1, cr=1, af=1, ap=1, ad=1, of=1, ic=0)


class TestDatasetLoader:
    def test_bundled_dataset_counts(self, dataset):
        dist = dataset_distribution(dataset)
        assert dist["agent"] == {"ir": 44, "iv": 81, "ar": 115}
        assert dist["structure"] == {"single": 225, "composite": 15}
        assert dist["ctype"] == {"explicit": 80, "implicit": 80, "nlq": 80}
        assert dist["expression"] == {"baseline": 145, "abbreviation": 15, "paraphrase": 80}

    def test_malformed_category_reports_row(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        row = {
            "id": "x-1", "agent_gold": "ir", "raw_text": "a", "gold_revised": "a",
            "structure": "single", "ctype": "imperative", "expression": "baseline",
            "gold_action": "SHOW", "gold_params": {},
        }
        path.write_text(json.dumps(row) + "\n")
        with pytest.raises(SchemaError) as err:
            load_dataset(str(path))
        assert "row 1" in str(err.value)

    def test_missing_field_reports_row(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": "x-1"}\n')
        with pytest.raises(SchemaError):
            load_dataset(str(path))

    def test_duplicate_ids_rejected(self, tmp_path):
        row = {
            "id": "x-1", "agent_gold": "ir", "raw_text": "a", "gold_revised": "a",
            "structure": "single", "ctype": "explicit", "expression": "baseline",
            "gold_action": "SHOW", "gold_params": {},
        }
        path = tmp_path / "dup.jsonl"
        path.write_text(json.dumps(row) + "\n" + json.dumps(row) + "\n")
        with pytest.raises(SchemaError):
            load_dataset(str(path))

    def test_every_revised_command_passes_backstop_vocabulary(self, dataset):
        from visa_agent.stages import mentions_known_vocabulary

        vocab = resources.known_vocabulary()
        for rec in dataset:
            assert mentions_known_vocabulary(rec.gold_revised, vocab), rec.id

    def test_stt_error_annotations_exist(self, dataset):
        assert sum(rec.has_stt_error for rec in dataset) >= 10

    def test_bundled_dataset_matches_its_generator(self, dataset):
        # Regenerating from tools/make_dataset.py must reproduce the
        # committed records, guarding against silent dataset drift.
        import importlib.util
        from pathlib import Path

        tool_path = Path(__file__).parent.parent / "tools" / "make_dataset.py"
        spec = importlib.util.spec_from_file_location("make_dataset", tool_path)
        module = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(module)
        regenerated = module.build_records()
        assert len(regenerated) == len(dataset)
        for rec, raw in zip(dataset, regenerated):
            assert rec.id == raw["id"]
            assert rec.raw_text == raw["raw_text"]
            assert rec.gold_revised == raw["gold_revised"]
            assert rec.gold_action == raw["gold_action"]
            assert rec.gold_params == raw["gold_params"]


class TestGoldenTally:
    """The committed 35-row fixture must reproduce the hand tally exactly."""

    def test_row_count(self, golden_rows_raw):
        assert len(golden_rows_raw) == 35

    def test_success_rates(self, golden_expected):
        rows = load_outcome_rows(GOLDEN)
        n = golden_expected["n"]
        assert len(rows) == n
        assert success_rate(rows, "strict") == golden_expected["strict_successes"] / n
        assert success_rate(rows, "single_pass") == golden_expected["single_pass_successes"] / n
        assert success_rate(rows, "multi_pass") == golden_expected["multi_pass_successes"] / n

    def test_ir_stt_accuracy(self, golden_expected):
        rows = rows_for(load_outcome_rows(GOLDEN), agent="ir")
        assert len(rows) == golden_expected["ir_rows"]
        assert stage_accuracy(rows, "stt") == pytest.approx(
            golden_expected["ir_stt_successes"] / golden_expected["ir_rows"]
        )

    def test_of_column_is_perfect(self, golden_expected):
        rows = load_outcome_rows(GOLDEN)
        assert stage_accuracy(rows, "of") == golden_expected["of_successes"] / 35

    def test_composite_rows_all_multi_pass(self, golden_expected):
        rows = load_outcome_rows(GOLDEN)
        table = category_sr(rows, None, "structure")
        composite = rows_for(rows, structure="composite")
        assert len(composite) == golden_expected["composite_rows"]
        assert table["composite"] == golden_expected[
            "composite_multi_pass_successes"
        ] / golden_expected["composite_rows"]

    def test_single_explicit_cross_cell(self, golden_expected):
        rows = load_outcome_rows(GOLDEN)
        table = cross_category_sr(rows, None, ("structure", "ctype"))
        cell = rows_for(rows, structure="single", ctype="explicit")
        assert len(cell) == golden_expected["single_explicit_rows"]
        assert table[("single", "explicit")] == golden_expected[
            "single_explicit_multi_pass_successes"
        ] / golden_expected["single_explicit_rows"]


class TestStageAccuracy:
    def test_all_ones(self):
        assert stage_accuracy([make_row(i) for i in range(4)], "cc") == 1.0

    def test_mean_of_binary_outcomes(self):
        rows = [make_row(0), make_row(1, stt=0), make_row(2, stt=0)]
        assert stage_accuracy(rows, "stt") == pytest.approx(1 / 3)

    def test_empty_rows_rejected(self):
        with pytest.raises(ValueError):
            stage_accuracy([], "stt")

    def test_unknown_stage_rejected(self):
        with pytest.raises(ValueError):
            stage_accuracy([make_row()], "vad")


class TestSuccessRates:
    def test_strict_needs_everything(self):
        assert success_rate([make_row(stt=0)], "strict") == 0.0
        assert success_rate([make_row()], "strict") == 1.0

    def test_single_pass_forgives_early_stages(self):
        assert success_rate([make_row(stt=0, cc=1)], "single_pass") == 1.0
        assert success_rate([make_row(ic=1)], "single_pass") == 0.0

    def test_multi_pass_allows_up_to_three_cycles(self):
        assert success_rate([make_row(ic=3)], "multi_pass") == 1.0
        assert success_rate([make_row(ic=4)], "multi_pass") == 0.0

    def test_unknown_condition(self):
        with pytest.raises(ValueError):
            success_rate([make_row()], "lenient")

    @given(st.lists(outcome_rows, min_size=1, max_size=40))
    def test_condition_ordering(self, rows):
        strict = success_rate(rows, "strict")
        single = success_rate(rows, "single_pass")
        multi = success_rate(rows, "multi_pass")
        assert strict <= single <= multi


class TestCategories:
    def test_degenerate_dimension_equals_overall(self):
        rows = [make_row(i, af=i % 2, ap=1) for i in range(6)]
        for row in rows:
            row.meta["structure"] = "single"
        table = category_sr(rows, None, "structure")
        assert table == {"single": success_rate(rows, "multi_pass")}

    def test_unknown_dimension_rejected(self):
        with pytest.raises(ValueError):
            category_sr([make_row()], None, "modality")

    def test_empty_categories_absent(self):
        rows = [make_row(0)]
        rows[0].meta["ctype"] = "nlq"
        assert set(category_sr(rows, None, "ctype")) == {"nlq"}

    def test_weighted_average_equals_overall(self):
        rng = random.Random(5)
        rows = []
        for i in range(60):
            row = make_row(i, af=rng.randint(0, 1), ap=rng.randint(0, 1), ic=rng.randint(0, 4))
            row.meta["expression"] = rng.choice(["baseline", "abbreviation", "paraphrase"])
            rows.append(row)
        table = category_sr(rows, None, "expression")
        counts = {c: len(rows_for(rows, expression=c)) for c in table}
        weighted = sum(table[c] * counts[c] for c in table) / len(rows)
        assert weighted == pytest.approx(success_rate(rows, "multi_pass"))

    def test_cross_partition_covers_rows_exactly_once(self):
        rng = random.Random(6)
        rows = []
        for i in range(50):
            row = make_row(i, af=rng.randint(0, 1), ap=1)
            row.meta["structure"] = rng.choice(["single", "composite"])
            row.meta["ctype"] = rng.choice(["explicit", "implicit", "nlq"])
            rows.append(row)
        table = cross_category_sr(rows, None, ("structure", "ctype"))
        total = sum(len(rows_for(rows, structure=a, ctype=b)) for a, b in table)
        assert total == len(rows)

    def test_join_through_dataset_records(self, dataset):
        rows = [make_row(0)]
        rows[0].id = dataset[0].id
        rows[0].meta = {}
        table = category_sr(rows, dataset, "agent")
        assert set(table) == {dataset[0].agent_gold}


class TestWilson:
    def test_32_of_35(self):
        lo, hi = wilson_ci(32, 35, 0.95)
        assert lo == pytest.approx(0.7762, abs=0.005)
        assert hi == pytest.approx(0.9704, abs=0.005)

    def test_zero_successes_clamps_low(self):
        lo, hi = wilson_ci(0, 10, 0.95)
        assert lo == 0.0
        assert hi > 0.0

    def test_all_successes_clamps_high(self):
        lo, hi = wilson_ci(10, 10, 0.95)
        assert hi == 1.0
        assert lo < 1.0

    def test_interval_contains_point_estimate(self):
        for successes, n in ((1, 7), (3, 9), (20, 21)):
            lo, hi = wilson_ci(successes, n, 0.95)
            assert lo <= successes / n <= hi

    def test_matches_independent_implementation(self):
        from statsmodels.stats.proportion import proportion_confint

        for successes, n in ((32, 35), (5, 40), (0, 12), (12, 12)):
            lo, hi = wilson_ci(successes, n, 0.95)
            ref_lo, ref_hi = proportion_confint(successes, n, alpha=0.05, method="wilson")
            assert lo == pytest.approx(ref_lo, abs=1e-9)
            assert hi == pytest.approx(ref_hi, abs=1e-9)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            wilson_ci(5, 0)
        with pytest.raises(ValueError):
            wilson_ci(6, 5)


class TestReport:
    def test_totals_and_round_trip(self, tmp_path):
        rows = load_outcome_rows(GOLDEN)
        path = tmp_path / "report.json"
        report = emit_report(rows, None, "json", str(path))
        assert report["n"] == 35
        loaded = json.loads(path.read_text())
        assert loaded == report
        validate_report(loaded)

    def test_csv_column_set_is_fixed(self, tmp_path):
        rows = load_outcome_rows(GOLDEN)
        path = tmp_path / "report.csv"
        emit_report(rows, None, "csv", str(path))
        header = path.read_text().splitlines()[0]
        assert header == "section,name,value,lo,hi,n"

    def test_path_flows_count_every_row(self):
        rows = load_outcome_rows(GOLDEN)
        report = build_report(rows)
        for counts in report["path_flows"].values():
            assert sum(counts.values()) == 35

    def test_validate_rejects_malformed(self):
        rows = load_outcome_rows(GOLDEN)
        report = build_report(rows)
        broken = dict(report)
        broken.pop("path_flows")
        with pytest.raises(SchemaError):
            validate_report(broken)
