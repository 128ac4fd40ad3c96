"""Dataset loading, stage-outcome scoring, and workflow success metrics.

Each command is scored as seven binary stage outcomes plus an invalid-cycle
count; accuracy is a per-stage mean, and the workflow-level success rates are
strict (everything right, no retries), single-pass (right final decision and
order, no retries), and multi-pass (same, allowing up to three retries).
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Any, Iterable

from .errors import SchemaError
from .model import AGENT_CODES, FunctionId
from .orchestrator import WorkflowTrace, trace_matches_reference

STAGES = ("stt", "cc", "cr", "af", "ap", "ad", "of")
CONDITIONS = ("strict", "single_pass", "multi_pass")
MULTI_PASS_IC_LIMIT = 3

STRUCTURES = ("single", "composite")
CTYPES = ("explicit", "implicit", "nlq")
EXPRESSIONS = ("baseline", "abbreviation", "paraphrase")
AGENTS = ("ir", "iv", "ar")

DIMENSIONS: dict[str, tuple[str, ...]] = {
    "agent": AGENTS,
    "structure": STRUCTURES,
    "ctype": CTYPES,
    "expression": EXPRESSIONS,
}

_WS_RE = re.compile(r"\s+")
_PUNCT_RE = re.compile(r"[^\w\s]")


@dataclass(frozen=True)
class CommandRecord:
    """One dataset command with its gold annotations."""

    id: str
    agent_gold: str
    raw_text: str
    gold_revised: str
    structure: str
    ctype: str
    expression: str
    gold_action: str
    gold_params: dict[str, Any]
    speaker: str | None = None

    @property
    def gold_agent(self) -> FunctionId:
        return AGENT_CODES[self.agent_gold]

    @property
    def has_stt_error(self) -> bool:
        return normalize_text(self.raw_text) != normalize_text(self.gold_revised)


@dataclass
class OutcomeRow:
    """Binary stage outcomes and invalid-cycle count for one command."""

    id: str
    stt: int
    cc: int
    cr: int
    af: int
    ap: int
    ad: int
    of: int
    ic: int
    meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for stage in STAGES:
            v = getattr(self, stage)
            if v not in (0, 1):
                raise ValueError(f"{stage} outcome must be 0 or 1, got {v!r}")
        if self.ad != (self.af and self.ap):
            raise ValueError("ad must equal af AND ap")
        if self.ic < 0:
            raise ValueError("ic must be non-negative")

    def outcome(self, stage: str) -> int:
        if stage not in STAGES:
            raise ValueError(f"unknown stage {stage!r}")
        return getattr(self, stage)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"id": self.id}
        out.update({s: getattr(self, s) for s in STAGES})
        out["ic"] = self.ic
        if self.meta:
            out["meta"] = dict(self.meta)
        return out

    @classmethod
    def from_dict(cls, obj: dict[str, Any], id_: str | None = None) -> "OutcomeRow":
        meta = {
            k: obj[k]
            for k in ("agent", "command", "structure", "ctype", "expression")
            if k in obj
        }
        meta.update(obj.get("meta", {}))
        return cls(
            id=id_ or str(obj.get("id", obj.get("command", ""))),
            **{s: int(obj[s]) for s in STAGES},
            ic=int(obj["ic"]),
            meta=meta,
        )


def normalize_text(text: str | None) -> str:
    """Casefold, drop punctuation, collapse whitespace."""
    if text is None:
        return ""
    out = _PUNCT_RE.sub(" ", text.casefold())
    return _WS_RE.sub(" ", out).strip()


def canonical_params(params: dict[str, Any] | None) -> dict[str, Any]:
    """Normalize a parameter payload for equality comparison.

    Empty containers, None, and false flags are dropped recursively so that
    "no parameters" compares equal regardless of how it was spelled.
    """
    def clean(value: Any) -> Any:
        if isinstance(value, dict):
            out = {k: clean(v) for k, v in sorted(value.items())}
            return {k: v for k, v in out.items() if v not in (None, {}, []) and v is not False}
        if isinstance(value, (list, tuple)):
            cleaned = [clean(v) for v in value]
            if all(isinstance(v, str) for v in cleaned):
                return sorted(cleaned)  # label lists are sets in spirit
            return cleaned
        return value

    if params is None:
        return {}
    cleaned = clean(dict(params))
    return cleaned if isinstance(cleaned, dict) else {}


def load_dataset(path: str) -> list[CommandRecord]:
    """Read a JSON-lines command dataset, validating schema and categories."""
    records: list[CommandRecord] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for row_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc}", row=row_no) from exc
            records.append(_parse_record(obj, row_no, seen_ids))
    return records


def _parse_record(obj: dict[str, Any], row_no: int, seen_ids: set[str]) -> CommandRecord:
    required = (
        "id", "agent_gold", "raw_text", "gold_revised",
        "structure", "ctype", "expression", "gold_action", "gold_params",
    )
    for key in required:
        if key not in obj:
            raise SchemaError(f"missing field {key!r}", row=row_no)
    if obj["agent_gold"] not in AGENTS:
        raise SchemaError(f"agent_gold must be one of {AGENTS}, got {obj['agent_gold']!r}", row=row_no)
    if obj["structure"] not in STRUCTURES:
        raise SchemaError(f"structure must be one of {STRUCTURES}, got {obj['structure']!r}", row=row_no)
    if obj["ctype"] not in CTYPES:
        raise SchemaError(f"ctype must be one of {CTYPES}, got {obj['ctype']!r}", row=row_no)
    if obj["expression"] not in EXPRESSIONS:
        raise SchemaError(f"expression must be one of {EXPRESSIONS}, got {obj['expression']!r}", row=row_no)
    if not isinstance(obj["gold_params"], dict):
        raise SchemaError("gold_params must be an object", row=row_no)
    if not obj["raw_text"] or not obj["gold_revised"]:
        raise SchemaError("raw_text and gold_revised must be nonempty", row=row_no)
    if obj["id"] in seen_ids:
        raise SchemaError(f"duplicate id {obj['id']!r}", row=row_no)
    seen_ids.add(obj["id"])
    return CommandRecord(
        id=str(obj["id"]),
        agent_gold=obj["agent_gold"],
        raw_text=obj["raw_text"],
        gold_revised=obj["gold_revised"],
        structure=obj["structure"],
        ctype=obj["ctype"],
        expression=obj["expression"],
        gold_action=str(obj["gold_action"]),
        gold_params=obj["gold_params"],
        speaker=obj.get("speaker"),
    )


def dataset_distribution(records: list[CommandRecord]) -> dict[str, dict[str, int]]:
    dist: dict[str, dict[str, int]] = {}
    for dim, values in DIMENSIONS.items():
        counts = {v: 0 for v in values}
        for rec in records:
            counts[getattr(rec, "agent_gold" if dim == "agent" else dim)] += 1
        dist[dim] = counts
    return dist


@dataclass
class RunOutputs:
    """What the engine produced for one command, as captured by the runner."""

    transcript_text: str | None = None
    revised: str | None = None
    valid: bool | None = None
    agent: FunctionId | None = None
    action: str | None = None
    params: dict[str, Any] | None = None


def score_command(trace: WorkflowTrace, outputs: RunOutputs, record: CommandRecord) -> OutcomeRow:
    """Binary outcomes for every stage of one command's run."""
    gold_norm = normalize_text(record.gold_revised)
    stt = int(normalize_text(outputs.transcript_text) == gold_norm)
    cc = int(outputs.revised is not None and normalize_text(outputs.revised) == gold_norm)
    cr = int(outputs.agent == record.gold_agent)
    af = int(outputs.action == record.gold_action)
    ap = int(
        outputs.action is not None
        and canonical_params(outputs.params) == canonical_params(record.gold_params)
    )
    ad = int(af and ap)
    of = int(trace_matches_reference(trace))
    return OutcomeRow(
        id=record.id,
        stt=stt, cc=cc, cr=cr, af=af, ap=ap, ad=ad, of=of,
        ic=trace.invalid_cycles,
        meta={
            "agent": record.agent_gold,
            "structure": record.structure,
            "ctype": record.ctype,
            "expression": record.expression,
        },
    )


def stage_accuracy(rows: list[OutcomeRow], stage: str) -> float:
    if not rows:
        raise ValueError("no rows to aggregate")
    return sum(r.outcome(stage) for r in rows) / len(rows)


def _meets(row: OutcomeRow, condition: str) -> bool:
    if condition == "strict":
        return all(row.outcome(s) == 1 for s in STAGES) and row.ic == 0
    if condition == "single_pass":
        return row.ad == 1 and row.of == 1 and row.ic == 0
    if condition == "multi_pass":
        return row.ad == 1 and row.of == 1 and row.ic <= MULTI_PASS_IC_LIMIT
    raise ValueError(f"unknown condition {condition!r}")


def success_rate(rows: list[OutcomeRow], condition: str) -> float:
    if not rows:
        raise ValueError("no rows to aggregate")
    return sum(_meets(r, condition) for r in rows) / len(rows)


def _row_category(row: OutcomeRow, records: dict[str, CommandRecord] | None, dim: str) -> str:
    key = "agent" if dim == "agent" else dim
    if records is not None and row.id in records:
        rec = records[row.id]
        return rec.agent_gold if dim == "agent" else getattr(rec, dim)
    if key in row.meta:
        return row.meta[key]
    raise ValueError(f"row {row.id!r} has no {dim!r} category and no matching record")


def category_sr(
    rows: list[OutcomeRow],
    dataset: list[CommandRecord] | None,
    dimension: str,
    condition: str = "multi_pass",
) -> dict[str, float]:
    """Success rate per category value; empty categories are absent."""
    if dimension not in DIMENSIONS:
        raise ValueError(f"unknown dimension {dimension!r}; expected one of {sorted(DIMENSIONS)}")
    records = {r.id: r for r in dataset} if dataset else None
    buckets: dict[str, list[OutcomeRow]] = {}
    for row in rows:
        buckets.setdefault(_row_category(row, records, dimension), []).append(row)
    return {cat: success_rate(bucket, condition) for cat, bucket in sorted(buckets.items())}


def cross_category_sr(
    rows: list[OutcomeRow],
    dataset: list[CommandRecord] | None,
    dims: tuple[str, str],
    condition: str = "multi_pass",
) -> dict[tuple[str, str], float]:
    """Success rate over the product partition of two category dimensions."""
    d1, d2 = dims
    for d in dims:
        if d not in DIMENSIONS:
            raise ValueError(f"unknown dimension {d!r}")
    records = {r.id: r for r in dataset} if dataset else None
    buckets: dict[tuple[str, str], list[OutcomeRow]] = {}
    for row in rows:
        key = (_row_category(row, records, d1), _row_category(row, records, d2))
        buckets.setdefault(key, []).append(row)
    return {key: success_rate(bucket, condition) for key, bucket in sorted(buckets.items())}


def wilson_ci(successes: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion, clamped to [0, 1]."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= successes <= n:
        raise ValueError("successes must lie in [0, n]")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    z = NormalDist().inv_cdf((1.0 + level) / 2.0)
    p = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2.0 * n)) / denom
    half = (z / denom) * ((p * (1.0 - p) / n + z2 / (4.0 * n * n)) ** 0.5)
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == n else min(1.0, center + half)
    return (lo, hi)


PATH_FLOW_PAIRS = (("stt", "cc"), ("cc", "cr"), ("cr", "ad"), ("ad", "of"))


def path_flow_counts(rows: list[OutcomeRow]) -> dict[str, dict[str, int]]:
    """Outcome transitions between consecutive stages (recovery/failure paths)."""
    flows: dict[str, dict[str, int]] = {}
    for a, b in PATH_FLOW_PAIRS:
        counts = {"0->0": 0, "0->1": 0, "1->0": 0, "1->1": 0}
        for row in rows:
            counts[f"{row.outcome(a)}->{row.outcome(b)}"] += 1
        flows[f"{a}->{b}"] = counts
    return flows


def build_report(
    rows: list[OutcomeRow],
    dataset: list[CommandRecord] | None = None,
    level: float = 0.95,
) -> dict[str, Any]:
    """Full metric report: stage accuracies, success rates, categories, flows."""
    n = len(rows)
    if n == 0:
        raise ValueError("cannot report on zero rows")

    def with_ci(successes: int) -> dict[str, float]:
        lo, hi = wilson_ci(successes, n, level)
        return {"rate": successes / n, "lo": lo, "hi": hi, "successes": successes}

    stages = {s: with_ci(sum(r.outcome(s) for r in rows)) for s in STAGES}
    srs = {c: with_ci(sum(_meets(r, c) for r in rows)) for c in CONDITIONS}
    categories = {
        dim: category_sr(rows, dataset, dim) for dim in ("agent", "structure", "ctype", "expression")
    }
    cross = {
        "structure_x_ctype": {
            f"{a}|{b}": rate
            for (a, b), rate in cross_category_sr(rows, dataset, ("structure", "ctype")).items()
        },
        "ctype_x_expression": {
            f"{a}|{b}": rate
            for (a, b), rate in cross_category_sr(rows, dataset, ("ctype", "expression")).items()
        },
    }
    return {
        "n": n,
        "confidence_level": level,
        "stage_accuracy": stages,
        "success_rate": srs,
        "category_sr_multi_pass": categories,
        "cross_category_sr_multi_pass": cross,
        "path_flows": path_flow_counts(rows),
        "rows": [r.to_dict() for r in rows],
    }


def validate_report(report: dict[str, Any]) -> None:
    """Raise SchemaError unless the report has the documented shape."""
    for key in ("n", "confidence_level", "stage_accuracy", "success_rate",
                "category_sr_multi_pass", "cross_category_sr_multi_pass",
                "path_flows", "rows"):
        if key not in report:
            raise SchemaError(f"report missing key {key!r}")
    if report["n"] != len(report["rows"]):
        raise SchemaError("report n does not match row count")
    for stage in STAGES:
        entry = report["stage_accuracy"].get(stage)
        if entry is None:
            raise SchemaError(f"stage_accuracy missing {stage!r}")
        if not (0.0 <= entry["lo"] <= entry["rate"] <= entry["hi"] <= 1.0):
            raise SchemaError(f"stage_accuracy {stage} interval malformed")
    for cond in CONDITIONS:
        entry = report["success_rate"].get(cond)
        if entry is None:
            raise SchemaError(f"success_rate missing {cond!r}")
        if not (0.0 <= entry["lo"] <= entry["rate"] <= entry["hi"] <= 1.0):
            raise SchemaError(f"success_rate {cond} interval malformed")


# Fixed CSV column set, one row per (section, name) metric.
CSV_COLUMNS = ("section", "name", "value", "lo", "hi", "n")


def emit_report(
    rows: list[OutcomeRow],
    dataset: list[CommandRecord] | None,
    fmt: str,
    path: str,
    level: float = 0.95,
) -> dict[str, Any]:
    """Write the report as JSON or CSV and return the report dict."""
    report = build_report(rows, dataset, level)
    if fmt == "json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
    elif fmt == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            n = report["n"]
            for stage, entry in report["stage_accuracy"].items():
                writer.writerow(["stage_accuracy", stage, entry["rate"], entry["lo"], entry["hi"], n])
            for cond, entry in report["success_rate"].items():
                writer.writerow(["success_rate", cond, entry["rate"], entry["lo"], entry["hi"], n])
            for dim, table in report["category_sr_multi_pass"].items():
                for cat, rate in table.items():
                    writer.writerow([f"category_sr:{dim}", cat, rate, "", "", n])
            for pair, table in report["cross_category_sr_multi_pass"].items():
                for cats, rate in table.items():
                    writer.writerow([f"cross_sr:{pair}", cats, rate, "", "", n])
            for pair, counts in report["path_flows"].items():
                for transition, count in counts.items():
                    writer.writerow([f"path_flow:{pair}", transition, count, "", "", n])
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return report


def load_outcome_rows(path: str) -> list[OutcomeRow]:
    """Load committed outcome rows (JSON list) such as the golden fixture."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    rows = []
    for i, obj in enumerate(data):
        rows.append(OutcomeRow.from_dict(obj, id_=str(obj.get("id", obj.get("command", i)))))
    return rows


def rows_for(rows: Iterable[OutcomeRow], **meta: str) -> list[OutcomeRow]:
    """Filter rows by meta fields (agent, structure, ...)."""
    out = []
    for row in rows:
        if all(row.meta.get(k) == v for k, v in meta.items()):
            out.append(row)
    return out
