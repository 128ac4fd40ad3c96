"""Command line entry points: batch evaluation, fixture generation, serving."""

from __future__ import annotations

import json
import sys
from collections import Counter
from pathlib import Path

import click

from . import resources
from .errors import SchemaError, VisaError
from .evaluation import emit_report, load_dataset, stage_accuracy, success_rate
from .llm import LiveBackend, MockBackend, MockScript
from .runner import evaluate_dataset
from .scripting import build_mock_script
from .session import SessionConfig


@click.group()
def main() -> None:
    """Voice-interactive surgical assistant tools."""


@main.command("eval")
@click.option("--dataset", "dataset_path", default=None, help="Command dataset (JSONL); bundled by default.")
@click.option("--backend", type=click.Choice(["mock", "live"]), default="mock")
@click.option("--mock-script", default=None, help="Mock script JSONL; derived from gold labels if omitted.")
@click.option("--out", "out_path", default="report.json", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.option("--fps", default=30, show_default=True)
@click.option("--ic-max", default=3, show_default=True)
@click.option("--llm-url", default=None, help="Chat endpoint for the live backend.")
@click.option("--llm-model", default=None, help="Model name for the live backend.")
def cli_eval(dataset_path, backend, mock_script, out_path, fmt, fps, ic_max, llm_url, llm_model) -> None:
    """Run every dataset command through the workflow and write a metric report."""
    try:
        records = load_dataset(dataset_path or resources.dataset_path())
    except (OSError, SchemaError) as exc:
        raise click.ClickException(f"cannot load dataset: {exc}") from exc

    if backend == "live":
        chat_backend = LiveBackend(url=llm_url, model=llm_model)
    elif mock_script:
        try:
            chat_backend = MockBackend(MockScript.from_jsonl(mock_script))
        except OSError as exc:
            raise click.ClickException(f"cannot load mock script: {exc}") from exc
    else:
        chat_backend = MockBackend(build_mock_script(records))

    try:
        run = evaluate_dataset(records, chat_backend, SessionConfig(fps=fps, ic_max=ic_max))
    except VisaError as exc:
        raise click.ClickException(f"evaluation aborted: {exc}") from exc

    report = emit_report(run.rows, records, fmt, out_path)
    click.echo(f"N={report['n']}  elapsed={run.elapsed_s:.2f}s")
    for stage in ("stt", "cc", "cr", "ad", "of"):
        click.echo(f"  {stage:>3} accuracy: {stage_accuracy(run.rows, stage):.3f}")
    for cond in ("strict", "single_pass", "multi_pass"):
        click.echo(f"  SR {cond}: {success_rate(run.rows, cond):.3f}")
    click.echo(f"report written to {out_path}")


@main.group()
def gen() -> None:
    """Generate synthetic fixtures."""


@gen.command("volume")
@click.option("--dims", nargs=3, type=int, default=(64, 64, 64), show_default=True)
@click.option("--axis", default=2, show_default=True, help="Gradient axis (0=x, 1=y, 2=z).")
@click.option("--out", "out_path", default="volume.ctvol", show_default=True)
def gen_volume(dims, axis, out_path) -> None:
    """Write a synthetic gradient volume in the single-file header+blob format."""
    from .agents.iv import Volume

    vol = Volume.gradient(tuple(dims), axis=axis, materialize=True)
    vol.save(out_path)
    click.echo(f"wrote {out_path} ({dims[0]}x{dims[1]}x{dims[2]})")


@gen.command("manifest")
@click.option("--out", "out_path", default="structure_manifest.json", show_default=True)
def gen_manifest(out_path) -> None:
    """Write the bundled 7-structure anatomy manifest."""
    manifest = resources.structure_manifest()
    payload = {
        "structures": [
            {
                "label": s.label,
                "centroid": list(s.centroid),
                "bbox_min": list(s.bbox_min),
                "bbox_max": list(s.bbox_max),
                "is_lobe": s.is_lobe,
                "contains_nodules": s.contains_nodules,
            }
            for s in manifest.structures
        ]
    }
    Path(out_path).write_text(json.dumps(payload, indent=2), encoding="utf-8")
    click.echo(f"wrote {out_path} ({len(manifest.structures)} structures)")


@gen.command("dataset-skeleton")
@click.option("--out", "out_path", default="dataset_skeleton.jsonl", show_default=True)
def gen_dataset_skeleton(out_path) -> None:
    """Write empty records matching the bundled dataset's category counts."""
    records = load_dataset(resources.dataset_path())
    with open(out_path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps({
                "id": rec.id,
                "agent_gold": rec.agent_gold,
                "raw_text": "",
                "gold_revised": "",
                "structure": rec.structure,
                "ctype": rec.ctype,
                "expression": rec.expression,
                "speaker": None,
                "gold_action": "",
                "gold_params": {},
            }) + "\n")
    counts = Counter(r.agent_gold for r in records)
    click.echo(f"wrote {out_path} ({dict(counts)})")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8765, show_default=True)
def serve(host, port) -> None:
    """Serve the HTTP session API."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
