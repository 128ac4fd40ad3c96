"""Loaders for the bundled fixtures (manifests, record, rules, dataset)."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources as importlib_resources
from typing import Any

from .agents.ar import StructureManifest
from .agents.ir import ColumnManifest
from .agents.iv import DIRECTION_LEXICON, PLANES

_PKG = "visa_agent.data"


def _read_text(name: str) -> str:
    return importlib_resources.files(_PKG).joinpath(name).read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def column_manifest() -> ColumnManifest:
    return ColumnManifest.from_dict(json.loads(_read_text("column_manifest.json")))


@lru_cache(maxsize=None)
def patient_record() -> dict[str, Any]:
    record = json.loads(_read_text("patient_record.json"))
    record.pop("_comment", None)
    return record


@lru_cache(maxsize=None)
def structure_manifest() -> StructureManifest:
    return StructureManifest.from_dict(json.loads(_read_text("structure_manifest.json")))


@lru_cache(maxsize=None)
def correction_rules() -> dict[str, str]:
    return json.loads(_read_text("correction_rules.json"))


def dataset_path() -> str:
    return str(importlib_resources.files(_PKG).joinpath("commands.jsonl"))


# Extra action verbs and phrases a supported command may lean on; combined
# with manifest-derived terms for the validation backstop.
ACTION_TERMS: tuple[str, ...] = (
    "show", "display", "hide", "remove", "move", "zoom", "rotate", "reset",
    "initialize", "select", "turn", "add", "erase", "view", "look", "see",
    "step", "slide", "walk", "jump", "push", "pull", "bring", "take", "go",
    "minimize", "enlarge", "focus", "activate", "load", "open", "close",
    "clear", "spin", "tilt", "tip", "face", "start over", "whirl",
)

DIRECTION_TERMS: tuple[str, ...] = tuple(DIRECTION_LEXICON) + (
    "upward", "downward", "middle", "center", "maximum", "minimum", "max",
    "min", "closer", "nearer", "smaller", "back", "behind", "higher", "lower",
)

VIEW_TERMS: tuple[str, ...] = (
    "anterior", "posterior", "superior", "inferior", "surgical", "surgeon",
    "bird's eye", "operating table",
)

STRUCTURE_TERMS: tuple[str, ...] = (
    "lll", "lul", "rll", "rml", "rul", "nodule", "nodules", "lobe", "lung",
    "lungs", "trachea", "bronchia", "airway", "model", "models", "3d",
    "recon", "reconstruction", "anatomical", "anatomy", "structures",
)

PLANE_TERMS: tuple[str, ...] = PLANES + ("ct", "slice", "slices", "plane", "views", "sag", "cor", "axi")


@lru_cache(maxsize=None)
def known_vocabulary() -> tuple[str, ...]:
    """Every term the validation backstop accepts as a supported topic."""
    manifest = column_manifest()
    terms: list[str] = []
    for col in manifest.columns:
        terms.append(col.id)
        terms.extend(col.label.lower().replace("/", " ").split())
    terms.extend(manifest.aliases.keys())
    terms += [
        "patient", "information", "info", "details", "pulmonary", "function",
        "test", "results", "capacity",
    ]
    terms.extend(ACTION_TERMS)
    terms.extend(DIRECTION_TERMS)
    terms.extend(VIEW_TERMS)
    terms.extend(STRUCTURE_TERMS)
    terms.extend(PLANE_TERMS)
    seen: list[str] = []
    for t in terms:
        t = t.lower()
        if t and t not in seen:
            seen.append(t)
    return tuple(seen)
