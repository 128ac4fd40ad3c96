#!/usr/bin/env python3
"""Author the bundled 240-command dataset.

Writes src/visa_agent/data/commands.jsonl deterministically from the banks
below, then verifies the category marginals, per-command uniqueness, the
validation-backstop vocabulary, and that a gold-derived mock script builds
without conflicts.

Target marginals:
  agent       ir 44 / iv 81 / ar 115
  structure   single 225 / composite 15
  ctype       explicit 80 / implicit 80 / nlq 80
  expression  baseline 145 / abbreviation 15 / paraphrase 80
"""

from __future__ import annotations

import json
import sys
from collections import Counter
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from visa_agent import resources  # noqa: E402
from visa_agent.evaluation import load_dataset  # noqa: E402
from visa_agent.scripting import build_mock_script  # noqa: E402
from visa_agent.stages import mentions_known_vocabulary  # noqa: E402

OUT = REPO / "src" / "visa_agent" / "data" / "commands.jsonl"

CORE_FIELDS = [
    "sex_age", "height", "weight", "diagnosis", "comorbidities",
    "fev1", "fvc", "surgery", "tumor",
]

SPEAKERS = ["aria", "jenny", "guy", "christopher", "human"]


def ir_show(*fields: str) -> tuple[str, dict]:
    return "SHOW", {"fields": list(fields)}


IR_HIDE = ("HIDE", {"fields": []})
IR_CORE = ("SHOW", {"fields": list(CORE_FIELDS)})

# (ctype, expression, structure, raw, revised_or_None, action, params)
IR_BANK = [
    ("explicit", "abbreviation", "composite", "Show physical and PFT info", None,
     *ir_show("height", "weight", "fev1", "fvc")),
    ("explicit", "baseline", "composite", "Show surgery and tumor information", None,
     *ir_show("surgery", "tumor")),
    ("nlq", "baseline", "composite", "Can you show height and weight information?", None,
     *ir_show("height", "weight")),

    ("explicit", "baseline", "single", "Show patient information", None, *IR_CORE),
    ("explicit", "baseline", "single", "Display the pulmonary function test", None,
     *ir_show("fev1", "fvc")),
    ("explicit", "baseline", "single", "Show the diagnosis", None, *ir_show("diagnosis")),
    ("explicit", "baseline", "single", "Display the comorbidities", None, *ir_show("comorbidities")),
    ("explicit", "baseline", "single", "Show the surgery information", None, *ir_show("surgery")),
    ("explicit", "baseline", "single", "Display the tumor information", None, *ir_show("tumor")),
    ("explicit", "baseline", "single", "Hide patient information", None, *IR_HIDE),
    ("explicit", "baseline", "single", "Show the physical information", None,
     *ir_show("height", "weight")),
    ("explicit", "abbreviation", "single", "Display the PFT info", None, *ir_show("fev1", "fvc")),
    ("explicit", "abbreviation", "single", "Show patient info", None, *IR_CORE),
    ("explicit", "paraphrase", "single", "Pull up the patient details", None, *IR_CORE),
    ("explicit", "paraphrase", "single", "Take down the patient information", None, *IR_HIDE),
    ("explicit", "paraphrase", "single", "Bring up the lung function numbers", None,
     *ir_show("fev1", "fvc")),

    ("implicit", "baseline", "single", "Reset", None, *IR_HIDE),
    ("implicit", "baseline", "single", "Diagnosis", None, *ir_show("diagnosis")),
    ("implicit", "baseline", "single", "Comorbidities", None, *ir_show("comorbidities")),
    ("implicit", "baseline", "single", "Patient information", None, *IR_CORE),
    ("implicit", "baseline", "single", "Pulmonary function test", None, *ir_show("fev1", "fvc")),
    ("implicit", "baseline", "single", "Surgery information", None, *ir_show("surgery")),
    ("implicit", "baseline", "single", "Tumor information", None, *ir_show("tumor")),
    ("implicit", "baseline", "single", "Physical information", None, *ir_show("height", "weight")),
    ("implicit", "abbreviation", "single", "PFT results", None, *ir_show("fev1", "fvc")),
    ("implicit", "abbreviation", "single", "Patient info", None, *IR_CORE),
    ("implicit", "paraphrase", "single", "long function results", "lung function results",
     *ir_show("fev1", "fvc")),
    ("implicit", "paraphrase", "single", "Pre-existing conditions", None, *ir_show("comorbidities")),
    ("implicit", "paraphrase", "single", "Body measurements", None, *ir_show("height", "weight")),
    ("implicit", "paraphrase", "single", "Operation details", None, *ir_show("surgery")),

    ("nlq", "baseline", "single", "Can you show pulmonary function test?", None,
     *ir_show("fev1", "fvc")),
    ("nlq", "baseline", "single", "Can you show the patient information?", None, *IR_CORE),
    ("nlq", "baseline", "single", "Could you display the diagnosis?", None, *ir_show("diagnosis")),
    ("nlq", "baseline", "single", "Can you show the comorbidities?", None, *ir_show("comorbidities")),
    ("nlq", "baseline", "single", "Could you show the surgery information?", None, *ir_show("surgery")),
    ("nlq", "baseline", "single", "Can you display the tumor information?", None, *ir_show("tumor")),
    ("nlq", "baseline", "single", "Could you hide the patient information?", None, *IR_HIDE),
    ("nlq", "baseline", "single", "Can you show the physical information?", None,
     *ir_show("height", "weight")),
    ("nlq", "paraphrase", "single", "How old is the patient?", None, *ir_show("age")),
    ("nlq", "paraphrase", "single", "What's the gender?", None, *ir_show("sex")),
    ("nlq", "paraphrase", "single", "How tall is the patient?", None, *ir_show("height")),
    ("nlq", "paraphrase", "single", "What does the patient weigh?", None, *ir_show("weight")),
    ("nlq", "paraphrase", "single", "What was the diagnosis again?", None, *ir_show("diagnosis")),
    ("nlq", "paraphrase", "single", "What surgery is planned?", None, *ir_show("surgery")),
]


def mv(plane: str, **move) -> dict:
    return {"moves": {plane: move}}


IV_BANK = [
    ("explicit", "baseline", "composite", "Move to axial 230, coronal 220, sagittal 220", None,
     "SHOW_MOVE", {"moves": {"axial": {"abs": 230}, "coronal": {"abs": 220}, "sagittal": {"abs": 220}}}),
    ("explicit", "baseline", "composite", "Move axial to 100 and sagittal to 300", None,
     "SHOW_MOVE", {"moves": {"axial": {"abs": 100}, "sagittal": {"abs": 300}}}),
    ("explicit", "paraphrase", "composite", "Move axial to the middle slice and zoom in", None,
     "ZOOM_IN_MOVE", {"moves": {"axial": {"to": "middle"}}, "main_view": "axial"}),
    ("implicit", "paraphrase", "composite", "Move to 10, 20, 50", None,
     "SHOW_MOVE", {"moves": {"axial": {"abs": 10}, "coronal": {"abs": 20}, "sagittal": {"abs": 50}}}),
    ("nlq", "baseline", "composite", "Can you move axial 2 200 and coronal 2 230?",
     "Can you move axial to 200 and coronal to 230?",
     "SHOW_MOVE", {"moves": {"axial": {"abs": 200}, "coronal": {"abs": 230}}}),
    ("nlq", "baseline", "composite", "Could you move sagittal to the center slice and zoom in?", None,
     "ZOOM_IN_MOVE", {"moves": {"sagittal": {"to": "middle"}}, "main_view": "sagittal"}),

    ("explicit", "baseline", "single", "Show the city views", "Show the CT views", "SHOW_MOVE", {}),
    ("explicit", "baseline", "single", "Corona plus 100", "Coronal plus 100",
     "SHOW_MOVE", mv("coronal", rel=100)),
    ("explicit", "baseline", "single", "Sagittal minus 30", None, "SHOW_MOVE", mv("sagittal", rel=-30)),
    ("explicit", "baseline", "single", "Axial plus 50", None, "SHOW_MOVE", mv("axial", rel=50)),
    ("explicit", "baseline", "single", "Coronal minus 40", None, "SHOW_MOVE", mv("coronal", rel=-40)),
    ("explicit", "baseline", "single", "Sagittal plus 200", None, "SHOW_MOVE", mv("sagittal", rel=200)),
    ("explicit", "baseline", "single", "Axial minus 100", None, "SHOW_MOVE", mv("axial", rel=-100)),
    ("explicit", "baseline", "single", "Coronal plus 30", None, "SHOW_MOVE", mv("coronal", rel=30)),
    ("explicit", "baseline", "single", "Sagittal plus 50", None, "SHOW_MOVE", mv("sagittal", rel=50)),
    ("explicit", "baseline", "single", "Axial plus 10", None, "SHOW_MOVE", mv("axial", rel=10)),
    ("explicit", "baseline", "single", "Axial zoom in", None, "ZOOM_IN_MOVE", {"main_view": "axial"}),
    ("explicit", "baseline", "single", "Coronal zoom in", None, "ZOOM_IN_MOVE", {"main_view": "coronal"}),
    ("explicit", "baseline", "single", "Sagittal zoom in", None, "ZOOM_IN_MOVE", {"main_view": "sagittal"}),
    ("explicit", "baseline", "single", "Zoom out the CT view", None, "ZOOM_OUT", {}),
    ("explicit", "baseline", "single", "Remove the CT views", None, "REMOVE", {}),
    ("explicit", "baseline", "single", "Move coronal to the maximum", None,
     "SHOW_MOVE", mv("coronal", to="max")),
    ("explicit", "baseline", "single", "Move axial to the minimum", None,
     "SHOW_MOVE", mv("axial", to="min")),
    ("explicit", "abbreviation", "single", "Move sag plus 40", None, "SHOW_MOVE", mv("sagittal", rel=40)),
    ("explicit", "paraphrase", "single", "Minimize the axial image", None, "ZOOM_OUT", {}),
    ("explicit", "paraphrase", "single", "Slide the coronal plane forward", None,
     "SHOW_MOVE", mv("coronal", rel=10)),
    ("explicit", "paraphrase", "single", "Bring the axial view closer", None,
     "ZOOM_IN_MOVE", {"main_view": "axial"}),
    ("explicit", "paraphrase", "single", "Enlarge the coronal plane", None,
     "ZOOM_IN_MOVE", {"main_view": "coronal"}),
    ("explicit", "paraphrase", "single", "Take the CT pictures away", None, "REMOVE", {}),
    ("explicit", "paraphrase", "single", "Return to the smaller view", None, "ZOOM_OUT", {}),

    ("implicit", "baseline", "single", "Zoom out", None, "ZOOM_OUT", {}),
    ("implicit", "baseline", "single", "Zoom in", None, "ZOOM_IN_MOVE", {}),
    ("implicit", "baseline", "single", "Move right", None, "SHOW_MOVE", mv("sagittal", rel=10)),
    ("implicit", "baseline", "single", "Move left", None, "SHOW_MOVE", mv("sagittal", rel=-10)),
    ("implicit", "baseline", "single", "Move up", None, "SHOW_MOVE", mv("axial", rel=10)),
    ("implicit", "baseline", "single", "Move down", None, "SHOW_MOVE", mv("axial", rel=-10)),
    ("implicit", "baseline", "single", "Move forward", None, "SHOW_MOVE", mv("coronal", rel=10)),
    ("implicit", "baseline", "single", "Move backward", None, "SHOW_MOVE", mv("coronal", rel=-10)),
    ("implicit", "baseline", "single", "Axial 200", None, "SHOW_MOVE", mv("axial", abs=200)),
    ("implicit", "baseline", "single", "Coronal 256", None, "SHOW_MOVE", mv("coronal", abs=256)),
    ("implicit", "baseline", "single", "Sagittal 100", None, "SHOW_MOVE", mv("sagittal", abs=100)),
    ("implicit", "baseline", "single", "Sagittal 300", None, "SHOW_MOVE", mv("sagittal", abs=300)),
    ("implicit", "baseline", "single", "CT views", None, "SHOW_MOVE", {}),
    ("implicit", "baseline", "single", "Axial view", None, "ZOOM_IN_MOVE", {"main_view": "axial"}),
    ("implicit", "abbreviation", "single", "Cor 300", None, "SHOW_MOVE", mv("coronal", abs=300)),
    ("implicit", "paraphrase", "single", "Move front, front, front", None,
     "SHOW_MOVE", mv("coronal", rel=30)),
    ("implicit", "paraphrase", "single", "Move left, left, left, left", None,
     "SHOW_MOVE", mv("sagittal", rel=-40)),
    ("implicit", "paraphrase", "single", "Move down, down", None, "SHOW_MOVE", mv("axial", rel=-20)),
    ("implicit", "paraphrase", "single", "Step 2 posterior", "Step to posterior",
     "SHOW_MOVE", mv("coronal", rel=-10)),
    ("implicit", "paraphrase", "single", "Slide upward", None, "SHOW_MOVE", mv("axial", rel=10)),
    ("implicit", "paraphrase", "single", "Coronal to maximum", None, "SHOW_MOVE", mv("coronal", to="max")),
    ("implicit", "paraphrase", "single", "Sagittal to minimum", None, "SHOW_MOVE", mv("sagittal", to="min")),
    ("implicit", "paraphrase", "single", "Coronal to the middle slice", None,
     "SHOW_MOVE", mv("coronal", to="middle")),
    ("implicit", "paraphrase", "single", "Coronal enlarge", None, "ZOOM_IN_MOVE", {"main_view": "coronal"}),
    ("implicit", "paraphrase", "single", "Back to the small views", None, "ZOOM_OUT", {}),
    ("implicit", "paraphrase", "single", "Focus on the sagittal plane", None,
     "ZOOM_IN_MOVE", {"main_view": "sagittal"}),

    ("nlq", "baseline", "single", "Can you move CT forward?", None, "SHOW_MOVE", mv("coronal", rel=10)),
    ("nlq", "baseline", "single", "Can you show the city views?", "Can you show the CT views?",
     "SHOW_MOVE", {}),
    ("nlq", "baseline", "single", "Could you move coronal plus 50?", None,
     "SHOW_MOVE", mv("coronal", rel=50)),
    ("nlq", "baseline", "single", "Can you move sagittal minus 20?", None,
     "SHOW_MOVE", mv("sagittal", rel=-20)),
    ("nlq", "baseline", "single", "Could you move axial plus 30?", None,
     "SHOW_MOVE", mv("axial", rel=30)),
    ("nlq", "baseline", "single", "Can you move axial 2 200?", "Can you move axial to 200?",
     "SHOW_MOVE", mv("axial", abs=200)),
    ("nlq", "baseline", "single", "Could you move coronal to 300?", None,
     "SHOW_MOVE", mv("coronal", abs=300)),
    ("nlq", "baseline", "single", "Can you zoom in on the axial view?", None,
     "ZOOM_IN_MOVE", {"main_view": "axial"}),
    ("nlq", "baseline", "single", "Could you zoom in on the sagittal view?", None,
     "ZOOM_IN_MOVE", {"main_view": "sagittal"}),
    ("nlq", "baseline", "single", "Can you zoom out?", None, "ZOOM_OUT", {}),
    ("nlq", "baseline", "single", "Could you remove the CT views?", None, "REMOVE", {}),
    ("nlq", "baseline", "single", "Can you move up?", None, "SHOW_MOVE", mv("axial", rel=10)),
    ("nlq", "baseline", "single", "Could you move write?", "Could you move right?",
     "SHOW_MOVE", mv("sagittal", rel=10)),
    ("nlq", "baseline", "single", "Can you move coronal to the middle?", None,
     "SHOW_MOVE", mv("coronal", to="middle")),
    ("nlq", "paraphrase", "single", "Can you get axial closer?", None,
     "ZOOM_IN_MOVE", {"main_view": "axial"}),
    ("nlq", "paraphrase", "single", "Could you reduce coronal image?", None, "ZOOM_OUT", {}),
    ("nlq", "paraphrase", "single", "Could you bring the sagittal plane nearer?", None,
     "ZOOM_IN_MOVE", {"main_view": "sagittal"}),
    ("nlq", "paraphrase", "single", "Can you step forward?", None, "SHOW_MOVE", mv("coronal", rel=10)),
    ("nlq", "paraphrase", "single", "Could you slide left?", None, "SHOW_MOVE", mv("sagittal", rel=-10)),
    ("nlq", "paraphrase", "single", "Can you take the CT away?", None, "REMOVE", {}),
    ("nlq", "paraphrase", "single", "Could you go back to the small views?", None, "ZOOM_OUT", {}),
    ("nlq", "paraphrase", "single", "Can you push the axial slice higher?", None,
     "SHOW_MOVE", mv("axial", rel=10)),
    ("nlq", "paraphrase", "single", "Could you walk the coronal plane back?", None,
     "SHOW_MOVE", mv("coronal", rel=-10)),
    ("nlq", "paraphrase", "single", "Can you jump to the middle of the axial stack?", None,
     "SHOW_MOVE", mv("axial", to="middle")),
    ("nlq", "paraphrase", "single", "Could you pull up the CT pictures?", None, "SHOW_MOVE", {}),
]

ALL_STRUCTURES = ["LLL", "LUL", "RLL", "RML", "RUL", "nodules", "trachea_bronchia"]

AR_BANK = [
    ("nlq", "baseline", "composite", "Can you zoom in and rotate to the left?", None,
     "ZOOM_IN", {"target": "nodules", "rotation": "left"}),
    ("nlq", "baseline", "composite", "Can you initialize and zoom in?", None,
     "ZOOM_IN", {"target": "nodules", "reset": True}),
    ("nlq", "baseline", "composite", "Could you show the anterior view and rotate right?", None,
     "ROTATE", {"view": "anterior", "rotation": "right"}),
    ("explicit", "baseline", "composite", "View from the front and rotate left", None,
     "ROTATE", {"view": "anterior", "rotation": "left"}),
    ("explicit", "baseline", "composite", "View from the posterior and rotate right", None,
     "ROTATE", {"view": "posterior", "rotation": "right"}),
    ("explicit", "paraphrase", "composite", "Turn to the back and rotate right", None,
     "ROTATE", {"view": "posterior", "rotation": "right"}),

    ("explicit", "baseline", "single", "Show the 3D recon image", None, "STATIC_VIEW", {"reset": True}),
    ("explicit", "baseline", "single", "Show the anterior view", None, "STATIC_VIEW", {"view": "anterior"}),
    ("explicit", "baseline", "single", "Show the posterior view", None, "STATIC_VIEW", {"view": "posterior"}),
    ("explicit", "baseline", "single", "Show the left view", None, "STATIC_VIEW", {"view": "left"}),
    ("explicit", "baseline", "single", "Show the right view", None, "STATIC_VIEW", {"view": "right"}),
    ("explicit", "baseline", "single", "Show the superior view", None, "STATIC_VIEW", {"view": "superior"}),
    ("explicit", "baseline", "single", "Show the inferior view", None, "STATIC_VIEW", {"view": "inferior"}),
    ("explicit", "baseline", "single", "Show the surgical view", None, "STATIC_VIEW", {"view": "surgical"}),
    ("explicit", "baseline", "single", "Rotate to the left", None, "ROTATE", {"rotation": "left"}),
    ("explicit", "baseline", "single", "Rotate to the write", "Rotate to the right",
     "ROTATE", {"rotation": "right"}),
    ("explicit", "baseline", "single", "Rotate up", None, "ROTATE", {"rotation": "up"}),
    ("explicit", "baseline", "single", "Rotate down", None, "ROTATE", {"rotation": "down"}),
    ("explicit", "baseline", "single", "Rotate horizontally", None, "ROTATE", {"rotation": "horizontal"}),
    ("explicit", "baseline", "single", "Rotate vertically", None, "ROTATE", {"rotation": "vertical"}),
    ("explicit", "baseline", "single", "Add the right upper lobe", None, "STATIC_VIEW", {"add": ["RUL"]}),
    ("explicit", "baseline", "single", "Add the left lower lobe", None, "STATIC_VIEW", {"add": ["LLL"]}),
    ("explicit", "baseline", "single", "Remove the right middle lobe", None,
     "STATIC_VIEW", {"remove": ["RML"]}),
    ("explicit", "baseline", "single", "At the trachea and bronchia", "Add the trachea and bronchia",
     "STATIC_VIEW", {"add": ["trachea_bronchia"]}),
    ("explicit", "baseline", "single", "June in on the nodules", "Zoom in on the nodules",
     "ZOOM_IN", {"target": "nodules"}),
    ("explicit", "baseline", "single", "Zoom in on the right lower lobe", None,
     "ZOOM_IN", {"target": "RLL"}),
    ("explicit", "baseline", "single", "Remove all models", None, "REMOVE", {}),
    ("explicit", "baseline", "single", "Show the lung nodules", None, "STATIC_VIEW", {"add": ["nodules"]}),
    ("explicit", "abbreviation", "single", "Turn on RLL", None, "STATIC_VIEW", {"add": ["RLL"]}),
    ("explicit", "abbreviation", "single", "Remove RUL", None, "STATIC_VIEW", {"remove": ["RUL"]}),
    ("explicit", "abbreviation", "single", "Add LUL", None, "STATIC_VIEW", {"add": ["LUL"]}),
    ("explicit", "abbreviation", "single", "Show RML", None, "STATIC_VIEW", {"add": ["RML"]}),
    ("explicit", "paraphrase", "single", "Light up the left upper lobe", None,
     "STATIC_VIEW", {"add": ["LUL"]}),
    ("explicit", "paraphrase", "single", "Switch off the right upper lobe", None,
     "STATIC_VIEW", {"remove": ["RUL"]}),
    ("explicit", "paraphrase", "single", "Bring up the 3D model", None, "STATIC_VIEW", {"reset": True}),
    ("explicit", "paraphrase", "single", "Face the model to the front", None,
     "STATIC_VIEW", {"view": "anterior"}),
    ("explicit", "paraphrase", "single", "Look at it from behind", None,
     "STATIC_VIEW", {"view": "posterior"}),
    ("explicit", "paraphrase", "single", "Spin the model to the left", None, "ROTATE", {"rotation": "left"}),
    ("explicit", "paraphrase", "single", "Tilt the model up", None, "ROTATE", {"rotation": "up"}),
    ("explicit", "paraphrase", "single", "Turn the model vertically", None,
     "ROTATE", {"rotation": "vertical"}),
    ("explicit", "paraphrase", "single", "Clear all the models", None, "REMOVE", {}),

    ("implicit", "baseline", "single", "Surgical view", None, "STATIC_VIEW", {"view": "surgical"}),
    ("implicit", "baseline", "single", "Anterior view", None, "STATIC_VIEW", {"view": "anterior"}),
    ("implicit", "baseline", "single", "Posterior view", None, "STATIC_VIEW", {"view": "posterior"}),
    ("implicit", "baseline", "single", "Left view", None, "STATIC_VIEW", {"view": "left"}),
    ("implicit", "baseline", "single", "Right view", None, "STATIC_VIEW", {"view": "right"}),
    ("implicit", "baseline", "single", "Superior view", None, "STATIC_VIEW", {"view": "superior"}),
    ("implicit", "baseline", "single", "Inferior view", None, "STATIC_VIEW", {"view": "inferior"}),
    ("implicit", "baseline", "single", "Zoom out", None, "ZOOM_OUT", {}),
    ("implicit", "baseline", "single", "Zoom in", None, "ZOOM_IN", {"target": "nodules"}),
    ("implicit", "baseline", "single", "Initialize", None, "STATIC_VIEW", {"reset": True}),
    ("implicit", "baseline", "single", "Reset", None, "STATIC_VIEW", {"reset": True}),
    ("implicit", "baseline", "single", "Nodules", None, "STATIC_VIEW", {"add": ["nodules"]}),
    ("implicit", "baseline", "single", "Trachea and bronchia", None,
     "STATIC_VIEW", {"add": ["trachea_bronchia"]}),
    ("implicit", "baseline", "single", "Right lung", None, "STATIC_VIEW", {"add": ["RLL", "RML", "RUL"]}),
    ("implicit", "baseline", "single", "Left lung", None, "STATIC_VIEW", {"add": ["LLL", "LUL"]}),
    ("implicit", "baseline", "single", "Right lower lobe", None, "STATIC_VIEW", {"add": ["RLL"]}),
    ("implicit", "baseline", "single", "Left upper lobe", None, "STATIC_VIEW", {"add": ["LUL"]}),
    ("implicit", "baseline", "single", "Right middle lobe", None, "STATIC_VIEW", {"add": ["RML"]}),
    ("implicit", "baseline", "single", "Right upper lobe", None, "STATIC_VIEW", {"add": ["RUL"]}),
    ("implicit", "baseline", "single", "Left lower lobe", None, "STATIC_VIEW", {"add": ["LLL"]}),
    ("implicit", "baseline", "single", "3D model", None, "STATIC_VIEW", {"reset": True}),
    ("implicit", "baseline", "single", "All structures", None, "STATIC_VIEW", {"add": ALL_STRUCTURES}),
    ("implicit", "baseline", "single", "Zoom in more", None, "ZOOM_IN", {"target": "nodules"}),
    ("implicit", "baseline", "single", "Nodules off", None, "STATIC_VIEW", {"remove": ["nodules"]}),
    ("implicit", "abbreviation", "single", "RLL", None, "STATIC_VIEW", {"add": ["RLL"]}),
    ("implicit", "abbreviation", "single", "LLL on", None, "STATIC_VIEW", {"add": ["LLL"]}),
    ("implicit", "paraphrase", "single", "Surgeon's view", None, "STATIC_VIEW", {"view": "surgical"}),
    ("implicit", "paraphrase", "single", "Operating table view", None,
     "STATIC_VIEW", {"view": "surgical"}),
    ("implicit", "paraphrase", "single", "Bird's eye view", None, "STATIC_VIEW", {"view": "superior"}),
    ("implicit", "paraphrase", "single", "From the front", None, "STATIC_VIEW", {"view": "anterior"}),
    ("implicit", "paraphrase", "single", "From behind", None, "STATIC_VIEW", {"view": "posterior"}),
    ("implicit", "paraphrase", "single", "Spin it left", None, "ROTATE", {"rotation": "left"}),
    ("implicit", "paraphrase", "single", "Tip upward", None, "ROTATE", {"rotation": "up"}),
    ("implicit", "paraphrase", "single", "Full horizontal spin", None,
     "ROTATE", {"rotation": "horizontal"}),
    ("implicit", "paraphrase", "single", "Closer on the nodules", None, "ZOOM_IN", {"target": "nodules"}),
    ("implicit", "paraphrase", "single", "Back out", None, "ZOOM_OUT", {}),
    ("implicit", "paraphrase", "single", "Airway", None, "STATIC_VIEW", {"add": ["trachea_bronchia"]}),
    ("implicit", "paraphrase", "single", "All models off", None, "REMOVE", {}),
    ("implicit", "paraphrase", "single", "Start over", None, "STATIC_VIEW", {"reset": True}),

    ("nlq", "baseline", "single", "Would you rotate up?", None, "ROTATE", {"rotation": "up"}),
    ("nlq", "baseline", "single", "Can you rotate down?", None, "ROTATE", {"rotation": "down"}),
    ("nlq", "baseline", "single", "Could you rotate to the left?", None, "ROTATE", {"rotation": "left"}),
    ("nlq", "baseline", "single", "Can you rotate horizontally?", None,
     "ROTATE", {"rotation": "horizontal"}),
    ("nlq", "baseline", "single", "Can you show the anterior view?", None,
     "STATIC_VIEW", {"view": "anterior"}),
    ("nlq", "baseline", "single", "Could you show the posterior view?", None,
     "STATIC_VIEW", {"view": "posterior"}),
    ("nlq", "baseline", "single", "Can you show the surgical view?", None,
     "STATIC_VIEW", {"view": "surgical"}),
    ("nlq", "baseline", "single", "Could you show the superior view?", None,
     "STATIC_VIEW", {"view": "superior"}),
    ("nlq", "baseline", "single", "Can you show the inferior view?", None,
     "STATIC_VIEW", {"view": "inferior"}),
    ("nlq", "baseline", "single", "Can you at the right upper lobe?", "Can you add the right upper lobe?",
     "STATIC_VIEW", {"add": ["RUL"]}),
    ("nlq", "baseline", "single", "Could you add the left lower lobe?", None,
     "STATIC_VIEW", {"add": ["LLL"]}),
    ("nlq", "baseline", "single", "Can you remove the right middle lobe?", None,
     "STATIC_VIEW", {"remove": ["RML"]}),
    ("nlq", "baseline", "single", "Could you remove the nodules?", None,
     "STATIC_VIEW", {"remove": ["nodules"]}),
    ("nlq", "baseline", "single", "Can you zoom in on the nodules?", None,
     "ZOOM_IN", {"target": "nodules"}),
    ("nlq", "baseline", "single", "Could you zoom in on the left upper lobe?", None,
     "ZOOM_IN", {"target": "LUL"}),
    ("nlq", "baseline", "single", "Can you zoom out?", None, "ZOOM_OUT", {}),
    ("nlq", "baseline", "single", "Can you remove all models?", None, "REMOVE", {}),
    ("nlq", "baseline", "single", "Could you show the lung nodules?", None,
     "STATIC_VIEW", {"add": ["nodules"]}),
    ("nlq", "baseline", "single", "Can you show the trachea and bronchia?", None,
     "STATIC_VIEW", {"add": ["trachea_bronchia"]}),
    ("nlq", "abbreviation", "single", "Can you zoom in to RLL?", None, "ZOOM_IN", {"target": "RLL"}),
    ("nlq", "abbreviation", "single", "Could you turn on RUL?", None, "STATIC_VIEW", {"add": ["RUL"]}),
    ("nlq", "paraphrase", "single", "Can you load anatomical reconstruction?", None,
     "STATIC_VIEW", {"reset": True}),
    ("nlq", "paraphrase", "single", "Can you hide left lung?", None,
     "STATIC_VIEW", {"remove": ["LLL", "LUL"]}),
    ("nlq", "paraphrase", "single", "Can you look from the front?", None,
     "STATIC_VIEW", {"view": "anterior"}),
    ("nlq", "paraphrase", "single", "Could you look from behind?", None,
     "STATIC_VIEW", {"view": "posterior"}),
    ("nlq", "paraphrase", "single", "Can you erase all?", None, "REMOVE", {}),
    ("nlq", "paraphrase", "single", "Could you activate the right lung?", None,
     "STATIC_VIEW", {"add": ["RLL", "RML", "RUL"]}),
    ("nlq", "paraphrase", "single", "Can you switch on the airway?", None,
     "STATIC_VIEW", {"add": ["trachea_bronchia"]}),
    ("nlq", "paraphrase", "single", "Could you spin it to the right?", None,
     "ROTATE", {"rotation": "right"}),
    ("nlq", "paraphrase", "single", "Can you tilt it down?", None, "ROTATE", {"rotation": "down"}),
    ("nlq", "paraphrase", "single", "Could you give it a full vertical turn?", None,
     "ROTATE", {"rotation": "vertical"}),
    ("nlq", "paraphrase", "single", "Can you get closer to the nodules?", None,
     "ZOOM_IN", {"target": "nodules"}),
    ("nlq", "paraphrase", "single", "Could you step back out?", None, "ZOOM_OUT", {}),
    ("nlq", "paraphrase", "single", "Can you clear everything away?", None, "REMOVE", {}),
    ("nlq", "paraphrase", "single", "Could you view the superior angle?", None,
     "STATIC_VIEW", {"view": "superior"}),
]

BANKS = {"ir": IR_BANK, "iv": IV_BANK, "ar": AR_BANK}
TARGETS = {
    "agent": {"ir": 44, "iv": 81, "ar": 115},
    "structure": {"single": 225, "composite": 15},
    "ctype": {"explicit": 80, "implicit": 80, "nlq": 80},
    "expression": {"baseline": 145, "abbreviation": 15, "paraphrase": 80},
}


def build_records() -> list[dict]:
    records = []
    i = 0
    for agent, bank in BANKS.items():
        for n, (ctype, expression, structure, raw, revised, action, params) in enumerate(bank, 1):
            records.append({
                "id": f"{agent}-{n:03d}",
                "agent_gold": agent,
                "raw_text": raw,
                "gold_revised": revised if revised is not None else raw,
                "structure": structure,
                "ctype": ctype,
                "expression": expression,
                "speaker": SPEAKERS[i % len(SPEAKERS)],
                "gold_action": action,
                "gold_params": params,
            })
            i += 1
    return records


def verify(records: list[dict]) -> None:
    counts = {
        "agent": Counter(r["agent_gold"] for r in records),
        "structure": Counter(r["structure"] for r in records),
        "ctype": Counter(r["ctype"] for r in records),
        "expression": Counter(r["expression"] for r in records),
    }
    for dim, target in TARGETS.items():
        if dict(counts[dim]) != target:
            raise SystemExit(f"{dim} counts {dict(counts[dim])} != target {target}")

    pairs = [(r["agent_gold"], r["gold_revised"]) for r in records]
    if len(set(pairs)) != len(pairs):
        dupes = [p for p, c in Counter(pairs).items() if c > 1]
        raise SystemExit(f"duplicate (agent, revised) pairs: {dupes}")

    vocab = resources.known_vocabulary()
    missing = [r["id"] for r in records
               if not mentions_known_vocabulary(r["gold_revised"], vocab)]
    if missing:
        raise SystemExit(f"revised commands failing the vocabulary backstop: {missing}")


def main() -> None:
    records = build_records()
    verify(records)
    with OUT.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    loaded = load_dataset(str(OUT))
    build_mock_script(loaded)  # raises on matcher conflicts
    print(f"wrote {len(loaded)} records to {OUT}")


if __name__ == "__main__":
    main()
