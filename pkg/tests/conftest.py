import json
from pathlib import Path

import pytest

from visa_agent import resources
from visa_agent.evaluation import load_dataset

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def column_manifest():
    return resources.column_manifest()


@pytest.fixture(scope="session")
def patient_record():
    return resources.patient_record()


@pytest.fixture(scope="session")
def structure_manifest():
    return resources.structure_manifest()


@pytest.fixture(scope="session")
def dataset():
    return load_dataset(resources.dataset_path())


@pytest.fixture(scope="session")
def golden_rows_raw():
    return json.loads((DATA / "stage_outcomes_35.json").read_text())


@pytest.fixture(scope="session")
def golden_expected():
    return json.loads((DATA / "stage_outcomes_35_expected.json").read_text())
