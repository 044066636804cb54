import pytest

from ecgflow.models.fixtures import write_default_registry


@pytest.fixture(scope="session")
def default_models(tmp_path_factory):
    """The three fixture models plus registry.json, generated once per run."""
    directory = tmp_path_factory.mktemp("models")
    descriptors, registry_path = write_default_registry(directory)
    return descriptors, registry_path


@pytest.fixture(scope="session")
def descriptors(default_models):
    return default_models[0]


@pytest.fixture(scope="session")
def single_model(descriptors):
    """Just the lvsd model, for pipeline property tests that loop a lot."""
    return [d for d in descriptors if d.model_id == "lvsd"]
