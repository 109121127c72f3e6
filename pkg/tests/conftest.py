"""Shared fixtures: a deterministic synthetic store pair on disk."""

import json

import numpy as np
import pytest

from fsembed import write_store
from fsembed.cli import main

from _synth import make_store_pair


@pytest.fixture(scope="session")
def store_pair():
    rng = np.random.default_rng(20240501)
    return make_store_pair(rng)


@pytest.fixture(scope="session")
def store_files(store_pair, tmp_path_factory):
    root = tmp_path_factory.mktemp("stores")
    image_path = root / "image.fsembed"
    text_path = root / "text.fsembed"
    write_store(store_pair[0], image_path)
    write_store(store_pair[1], text_path)
    return str(image_path), str(text_path)


@pytest.fixture
def write_config(tmp_path):
    def _write(config: dict, name: str = "run.json") -> str:
        path = tmp_path / name
        path.write_text(json.dumps(config))
        return str(path)

    return _write


@pytest.fixture
def run_cli(capsys):
    """Invoke the CLI in-process, returning (exit code, stdout, stderr)."""

    def _run(*argv):
        code = main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return _run
