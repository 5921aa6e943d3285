import json

import numpy as np
import pytest

from saddlebounds import load_manifest, save_manifest
from saddlebounds.errors import StructuralError
from saddlebounds.io import load_spd_blocks

from helpers import random_valid_system


@pytest.mark.parametrize("inline", [False, True])
def test_manifest_round_trip(tmp_path, inline):
    rng = np.random.default_rng(21)
    system, _ = random_valid_system(rng, 6, 4, 2)
    manifest = save_manifest(system, tmp_path, inline=inline)
    back = load_manifest(manifest)
    for key in "ABCDE":
        assert np.allclose(getattr(back, key), getattr(system, key), atol=1e-14)
    assert back.dims == system.dims


def test_manifest_rejects_bad_dims(tmp_path):
    rng = np.random.default_rng(22)
    system, _ = random_valid_system(rng, 4, 3, 2)
    manifest = save_manifest(system, tmp_path, inline=True)
    data = json.loads(manifest.read_text())
    data["dims"] = [5, 3, 2]
    manifest.write_text(json.dumps(data))
    with pytest.raises(StructuralError, match="dims"):
        load_manifest(manifest)


def test_manifest_rejects_missing_block(tmp_path):
    rng = np.random.default_rng(23)
    system, _ = random_valid_system(rng, 4, 3, 2)
    manifest = save_manifest(system, tmp_path, inline=True)
    data = json.loads(manifest.read_text())
    del data["blocks"]["E"]
    manifest.write_text(json.dumps(data))
    with pytest.raises(StructuralError, match="blocks"):
        load_manifest(manifest)


def test_user_block_manifest(tmp_path):
    blocks = [np.diag([1.0, 2.0]), np.eye(2), [[3.0]]]
    path = tmp_path / "precond.json"
    path.write_text(json.dumps({"blocks": [b if isinstance(b, list) else np.asarray(b).tolist() for b in blocks]}))
    loaded = load_spd_blocks(path)
    assert np.allclose(loaded[0], [[1.0, 0.0], [0.0, 2.0]])
    assert np.allclose(loaded[2], [[3.0]])
