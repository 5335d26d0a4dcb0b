import json
from pathlib import Path

import pytest

from wearauth import codec
from wearauth.fingerprint import TemplateAlgorithm, extract_template, write_pgm

from patterns import stripe_image


@pytest.fixture(scope="session")
def probe_image():
    """Ridge image with one engineered break, used across simulator tests."""
    return stripe_image(96, 72, period=8, thickness=3, gap=(4, 40, 64))


@pytest.fixture(scope="session")
def scenario_workspace(tmp_path_factory, probe_image):
    """Probe PGM plus a one-entry gallery enrolled from the same capture."""
    root = tmp_path_factory.mktemp("scenario")
    write_pgm(probe_image, root / "probe.pgm")
    template = extract_template(probe_image, TemplateAlgorithm.HIGH_ACCURACY)
    gallery = root / "gallery"
    gallery.mkdir()
    (gallery / "alice.fpt").write_bytes(codec.encode(template))
    (gallery / "index.json").write_text(json.dumps({"alice": "alice.fpt"}))
    return root


def write_scenario(root: Path, name: str = "scenario.json", *, system: dict,
                   channel: dict | None = None, **extra) -> Path:
    doc = {
        "system": system,
        "probe_image": "probe.pgm",
        "gallery_dir": "gallery",
        "channel": channel or {},
        "seed": 3,
        "bit_period": 8,
    }
    doc.update(extra)
    path = root / name
    path.write_text(json.dumps(doc))
    return path
