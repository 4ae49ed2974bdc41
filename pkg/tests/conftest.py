import json

import numpy as np
import pytest

from smattr import io as sio
from smattr.instances import make_instance


@pytest.fixture
def small_instance():
    return make_instance(3, n=4, m=8, patch=2)


@pytest.fixture
def small_ctx(small_instance):
    return small_instance.context()


@pytest.fixture
def run_files(tmp_path):
    """Write an image, saliency map and config for CLI runs; returns a factory."""

    def make(seed=0, n=4, m=8, patch=4, oracle=None, **extra):
        inst = make_instance(seed, n=n, m=m, patch=patch)
        image = np.rint(inst.image * 255) / 255
        sio.write_image(image, tmp_path / "image.png")
        sio.write_float_map(inst.saliency, tmp_path / "saliency.smap")
        cfg = {
            "n": n, "m": m, "image": "image.png", "saliency": "saliency.smap",
            "output_dir": "out",
            "oracle": oracle or {"backend": "synthetic", "seed": seed, "feature_dim": 16, "categories": 5},
            **extra,
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(cfg))
        return path

    return make


ACCEPTANCE = {}


class _Criterion:
    def __init__(self, number, title):
        self.number, self.title, self.line = number, title, None

    def record(self, ok, detail):
        status = "PASS" if ok else "FAIL"
        self.line = f"criterion {self.number:>2} {status}  {self.title}: {detail}"
        ACCEPTANCE[self.number] = self.line
        print(self.line)
        return ok


@pytest.fixture
def criterion():
    made = []

    def make(number, title):
        made.append(_Criterion(number, title))
        return made[-1]

    yield make
    for c in made:
        if c.line is None:
            ACCEPTANCE[c.number] = f"criterion {c.number:>2} FAIL  {c.title}: did not complete"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
