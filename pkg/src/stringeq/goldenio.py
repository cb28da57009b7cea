"""Loading of golden equation files.

The default root is the packaged ``golden/`` directory; the environment
variable STRINGEQ_GOLDEN overrides it (useful for testing against edited
copies).
"""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path

from .diffpoly import DiffPoly, parse

GOLDEN_ENV = "STRINGEQ_GOLDEN"

FILES = {
    "CV": "pde_cv.txt",
    "CriticalIsing": "pde_critical_ising.txt",
    "TricriticalIsing": "pde_tricritical_ising.txt",
    "Y4": "hirota_y4.txt",
    "Y14": "hirota_y14.txt",
    "HirotaCV": "hirota_cv.txt",
}


def golden_text(name: str) -> str:
    fname = FILES[name]
    override = os.environ.get(GOLDEN_ENV)
    if override:
        return (Path(override) / fname).read_text()
    return (resources.files("stringeq") / "golden" / fname).read_text()


def golden_poly(name: str) -> DiffPoly:
    return parse(golden_text(name).strip())
