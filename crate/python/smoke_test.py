"""Smoke test for the ideal_rings_py extension.

Uses an installed module when there is one (maturin develop / pip install),
otherwise loads the library built by `cargo build --release -p ideal-rings-py`.
"""

import importlib
import math
import os
import shutil
import sys
import tempfile
from pathlib import Path


def load():
    try:
        return importlib.import_module("ideal_rings_py")
    except ImportError:
        pass
    root = Path(__file__).resolve().parents[1]
    for profile in ("release", "debug"):
        lib = root / "target" / profile / "libideal_rings_py.so"
        if lib.exists():
            tmp = tempfile.mkdtemp()
            shutil.copy(lib, os.path.join(tmp, "ideal_rings_py.so"))
            sys.path.insert(0, tmp)
            return importlib.import_module("ideal_rings_py")
    sys.exit("ideal_rings_py not found; run `cargo build --release -p ideal-rings-py` first")


def main():
    m = load()
    print("build", m.BUILD_ID)

    ring = m.sample_ring(50, seed=7)
    assert len(ring) == 50
    assert ring.closure_defect() <= 1e-9 * 50
    assert all(abs(math.dist(e, (0, 0, 0)) - 1) < 1e-9 for e in ring.edges())
    assert ring.vertices()[0] == [0.0, 0.0, 0.0]

    moved = ring.crankshaft(1, 20, 0.7)
    back = moved.crankshaft(1, 20, -0.7)
    assert max(abs(a - b) for e, f in zip(back.edges(), ring.edges()) for a, b in zip(e, f)) < 1e-9

    assert m.analytic_e2e(25, 50) == 625 / 49
    assert abs(m.analytic_rg(50) - 51 / 12) < 1e-12
    assert abs(m.effective_length_from_rg(3.5768) - 41.9216) < 1e-4
    assert abs(m.effective_length_from_max_e2e(10.2291) - 39.89) < 0.01

    profile = m.ring_profile(20, 2000, seed=3)
    assert profile["n"] == 20 and len(profile["rg_mean"]) == 20
    assert abs(profile["e2e_mean"][0] - 1) < 1e-9

    assert m.gauss_determinant([1, -2, 3, -1, 2, -3]) == 3
    assert m.gauss_determinant([1, -2, 3, -1, 4, -3, 2, -4]) == 5
    assert m.Ring.regular(12).classify() == "unknot"

    try:
        m.sample_ring(51, seed=1)
    except ValueError as e:
        assert "51" in str(e)
    else:
        raise AssertionError("odd n accepted")

    study = m.run_trefoil_study(n=40, target=2, seed=5, closures=20)
    assert study["complete"] and study["trefoils"] == 2
    length = study["knots"][0][1]
    assert 3 <= length["length"] <= 40

    report = m.run_convergence(sizes=[10, 100], replicates=2)
    assert len(report["rows"]) == 2
    print("ok")


if __name__ == "__main__":
    main()
