"""Smoke test for the pynegrate extension.

Build and run:

    cargo build -p pynegrate --release --features extension-module
    python python/smoke_test.py

The script copies target/release/libpynegrate.so next to itself as
pynegrate.so when no installed module is found.
"""

import importlib
import math
import shutil
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
ROOT = HERE.parent


def load():
    try:
        return importlib.import_module("pynegrate")
    except ImportError:
        pass
    for name in ("libpynegrate.so", "libpynegrate.dylib"):
        built = ROOT / "target" / "release" / name
        if built.exists():
            shutil.copyfile(built, HERE / "pynegrate.so")
            sys.path.insert(0, str(HERE))
            return importlib.import_module("pynegrate")
    sys.exit("pynegrate not built; run cargo build -p pynegrate --release --features extension-module")


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    pn = load()

    p = pn.MarketParams(100.0, 100.0, -0.005, -0.01, 0.08, 15.0, kind="put")
    assert p.kind == "put" and p.rate == -0.005
    print(repr(p))

    eu = pn.european_price(p)
    close(eu, 9.98817288, 1e-6)

    r = pn.price(p, method="kim-fpbprime", m=5, n=8, l=11, points=21)
    close(r.price, 10.288, 1e-3)
    assert r.premium > 0 and not r.degraded
    print(r)

    fd = pn.price(p, method="fdm", m=200)
    close(fd.price, r.price, 5e-3)

    q = pn.price(p, method="qdplus")
    assert q.price >= eu

    flags = pn.region(-0.01, -0.005)
    assert flags["never_optimal"] and not flags["double_boundary_possible"]
    flags = pn.region(-0.005, -0.01)
    assert flags["double_boundary_possible"]

    b = pn.boundary(p, method="kim-fpbprime", points=11, m=5, n=8)
    assert len(b["t"]) == 11
    for up, lo in zip(b["upper"], b["lower"]):
        if up is not None and lo is not None:
            assert up >= lo

    pos = pn.MarketParams(100.0, 100.0, 0.05, 0.0, 0.2, 1.0)
    close(pn.price(pos).price, 6.0904, 1e-3)
    up = pn.barrier_price(pos.with_spot(90.0), 80.0, "down_out")
    assert math.isfinite(up) and up > 0

    bound = pn.boundary_bound(pos, "put_upper", [0.0, 0.5, 1.0])
    assert bound[-1] is not None and abs(bound[-1] - 100.0) < 1e-9

    try:
        pn.MarketParams(-1.0, 100.0, 0.05, 0.0, 0.2, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative spot accepted")

    print("pynegrate smoke test passed")


if __name__ == "__main__":
    main()
