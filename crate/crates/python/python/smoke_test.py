"""Smoke test for the knn_nmi extension module.

Run after `maturin develop`, or directly against a cargo build:

    cargo build -p knn-nmi-py --release --features extension-module
    python crates/python/python/smoke_test.py
"""

import math
import os
import shutil
import sys
import tempfile
from pathlib import Path


def load():
    try:
        import knn_nmi
        return knn_nmi
    except ImportError:
        pass
    root = Path(__file__).resolve().parents[3]
    for profile in ("release", "debug"):
        lib = root / "target" / profile / "libknn_nmi_py.so"
        if lib.exists():
            tmp = tempfile.mkdtemp()
            shutil.copy(lib, os.path.join(tmp, "knn_nmi.so"))
            sys.path.insert(0, tmp)
            import knn_nmi
            return knn_nmi
    sys.exit("knn_nmi not importable and no cargo build found under target/")


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    m = load()

    assert close(m.digamma(1.0), -0.5772156649015329, 1e-14)
    assert m.ln_gamma(2.0) == 0.0

    eps, n_x, n_y = m.knn_radii([[0.0], [1.0], [0.0]], [[0.0], [0.0], [2.0]], 1)
    assert eps == [1.0, 1.0, 2.0] and n_x == [1, 0, 2] and n_y == [1, 1, 0]

    r = m.ln_v([1.0, 2.0], 2)
    assert r.finite and close(r.ln_v, 0.45814536593707753, 1e-14)
    assert not m.ln_v([1.0, 2.0], 1024, "baseline").finite
    try:
        m.scale_radii([1.0, 2.0], 1024, "baseline")
        raise AssertionError("expected OverflowError")
    except OverflowError:
        pass

    x, y = m.generate_gaussian(1, 0.9, n=2000, seed=1)
    assert len(x) == 2000 and len(x[0]) == 1
    rep = m.estimate(x, y, k=5)
    base = m.estimate(x, y, k=5, backend="baseline")
    assert rep.nmi is not None and 0.0 < rep.nmi < 1.0
    assert close(rep.nmi, base.nmi, 1e-9)
    assert close(rep.mi_ksg, rep.mi_from_entropies, 1e-9)

    truth = m.gaussian_truth(1, 0.9)
    assert close(truth.nmi_true, 0.5852019548270669, 1e-12)
    t = m.student_t_truth(4, 1.0)
    assert close(t.mi_true, 0.7043548204403516, 1e-12)

    xt, yt = m.generate_student_t(2, 1.0, n=300, seed=2)
    assert all(math.isfinite(v) for row in xt for v in row)

    rows = m.stability_profile([1.0, 2.0], [2, 1024])
    assert (1024, "baseline", None, False) in rows

    try:
        m.estimate([[0.0], [1.0]], [[0.0], [1.0]], k=5)
        raise AssertionError("expected ValueError")
    except ValueError:
        pass

    print("knn_nmi smoke test ok:", rep)


if __name__ == "__main__":
    main()
