#!/usr/bin/env python3
"""Smoke test for the dhpart_py extension module.

Builds the cdylib if needed, loads it straight from the cargo target
directory, and exercises the main entry points end to end.

Usage: python3 python/smoke_test.py
"""

import json
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    so = REPO / "target" / "release" / "libdhpart_py.so"
    if not so.exists():
        subprocess.run(
            ["cargo", "build", "--release", "-p", "dhpart-py"],
            cwd=REPO,
            check=True,
        )
    staging = Path(tempfile.mkdtemp(prefix="dhpart_py_"))
    shutil.copy(so, staging / "dhpart_py.so")
    sys.path.insert(0, str(staging))
    import dhpart_py

    return dhpart_py


def main():
    dp = load_module()

    # Construction from explicit edges.
    hg = dp.Hypergraph(4, [([0], [1, 2], 1.0), ([1], [2], 2.0), ([2], [3], 1.0)])
    assert hg.num_nodes == 4 and hg.num_edges == 3 and hg.num_pins == 7
    assert dp.connectivity(hg, [0, 0, 1, 1]) == 3.0
    assert dp.cut_net(hg, [0, 0, 1, 1]) == 3.0
    assert dp.validate(hg, [0, 0, 1, 1], omega=2, delta=3) == []
    assert dp.validate(hg, [0, 0, 1, 1], omega=1) != []

    # Generator + constrained partitioning vs the one-pass baseline.
    gen = dp.generate("smallworld", layers=20, width=100, fanout=4, rewire=0.2, seed=7)
    assert gen.num_nodes == 2000
    parts, stats_json = dp.partition_constrained(gen, omega=100, delta=60, seed=7)
    stats = json.loads(stats_json)
    assert stats["schema_version"] == 1
    assert dp.validate(gen, parts, omega=100, delta=60) == []
    baseline = dp.one_pass(gen, omega=100, delta=60)
    assert dp.connectivity(gen, parts) <= dp.connectivity(gen, baseline)

    # k-way balance.
    kparts, _ = dp.partition_kway(gen, k=4, epsilon=0.03)
    limit = int(1.03 * gen.num_nodes / 4)
    sizes = [kparts.count(p) for p in range(4)]
    assert all(s <= limit for s in sizes), sizes

    # File round trip.
    with tempfile.TemporaryDirectory() as tmp:
        path = str(Path(tmp) / "g.dhgr")
        gen.write(path)
        back = dp.Hypergraph.read(path, "dhgr")
        assert back.num_pins == gen.num_pins
        dp.write_partition(parts, str(Path(tmp) / "p.txt"))

    print("smoke test passed:", repr(gen), "->", stats["partition_count"], "partitions")


if __name__ == "__main__":
    main()
