"""Smoke test for the braidwork Python bindings.

Build and install first:  pip install --no-build-isolation -e crates/py
"""

import json
import pathlib
import sys
import tempfile

import braidwork

ROOT = pathlib.Path(__file__).resolve().parents[1]


def main() -> int:
    text = (ROOT / "assets" / "icm" / "cnot2.icm").read_text()
    c = braidwork.compile(text)
    assert c.volume() == 48, c.volume()
    assert c.extents() == [4, 6, 2]
    assert c.validate() == []
    lk = c.linking()
    assert {k: abs(v) for k, v in lk.items()} == {("c0", "q0"): 1, ("c0", "q1"): 1}, lk

    final, moves, trace = braidwork.optimize(c, strategy="anneal", seed=3, max_steps=400)
    assert final.volume() <= c.volume()
    assert final.same_signature(c)
    assert braidwork.replay(c, moves).to_tqc() == final.to_tqc()
    assert trace.splitlines()[0] == "step,objective,accepted,move_kind"

    again = braidwork.Circuit.from_tqc(c.to_tqc())
    assert again.digest() == c.digest()
    first = c.moves()[0]
    assert c.apply(first).same_signature(c)

    assert braidwork.qubits_per_piece("surface", 4) == 121
    assert braidwork.qubits_per_piece("raussendorf", 4) == 540
    assert braidwork.steps_per_piece(4) == 5
    assert braidwork.select_distance(1, 1e-3, 1e-10) == 17
    assert "qubits: 1452" in braidwork.estimate(c, d=4)

    with tempfile.TemporaryDirectory() as d:
        svc = braidwork.Service(d)
        add = {"v": 1, "op": "add_puzzle", "id": "cnot2", "tqc": c.to_tqc()}
        assert json.loads(svc.request(json.dumps(add)))["ok"]
        sub = {"v": 1, "op": "submit_move", "puzzle": "cnot2", "node": 0, "move": first, "author": "py"}
        r = json.loads(svc.request(json.dumps(sub)))
        assert r["ok"] and r["result"]["node"] == 1, r

    print(f"braidwork smoke ok: V {c.volume()} -> {final.volume()} in {len(moves.splitlines()) - 1} moves")
    return 0


if __name__ == "__main__":
    sys.exit(main())
