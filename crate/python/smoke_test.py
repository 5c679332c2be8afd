"""Smoke test for the semiradius Python module.

Build and install first:
    pip install --no-build-isolation -e crates/py
"""

import json
import math
import tempfile
from pathlib import Path

import semiradius as sr


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    w = sr.numerical_radius([[0, 1], [0, 0]])
    assert w.lo <= 0.5 <= w.hi and close(w.mid, 0.5, 1e-9), w
    c = sr.crawford_number([[1, 1], [0, 1]])
    assert close(c.mid, 0.5, 1e-8), c

    space = sr.SemiHilbertSpace([[2, 0], [0, 0]])
    assert (space.dim, space.rank) == (2, 1)
    t = [[1, 0], [5, 3]]
    assert space.admits_a_adjoint(t) and space.is_a_bounded(t)
    assert close(space.op_seminorm(t).mid, 1.0, 1e-9)
    assert close(space.numerical_radius(t).mid, 1.0, 1e-9)
    assert close(space.a_norm([1, 7]), math.sqrt(2), 1e-12)
    sharp = space.sharp(t)
    assert all(close(abs(z), v, 1e-12) for z, v in zip(sharp[0], [1, 0]))

    try:
        space.sharp([[0, 1], [0, 0]])
    except sr.MembershipError:
        pass
    else:
        raise AssertionError("operator outside B_A was accepted")

    ids = [d["id"] for d in sr.catalog()]
    assert ids == [f"C{k}" for k in range(1, 24)], ids

    ident = sr.SemiHilbertSpace([[1, 0], [0, 1]])
    results = sr.run_checks(ident, {"T": [[0, 1], [0, 0]], "S": [[1, 0], [0, 1]]}, checks="C5")
    assert close(results[0]["slack"], math.sqrt(2) - 1, 1e-9), results[0]

    report = sr.run_campaign({"dims": [2], "trials": 2, "seed": 3}, threads=1)
    assert report["schema_version"] == 1
    assert report["totals"]["violations"] == 0

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "bad.json"
        path.write_text('{"dim": 2, "A": {"re": [[1, 0], [0, 1]]}, "operators": {"T": {"re": [[0, "x"]]}}}')
        try:
            sr.verify_instance(str(path))
        except sr.ParseError as e:
            assert "operators.T" in str(e), e
        else:
            raise AssertionError("malformed instance was accepted")

    print(json.dumps({"omega": w.mid, "crawford": c.mid, "checks": len(ids), "trials": report["totals"]["trials"]}))
    print("smoke test passed")


if __name__ == "__main__":
    main()
