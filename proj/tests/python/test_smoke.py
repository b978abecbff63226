"""Smoke test for the python bindings; run with PYTHONPATH=<build>/python."""

import os
import tempfile

import rrhoc

CONFIG = {
    "plant": {"A": [[0.2]], "B": [[1.0]], "x0": [1.0]},
    "nodes": [
        {"C": [[1.0]], "Dbar": [[0.1]]},
        {"C": [[1.0]], "Dbar": [[0.1]]},
    ],
    "graph": {"edges": [[1, 2], [2, 1]]},
    "schedule": {"step": 0.1, "horizon": 20.0},
    "gamma": {"fixed": 50.0},
    "grid": {
        "alpha": [0.1],
        "coupling_fraction": [0.5],
        "eps": [0.1],
    },
    "battery": {"count": 5},
    "dt": 0.001,
    "seed": 1,
}


def test_protocol_helpers():
    assert rrhoc.rotate_round_robin([1, 2, 3], 1) == [3, 1, 2]
    assert rrhoc.rotate_round_robin([1, 2, 3], 3) == [1, 2, 3]
    assert rrhoc.rotate_round_robin([1, 2, 3], -1) == rrhoc.rotate_round_robin(
        [1, 2, 3], 2
    )
    delay = rrhoc.uniform_max_delay(0.1, 5.0, 2)
    assert abs(delay - 0.2) < 1e-12, delay


def test_synthesis_roundtrip():
    report = rrhoc.synthesize(CONFIG)
    assert report["feasible"] is True
    assert report["gamma"] == 50.0
    assert len(report["gains"]) == 2
    assert report["verification"]["ok"] is True

    again = rrhoc.synthesize(CONFIG)
    assert again == report, "synthesis should be deterministic"

    analysis = rrhoc.analyze(CONFIG, report)
    assert analysis["feasible"] is True

    certification = rrhoc.certify(CONFIG, report)
    assert certification["pass"] is True, certification["statement"]
    assert len(certification["scenarios"]) == 5


def test_cli_front_end():
    with tempfile.TemporaryDirectory() as tmp:
        missing = os.path.join(tmp, "missing.json")
        assert rrhoc.run("synthesize", missing, out=tmp) == 2


def main():
    test_protocol_helpers()
    test_synthesis_roundtrip()
    test_cli_front_end()
    print("python smoke: ok")


if __name__ == "__main__":
    main()
