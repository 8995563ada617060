"""Smoke test for the roughinv_py extension.

Build and install first:

    pip install --no-build-isolation ./crates/python
"""

import json
import math
import tempfile
from pathlib import Path

import roughinv_py as ri


def check_hankel():
    h0, h1 = ri.hankel1(1.0)
    assert abs(h0 - complex(0.76519768655796655145, 0.088256964215676957983)) < 1e-12
    assert abs(h1 - complex(0.44005058574493351596, -0.78121282130028871655)) < 1e-12
    try:
        ri.hankel1(complex(1.0, -0.5))
    except ValueError:
        pass
    else:
        raise AssertionError("lower half plane accepted")


def check_surface(tmp):
    s = ri.Surface.gaussian(0.7, 0.07, seed=3)
    assert len(s) == 2049 and s.domain_length == 16.0
    assert s.height(-8.0) == 0.0 and s.height(8.0) == 0.0
    path = tmp / "surface.csv"
    s.write_csv(str(path))
    back = ri.Surface.read_csv(str(path))
    assert back.heights() == s.heights()
    flat = ri.Surface(16.0, [0.0] * 257)
    assert flat.slope(0.3) == 0.0
    return s


def check_forward(surface):
    xs, u = ri.scattered(surface, 300e6, receivers=(-2.0, 2.0, 0.5, 4.25))
    assert len(xs) == len(u) == 9
    assert all(math.isfinite(abs(v)) and abs(v) > 0 for v in u)
    again = ri.scattered(surface, 300e6, receivers=(-2.0, 2.0, 0.5, 4.25))
    assert again == (xs, u)


def check_scenario(tmp):
    assert "convergence" in ri.Scenario.presets()
    cfg = json.loads(ri.Scenario.preset("convergence", 2).to_json())
    cfg["schedule"] = {"start": 325e6, "step": 50e6, "end": 375e6}
    cfg["receivers"]["step"] = 0.5
    scenario = ri.Scenario.from_json(json.dumps(cfg))
    assert scenario.frequencies == [325e6, 375e6]

    data = scenario.synthesize()
    assert data.frequencies == [325e6, 375e6]
    clean = ri.Scenario.from_json(json.dumps({**cfg, "noise_level": 0.0})).synthesize()
    for a, b in zip(data.values(0), clean.values(0)):
        assert abs(abs(a - b) - 0.05 * abs(b)) <= 1e-12 * abs(b)

    report = scenario.run()
    assert report.failures == 0
    curve = report.err_curve()
    assert [c[1] for c in curve] == [325e6, 375e6]
    assert 0.0 < report.final_errs[0] < 1.0

    replay = scenario.reconstruct(ri.Measurements.from_json(data.to_json()))
    assert replay.err_curve() == curve

    paths = report.write(str(tmp / "report"))
    assert any(Path(p).name == "report.json" for p in paths)
    assert ri.Report.read(str(tmp / "report")).to_json() == report.to_json()

    try:
        ri.Scenario.preset("nope")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown preset accepted")


def main():
    check_hankel()
    with tempfile.TemporaryDirectory() as d:
        tmp = Path(d)
        surface = check_surface(tmp)
        check_forward(surface)
        check_scenario(tmp)
    print("roughinv_py smoke test passed")


if __name__ == "__main__":
    main()
