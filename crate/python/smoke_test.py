#!/usr/bin/env python3
"""Smoke test for the wallcross Python bindings.

Builds the extension with cargo (release), loads it under its module name
and drives a few commands end to end. Exits non-zero on the first failure.

    python3 python/smoke_test.py [--no-build]
"""
import importlib.util
import json
import math
import pathlib
import shutil
import subprocess
import sys
import sysconfig
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "crates" / "wallcross" / "configs"


def load_module():
    if "--no-build" not in sys.argv:
        subprocess.run(["cargo", "build", "--release", "-p", "wallcross-py"], cwd=ROOT, check=True)
    lib = ROOT / "target" / "release" / "libwallcross_py.so"
    if not lib.exists():
        sys.exit(f"extension not found at {lib}")
    target = pathlib.Path(tempfile.mkdtemp()) / ("wallcross_py" + sysconfig.get_config_var("EXT_SUFFIX"))
    shutil.copy(lib, target)
    spec = importlib.util.spec_from_file_location("wallcross_py", target)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def main():
    wc = load_module()
    assert "spectrum" in wc.COMMANDS, wc.COMMANDS

    code, text = wc.run("spectrum", (CONFIGS / "a1_spectrum.toml").read_text())
    report = json.loads(text)
    assert code == 0 and report["schema"] == wc.REPORT_SCHEMA, report
    rays = report["rays"]
    assert len(rays) == 1 and abs(rays[0]["abs_z"] - math.pi / 2) < 1e-6, rays
    print("spectrum: one ray, |Z| =", rays[0]["abs_z"])

    pentagon = (CONFIGS / "pentagon.toml").read_text()
    code, text = wc.run("verify-wcf", pentagon)
    assert code == 0 and json.loads(text)["status"] == "PASS", text
    code, text = wc.run("verify-wcf", pentagon, order="ccw")
    assert code == 1 and json.loads(text)["status"] == "FAIL", text
    print("verify-wcf: pentagon PASS (cw), FAIL (ccw)")

    code, text = wc.run("verify-wall")
    assert code == 0, text
    print("verify-wall:", len(json.loads(text)["models"]), "models PASS")

    code, text = wc.run("fg", (CONFIGS / "fg.toml").read_text())
    report = json.loads(text)
    assert code == 0 and report["roundtrip"] == report["coordinates"], report
    print("fg: roundtrip", report["coordinates"])

    svg, saddles = wc.network_svg([(-1.0, 0.0), (0.0, 0.0), (1.0, 0.0)], math.pi / 2)
    assert saddles == 1 and svg.startswith("<svg"), saddles
    print("network_svg: 1 saddle polyline,", len(svg), "bytes")

    try:
        wc.run("spectrum", "bogus = 1\n")
    except ValueError as e:
        print("config error raised:", e)
    else:
        raise AssertionError("invalid config accepted")

    print("smoke test OK")


if __name__ == "__main__":
    main()
