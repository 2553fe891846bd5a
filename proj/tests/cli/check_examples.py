"""Runs the documented free-stein command lines and compares their stated values."""

import csv
import io
import json
import subprocess
import sys
from pathlib import Path


def run(binary, args, expect_exit=0):
    proc = subprocess.run([binary, *args], capture_output=True, text=True)
    if proc.returncode != expect_exit:
        raise AssertionError(f"{args}: exit {proc.returncode}, expected {expect_exit}\n{proc.stderr}")
    return proc.stdout


def close(actual, expected, tol, what):
    if abs(actual - expected) > tol:
        raise AssertionError(f"{what}: {actual} differs from {expected} by more than {tol}")


def main(binary, fixtures):
    fx = Path(fixtures)
    checks = 0

    doc = json.loads(run(binary, ["irregularity", "--model", str(fx / "semicircular2.json"), "--dxi", "3"]))
    assert doc["schema"] == "free-stein/1"
    close(doc["sigma"], 2.0, 1e-8, "semicircular pair dimension")
    checks += 1

    doc = json.loads(run(binary, ["closed-form", "one-var", "--model", str(fx / "twopoint.json")]))
    close(doc["sigma"], 0.5, 1e-12, "two-point law dimension")
    checks += 1

    text = run(binary, ["--format", "csv", "sweep-radius", "--model", str(fx / "semicircular1.json"),
                        "--radii", "0.25,0.5,1,2"])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [float(r["parameter"]) for r in rows] == [0.25, 0.5, 1.0, 2.0]
    values = [float(r["value"]) for r in rows]
    assert values[0] > 0.1 and values[1] > 0.1, values
    close(values[2], 0.0, 1e-8, "R = 1")
    close(values[3], 0.0, 1e-8, "R = 2")
    checks += 1

    # Byte-identical reports across thread counts.
    args = ["irregularity", "--model", str(fx / "semicircle_atom.json"), "--dxi", "3"]
    assert run(binary, ["--threads", "1", *args]) == run(binary, ["--threads", "3", *args])
    checks += 1

    # Exit codes: validation errors and numerical diagnostics.
    run(binary, ["no-such-command"], expect_exit=2)
    run(binary, ["discrepancy", "--model", str(fx / "semicircular2.json"), "--xi", "(t3)"], expect_exit=2)
    run(binary, ["sweep-radius", "--model", str(fx / "semicircular1.json"), "--radii", "1,0.5"], expect_exit=2)
    partial = run(binary, ["irregularity", "--model", str(fx / "semicircle_atom.json"), "--dxi", "7",
                           "--dproj", "9"], expect_exit=3)
    assert json.loads(partial)["diagnostics"], "diagnostic run must still write its report"
    checks += 1

    print(f"{checks} CLI example groups passed")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
