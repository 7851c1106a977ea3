"""End-to-end checks of the command-line binary.

Usage: python cli_checks.py <path-to-cli> <source-dir>
Run by ctest; prints one line per check and exits nonzero on failure.
"""

import filecmp
import json
import pathlib
import subprocess
import sys
import tempfile

FAILURES = []


def check(label, ok, extra=""):
    status = "ok" if ok else "FAIL"
    print(f"  {label}: {status}{' ' + extra if extra and not ok else ''}")
    if not ok:
        FAILURES.append(label)


def run(cli, *args):
    return subprocess.run([cli, *args], capture_output=True, text=True,
                          timeout=240)


def main():
    cli = sys.argv[1]
    src = pathlib.Path(sys.argv[2])
    config = src / "configs" / "constant.json"
    golden = float((src / "tests" / "golden" /
                    "constant_solve_y0.txt").read_text().strip())

    r = run(cli)
    check("no subcommand exits 64", r.returncode == 64,
          f"rc={r.returncode}")

    r = run(cli, "frobnicate")
    check("unknown subcommand exits 64", r.returncode == 64,
          f"rc={r.returncode}")

    r = run(cli, "solve", "--config", "/nonexistent/nope.json")
    check("missing config exits 2", r.returncode == 2, f"rc={r.returncode}")
    check("missing config names the path",
          "/nonexistent/nope.json" in r.stderr, r.stderr.strip())

    r = run(cli, "solve")
    check("solve without config exits 2", r.returncode == 2,
          f"rc={r.returncode}")

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        out1, out2, out4 = tmp / "run1", tmp / "run2", tmp / "run4"

        r = run(cli, "solve", "--config", str(config), "--out", str(out1),
                "--quiet")
        check("solve exits 0", r.returncode == 0,
              f"rc={r.returncode} stderr={r.stderr.strip()}")
        report_path = out1 / "solve_report.json"
        check("solve report written", report_path.is_file())
        report = json.loads(report_path.read_text())
        check("solve value matches the golden",
              abs(report["y0"] - golden) <= 1e-3,
              f"y0={report.get('y0')}")
        check("field table written", (out1 / "solve_field.csv").is_file())

        r = run(cli, "solve", "--config", str(config), "--out", str(out2),
                "--quiet")
        check("second run exits 0", r.returncode == 0)
        for name in ("solve_report.json", "solve_field.csv"):
            check(f"deterministic {name}",
                  filecmp.cmp(out1 / name, out2 / name, shallow=False))

        r = run(cli, "solve", "--config", str(config), "--out", str(out4),
                "--threads", "4", "--quiet")
        check("threaded run exits 0", r.returncode == 0)
        for name in ("solve_report.json", "solve_field.csv"):
            check(f"thread-count invariant {name}",
                  filecmp.cmp(out1 / name, out4 / name, shallow=False))

    if FAILURES:
        print(f"cli checks: {len(FAILURES)} failure(s)")
        return 1
    print("cli checks: all passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
