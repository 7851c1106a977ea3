"""Smoke tests for the python bindings (run by ctest with PYTHONPATH set)."""

import tempfile

import bsdekit


def check(label, ok):
    status = "ok" if ok else "FAIL"
    print(f"  {label}: {status}")
    if not ok:
        raise SystemExit(f"python smoke failed at: {label}")


def main():
    check("conjugate exponent", bsdekit.holder_conjugate(2.0) == 2.0)
    check(
        "conjugate rejects theta <= 1",
        _raises(ValueError, bsdekit.holder_conjugate, 1.0),
    )

    root = bsdekit.implicit_step(1.0, 1.0, lambda y: -y ** 3)
    check("implicit step cubic root", abs(root - 0.6823278038280193) < 1e-9)

    cf = bsdekit.closed_form_geometric(1.0, 2.0, 1.0, 0.0)
    check("closed form value at t=0", abs(cf["y"] - 1.0) < 1e-9)
    check("inventory ratio at t=0", abs(cf["inventory_ratio"] - 1.0) < 1e-12)

    names = bsdekit.bundled_names()
    check("bundled preset count", len(names) == 7)

    cfg = bsdekit.bundled_config("constant-truncated")
    check("preset round trip", cfg["model"]["family"] == "constant")

    with tempfile.TemporaryDirectory() as tmp:
        cfg["output"]["dir"] = tmp
        report = bsdekit.run("solve", cfg)
        # Truncation at l0 = 0.25 over horizon 1: value 0.25 / 1.25 = 0.2.
        check("solve value", abs(report["y0"] - 0.2) < 1e-3)
        check("solve report shape", report["command"] == "solve")

    check("mollified driver gap", bsdekit.mollified_gap(128) <= 0.05)
    check(
        "config error maps to ValueError",
        _raises(ValueError, bsdekit.bundled_config, "nope"),
    )
    print("python smoke: all checks passed")


def _raises(exc, fn, *args):
    try:
        fn(*args)
    except exc:
        return True
    except Exception:
        return False
    return False


if __name__ == "__main__":
    main()
