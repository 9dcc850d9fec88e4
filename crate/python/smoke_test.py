#!/usr/bin/env python3
"""Smoke test for the pvgrid Python extension.

Builds the extension with cargo, loads it, and runs the full pipeline
against the bundled tiny3 case, checking the main invariants along the way.

Usage: python3 python/smoke_test.py
"""

import shutil
import subprocess
import sys
import sysconfig
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
BUNDLE = REPO / "cases" / "tiny3"


def build_extension(workdir: Path) -> None:
    subprocess.run(
        ["cargo", "build", "-p", "pvgrid-py", "--release"],
        cwd=REPO,
        check=True,
    )
    ext = ".pyd" if sys.platform == "win32" else ".so"
    lib = {
        "win32": "pvgrid.dll",
        "darwin": "libpvgrid.dylib",
    }.get(sys.platform, "libpvgrid.so")
    built = REPO / "target" / "release" / lib
    shutil.copy(built, workdir / f"pvgrid{ext}")
    sys.path.insert(0, str(workdir))


def main() -> int:
    with tempfile.TemporaryDirectory() as tmp:
        workdir = Path(tmp)
        build_extension(workdir)
        import pvgrid

        violations = pvgrid.validate_bundle(str(BUNDLE))
        assert violations == [], f"tiny3 should validate cleanly: {violations}"

        digest = pvgrid.bundle_hash(str(BUNDLE))
        assert len(digest) == 64 and int(digest, 16) >= 0
        assert pvgrid.bundle_hash(str(BUNDLE)) == digest, "hash must be stable"

        levels = pvgrid.sweep_levels(str(BUNDLE))
        assert levels == [0.05, 0.25, 0.45, 0.65], levels

        out = workdir / "run"
        blocks = pvgrid.partition(str(BUNDLE), str(out))
        assert blocks, "partition returned no blocks"
        per_year: dict[int, float] = {}
        for b in blocks:
            assert b.duration_fraction > 0
            per_year[b.year] = per_year.get(b.year, 0.0) + b.duration_fraction
        for year, total in per_year.items():
            assert abs(total - 1.0) < 1e-9, f"year {year} durations sum to {total}"

        plan = pvgrid.plan(str(BUNDLE), str(out))
        assert plan.status == "optimal", plan.status
        assert plan.audit_pass, f"audit residual {plan.audit_max_residual}"
        parts = (
            plan.pv_expansion_cost
            + plan.fixed_om_cost
            + plan.var_om_cost
            + plan.fuel_cost
            + plan.emission_cost
            + plan.wheeling_cost
            + plan.lost_load_cost
        )
        assert abs(parts - plan.objective) <= 1e-6 * max(abs(plan.objective), 1.0)
        assert len(plan.pv_built) == len(plan.region_ids)
        assert any(any(u > 0 for u in per_region) for per_region in plan.pv_built)

        metrics = pvgrid.sweep(str(BUNDLE), str(out))
        assert [m.level for m in metrics] == levels
        for m in metrics:
            assert m.status == "ok", f"level {m.level}: {m.status}"
            assert m.nadir_hz is not None and 55.0 < m.nadir_hz < 60.0
        dips = [60.0 - m.nadir_hz for m in metrics]
        assert dips[-1] > dips[0], f"nadir dip should grow with penetration: {dips}"

        report_path = Path(pvgrid.report(str(BUNDLE), str(out)))
        text = report_path.read_text()
        assert "Penetration sweep" in text and "Incomplete" not in text

        out2 = workdir / "run2"
        pvgrid.run_all(str(BUNDLE), str(out2))
        assert (out / "summary.csv").read_bytes() == (out2 / "summary.csv").read_bytes()

    print("smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
