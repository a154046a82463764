"""
Today's service against the 2040 targets
========================================

Runs the 2025-grade preset and the 2040 megacity preset, writes both
reports and checks them against each era's KPI targets.
"""
import tempfile
from pathlib import Path

from orbitel import scenario as sc

out = Path(tempfile.mkdtemp(prefix="orbitel_"))
for name in ("grade_2025", "megacity_2040"):
    report = sc.run(sc.load_scenario(name))
    paths = sc.emit_report(report, "csv", out / name)
    served = [r for r in report.rows if r["users_served"]]
    print(f"\n{name}: {len(report.rows)} steps, {report.summary['n_satellites']} satellites, "
          f"{len(served)} steps with service -> {paths[0]}")
    for era in ("2025", "2040"):
        print(sc.format_verdicts(sc.kpi_check(sc.load_report(out / name), sc.load_targets(era)), era))
