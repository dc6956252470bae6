"""Every acceptance criterion at its stated tolerance, one summary line each."""
import subprocess
import sys
import time

import pytest

from qtpoles import acceptance

from conftest import ACCEPTANCE_LINES

BUDGET_SECONDS = 60.0


@pytest.mark.parametrize("criterion", sorted(acceptance.CRITERIA))
def test_criterion(criterion):
    results = acceptance.run_checks(criterion=criterion)
    assert results
    passed = all(r.passed for r in results)
    line = f"criterion {criterion} ({acceptance.CRITERIA[criterion]}): {'PASS' if passed else 'FAIL'}"
    detail = "; ".join(f"{r.id} {r.status} measured={r.measured:.3g} tol={r.tolerance:.3g}"
                       if r.measured is not None else f"{r.id} {r.status} {r.details.get('error', '')}"
                       for r in results)
    ACCEPTANCE_LINES.append(line)
    print(line)
    print("    " + detail)
    assert passed, detail


def test_verify_fits_the_time_budget():
    t0 = time.perf_counter()
    res = subprocess.run([sys.executable, "-m", "qtpoles.cli", "verify", "--no-timing"],
                         capture_output=True, text=True, timeout=2 * BUDGET_SECONDS)
    elapsed = time.perf_counter() - t0
    line = f"verify wall time: {elapsed:.1f} s (budget {BUDGET_SECONDS:.0f} s), exit {res.returncode}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert res.returncode == 0, res.stdout[-2000:] + res.stderr[-2000:]
    assert elapsed < BUDGET_SECONDS
