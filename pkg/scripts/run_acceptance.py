"""Run the acceptance suite and print one PASS/FAIL line per criterion.

    python scripts/run_acceptance.py

Exits with pytest's status, so a red criterion gives a nonzero exit.
"""

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    sys.exit(pytest.main([str(ROOT / "tests" / "test_acceptance.py"), "-q", "--no-header", "-rN", "--tb=no"]))
