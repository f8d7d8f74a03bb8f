"""
Test runner script with unit, evaluation and full-suite modes.
Runs pytest from the tests directory so pytest.ini and the reports/ paths apply.
"""

import argparse
import subprocess
import sys
from importlib import metadata
from pathlib import Path

TESTS_ROOT = Path(__file__).resolve().parent.parent
REPORTS_DIR = TESTS_ROOT / "reports"
JSON_REPORT = REPORTS_DIR / "test_results.json"

REQUIRED_PACKAGES = [
    "pytest",
    "pytest-mock",
    "pytest-cov",
    "pytest-json-report",
    "pytest-xdist",
    "numpy",
    "pydantic",
]


def run_command(cmd, description, working_dir=TESTS_ROOT):
    """Run command from ``working_dir`` and report the outcome."""
    print(f"\n{'='*50}")
    print(f"Running: {description}")
    print(f"Command: {' '.join(cmd)}")
    print(f"Working Directory: {working_dir}")
    print(f"{'='*50}")

    result = subprocess.run(cmd, capture_output=False, cwd=working_dir)

    if result.returncode != 0:
        print(f"ERROR: {description} failed with code {result.returncode}")
        return False

    print(f"SUCCESS: {description} completed")
    return True


def run_unit_tests(workers=None):
    cmd = [sys.executable, "-m", "pytest", "unit_tests/", "-m", "unit"]
    if workers:
        cmd += ["-n", str(workers)]
    return run_command(cmd, "Unit Tests")


def run_evaluation_tests():
    """Seeded end-to-end runs; slow, so never parallelized."""
    cmd = [sys.executable, "-m", "pytest", "evaluation_tests/", "-m", "evaluation"]
    return run_command(cmd, "Evaluation Tests")


def run_all_tests():
    REPORTS_DIR.mkdir(parents=True, exist_ok=True)
    success = run_command([sys.executable, "-m", "pytest"], "Complete Test Suite")
    if success:
        if JSON_REPORT.exists():
            print(f"JSON report created at: {JSON_REPORT}")
        else:
            print(f"Warning: JSON report not found at expected location: {JSON_REPORT}")
    return success


def run_specific_test(test):
    return run_command([sys.executable, "-m", "pytest", test], f"Test {test}")


def setup_test_environment():
    print("Setting up test environment...")
    REPORTS_DIR.mkdir(parents=True, exist_ok=True)

    requirements = TESTS_ROOT / "requirements.txt"
    if not requirements.exists():
        print(f"No test requirements file found at {requirements}")
        return False
    cmd = [sys.executable, "-m", "pip", "install", "-r", str(requirements)]
    if not run_command(cmd, "Install Test Dependencies"):
        return False

    print("Test environment setup complete")
    return True


def check_dependencies():
    missing = []
    for package in REQUIRED_PACKAGES:
        try:
            metadata.version(package)
        except metadata.PackageNotFoundError:
            missing.append(package)

    if missing:
        print(f"Missing required packages: {', '.join(missing)}")
        print("Run 'python scripts/run_tests.py setup' to install dependencies")
        return False
    return True


def main():
    parser = argparse.ArgumentParser(description="hafrm test runner")
    parser.add_argument("mode", choices=["unit", "evaluation", "all", "setup"], help="Test execution mode")
    parser.add_argument("--test", help="Specific test file or node id to run")
    parser.add_argument("--workers", type=int, help="Parallel workers for unit tests (pytest-xdist)")
    parser.add_argument("--check-deps", action="store_true", help="Check that the test dependencies are installed")
    args = parser.parse_args()

    if args.check_deps:
        if check_dependencies():
            print("All required dependencies are installed")
            sys.exit(0)
        sys.exit(1)

    if args.mode == "setup":
        sys.exit(0 if setup_test_environment() else 1)

    if not check_dependencies():
        print("Some dependencies are missing. Run setup first.")
        sys.exit(1)

    if args.test:
        sys.exit(0 if run_specific_test(args.test) else 1)

    if args.mode == "unit":
        success = run_unit_tests(args.workers)
    elif args.mode == "evaluation":
        success = run_evaluation_tests()
    else:
        success = run_all_tests()
    sys.exit(0 if success else 1)


if __name__ == "__main__":
    main()
