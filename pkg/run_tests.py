#!/usr/bin/env python3
"""
Test runner for adaspot.

Runs the unittest suites under tests/ with the project root on the Python
path.  ``--slow`` sets ADASPOT_SLOW so the long Monte Carlo checks (full
trial counts, m up to 2^40) run as well; ``-k`` restricts discovery to
matching test files.
"""

import argparse
import os
import sys
import time
import unittest


def run_tests(pattern="test*.py", slow=False, verbosity=2):
    """Run the suite and return the number of errors plus failures."""
    start_time = time.time()

    project_root = os.path.dirname(os.path.abspath(__file__))
    if project_root not in sys.path:
        sys.path.insert(0, project_root)
    if slow:
        os.environ["ADASPOT_SLOW"] = "1"

    print("=" * 70)
    print(f"Running adaspot tests from {project_root}")
    print(f"  pattern: {pattern}   slow checks: {'on' if slow else 'off'}")
    print("=" * 70)

    suite = unittest.TestLoader().discover(os.path.join(project_root, "tests"), pattern=pattern)
    result = unittest.TextTestRunner(verbosity=verbosity).run(suite)

    elapsed_time = time.time() - start_time
    print("\n" + "=" * 70)
    print("Test Summary:")
    print(f"  Tests run: {result.testsRun}")
    print(f"  Skipped: {len(result.skipped)}")
    print(f"  Errors: {len(result.errors)}")
    print(f"  Failures: {len(result.failures)}")
    print(f"  Time elapsed: {elapsed_time:.2f} seconds")
    print("=" * 70)

    for title, items in (("Errors", result.errors), ("Failures", result.failures)):
        if items:
            print(f"\n{title}:")
            for test, trace in items:
                print(f"\n{test}:")
                print(trace)

    return len(result.errors) + len(result.failures)


def main(argv=None):
    parser = argparse.ArgumentParser(description="Run the adaspot test suite")
    parser.add_argument("-k", "--pattern", default="test*.py", help="test file pattern")
    parser.add_argument("--slow", action="store_true", help="include the long Monte Carlo checks")
    parser.add_argument("-q", "--quiet", action="store_true")
    args = parser.parse_args(argv)
    return run_tests(args.pattern, args.slow, 1 if args.quiet else 2)


if __name__ == "__main__":
    sys.exit(main())
