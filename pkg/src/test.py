#!/usr/bin/env python3
"""Test runner for all Temperwise tests.

Discovers every *_test.py module in the src directory. The desk-scale
simulation classes (hundreds of replicates at n up to 1000) take a few
minutes; --quick skips them.

Usage:
    python test.py                     # Run all tests
    python test.py --quick             # Skip desk-scale simulations
    python test.py divergences_test    # Run one module
    python test.py TestLooOracle       # Run one test class
"""

import os
import sys
import unittest
from pathlib import Path

# Add src directory to path
sys.path.insert(0, str(Path(__file__).parent))

SRC_DIR = Path(__file__).parent

# Read by the simulation test classes
QUICK_ENV = 'TEMPERWISE_QUICK'


def run_all_tests(verbosity=2, pattern='*_test.py', failfast=False):
    """Run all tests in the src directory.

    Args:
        verbosity: Output verbosity level (0=quiet, 1=normal, 2=verbose)
        pattern: Pattern to match test files
        failfast: Stop on the first failure

    Returns:
        TestResult object
    """
    suite = unittest.TestLoader().discover(SRC_DIR, pattern=pattern)
    runner = unittest.TextTestRunner(verbosity=verbosity, failfast=failfast)
    return runner.run(suite)


def _find_class(class_name):
    """Collect a test class by name from whichever module defines it."""
    loader = unittest.TestLoader()
    suite = unittest.TestSuite()
    for module in sorted(SRC_DIR.glob('*_test.py')):
        try:
            test_module = __import__(module.stem)
        except ImportError as e:
            print(f"  ⚠ Could not import {module.stem}: {e}")
            continue
        if hasattr(test_module, class_name):
            suite.addTests(loader.loadTestsFromTestCase(
                getattr(test_module, class_name)
            ))
    return suite


def run_specific_tests(test_name, verbosity=2, failfast=False):
    """Run one test module ('models', 'models_test') or one test class.

    Args:
        test_name: Module or class name
        verbosity: Output verbosity level
        failfast: Stop on the first failure

    Returns:
        TestResult object
    """
    module_name = test_name.replace('.py', '')
    if not module_name.endswith('_test'):
        module_name += '_test'

    if (SRC_DIR / f'{module_name}.py').exists():
        suite = unittest.TestLoader().loadTestsFromName(module_name)
    else:
        suite = _find_class(test_name)
        if suite.countTestCases() == 0:
            print(f"✗ No test module or class named '{test_name}'")
            sys.exit(1)

    runner = unittest.TextTestRunner(verbosity=verbosity, failfast=failfast)
    return runner.run(suite)


def print_test_summary(result):
    """Print summary of test results.

    Args:
        result: TestResult object
    """
    print("\n" + "=" * 70)
    print("TEST SUMMARY")
    print("=" * 70)

    total = result.testsRun
    failures = len(result.failures)
    errors = len(result.errors)
    skipped = len(result.skipped)

    print(f"Total tests run: {total}")
    print(f"Successes: {total - failures - errors - skipped}")

    if failures:
        print(f"Failures: {failures}")
        for test, _ in result.failures:
            print(f"  - {test}")

    if errors:
        print(f"Errors: {errors}")
        for test, _ in result.errors:
            print(f"  - {test}")

    if skipped:
        print(f"Skipped: {skipped}")

    print("=" * 70)

    if result.wasSuccessful():
        print("✅ ALL TESTS PASSED!")
    else:
        print("❌ SOME TESTS FAILED")
        sys.exit(1)


def list_available_tests():
    """List all available test modules and classes."""
    print("\nAvailable test modules:")
    print("-" * 30)

    for test_file in sorted(SRC_DIR.glob('*_test.py')):
        print(f"  {test_file.stem}")
        try:
            test_module = __import__(test_file.stem)
        except ImportError:
            continue
        for class_name in dir(test_module):
            if class_name.startswith('Test'):
                print(f"    - {class_name}")

    print("\nUsage examples:")
    print("  python test.py                    # Run all tests")
    print("  python test.py models_test        # Run models tests")
    print("  python test.py TestRandomPairs    # Run specific test class")


def main():
    """Main entry point for test runner."""
    import argparse

    parser = argparse.ArgumentParser(
        description='Run tests for Temperwise',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog='''
Examples:
  %(prog)s                     # Run all tests
  %(prog)s --quick             # Skip desk-scale simulations
  %(prog)s -v                  # Verbose output
  %(prog)s divergences_test    # Run specific test module
  %(prog)s TestLooOracle       # Run specific test class
  %(prog)s --list              # List available tests
        '''
    )

    parser.add_argument(
        'test',
        nargs='?',
        help='Specific test module or class to run'
    )

    parser.add_argument(
        '-v', '--verbose',
        action='store_const',
        const=2,
        default=1,
        dest='verbosity',
        help='Verbose test output'
    )

    parser.add_argument(
        '-q', '--quiet',
        action='store_const',
        const=0,
        dest='verbosity',
        help='Quiet test output'
    )

    parser.add_argument(
        '--quick',
        action='store_true',
        help='Skip the desk-scale simulation classes'
    )

    parser.add_argument(
        '--list',
        action='store_true',
        help='List available test modules and classes'
    )

    parser.add_argument(
        '--failfast',
        action='store_true',
        help='Stop on first failure'
    )

    args = parser.parse_args()

    if args.quick:
        os.environ[QUICK_ENV] = '1'

    if args.list:
        list_available_tests()
        return

    print("\n" + "=" * 70)
    print("TEMPERWISE - TEST SUITE")
    print("=" * 70)

    if args.test:
        print(f"\nRunning specific tests: {args.test}")
        result = run_specific_tests(args.test, args.verbosity, args.failfast)
    else:
        print("\nRunning all tests" + (" (quick)..." if args.quick else "..."))
        result = run_all_tests(args.verbosity, failfast=args.failfast)

    print_test_summary(result)


if __name__ == '__main__':
    main()
