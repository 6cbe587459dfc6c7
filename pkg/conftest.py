# Puts the project root on sys.path (pytest rootdir conftest) so the tests'
# ``src.adaspot`` imports resolve, matching run_tests.py.
