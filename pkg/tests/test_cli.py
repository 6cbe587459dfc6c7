import argparse
import io
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout

from src.adaspot.harness.cli import main, parse_int


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


class TestParseInt(unittest.TestCase):
    def test_forms(self):
        self.assertEqual(parse_int("17"), 17)
        self.assertEqual(parse_int("2^40"), 2 ** 40)
        self.assertEqual(parse_int("2**64"), 2 ** 64)

    def test_invalid(self):
        with self.assertRaises(argparse.ArgumentTypeError):
            parse_int("lots")


class TestCommands(unittest.TestCase):
    def test_params(self):
        code, out, _ = run_cli("params", "--p", "1", "--eps", "0.25", "--delta", "0.25", "--m", "2^40")
        self.assertEqual(code, 0)
        lines = out.splitlines()
        for expected in ("D=134283264", "R=61", "k=45", "G=180", "kstar=14",
                         "n1=10980", "n2_max=1350", "n3_max=45"):
            self.assertIn(expected, lines)

    def test_gen_then_run(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "x.txt")
            code, out, _ = run_cli("gen", "--generator", "spike:j=5", "--m", "4096", "--out", path)
            self.assertEqual(code, 0)
            self.assertIn("wrote 1 entries", out)
            code, out, _ = run_cli("run", "--vector", path, "--eps", "0.5", "--delta", "0.5")
        self.assertEqual(code, 0)
        lines = out.splitlines()
        self.assertIn("6", lines[0][len("K="):].split())
        self.assertIn("error=0.0", lines)
        self.assertIn("n2=0", lines)

    def test_trials(self):
        code, out, _ = run_cli("trials", "--eps", "0.5", "--delta", "0.5", "--m", "1024",
                               "--n-trials", "3", "--generator", "spike")
        self.assertEqual(code, 0)
        lines = out.splitlines()
        self.assertIn("trials=3", lines)
        self.assertIn("failures=0", lines)
        self.assertIn("within_bound=1", lines)

    def test_trials_on_processes(self):
        code, out, _ = run_cli("trials", "--eps", "0.5", "--delta", "0.5", "--m", "1024",
                               "--n-trials", "4", "--generator", "spike", "--workers", "2",
                               "--processes")
        self.assertEqual(code, 0)
        self.assertIn("trials=4", out.splitlines())
        self.assertIn("failures=0", out.splitlines())

    def test_sweep_csv(self):
        code, out, _ = run_cli("sweep", "--eps", "0.25", "--delta", "0.25", "--m", "2^16", "2^64")
        self.assertEqual(code, 0)
        lines = out.splitlines()
        self.assertTrue(lines[0].startswith("m,kstar,trivial,n1"))
        self.assertEqual(len(lines), 3)
        self.assertTrue(lines[2].startswith(f"{2 ** 64},18,0,10980"))

    def test_hash_lemma(self):
        code, out, _ = run_cli("lemma", "hash", "--m", "4096", "--alpha", "0.1", "--D", "1000",
                               "--n", "100")
        self.assertEqual(code, 0)
        self.assertIn("within_bound=1", out.splitlines())

    def test_hash_lemma_inclusive(self):
        code, out, _ = run_cli("lemma", "hash", "--m", "4096", "--alpha", "0.1", "--D", "1000",
                               "--n", "2000", "--inclusive")
        self.assertEqual(code, 0)
        lines = out.splitlines()
        self.assertTrue(any(line.startswith("bound=0.095") for line in lines))
        self.assertIn("within_bound=1", lines)

    def test_missing_vector_file(self):
        code, _, err = run_cli("run", "--vector", "/nonexistent/x.txt", "--eps", "0.5")
        self.assertEqual(code, 1)
        self.assertTrue(err.startswith("Error:"))

    def test_bad_parameters(self):
        code, _, err = run_cli("params", "--eps", "1.5", "--m", "100")
        self.assertEqual(code, 1)
        self.assertIn("eps", err)


if __name__ == '__main__':
    unittest.main()
