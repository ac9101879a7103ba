"""End-to-end checks of the wscan command line: exit codes and report schema."""

import json
import shutil
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

import jsonschema

WSCAN = Path(sys.argv.pop(1)).resolve()
ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
SCHEMA = json.loads((ROOT / "data" / "report.schema.json").read_text())


def run(*args, env=None):
    return subprocess.run([str(WSCAN), *map(str, args)], capture_output=True, text=True, timeout=120, env=env)


class ExitCodes(unittest.TestCase):
    def test_clean_extension_exits_zero(self):
        r = run("scan", "--ext", FIXTURES / "static" / "xss-neg-pathname")
        self.assertEqual(r.returncode, 0, r.stderr)

    def test_findings_exit_one(self):
        r = run("scan", "--ext", FIXTURES / "static" / "crypto-weak-pbkdf2")
        self.assertEqual(r.returncode, 1, r.stderr)

    def test_missing_extension_exits_two(self):
        r = run("scan", "--ext", "/nonexistent/ext")
        self.assertEqual(r.returncode, 2)
        self.assertIn("wscan:", r.stderr)

    def test_bad_trace_exits_two(self):
        with tempfile.NamedTemporaryFile("w", suffix=".jsonl") as f:
            f.write("garbage\n")
            f.flush()
            r = run("replay", "--trace", f.name)
        self.assertEqual(r.returncode, 2)

    def test_full_mode_without_webdriver_exits_two(self):
        env = {k: v for k, v in __import__("os").environ.items() if k != "WR_WEBDRIVER_URL"}
        r = run("scan", "--ext", FIXTURES / "replay" / "extension", "--mode", "full", env=env)
        self.assertEqual(r.returncode, 2)

    def test_corpus_mismatch_exits_two(self):
        with tempfile.TemporaryDirectory() as d:
            shutil.copytree(FIXTURES / "static" / "crypto-cbc-mode", Path(d) / "cbc")
            (Path(d) / "corpus.json").write_text(
                json.dumps({"fixtures": [{"name": "cbc", "path": "cbc", "seeded_vulns": ["xss"]}]}))
            r = run("corpus", "--dir", d)
            self.assertEqual(r.returncode, 2, r.stdout)
            self.assertIn("DIFFERS", r.stdout)
            (Path(d) / "corpus.json").write_text(
                json.dumps({"fixtures": [{"name": "cbc", "path": "cbc",
                                          "seeded_vulns": ["defective_cryptography"]}]}))
            r = run("corpus", "--dir", d)
            self.assertEqual(r.returncode, 1, r.stdout)


class Schema(unittest.TestCase):
    def validate(self, text):
        report = json.loads(text)
        jsonschema.validate(report, SCHEMA)
        return report

    def test_replay_report(self):
        r = run("replay", "--trace", FIXTURES / "replay" / "trace.jsonl", "--format", "json")
        self.assertEqual(r.returncode, 1, r.stderr)
        report = self.validate(r.stdout)
        self.assertEqual(len(report["findings"]), 6)

    def test_every_static_fixture(self):
        for d in sorted((FIXTURES / "static").iterdir()):
            with self.subTest(fixture=d.name):
                r = run("scan", "--ext", d, "--format", "json")
                self.assertIn(r.returncode, (0, 1), r.stderr)
                self.validate(r.stdout)

    def test_report_file_matches_stdout(self):
        with tempfile.TemporaryDirectory() as d:
            out = Path(d) / "report.json"
            r = run("scan", "--ext", FIXTURES / "static" / "composite-war-xss", "--report", out)
            self.assertEqual(r.returncode, 1)
            report = self.validate(out.read_text())
            self.assertEqual(sorted(f["category"] for f in report["findings"]), ["clickjacking", "xss"])


if __name__ == "__main__":
    unittest.main(verbosity=2)
