"""End-to-end command-line tests through temporary files."""
from __future__ import annotations

import io
import random
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

from test_engine import messy_network

from treeroute.cli import main
from treeroute.engine import build_index
from treeroute.graph import RoadNetwork, parse_dimacs_gr, write_dimacs_gr


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        rc = main(list(argv))
    return rc, out.getvalue(), err.getvalue()


def grid_with_coords(w, h, rng):
    edges = []
    vid = lambda x, y: y * w + x
    for y in range(h):
        for x in range(w):
            if x + 1 < w:
                edges.append((vid(x, y), vid(x + 1, y)))
            if y + 1 < h:
                edges.append((vid(x, y), vid(x, y + 1)))
    net = RoadNetwork(w * h, edges)
    metric = [rng.randint(100, 1000) for _ in range(net.edge_count)]
    coords = [(x * 1000, y * 1000) for y in range(h) for x in range(w)]
    return net, metric, coords


class TestLifecycle(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        root = Path(cls.tmp.name)
        rng = random.Random(77)
        cls.net, cls.metric, _, cls.island = messy_network(rng)
        cls.gr = root / "net.gr"
        cls.gr.write_text(write_dimacs_gr(cls.net, cls.metric))
        cls.idx = root / "net.idx"
        cls.mfile = root / "metric.txt"
        cls.mfile.write_text("# one weight per canonical edge id\n" +
                             "\n".join(str(int(w)) for w in cls.metric) + "\n")
        cls.pfile = root / "pairs.txt"
        pairs = [(rng.randrange(cls.net.vertex_count),
                  rng.randrange(cls.net.vertex_count)) for _ in range(12)]
        pairs += [(3, 3), (cls.island[0], 0)]
        cls.pairs = pairs
        cls.pfile.write_text("\n".join(f"{s} {t}" for s, t in pairs) + "\n")
        rc, _, err = run_cli("preprocess", "--graph", str(cls.gr),
                             "--beta", "0.25", "--seed", "1",
                             "--out", str(cls.idx))
        assert rc == 0, err
        rc, _, err = run_cli("customize", "--index", str(cls.idx),
                             "--metric", str(cls.mfile), "--theta", "2",
                             "--variant", "ee", "--k", "6", "--threads", "1")
        assert rc == 0, err

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def expected_lines(self):
        with open(self.gr) as fh:
            net, _ = parse_dimacs_gr(fh)
        cz = build_index(net, beta=0.25, seed=1).customize(
            self.metric, theta=2, variant="ee")
        lines = []
        for s, t in self.pairs:
            r = cz.path(s, t)
            if r.status != "ok":
                lines.append(r.status)
            else:
                lines.append(f"{r.distance} {len(r.path) - 1} "
                             + " ".join(str(v) for v in r.path))
        return lines

    def test_query_paths_match_library(self):
        rc, out, _ = run_cli("query", "--index", str(self.idx),
                             "--pairs", str(self.pfile))
        self.assertEqual(rc, 0)
        self.assertEqual(out.splitlines(), self.expected_lines())

    def test_distance_only_output(self):
        rc, out, _ = run_cli("query", "--index", str(self.idx),
                             "--pairs", str(self.pfile), "--distance-only")
        self.assertEqual(rc, 0)
        want = [line.split()[0] for line in self.expected_lines()]
        self.assertEqual(out.splitlines(), want)
        self.assertIn("not-indexed", out.splitlines())

    def test_verify_passes(self):
        rc, _, err = run_cli("query", "--index", str(self.idx),
                             "--pairs", str(self.pfile), "--verify")
        self.assertEqual(rc, 0)
        self.assertIn("verified", err)

    def test_threaded_query_same_output(self):
        _, base, _ = run_cli("query", "--index", str(self.idx),
                             "--pairs", str(self.pfile))
        rc, out, _ = run_cli("query", "--index", str(self.idx),
                             "--pairs", str(self.pfile), "--threads", "3")
        self.assertEqual(rc, 0)
        self.assertEqual(out, base)

    def test_batch_matches_query(self):
        _, base, _ = run_cli("query", "--index", str(self.idx),
                             "--pairs", str(self.pfile))
        for size in ("3", "1000"):
            rc, out, err = run_cli("batch", "--index", str(self.idx),
                                   "--pairs", str(self.pfile),
                                   "--batch-size", size)
            self.assertEqual(rc, 0)
            self.assertEqual(out, base)
            self.assertIn("arc reuse", err)

    def test_report(self):
        rc, out, _ = run_cli("report", "--index", str(self.idx))
        self.assertEqual(rc, 0)
        self.assertIn("section meta", out)
        self.assertIn("section labels", out)
        self.assertIn("variant: ee", out)
        self.assertIn("theta: 2", out)

    def test_customize_out_flag_keeps_original(self):
        other = Path(self.tmp.name) / "other.idx"
        rc, _, _ = run_cli("customize", "--index", str(self.idx),
                           "--metric", str(self.mfile), "--theta", "0",
                           "--variant", "bn", "--out", str(other))
        self.assertEqual(rc, 0)
        rc, out, _ = run_cli("report", "--index", str(other))
        self.assertEqual(rc, 0)
        self.assertIn("variant: bn", out)
        # original still answers with its own configuration
        rc, out, _ = run_cli("report", "--index", str(self.idx))
        self.assertIn("variant: ee", out)

    def test_metric_from_gr_file(self):
        other = Path(self.tmp.name) / "grmetric.idx"
        rc, _, err = run_cli("customize", "--index", str(self.idx),
                             "--metric", str(self.gr), "--out", str(other))
        self.assertEqual(rc, 0, err)
        rc, out, _ = run_cli("query", "--index", str(other),
                             "--pairs", str(self.pfile), "--distance-only")
        self.assertEqual(rc, 0)
        want = [line.split()[0] for line in self.expected_lines()]
        self.assertEqual([l.split()[0] for l in out.splitlines()], want)


class TestGenQueries(unittest.TestCase):
    def test_generate_then_query(self):
        rng = random.Random(5)
        net, metric, coords = grid_with_coords(10, 10, rng)
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp)
            gr, co = root / "g.gr", root / "g.co"
            gr.write_text(write_dimacs_gr(net, metric))
            co.write_text(
                f"p aux sp co {net.vertex_count}\n" +
                "\n".join(f"v {i + 1} {x} {y}"
                          for i, (x, y) in enumerate(coords)) + "\n")
            idx = root / "g.idx"
            rc, _, err = run_cli("preprocess", "--graph", str(gr),
                                 "--out", str(idx))
            self.assertEqual(rc, 0, err)
            rc, _, err = run_cli("customize", "--index", str(idx),
                                 "--metric", str(gr))
            self.assertEqual(rc, 0, err)
            qfile = root / "q.txt"
            rc, _, err = run_cli("gen-queries", "--index", str(idx),
                                 "--co", str(co), "--sets", "4",
                                 "--per-set", "5", "--l-min", "400",
                                 "--seed", "7", "--out", str(qfile))
            self.assertEqual(rc, 0, err)
            lines = qfile.read_text().splitlines()
            headers = [l for l in lines if l.startswith("#")]
            body = [l for l in lines if not l.startswith("#")]
            self.assertEqual(len(headers), 4)
            self.assertGreater(len(body), 0)
            for line in body:
                s, t = map(int, line.split())
                self.assertTrue(0 <= s < net.vertex_count)
                self.assertTrue(0 <= t < net.vertex_count)
            rc, out, _ = run_cli("query", "--index", str(idx),
                                 "--pairs", str(qfile), "--verify")
            self.assertEqual(rc, 0)
            self.assertEqual(len(out.splitlines()), len(body))


class TestErrors(unittest.TestCase):
    def test_error_paths(self):
        rng = random.Random(9)
        net, metric, _, _ = messy_network(rng)
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp)
            gr = root / "net.gr"
            gr.write_text(write_dimacs_gr(net, metric))
            idx = root / "net.idx"
            rc, _, _ = run_cli("preprocess", "--graph", str(gr),
                               "--out", str(idx))
            self.assertEqual(rc, 0)
            pfile = root / "p.txt"
            pfile.write_text("0 1\n")
            # query before customize
            rc, _, err = run_cli("query", "--index", str(idx),
                                 "--pairs", str(pfile))
            self.assertEqual(rc, 1)
            self.assertIn("no customized state", err)
            # metric with the wrong number of weights
            bad = root / "bad.txt"
            bad.write_text("5\n5\n")
            rc, _, err = run_cli("customize", "--index", str(idx),
                                 "--metric", str(bad))
            self.assertEqual(rc, 1)
            # wide records need the opt-in flag
            mfile = root / "m.txt"
            mfile.write_text("\n".join(str(int(w)) for w in metric) + "\n")
            rc, _, err = run_cli("customize", "--index", str(idx),
                                 "--metric", str(mfile), "--k", "9")
            self.assertEqual(rc, 1)
            self.assertIn("--allow-wide-records", err)
            rc, _, _ = run_cli("customize", "--index", str(idx),
                               "--metric", str(mfile), "--k", "9",
                               "--allow-wide-records")
            self.assertEqual(rc, 0)
            # corrupt index file
            data = bytearray(idx.read_bytes())
            data[-1] ^= 0xFF
            idx.write_bytes(data)
            rc, _, err = run_cli("report", "--index", str(idx))
            self.assertEqual(rc, 1)
            self.assertIn("checksum", err)
            # missing file
            rc, _, err = run_cli("query", "--index", str(root / "nope.idx"),
                                 "--pairs", str(pfile))
            self.assertEqual(rc, 1)


if __name__ == "__main__":
    unittest.main()
