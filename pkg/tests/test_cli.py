import json
import subprocess
import sys

import pytest

from sbcn.cli import main
from sbcn.evaluation import read_rows
from sbcn.model import BinaryDataset, Dag


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def generated(tmp_path):
    data, truth = tmp_path / "data.csv", tmp_path / "truth.json"
    assert run("generate", "--topology", "tree", "--nodes", 5, "--samples", 50, "--noise", 0,
               "--seed", 1, "--out", data, "--truth", truth) == 0
    return data, truth


class TestGenerate:
    def test_outputs(self, generated):
        data, truth = generated
        d = BinaryDataset.from_csv(data.read_text())
        assert (d.m, d.n) == (50, 5)
        doc = json.loads(truth.read_text())
        assert len(Dag.from_document(doc)) == 4
        assert doc["config"]["seed"] == 1 and doc["version"]
        assert data.read_text().startswith("# sbcn ")

    def test_missing_nodes_is_usage_error(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            run("generate", "--topology", "tree", "--samples", 5, "--out", tmp_path / "x.csv")
        assert exc.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_byte_identical(self, tmp_path, generated):
        data, truth = generated
        d2, t2 = tmp_path / "d2.csv", tmp_path / "t2.json"
        run("generate", "--topology", "tree", "--nodes", 5, "--samples", 50, "--noise", 0,
            "--seed", 1, "--out", d2, "--truth", t2)
        assert d2.read_bytes() == data.read_bytes()
        assert t2.read_bytes() == truth.read_bytes()

    def test_unwritable_output(self, tmp_path):
        assert run("generate", "--topology", "tree", "--nodes", 3, "--samples", 5,
                   "--out", tmp_path / "missing" / "x.csv") == 1


class TestInfer:
    def test_mask_closure(self, generated, tmp_path, capsys):
        data, _ = generated
        out = tmp_path / "g.json"
        assert run("infer", "--data", data, "--search", "hc", "--score", "bic", "--suppes", "on",
                   "--out", out) == 0
        report = capsys.readouterr().out
        for field in ("score=", "kind=bic", "mask_size=", "moves=", "wall_time_ms="):
            assert field in report
        from sbcn.suppes import prima_facie_mask
        mask = prima_facie_mask(BinaryDataset.from_csv(data.read_text()))
        assert mask.contains(Dag.from_document(json.loads(out.read_text())))

    @pytest.mark.parametrize("search", ["hc", "tabu", "ga"])
    def test_byte_identical(self, generated, tmp_path, search):
        data, _ = generated
        outs = []
        for i in range(2):
            out = tmp_path / f"{search}{i}.json"
            run("infer", "--data", data, "--search", search, "--seed", 7, "--ga-gens", 20,
                "--out", out)
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_unconstrained_loglik_is_denser(self, tmp_path, capsys):
        denser = 0
        for seed in range(50):
            data = tmp_path / f"d{seed}.csv"
            run("generate", "--topology", "dag_disj_multi", "--nodes", 10, "--samples", 100,
                "--noise", 0.05, "--seed", seed, "--out", data)
            arcs = {}
            for flag in ("on", "off"):
                out = tmp_path / f"g{seed}{flag}.json"
                run("infer", "--data", data, "--search", "hc", "--score", "loglik",
                    "--suppes", flag, "--out", out)
                arcs[flag] = len(json.loads(out.read_text())["arcs"])
            denser += arcs["off"] >= arcs["on"]
        capsys.readouterr()
        assert denser >= 45

    def test_single_variable(self, tmp_path, capsys):
        data = tmp_path / "one.csv"
        data.write_text("a\n1\n0\n1\n")
        out = tmp_path / "g.json"
        assert run("infer", "--data", data, "--out", out) == 0
        doc = json.loads(out.read_text())
        assert doc["arcs"] == [] and doc["score"] <= 0

    def test_malformed_cell(self, tmp_path, capsys):
        data = tmp_path / "bad.csv"
        data.write_text("a,b\n0,1\n1,7\n")
        assert run("infer", "--data", data) == 1
        err = capsys.readouterr().err
        assert "line 3" in err and "column 2" in err

    def test_missing_file(self, tmp_path):
        assert run("infer", "--data", tmp_path / "nope.csv") == 1


class TestEval:
    def test_self_eval(self, generated, capsys):
        _, truth = generated
        assert run("eval", "--truth", truth, "--inferred", truth) == 0
        row = read_rows(capsys.readouterr().out)[0]
        assert row["accuracy"] == row["sensitivity"] == row["specificity"] == "1.0"

    def test_one_arc_vs_empty(self, tmp_path, capsys):
        t, i = tmp_path / "t.json", tmp_path / "i.json"
        t.write_text(json.dumps(Dag(3, [(0, 1)]).to_document()))
        i.write_text(json.dumps(Dag(3).to_document()))
        assert run("eval", "--truth", t, "--inferred", i) == 0
        row = read_rows(capsys.readouterr().out)[0]
        assert float(row["accuracy"]) == pytest.approx(5 / 6)
        assert float(row["sensitivity"]) == 0.0 and float(row["specificity"]) == 1.0

    def test_mismatch(self, tmp_path, capsys):
        t, i = tmp_path / "t.json", tmp_path / "i.json"
        t.write_text(json.dumps(Dag(3).to_document()))
        i.write_text(json.dumps(Dag(2).to_document()))
        assert run("eval", "--truth", t, "--inferred", i) == 1
        assert "differ" in capsys.readouterr().err


def write_grid(path, **over):
    grid = dict(topologies=["tree"], node_counts=[5], sample_sizes=[40], noise_levels=[0.0],
                searches=["hc"], scores=["bic"], suppes=["on"], replicates=1, base_seed=0)
    grid.update(over)
    path.write_text(json.dumps(grid))
    return path


class TestBenchmark:
    def test_one_cell(self, tmp_path):
        cfg = write_grid(tmp_path / "g.json")
        out = tmp_path / "r.csv"
        assert run("benchmark", "--config", cfg, "--out", out, "--workers", 1, "-q") == 0
        text = out.read_text()
        assert len(read_rows(text)) == 1
        assert text.startswith("# sbcn 0.1.0 benchmark\n# config ")

    def test_product_rows_and_rerun(self, tmp_path):
        cfg = write_grid(tmp_path / "g.json", topologies=["tree", "forest"],
                         noise_levels=[0.0, 0.1], replicates=3)
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        summary = tmp_path / "s.csv"
        assert run("benchmark", "--config", cfg, "--out", out1, "--summary", summary, "-q") == 0
        assert run("benchmark", "--config", cfg, "--out", out2, "--workers", 2, "-q") == 0
        a, b = read_rows(out1.read_text()), read_rows(out2.read_text())
        assert len(a) == 12
        for ra, rb in zip(a, b):
            ra.pop("wall_time_ms"), rb.pop("wall_time_ms")
        assert a == b
        assert len(read_rows(summary.read_text())) == 4

    def test_failures_set_exit_code(self, tmp_path):
        cfg = write_grid(tmp_path / "g.json", node_counts=[0])
        assert run("benchmark", "--config", cfg, "--out", tmp_path / "r.csv", "-q") == 1
        assert read_rows((tmp_path / "r.csv").read_text())[0]["error"]

    def test_bad_config(self, tmp_path):
        cfg = tmp_path / "g.json"
        cfg.write_text('{"topologies": []}')
        assert run("benchmark", "--config", cfg, "--out", tmp_path / "r.csv") == 1


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "sbcn", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "sbcn" in out.stdout
