"""Command line contract: exit codes, error prefix, deterministic outputs."""
import json

import pytest

from stormcrew.cli import ERROR_PREFIX, main


def run(args):
    return main(args)


class TestGen:
    def test_writes_scenario(self, tmp_path, capsys):
        out = tmp_path / "scn.json"
        code = run(["gen", "--seed", "5", "--crews", "2", "--outages", "6",
                    "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert len(doc["crews"]) == 2 and len(doc["tickets"]) == 6
        assert "scn-5-2x6" in capsys.readouterr().out

    def test_byte_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run(["gen", "--seed", "9", "--out", str(a)])
        run(["gen", "--seed", "9", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()


class TestReplay:
    @pytest.fixture()
    def scenario_file(self, tmp_path):
        path = tmp_path / "scn.json"
        run(["gen", "--seed", "5", "--crews", "2", "--outages", "8",
             "--out", str(path)])
        return path

    def test_routes_byte_deterministic(self, tmp_path, scenario_file, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run(["replay", "--scenario", str(scenario_file), "--policy", "opt",
                    "--out", str(a), "--timing", str(tmp_path / "t1.json")]) == 0
        assert run(["replay", "--scenario", str(scenario_file), "--policy", "opt",
                    "--out", str(b), "--timing", str(tmp_path / "t2.json")]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert "Optimized" in capsys.readouterr().out

    def test_csv_output(self, tmp_path, scenario_file):
        csv_path = tmp_path / "routes.csv"
        run(["replay", "--scenario", str(scenario_file), "--policy", "bau",
             "--out", str(tmp_path / "r.json"), "--csv", str(csv_path)])
        header = csv_path.read_text().splitlines()[0]
        assert header == "crew,position,outage,arrive,complete,customers"

    def test_timing_segregated(self, tmp_path, scenario_file):
        out = tmp_path / "r.json"
        timing = tmp_path / "timing.json"
        run(["replay", "--scenario", str(scenario_file), "--policy", "opt",
             "--out", str(out), "--timing", str(timing)])
        assert "solve_seconds" not in out.read_text()
        stats = json.loads(timing.read_text())["solve_cycles"]
        assert stats and all("solve_seconds" in s for s in stats)


class TestCompare:
    def test_emits_full_bundle(self, tmp_path, capsys):
        scn = tmp_path / "scn.json"
        run(["gen", "--seed", "11", "--crews", "3", "--outages", "12",
             "--out", str(scn)])
        out_dir = tmp_path / "cmp"
        assert run(["compare", "--scenario", str(scn), "--out-dir", str(out_dir)]) == 0
        for name in ("bau_routes.json", "opt_routes.json", "bau_routes.csv",
                     "opt_routes.csv", "metrics.json", "metrics.csv",
                     "catr_bau.csv", "catr_opt.csv", "timing.json"):
            assert (out_dir / name).exists(), name

        metrics = json.loads((out_dir / "metrics.json").read_text())
        assert metrics["optimized"]["base_policy"] == "BAU"
        # both CATR files end with the same grand total
        bau_total = (out_dir / "catr_bau.csv").read_text().strip().splitlines()[-1]
        opt_total = (out_dir / "catr_opt.csv").read_text().strip().splitlines()[-1]
        assert bau_total == opt_total
        assert "saved" in capsys.readouterr().out


class TestSolveOnce:
    def test_prints_pipelines(self, tmp_path, capsys):
        from helpers import crew, snap, ticket
        from stormcrew.model import snapshot_to_doc

        doc = snapshot_to_doc(snap(
            [ticket("r1", north=500, customers=3), ticket("r2", north=1500, customers=3)],
            [crew("c1")],
        ))
        path = tmp_path / "snap.json"
        path.write_text(json.dumps(doc))
        assert run(["solve-once", "--snapshot", str(path)]) == 0
        out = capsys.readouterr().out
        assert "snapshot snap-1" in out
        assert "c1[1] r1" in out
        assert "rank=1" in out

    def test_plan_file_output(self, tmp_path):
        from helpers import crew, snap, ticket
        from stormcrew.model import snapshot_to_doc

        path = tmp_path / "snap.json"
        path.write_text(json.dumps(snapshot_to_doc(snap([ticket("r1")], [crew("c1")]))))
        plan_path = tmp_path / "plan.json"
        run(["solve-once", "--snapshot", str(path), "--out", str(plan_path)])
        plan = json.loads(plan_path.read_text())
        assert plan["pipelines"]["c1"][0]["outage_id"] == "r1"


class TestExitCodes:
    def test_usage_error_is_one(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["replay", "--policy", "opt"])  # missing --scenario and --out
        assert exc.value.code == 1
        assert ERROR_PREFIX in capsys.readouterr().err

    def test_unknown_subcommand_is_one(self):
        with pytest.raises(SystemExit) as exc:
            run(["transmogrify"])
        assert exc.value.code == 1

    def test_missing_input_file_is_two(self, tmp_path, capsys):
        code = run(["replay", "--scenario", str(tmp_path / "nope.json"),
                    "--policy", "opt", "--out", str(tmp_path / "o.json")])
        assert code == 2
        assert capsys.readouterr().err.startswith(ERROR_PREFIX)

    def test_malformed_scenario_is_two(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code = run(["replay", "--scenario", str(bad), "--policy", "opt",
                    "--out", str(tmp_path / "o.json")])
        assert code == 2
        err = capsys.readouterr().err
        assert err.startswith(ERROR_PREFIX)

    def test_invalid_snapshot_is_two(self, tmp_path, capsys):
        bad = tmp_path / "snap.json"
        bad.write_text(json.dumps({"snapshot_id": "x"}))
        assert run(["solve-once", "--snapshot", str(bad)]) == 2
        assert "SchemaError" in capsys.readouterr().err

    def test_mismatched_offline_flags_are_two(self, tmp_path, capsys):
        scn = tmp_path / "scn.json"
        run(["gen", "--seed", "2", "--out", str(scn)])
        code = run(["replay", "--scenario", str(scn), "--policy", "opt",
                    "--out", str(tmp_path / "o.json"),
                    "--offline-nodes", str(tmp_path / "n.csv")])
        assert code == 2
        assert "ConfigError" in capsys.readouterr().err


class TestOfflineMatrixFlow:
    def test_solve_once_with_matrix_files(self, tmp_path, capsys):
        from helpers import YARD, crew, pt, snap, ticket
        from stormcrew.model import snapshot_to_doc

        dest = pt(0, 2000)
        snap_path = tmp_path / "snap.json"
        snap_path.write_text(json.dumps(snapshot_to_doc(
            snap([ticket("r1", at=dest)], [crew("c1")])
        )))
        nodes = tmp_path / "nodes.csv"
        nodes.write_text(
            "node_id,lat,lon\n"
            f"Y,{YARD.lat},{YARD.lon}\n"
            f"D,{dest.lat},{dest.lon}\n"
        )
        matrix = tmp_path / "matrix.csv"
        matrix.write_text("from_id,to_id,seconds\nY,D,300\nD,Y,300\n")
        assert run(["solve-once", "--snapshot", str(snap_path),
                    "--offline-nodes", str(nodes),
                    "--offline-matrix", str(matrix)]) == 0
        out = capsys.readouterr().out
        assert "τ=5" in out  # 300 s = 5 minutes via the offline matrix
