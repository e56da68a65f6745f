from __future__ import annotations

import csv

import pytest

from robustmax.cli import CSV_HEADER, RunRecord, main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def gen_args(path, seed=7, nodes=9, edges=12, scenarios=2, sources=3, budget=14):
    return ["generate", "--nodes", str(nodes), "--edges", str(edges),
            "--scenarios", str(scenarios), "--sources", str(sources),
            "--budget", str(budget), "--seed", str(seed), "--out", str(path)]


class TestGenerate:
    def test_writes_instance_and_checksum(self, tmp_path, capsys):
        target = tmp_path / "a.txt"
        code, out, _ = run(capsys, *gen_args(target))
        assert code == 0
        assert target.exists()
        checksum = out.split()[0]
        assert len(checksum) == 64

    def test_same_flags_same_checksum(self, tmp_path, capsys):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        _, out_a, _ = run(capsys, *gen_args(a))
        _, out_b, _ = run(capsys, *gen_args(b))
        assert out_a.split()[0] == out_b.split()[0]
        assert a.read_bytes() == b.read_bytes()

    def test_parameter_error_exits_2(self, tmp_path, capsys):
        code, _, err = run(capsys, *gen_args(tmp_path / "x.txt", sources=40, nodes=36))
        assert code == 2
        assert "error" in err

    def test_unwritable_path_exits_2(self, tmp_path, capsys):
        code, _, err = run(capsys, *gen_args(tmp_path / "no-dir" / "x.txt"))
        assert code == 2
        assert "error" in err


class TestSolve:
    @pytest.fixture
    def instance_path(self, tmp_path, capsys):
        target = tmp_path / "inst.txt"
        assert main(gen_args(target)) == 0
        capsys.readouterr()
        return target

    def test_rsm_row_shape(self, instance_path, capsys):
        code, out, _ = run(capsys, "solve", str(instance_path),
                           "--alpha", "unit", "--reduce", "--stop-pt", "2")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].split(",") == CSV_HEADER
        row = next(csv.reader([lines[1]]))
        rec = RunRecord.from_csv_row(row)
        assert rec.mode == "rsm" and rec.reduce and rec.stop_pt == 2
        assert rec.status == "optimal" and rec.gap_pct == 0.0
        assert rec.lb == rec.eta <= rec.ub + 1e-9

    def test_rsm3_row_sandwich(self, instance_path, capsys):
        code, out, _ = run(capsys, "solve", str(instance_path), "--mode", "rsm3",
                           "--scenario-budget", "1")
        assert code == 0
        rec = RunRecord.from_csv_row(next(csv.reader([out.strip().splitlines()[1]])))
        assert rec.mode == "rsm3"
        assert rec.lb <= rec.ub + 1e-9

    def test_alpha_values_arity_error(self, instance_path, capsys):
        code, _, err = run(capsys, "solve", str(instance_path),
                           "--alpha", "values", "1", "2", "3")
        assert code == 2
        assert "alpha" in err

    def test_alpha_solve_mode(self, instance_path, capsys):
        code, out, _ = run(capsys, "solve", str(instance_path), "--alpha", "solve")
        assert code == 0
        rec = RunRecord.from_csv_row(next(csv.reader([out.strip().splitlines()[1]])))
        assert rec.eta <= 1.0 + 1e-9  # scaled by per-scenario optima

    def test_csv_append_and_round_trip(self, instance_path, tmp_path, capsys):
        csv_path = tmp_path / "runs.csv"
        run(capsys, "solve", str(instance_path), "--csv", str(csv_path))
        run(capsys, "solve", str(instance_path), "--no-reduce", "--stop-pt", "0",
            "--csv", str(csv_path))
        with csv_path.open(newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == CSV_HEADER
        assert len(rows) == 3
        for raw in rows[1:]:
            rec = RunRecord.from_csv_row(raw)
            assert rec.to_csv_row() == raw  # lossless round trip

    def test_parse_failure_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("nodes x\n")
        code, _, err = run(capsys, "solve", str(bad))
        assert code == 2
        assert "line 1" in err

    def test_time_limit_run_exits_0_with_status_column(self, instance_path, capsys):
        code, out, _ = run(capsys, "solve", str(instance_path),
                           "--time-limit", "0")
        assert code == 0
        rec = RunRecord.from_csv_row(next(csv.reader([out.strip().splitlines()[1]])))
        assert rec.status == "time_limit"
        assert rec.lb <= rec.ub + 1e-9

    def test_parallel_jobs_match_serial(self, tmp_path, capsys):
        paths = []
        for seed in (1, 2):
            p = tmp_path / f"i{seed}.txt"
            assert main(gen_args(p, seed=seed, nodes=7, edges=9)) == 0
            paths.append(str(p))
        capsys.readouterr()
        _, serial, _ = run(capsys, "solve", *paths)
        _, parallel, _ = run(capsys, "solve", *paths, "--jobs", "2")

        def strip_times(text):
            rows = [next(csv.reader([ln])) for ln in text.strip().splitlines()[1:]]
            return [[c for i, c in enumerate(row) if CSV_HEADER[i] != "time_s"]
                    for row in rows]

        assert strip_times(serial) == strip_times(parallel)


class TestVerify:
    @pytest.fixture
    def small_instances(self, tmp_path, capsys):
        paths = []
        for seed in (0, 1, 2):
            p = tmp_path / f"v{seed}.txt"
            assert main(gen_args(p, seed=seed, nodes=7, edges=10, budget=13)) == 0
            paths.append(str(p))
        capsys.readouterr()
        return paths

    def test_pass_on_seeded_instances(self, small_instances, capsys):
        code, out, _ = run(capsys, "verify", *small_instances)
        assert code == 0
        assert out.count("PASS") == len(small_instances)

    def test_zero_budget_passes(self, tmp_path, capsys):
        p = tmp_path / "zb.txt"
        assert main(gen_args(p, budget=0, nodes=6, edges=8)) == 0
        capsys.readouterr()
        code, out, _ = run(capsys, "verify", str(p))
        assert code == 0 and "PASS" in out

    def test_corrupt_hook_fails(self, small_instances, capsys):
        code, out, _ = run(capsys, "verify", small_instances[0], "--corrupt")
        assert code == 1
        assert "FAIL" in out

    def test_oversize_refused(self, tmp_path, capsys):
        p = tmp_path / "big.txt"
        assert main(gen_args(p, nodes=30, edges=40, sources=5)) == 0
        capsys.readouterr()
        code, _, err = run(capsys, "verify", str(p))
        assert code == 2
        assert "22" in err


class TestReport:
    def test_aggregates_means(self, tmp_path, capsys):
        csv_path = tmp_path / "runs.csv"
        records = [
            RunRecord("a", "rsm", True, 2, 1.0, 0.0, 3, 5, 2.0, 2.0, 2.0, "optimal"),
            RunRecord("b", "rsm", True, 2, 3.0, 0.0, 5, 7, 4.0, 4.0, 4.0, "optimal"),
            RunRecord("c", "rsm", False, 0, 2.0, 1.0, 9, 30, 1.0, 1.5, 1.0, "time_limit"),
        ]
        with csv_path.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(CSV_HEADER)
            for rec in records:
                writer.writerow(rec.to_csv_row())
        out_path = tmp_path / "agg.csv"
        code, out, _ = run(capsys, "report", str(csv_path), "--out", str(out_path))
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].split()[:3] == ["mode", "reduce", "stop_pt"]
        true_row = next(ln for ln in lines if " true" in ln or ln.startswith("rsm   true"))
        assert "2.000" in true_row  # mean time of the two reduce runs
        assert "6.0" in true_row    # mean cuts
        with out_path.open(newline="") as handle:
            rows = list(csv.reader(handle))
        assert len(rows) == 3

    def test_bad_header_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("nope\n1\n")
        code, _, err = run(capsys, "report", str(bad))
        assert code == 2


class TestUsage:
    def test_unknown_mode_exits_2(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["solve", "x.txt", "--mode", "bogus"])
        assert exc.value.code == 2
