import numpy as np
import pytest

from demixcs import UsageError, gen_instance
from demixcs.cli import main, parse_args, parse_float_list, parse_int_list
from demixcs.io import load_instance, load_vector, save_instance, save_vector
from demixcs.models import build_cs_ofdm


class TestParseArgs:
    def test_phase_transition_invocation(self):
        cfg = parse_args(["pt", "--family", "mtx1", "--n", "512", "--m", "256",
                          "--k", "10,20,30", "--s", "1:100", "--trials", "100",
                          "--lambda", "1", "--seed", "7"])
        assert cfg.subcommand == "pt"
        assert cfg.params["family"] == "mtx1"
        assert cfg.params["n"] == 512
        assert parse_int_list(cfg.params["s"], "--s") == tuple(range(1, 101))
        assert parse_int_list(cfg.params["k"], "--k") == (10, 20, 30)
        assert cfg.seed == 7

    def test_missing_required_flag_names_it(self):
        with pytest.raises(UsageError, match="--n"):
            parse_args(["pt", "--family", "mtx1", "--m", "256", "--s", "1",
                        "--k", "1", "--trials", "2"])

    def test_range_syntax_inclusive(self):
        assert parse_int_list("3:6", "--s") == (3, 4, 5, 6)

    def test_float_sweep_syntax(self):
        got = parse_float_list("0:0.1:0.05", "--eps")
        assert got == (0.0, 0.05, 0.1)
        assert parse_float_list("0,0.25", "--eps") == (0.0, 0.25)

    def test_unknown_flag_rejected(self):
        with pytest.raises(UsageError, match="--bogus"):
            parse_args(["pt", "--bogus", "1"])

    def test_config_file_with_flag_override(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("family = mtx1\nn = 64\nm = 32\ns = 1\nk = 1\ntrials = 2\n")
        cfg = parse_args(["pt", "--config", str(cfg_file), "--n", "128"])
        assert cfg.params["n"] == 128   # explicit flag wins
        assert cfg.params["m"] == 32    # file value survives

    def test_usage_error_exit_code(self, capsys):
        code = main(["pt", "--family", "mtx1"])
        assert code == 2
        err = capsys.readouterr().err
        assert err.count("\n") == 1 and "--n" in err


class TestVectorAndInstanceFiles:
    def test_vector_round_trip_bitwise(self, tmp_path, rng):
        v = rng.standard_normal(32) + 1j * rng.standard_normal(32)
        path = tmp_path / "v.csv"
        save_vector(path, v)
        assert np.array_equal(load_vector(path), v)

    def test_instance_round_trip_bitwise(self, tmp_path):
        model = build_cs_ofdm(32, 16, seed=5)
        inst = gen_instance(model, 2, 1, "gaussian", 0.05, seed=9)
        path = tmp_path / "inst.txt"
        save_instance(path, inst)
        back = load_instance(path)
        assert np.array_equal(back.y, inst.y)
        assert np.array_equal(back.x_true, inst.x_true)
        assert np.array_equal(back.z_true, inst.z_true)
        assert np.array_equal(back.w, inst.w)
        assert back.s == inst.s and back.k == inst.k
        assert back.sub_seeds == inst.sub_seeds

    def test_bernoulli_sampled_model_round_trip(self, tmp_path):
        from demixcs.models import build_subsampled_hadamard

        model = build_subsampled_hadamard(64, 32, seed=2, bernoulli_rows=True)
        inst = gen_instance(model, 1, 1, "gaussian", 0.0, seed=3)
        path = tmp_path / "bern.txt"
        save_instance(path, inst)
        back = load_instance(path)
        assert back.model.m == model.m
        assert np.array_equal(back.y, inst.y)


class TestDispatch:
    def test_rip_reports_threshold(self, tmp_path, capsys):
        code = main(["rip", "--family", "cs-ofdm", "--n", "32", "--m", "32",
                     "--s", "1", "--k", "1", "--lambda", "1", "--seed", "11",
                     "--out", str(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "threshold = 0.492366" in out
        assert "satisfied = true" in out
        assert (tmp_path / "run_manifest.txt").exists()

    def test_bounds_passthrough(self, tmp_path, capsys):
        code = main(["bounds", "--theorem", "2", "--s", "10", "--k", "10",
                     "--ntilde", "512", "--mu-b", "0.0442", "--delta", "0.5",
                     "--out", str(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "m_signal" in out and "m_corruption" in out

    def test_gen_then_solve_pipeline(self, tmp_path, capsys):
        out_a = tmp_path / "gen"
        out_b = tmp_path / "solve"
        assert main(["gen", "--family", "cs-ofdm", "--n", "32", "--m", "32",
                     "--s", "1", "--k", "1", "--seed", "4",
                     "--out", str(out_a)]) == 0
        assert main(["solve", "--instance", str(out_a / "instance.txt"),
                     "--lambda", "1", "--eps", "0",
                     "--out", str(out_b)]) == 0
        text = (out_b / "result.txt").read_text()
        assert "status = converged" in text
        assert "[x_hat]" in text and "[z_hat]" in text

    def test_computational_error_exit_code(self, tmp_path, capsys):
        # enumeration budget exceeded maps to a one-line error and exit 1
        code = main(["rip", "--family", "mtx1", "--n", "512", "--m", "256",
                     "--s", "4", "--k", "4", "--lambda", "1",
                     "--out", str(tmp_path)])
        assert code == 1
        err = capsys.readouterr().err
        assert err.count("\n") == 1 and "BudgetError" in err


class TestByteDeterminism:
    PT_ARGS = ["pt", "--family", "mtx1", "--n", "64", "--m", "32",
               "--s", "1,2", "--k", "1", "--trials", "5", "--lambda", "1",
               "--seed", "3", "--max-iter", "1500"]

    def _run(self, tmp_path, name, threads):
        out = tmp_path / name
        args = self.PT_ARGS + ["--out", str(out), "--threads", str(threads)]
        assert main(args) == 0
        return {p.name: p.read_bytes() for p in sorted(out.iterdir())}

    def test_identical_outputs_across_thread_counts(self, tmp_path):
        runs = [self._run(tmp_path, f"r{i}_{t}", t)
                for i, t in enumerate((1, 1, 4, 8))]
        names = set(runs[0])
        assert names == {"phase_transition.csv", "phase_transition.svg",
                         "run_manifest.txt"}
        for other in runs[1:]:
            for name in names:
                assert other[name] == runs[0][name]

    def test_stability_outputs_deterministic(self, tmp_path):
        args = ["stability", "--family", "mtx1", "--n", "32", "--m", "16",
                "--s", "1", "--k", "1", "--eps", "0,0.1", "--trials", "3",
                "--lambda", "1", "--seed", "5", "--max-iter", "1500"]
        outs = []
        for i, threads in enumerate((1, 4)):
            out = tmp_path / f"s{i}"
            assert main(args + ["--out", str(out), "--threads", str(threads)]) == 0
            outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        assert outs[0] == outs[1]
