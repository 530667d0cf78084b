import numpy as np
import pytest

from advisc.config import (
    ConfigError,
    ExperimentConfig,
    InitialCondition,
    OutputSettings,
    TrainingSettings,
    config_from_dict,
    config_to_dict,
    load_config,
    parse_config_text,
)
from advisc.optimizer import OptimizerConfig
from advisc.runio import (
    fmt,
    read_manifest,
    read_matrix_csv,
    read_series_csv,
    write_manifest,
    write_matrix_csv,
    write_series_csv,
)

FULL_CONFIG = """
[simulation]
scheme = ftcs_mu
n_cells = 100
length = 1.0
c = 1.0
dt = 0.001
t_final = 0.15

[initial_condition]
kind = hat
lo = 0.4
hi = 0.6
amplitude = 1.0

[training]
mode = per_step
learning_rate = 0.01
n_iters = 200
mu_min = -0.005
mu_max = 0.095
seed = 7

[output]
directory = out
write_error = false
"""


class TestConfigParsing:
    def test_full_config_round_trip(self):
        cfg = parse_config_text(FULL_CONFIG)
        assert cfg.scheme == "ftcs_mu"
        assert cfg.n_cells == 100
        assert cfg.n_steps == 150
        assert cfg.ic.kind == "hat"
        assert cfg.training.mode == "per_step"
        assert cfg.training.optimizer.seed == 7
        assert cfg.training.optimizer.mu_min == -0.005
        assert cfg.output.write_error is False
        assert cfg.output.write_solution is True

    def test_unknown_key_rejected(self):
        bad = FULL_CONFIG.replace("n_iters = 200", "n_itters = 200")
        with pytest.raises(ConfigError, match="n_itters"):
            parse_config_text(bad)

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="plotting"):
            parse_config_text(FULL_CONFIG + "\n[plotting]\nstyle = fancy\n")

    def test_missing_required_section(self):
        with pytest.raises(ConfigError, match="simulation"):
            parse_config_text("[output]\ndirectory = out\n")

    def test_missing_required_key(self):
        with pytest.raises(ConfigError, match="t_final"):
            parse_config_text(
                "[simulation]\nscheme = upwind\nn_cells = 10\nlength = 1.0\nc = 1.0\n"
                "dt = 0.001\n\n[output]\ndirectory = out\n"
            )

    def test_fractional_step_count_rejected(self):
        bad = FULL_CONFIG.replace("t_final = 0.15", "t_final = 0.1505")
        with pytest.raises(ConfigError, match="whole number"):
            parse_config_text(bad)

    def test_zero_t_final_allowed(self):
        cfg = parse_config_text(FULL_CONFIG.replace("t_final = 0.15", "t_final = 0.0"))
        assert cfg.n_steps == 0

    def test_bad_scheme_rejected(self):
        bad = FULL_CONFIG.replace("scheme = ftcs_mu", "scheme = spectral")
        with pytest.raises(ConfigError):
            parse_config_text(bad)

    def test_bad_value_type_rejected(self):
        bad = FULL_CONFIG.replace("n_cells = 100", "n_cells = many")
        with pytest.raises(ConfigError, match="n_cells"):
            parse_config_text(bad)

    def test_inline_comments_allowed(self):
        cfg = parse_config_text(FULL_CONFIG.replace("dt = 0.001", "dt = 0.001  # step"))
        assert cfg.dt == 0.001

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "nope.cfg")

    def test_sine_config(self):
        text = FULL_CONFIG.replace("kind = hat", "kind = sine").replace(
            "lo = 0.4\nhi = 0.6\namplitude = 1.0", "wavenumber = 2\namplitude = 0.5"
        )
        cfg = parse_config_text(text)
        assert cfg.ic.kind == "sine"
        assert cfg.ic.wavenumber == 2


class TestConfigDictRoundTrip:
    def test_round_trip_with_training(self):
        cfg = parse_config_text(FULL_CONFIG)
        rebuilt = config_from_dict(config_to_dict(cfg))
        assert rebuilt == cfg

    def test_round_trip_plain_run(self):
        cfg = ExperimentConfig(
            scheme="upwind",
            n_cells=50,
            length=2.0,
            c=-1.0,
            dt=1e-3,
            t_final=0.05,
            ic=InitialCondition(kind="sine", wavenumber=3),
            output=OutputSettings(directory="x"),
        )
        rebuilt = config_from_dict(config_to_dict(cfg))
        assert rebuilt == cfg

    def test_seed_override(self):
        cfg = parse_config_text(FULL_CONFIG)
        assert cfg.with_seed(99).training.optimizer.seed == 99


class TestCsvRoundTrip:
    def test_seventeen_digit_format_round_trips(self):
        for value in (1 / 3, np.pi, 0.1, -7.25e-13, 1e18):
            assert float(fmt(value)) == value

    def test_matrix_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(5)
        times = np.arange(6) * 1e-3
        matrix = rng.standard_normal((6, 9))
        path = tmp_path / "m.csv"
        write_matrix_csv(path, times, matrix)
        times2, matrix2 = read_matrix_csv(path)
        assert np.array_equal(times, times2)
        assert np.array_equal(matrix, matrix2)

    def test_matrix_header_format(self, tmp_path):
        path = tmp_path / "m.csv"
        write_matrix_csv(path, np.array([0.0]), np.zeros((1, 3)))
        header = path.read_text().splitlines()[0]
        assert header == "t\\x,x0,x1,x2"

    def test_series_round_trip(self, tmp_path):
        path = tmp_path / "s.csv"
        xs = np.array([0.0, 0.5, 1.0])
        ys = np.array([1 / 3, 2 / 3, 1.0])
        write_series_csv(path, "t", "entropy", xs, ys)
        header = path.read_text().splitlines()[0]
        assert header == "t,entropy"
        xs2, ys2 = read_series_csv(path)
        assert np.array_equal(xs, xs2)
        assert np.array_equal(ys, ys2)

    def test_matrix_reader_rejects_other_files(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            read_matrix_csv(path)


class TestManifest:
    def test_write_and_read(self, tmp_path):
        payload = {"status": "ok", "files": [{"name": "x.csv", "role": "solution"}]}
        write_manifest(tmp_path, payload)
        assert read_manifest(tmp_path) == payload
        assert not (tmp_path / "manifest.json.tmp").exists()

    def test_missing_manifest_raises(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_manifest(tmp_path)
