
import numpy as np
import pytest

import slowdecay as sd
from slowdecay.config import (
    ConfigError,
    parse_datum,
    resolve,
    scale_datum_spec,
    with_scaled_data,
)

MINIMAL = """
problem = neumann1d
p = 2
u0_spec = const:0.1
"""


class TestParseConfig:
    def test_minimal_with_defaults(self):
        cfg = sd.parse_config(MINIMAL)
        assert cfg.problem == "neumann1d"
        assert cfg.p == 2.0
        assert cfg.u0_spec == "const:0.1"
        assert cfg.u1_spec == "zero"
        assert cfg.n_modes == 16
        assert cfg.n_grid is None
        assert cfg.dt == 0.05
        assert cfg.sampling == "log"
        assert cfg.sample_count == 400
        assert cfg.eps is None and cfg.delta is None and cfg.R is None

    def test_comments_and_blank_lines(self):
        cfg = sd.parse_config("# header\n\nproblem=scalar_ode # trailing\np=1\nu0_spec=mode:0:0.1\n")
        assert cfg.problem == "scalar_ode"
        assert cfg.p == 1.0

    def test_negative_p_names_constraint_and_line(self):
        text = "problem = neumann1d\np = -1\nu0_spec = zero\n"
        with pytest.raises(ConfigError, match="p must be > 0") as err:
            sd.parse_config(text)
        assert err.value.line == 2
        assert "line 2" in str(err.value)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            sd.parse_config(MINIMAL + "frobnicate = 3\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            sd.parse_config(MINIMAL + "p = 3\n")

    def test_missing_required_key(self):
        with pytest.raises(ConfigError, match="u0_spec"):
            sd.parse_config("problem = neumann1d\np = 2\n")

    def test_bad_problem_name(self):
        with pytest.raises(ConfigError, match="problem"):
            sd.parse_config("problem = heat\np = 2\nu0_spec = zero\n")

    def test_dt_exceeding_t_end(self):
        with pytest.raises(ConfigError, match="t_end"):
            sd.parse_config(MINIMAL + "dt = 10\nt_end = 5\n")

    def test_auto_versus_numeric(self):
        cfg = sd.parse_config(MINIMAL + "eps = auto\ndelta = 0.3\nR = 2.0\n")
        assert cfg.eps is None
        assert cfg.delta == 0.3
        assert cfg.R == 2.0


class TestParseDatum:
    def test_mode_spec_on_dirichlet(self, dirichlet16):
        vec = parse_datum("mode:1:0.05", dirichlet16)
        expected = np.zeros(16)
        expected[1] = 0.05
        np.testing.assert_array_equal(vec, expected)

    def test_const_on_neumann(self, neumann16):
        vec = parse_datum("const:0.1", neumann16)
        assert vec[0] == 0.1 and np.all(vec[1:] == 0.0)
        # mode 0 is the constant function: grid values all equal 0.1
        np.testing.assert_allclose(neumann16.to_grid(vec), 0.1, rtol=1e-14)

    def test_const_rejected_on_dirichlet(self, dirichlet16):
        with pytest.raises(ConfigError, match="const"):
            parse_datum("const:0.1", dirichlet16)

    def test_zero(self, neumann16):
        np.testing.assert_array_equal(parse_datum("zero", neumann16), np.zeros(16))

    def test_sum(self, neumann16):
        vec = parse_datum("sum:mode:0:0.1+mode:3:0.02", neumann16)
        assert vec[0] == 0.1 and vec[3] == 0.02

    def test_mode_out_of_range(self, neumann16):
        with pytest.raises(ConfigError, match="range"):
            parse_datum("mode:16:1.0", neumann16)

    def test_unrecognized(self, neumann16):
        with pytest.raises(ConfigError, match="unrecognized"):
            parse_datum("blob:3", neumann16)

    def test_scaling_round_trip(self, neumann16):
        spec = "sum:mode:0:0.1+mode:3:0.02"
        scaled = scale_datum_spec(spec, 0.5)
        np.testing.assert_allclose(
            parse_datum(scaled, neumann16), 0.5 * parse_datum(spec, neumann16),
            rtol=1e-15,
        )


class TestResolve:
    def test_auto_resolution_chain(self):
        res = resolve(sd.parse_config(MINIMAL))
        assert res.alpha == 2.0  # = p
        assert res.delta == pytest.approx(sd.max_delta(res.problem.basis.nu))
        # rho tracks sigma0 with 1% slack, R comes from the sampled bound
        assert res.certificate is not None
        assert res.rho == pytest.approx(1.01 * res.certificate.sigma0, rel=1e-12)
        assert res.R >= 1.5

    def test_nonlocal_R_is_one(self):
        res = resolve(
            sd.parse_config("problem = nonlocal_rank1\np = 2\nu0_spec = const:0.001\n")
        )
        assert res.R == 1.0
        assert res.certificate is not None

    def test_scalar_problem_forces_single_mode(self):
        res = resolve(sd.parse_config("problem = scalar_ode\np = 2\nu0_spec = mode:0:0.1\n"))
        assert res.problem.basis.n_modes == 1

    def test_zero_datum_has_no_certificate(self):
        res = resolve(sd.parse_config("problem = neumann1d\np = 2\nu0_spec = zero\n"))
        assert res.certificate is None

    def test_scaled_data_config(self):
        cfg = sd.parse_config(MINIMAL)
        scaled = with_scaled_data(cfg, 0.01)
        assert scaled.u0_spec == "const:" + format(0.1 * 0.01, ".17g")
        assert scaled.u1_spec == "zero"

    def test_explicit_overrides_survive(self):
        cfg = sd.parse_config(MINIMAL + "rho = 2.5\nR = 1.25\nalpha = 1.0\ndelta = 0.1\n")
        res = resolve(cfg)
        assert (res.rho, res.R, res.alpha, res.delta) == (2.5, 1.25, 1.0, 0.1)
