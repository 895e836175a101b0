import numpy as np
import pytest

from unfoldiso.config import HypergeomConfig
from unfoldiso.demo import gauge_relation, hypergeom_connection, integrality_margin, require_generic, run_demo
from unfoldiso.errors import IntegralityViolation
from unfoldiso.unfolding import build_xi, solve_adjusting_data


@pytest.fixture(scope="module")
def demo():
    return run_demo()


def test_all_checks_pass(demo):
    assert [r["epsilon"] for r in demo["runs"]] == [0.2, 0.05, 0.0]
    for run in demo["runs"]:
        bad = [c["name"] for c in run["checks"] if not c["pass"]]
        assert not bad


def test_exponents_at_infinity(demo):
    for run in demo["runs"]:
        A = np.asarray(run["A"])
        rho = np.sort_complex(np.linalg.eigvals(A[-1]))
        assert np.allclose(np.sort_complex(-run["exponents"]["infinity"]), rho)


@pytest.mark.parametrize("eps", [0.2, 0.0])
def test_gauge_relation_signs(eps):
    cfg = HypergeomConfig()
    adj = solve_adjusting_data(build_xi(hypergeom_connection(cfg, eps)))
    for l in range(2):
        g = gauge_relation(adj, l, cfg.gauge_coeffs)
        assert g["kernel_dim"] == 5
        assert g["relation_defect"] <= 1e-12
        assert g["conjugation_defect"] <= 1e-12
        # the same relation with the opposite sign fails clearly
        assert g["opposite_sign_gap"] > 1e-3
        a, b, c, x, y = cfg.gauge_coeffs
        assert g["beta"] == pytest.approx(b - eps**2 * c)


def test_constant_frame_is_reducible():
    cfg = HypergeomConfig(spread_z=0.0)
    conn = hypergeom_connection(cfg, 0.2)
    assert integrality_margin(conn)[0] < 1e-9
    with pytest.raises(IntegralityViolation):
        require_generic(conn)


def test_generic_margin():
    conn = hypergeom_connection(HypergeomConfig(), 0.05)
    assert integrality_margin(conn)[0] > 1e-3
