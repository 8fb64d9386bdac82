import numpy as np
import pytest

from risbis import experiments as ex
from risbis import results
from risbis.errors import ConfigError
from risbis.field import quadratic_form
from risbis.scenario import build_setup, load_scenario


@pytest.fixture(scope="module")
def fig4():
    return load_scenario("fig4_suppression")


@pytest.fixture(scope="module")
def fig4_setup(fig4):
    return build_setup(fig4)


def test_uniform_phase_pattern_symmetric(fig4_setup):
    th = ex.angle_grid(0.0, 90.0, 0.5)
    pos = ex.sweep_pattern(fig4_setup, np.zeros(16), th, [0.0]).powers
    neg = ex.sweep_pattern(fig4_setup, np.zeros(16), -th, [0.0]).powers
    assert np.max(np.abs(pos - neg) / pos) < 1e-9


def test_mrc_steers_main_lobe(fig4_setup):
    om = quadratic_form(fig4_setup.user_channels[1]).mrc_phases()  # user at +30 deg
    pat = ex.sweep_pattern(fig4_setup, om, ex.angle_grid(-90.0, 90.0, 0.1), [0.0])
    assert abs(pat.peak_angle()[0] - 30.0) <= 0.5


def test_global_phase_leaves_pattern_unchanged(fig4_setup, rng):
    om = rng.uniform(0, 2 * np.pi, 16)
    th = ex.angle_grid(-90.0, 90.0, 1.0)
    a = ex.sweep_pattern(fig4_setup, om, th, [0.0]).powers.sum()
    b = ex.sweep_pattern(fig4_setup, om + 1.3, th, [0.0]).powers.sum()
    assert a == pytest.approx(b, rel=1e-12)


def test_sweep_errors(fig4_setup):
    with pytest.raises(ConfigError):
        ex.sweep_pattern(fig4_setup, np.zeros(16), [], [0.0])
    with pytest.raises(ConfigError):
        ex.sweep_pattern(fig4_setup, np.zeros(3), [0.0], [0.0])


def test_rg_arithmetic():
    assert ex.relative_gain(1e-7, 1e-9) == pytest.approx(20.0)


def test_pattern_csv_round_trip(fig4_setup, tmp_path):
    pat = ex.sweep_pattern(fig4_setup, np.zeros(16), ex.angle_grid(-90, 90, 0.2), [0.0])
    path = tmp_path / "p.csv"
    results.write_pattern(path, pat)
    rows = results.read_table(path)
    assert len(rows) == 901
    assert tuple(rows[0]) == results.PATTERN_COLUMNS
    w = np.array([float(r["power_w"]) for r in rows])
    np.testing.assert_array_equal(w, pat.powers)
    dbm = np.array([float(r["power_dbm"]) for r in rows])
    np.testing.assert_allclose(dbm, 10 * np.log10(w / 1e-3), rtol=1e-12)


def test_suppression_study_fig4(fig4):
    st = ex.run_suppression_study(fig4, with_patterns=False)
    setup = build_setup(fig4)
    nc, bis = st.reports["Non-Constraint"], st.reports["BIS"]
    depth = ex.db_ratio(ex.region_peak(setup, nc.omega_star), ex.region_peak(setup, bis.omega_star))
    assert depth >= 15.0
    assert {r.method for r in st.rows} == {"Non-Constraint", "BIS", "QuantRand"}


def test_main_lobe_loss_at_one_percent(fig4):
    st = ex.run_suppression_study(fig4, threshold_factors=[0.01], with_patterns=False)
    loss = ex.db_ratio(st.reports["Non-Constraint"].received_powers.min(),
                       st.reports["BIS sigma=0.01xPeak"].received_powers.min())
    assert loss <= 2.0


def test_inactive_constraint_matches_unconstrained(fig4):
    st = ex.run_suppression_study(fig4, threshold_factors=[1.0], with_patterns=False)
    nc, bis = st.reports["Non-Constraint"], st.reports["BIS sigma=1xPeak"]
    assert bis.t_root == pytest.approx(nc.t_root, abs=2 * max(nc.epsilon, bis.epsilon))


def test_equal_weights_balanced():
    sc = load_scenario("table2_compare")
    row = ex.run_weighted_study(sc, trials=2, methods=("BIS",))[0]
    assert all(abs(v - 1.0) <= 0.01 for v in row.power_ratio)


def test_cdf_single_trial_degenerate():
    cdf = ex.run_cdf_study(load_scenario("fig11_cdf"), trials=1, methods=("BIS",))
    np.testing.assert_array_equal(cdf["BIS"]["cdf"], [1.0])
    assert cdf["BIS"]["min_ue"].shape == (1,)


def test_rg_curve_four_points():
    pts = ex.run_rg_study(load_scenario("fig12_rg"), n_grid=(16, 32, 64, 128), trials=1,
                          methods=("BIS", "Non-Constraint"))
    for m in ("BIS", "Non-Constraint"):
        assert [p.n_units for p in pts if p.method == m] == [16, 32, 64, 128]
