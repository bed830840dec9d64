import math

import numpy as np
import pytest

from coag import kernels as kn
from coag import reference as rf
from coag import wavesim as ws
from coag.errors import BlowUp, ConfigError, FrontNotFound, NegativityBreach


@pytest.fixture(scope="module")
def tables8():
    return kn.build_weight_tables(kn.AlphaFamily(8.0), 0.05, 25.0)


def test_fast_operator_matches_naive_gather(tables8):
    rng = np.random.default_rng(7)
    u = rng.random(401)
    for cm, cp in ((0.0, 0.0), (1.3, 0.0), (0.4, 0.2)):
        fast = ws.Operator(tables8, u.size, cm, cp)(u)
        slow = ws.rhs_naive(u, tables8, cm, cp)
        assert np.max(np.abs(fast - slow)) <= 1e-12 * np.max(np.abs(slow))


@pytest.mark.parametrize("alpha", [3.0, 8.0, 25.0])
def test_constant_state_residual(alpha):
    t = kn.build_weight_tables(kn.AlphaFamily(alpha), 0.05, 25.0)
    c = 0.8
    r = ws.Operator(t, 301, c, c)(np.full(301, c))
    assert np.max(np.abs(r)) <= 1e-3 * c * c


def test_zero_state_and_bilinearity(tables8):
    state = ws.FieldState(0.05, 20.0, np.zeros(401))
    assert np.all(ws.rhs(state, tables8) == 0)
    rng = np.random.default_rng(3)
    u = rng.random(401)
    base = ws.rhs(ws.FieldState(0.05, 20.0, u), tables8)
    for lam in (2.0, 0.5):
        scaled = ws.rhs(ws.FieldState(0.05, 20.0, lam * u), tables8)
        assert np.max(np.abs(scaled - lam**2 * base)) <= 1e-12 * np.max(np.abs(lam**2 * base))


def test_rhs_rejects_mismatched_tables(tables8):
    with pytest.raises(ConfigError):
        ws.rhs(ws.FieldState(0.1, 20.0, np.zeros(201)), tables8)


def test_translation_equivariance():
    def run(center):
        init = ws.InitialCondition("bump", center=center, half_width=2.0, mass=1.0)
        return ws.simulate(ws.SimConfig(alpha=8.0, eps=0.05, L=30.0, T_end=0.2, init=init)).final.u

    a, b = run(6.0), run(6.05)
    assert np.max(np.abs(b[1:] - a[:-1])) <= 1e-8


def test_mass_budget():
    init = ws.InitialCondition("bump", center=6.0, half_width=4.0, mass=1.0)
    cfg = ws.SimConfig(alpha=8.0, eps=0.02, L=20.0, R=30.0, tau=1e-3, T_end=1.0, snap=0.25, init=init)
    res = ws.simulate(cfg)
    assert res.mass_drift_rate <= 1e-3
    assert len(res.mass) == 5


def test_config_validation():
    with pytest.raises(ConfigError, match="tau_max"):
        ws.SimConfig(alpha=8.0, tau=10.0)
    with pytest.raises(ConfigError):
        ws.SimConfig(alpha=8.0, eps=0.03)
    with pytest.raises(ConfigError):
        ws.SimConfig(alpha=8.0, R=5.0)
    with pytest.raises(ConfigError):
        ws.SimConfig.from_dict({"alpha": 8.0, "bogus": 1})
    cfg = ws.SimConfig(alpha=8.0)
    assert cfg.tau == cfg.tau_max
    assert ws.SimConfig.from_dict(cfg.to_dict()) == cfg


def test_blow_up_and_negativity_detection(monkeypatch):
    init = ws.InitialCondition("bump", mass=1.0)
    cfg = ws.SimConfig(alpha=8.0, L=20.0, T_end=0.01, init=init)
    monkeypatch.setattr(ws.Operator, "__call__", lambda self, u: np.full(u.size, 1e12))
    with pytest.raises(BlowUp):
        ws.simulate(cfg)
    monkeypatch.setattr(ws.Operator, "__call__", lambda self, u: np.full(u.size, -1e3))
    with pytest.raises(NegativityBreach):
        ws.simulate(cfg)


def test_front_position():
    X = 0.05 * np.arange(401)
    u = np.clip(1.0 - (X - 5.0), 0.0, 1.0)
    s = ws.FieldState(0.05, 20.0, u, 1.0)
    shifted = ws.FieldState(0.05, 20.0, np.clip(1.0 - (X - 5.5), 0.0, 1.0), 1.0)
    assert ws.front_position(shifted, 0.5) - ws.front_position(s, 0.5) == pytest.approx(0.5, abs=0.05)
    with pytest.raises(FrontNotFound):
        ws.front_position(ws.FieldState(0.05, 20.0, np.ones(401), 1.0, 1.0), 0.5)


def test_front_speed_is_steady():
    a = 25.0
    cfg = ws.SimConfig(alpha=a, eps=0.05, L=40.0, T_end=2.4, snap=0.8, init=ws.InitialCondition("riemann", 1.0))
    res = ws.simulate(cfg)
    x = [ws.front_position(s, 0.5) for s in res.snapshots[1:4]]
    v1 = (x[1] - x[0]) / 0.8
    v2 = (x[2] - x[1]) / 0.8
    assert v2 == pytest.approx(v1, rel=0.05)
    assert v2 == pytest.approx(ws.simulator_burgers_coefficient(a), rel=0.05)


def test_traveling_wave_residuals():
    assert ws.traveling_wave_residual(lambda X: 0.0, kn.AlphaFamily(8.0, "aunit"), 1.0) == 0.0
    k = kn.AlphaFamily(8.0, "aunit")
    assert ws.traveling_wave_residual(lambda X: 1.0, k, 1.0) <= 1e-10
    res = ws.traveling_wave_residual(lambda X: float(rf.additive_g1(X)), kn.Additive(), 2.0, X_test=(-2.0, 0.0, 1.0))
    assert res <= 1e-4


def test_initial_condition_from_file(tmp_path):
    p = tmp_path / "u0.csv"
    p.write_text("X,u\n0,1\n2,1\n3,0\n")
    cfg = ws.SimConfig(alpha=8.0, L=10.0, T_end=0.0, init={"kind": "file", "path": str(p)})
    u = cfg.initial_field().u
    assert u[0] == 1.0 and u[40] == 1.0 and u[60] == 0.0 and u[-1] == 0.0
    assert u[50] == pytest.approx(0.5)
