import math

import pytest

import gaslab


def test_hamiltonian_closed_values():
    p = gaslab.GasParams.make(3, 2, 1.0)
    p.potential = gaslab.PotentialSpec.zero()
    c = gaslab.Configuration([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    assert gaslab.hamiltonian(p, c) == pytest.approx(1.0)

    mu = gaslab.FrozenExterior([([0.0, 3.0, 0.0], 2.0)])
    expect = 1.0 + 2.0 * (1.0 / 3.0 + 1.0 / math.sqrt(10.0))
    assert gaslab.conditional_hamiltonian(p, c, mu) == pytest.approx(expect)

    assert gaslab.energy_delta_move(
        p, c, gaslab.FrozenExterior(), 1, [2.0, 0.0, 0.0]
    ) == pytest.approx(-0.5)


def test_ball_averages_newton():
    k = gaslab.KernelSpec.coulomb(3)
    oracle = gaslab.BallAverageOracle.closed_form(1.0)
    assert gaslab.ball_average_kernel(oracle, k, 3, 0.0) == pytest.approx(1.5)
    assert gaslab.ball_average_kernel(oracle, k, 3, 0.5) == pytest.approx(1.375)
    assert gaslab.ball_average_kernel(oracle, k, 3, 2.0) == pytest.approx(0.5)
    quad = gaslab.BallAverageOracle.quadrature(1.0)
    assert gaslab.ball_average_kernel(quad, k, 3, 0.5) == pytest.approx(1.375, abs=1e-6)


def test_favorability_symmetric_pair():
    p = gaslab.GasParams.make(3, 2, 1.0)
    p.potential = gaslab.PotentialSpec.zero()
    c = gaslab.Configuration([[0.0, 0.0, 0.0], [5.0, 0.0, 0.0]])
    r = gaslab.favorability(p, c, gaslab.FrozenExterior(), 0, 1,
                            gaslab.BallAverageOracle.closed_form(1.0))
    assert r.mim_ij == pytest.approx(1.5)
    assert r.mim_ji == pytest.approx(1.5)
    assert r.favorable == gaslab.MimDirection.i_to_j
    assert r.slack == pytest.approx(0.2)


def test_regions():
    ball = gaslab.Region.parse("ball(0,0,0;2)")
    assert ball.contains([1.0, 0.0, 0.0])
    assert not ball.contains([2.0, 0.0, 0.0])
    assert ball.volume(3) == pytest.approx(4.0 / 3.0 * math.pi * 8.0)
    domain = gaslab.Region.unite(ball, gaslab.Region.complement(
        gaslab.Region.ball([0.0, 0.0, 0.0], 4.0)))
    assert domain.contains([5.0, 0.0, 0.0])
    assert not domain.contains([3.0, 0.0, 0.0])


def test_config_validate_rejects_inadmissible_beta():
    text = "[gas]\nd = 3\nn_particles = 2\nbeta = 0.0\n\n[chain]\nn_steps = 100\n"
    with pytest.raises(Exception):
        gaslab.validate_config(text)


def test_experiment_roundtrip(tmp_path):
    text = """
[gas]
d = 3
n_particles = 1
beta = 2.0
potential = quadratic(0.25)

[chain]
n_chains = 2
n_burnin = 5000
n_steps = 50000
seed = 7

[check calibration]
"""
    status, summary = gaslab.run_config(text, str(tmp_path / "run"))
    assert status == 0
    assert "overall: PASS" in summary
    assert (tmp_path / "run" / "summary.txt").read_text() == summary
    status2, summary2 = gaslab.report_dir(str(tmp_path / "run"))
    assert status2 == 0
    assert summary2 == summary
