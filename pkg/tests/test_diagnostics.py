import numpy as np
import pytest

from blobflow.diagnostics import (
    energy_local,
    energy_nonlocal,
    entropy_and_moment,
    record,
)
from blobflow.grid import Density, Gaussian, Parabola, make_grid, mass, sample_initial
from blobflow.kernel import BoundaryCondition, ConvolutionMode
from blobflow.scheme import ModelConfig, TimeControls, simulate

NOFLUX = BoundaryCondition.NOFLUX
PERIODIC = BoundaryCondition.PERIODIC


def test_energy_local_uniform():
    g = make_grid(0.0, 1.0, 10)
    assert energy_local(Density(g, np.ones(10))) == pytest.approx(0.5, abs=1e-15)
    assert energy_local(Density(g, np.zeros(10))) == 0.0


def test_energy_local_parabola_closed_form():
    # polynomial oracle: integral of (1-x^2)^2 over [-1,1] is 16/15
    g = make_grid(-3.0, 3.0, 4096)
    rho = sample_initial(Parabola(), g)
    assert energy_local(rho) == pytest.approx(0.5 * 16.0 / 15.0, abs=1e-5)


def test_smoothed_energy_never_exceeds_local(rng):
    g = make_grid(-1.0, 1.0, 32)
    for _ in range(2000):
        rho = Density(g, rng.random(32))
        eps = 10.0 ** rng.uniform(-2, 1)
        bc = PERIODIC if rng.random() < 0.5 else NOFLUX
        assert energy_nonlocal(rho, eps, bc) <= energy_local(rho) + 1e-13


def test_smoothed_energy_constant_periodic_equals_local():
    g = make_grid(-2.0, 2.0, 64)
    rho = Density(g, np.full(64, 1.7))
    for eps in (0.05, 1.0):
        assert energy_nonlocal(rho, eps, PERIODIC) == pytest.approx(
            energy_local(rho), rel=1e-14
        )


def test_smoothed_energy_tends_to_local(rng):
    g = make_grid(-1.0, 1.0, 64)
    rho = Density(g, rng.random(64))
    e = energy_local(rho)
    gaps = [
        abs(energy_nonlocal(rho, ratio * g.dx, NOFLUX, ConvolutionMode.DENSE) - e)
        for ratio in (10.0, 1.0, 0.1, 0.01)
    ]
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-12


def test_entropy_values():
    g1 = make_grid(0.0, 1.0, 10)
    ent, _ = entropy_and_moment(Density(g1, np.ones(10)))
    assert ent == pytest.approx(0.0, abs=1e-15)
    g2 = make_grid(0.0, 2.0, 10)
    ent2, _ = entropy_and_moment(Density(g2, np.full(10, 0.5)))
    assert ent2 == pytest.approx(-np.log(2.0), rel=1e-14)
    # zero cells contribute nothing
    ent3, _ = entropy_and_moment(Density(g1, np.zeros(10)))
    assert ent3 == 0.0


def test_second_moment_symmetric_halves():
    g = make_grid(-2.0, 2.0, 64)
    rho = sample_initial(Gaussian(sigma=0.5), g)
    _, m2 = entropy_and_moment(rho)
    half = np.sum(rho.values[32:] * g.centers[32:] ** 2) * g.dx
    assert m2 == pytest.approx(2.0 * half, rel=1e-12)


def test_record_assembles_fields():
    g = make_grid(-5.0, 5.0, 128)
    rho = sample_initial(Gaussian(), g)
    rec = record(0.0, rho, ModelConfig(epsilon=0.3))
    assert rec.mass == pytest.approx(mass(rho), abs=1e-15)
    assert rec.linf == rho.values.max()
    assert rec.energy_gap == pytest.approx(rec.energy_local - rec.energy_nonlocal, abs=1e-15)
    assert rec.energy_nonlocal <= rec.energy_local
    local_rec = record(0.0, rho, ModelConfig(epsilon=None))
    assert local_rec.energy_nonlocal == local_rec.energy_local
    assert local_rec.energy_gap == 0.0


def test_energy_and_peak_decay_along_run():
    g = make_grid(-8.0, 8.0, 256)
    cfg = ModelConfig(epsilon=0.2)
    controls = TimeControls(t_end=0.5, snapshot_times=tuple(np.linspace(0.05, 0.5, 10)), cfl=0.5)
    snaps = simulate(Gaussian(), g, cfg, controls)
    recs = [record(t, d, cfg) for t, d in snaps]
    for a, b in zip(recs, recs[1:]):
        assert b.energy_nonlocal <= a.energy_nonlocal + 1e-8
        assert b.linf <= a.linf + 1e-8


def test_local_energy_decays_along_local_run():
    g = make_grid(-8.0, 8.0, 256)
    cfg = ModelConfig(epsilon=None)
    controls = TimeControls(t_end=0.5, snapshot_times=tuple(np.linspace(0.05, 0.5, 10)), cfl=0.5)
    snaps = simulate(Gaussian(), g, cfg, controls)
    recs = [record(t, d, cfg) for t, d in snaps]
    for a, b in zip(recs, recs[1:]):
        assert b.energy_local <= a.energy_local + 1e-8


def test_energy_gap_shrinks_with_eps():
    g = make_grid(-8.0, 8.0, 512)
    rho = sample_initial(Gaussian(), g)
    gaps = [
        record(0.0, rho, ModelConfig(epsilon=e)).energy_gap for e in (1.0, 0.3, 0.1, 0.03)
    ]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
