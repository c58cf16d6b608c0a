import numpy as np
import pytest

from avint.bbm import (
    HermiteFeFunction,
    PeriodicHermiteSpace,
    bbm_invariants,
    bbm_step_conservative,
    bbm_step_gauss,
    soliton_ic,
    soliton_speed,
    write_snapshot_csv,
)
from avint.bbm.dynamics import SOLITON_AMPLITUDE, SOLITON_SPEED, peak_position
from avint.errors import NoSolitonError, ParameterError


@pytest.fixture(scope="module")
def space():
    return PeriodicHermiteSpace(-50.0, 50.0, 50)


@pytest.fixture(scope="module")
def u0(space):
    return soliton_ic(space)


def test_invariants_of_zero(space):
    inv = bbm_invariants(HermiteFeFunction(space, np.zeros(space.n_dofs)))
    assert (inv.H, inv.I1, inv.I2) == (0.0, 0.0, 0.0)


def test_invariants_of_constant_one(space):
    c = np.zeros(space.n_dofs)
    c[0::2] = 1.0
    inv = bbm_invariants(HermiteFeFunction(space, c))
    assert inv.H == pytest.approx(200.0 / 3.0, rel=1e-12)
    assert inv.I1 == pytest.approx(100.0, rel=1e-12)
    assert inv.I2 == pytest.approx(100.0, rel=1e-10)


def test_soliton_profile_values(u0):
    assert u0(np.array([0.0]))[0] == pytest.approx(SOLITON_AMPLITUDE, abs=1e-13)
    assert abs(u0(np.array([-50.0]))[0]) < 1e-12  # decayed to ~2e-13 at the boundary
    inv = bbm_invariants(u0)
    assert inv.H == pytest.approx(11.1, abs=0.05)
    assert inv.I2 == pytest.approx(15.95, abs=0.05)


def test_soliton_even_symmetry(u0):
    # node m sits at -50 + 2m, so m and M-m mirror: values match, slopes flip
    values = u0.coefficients[0::2]
    derivs = u0.coefficients[1::2]
    assert values[1:] == pytest.approx(values[1:][::-1], abs=1e-12)
    assert derivs[1:] == pytest.approx(-derivs[1:][::-1], abs=1e-12)


def test_zero_is_a_fixed_point(space):
    z = HermiteFeFunction(space, np.zeros(space.n_dofs))
    z1, _ = bbm_step_conservative(z, 1.0, 2)
    assert np.abs(z1.coefficients).max() == 0.0
    z2 = bbm_step_gauss(z, 1.0, 2)
    assert np.abs(z2.coefficients).max() == 0.0


def test_conservative_step_preserves_energy_and_mass(u0):
    inv0 = bbm_invariants(u0)
    u1, aux = bbm_step_conservative(u0, 1.0, 2)
    inv1 = bbm_invariants(u1)
    assert abs(inv1.H - inv0.H) <= 1e-10
    assert abs(inv1.I1 - inv0.I1) <= 1e-10
    assert aux.coefficients.shape == (2, u0.space.n_dofs)


def test_gauss_step_preserves_quadratic_invariant(u0):
    inv0 = bbm_invariants(u0)
    u1 = bbm_step_gauss(u0, 1.0, 2)
    inv1 = bbm_invariants(u1)
    assert abs(inv1.I2 - inv0.I2) <= 1e-9


def test_speed_of_synthetic_translation(space):
    c = 1.5
    times = np.arange(12) * 2.0
    snaps = []
    for t in times:
        shift = c * t
        f = lambda x: SOLITON_AMPLITUDE / np.cosh(
            0.31 * ((x - shift + 50.0) % 100.0 - 50.0)) ** 2
        fp_h = 1e-6
        fp = lambda x: (f(x + fp_h) - f(x - fp_h)) / (2 * fp_h)
        snaps.append(space.interpolate(f, fp))
    measured = soliton_speed(times, snaps)
    assert measured == pytest.approx(c, abs=1e-5)


def test_speed_of_stationary_profile(space, u0):
    times = np.arange(10) * 1.0
    snaps = [u0] * 10
    assert soliton_speed(times, snaps) == pytest.approx(0.0, abs=1e-12)


def test_no_soliton_error(space):
    small = HermiteFeFunction(space, np.full(space.n_dofs, 1e-3))
    times = np.arange(10) * 1.0
    with pytest.raises(NoSolitonError):
        soliton_speed(times, [small] * 10)


def test_speed_needs_enough_snapshots(space, u0):
    with pytest.raises(ParameterError):
        soliton_speed(np.arange(5), [u0] * 5)


def test_peak_refinement_beats_grid_resolution(space):
    shift = 0.237
    f = lambda x: 1.0 / np.cosh(0.31 * (x - shift)) ** 2
    h = 1e-6
    fp = lambda x: (f(x + h) - f(x - h)) / (2 * h)
    u = space.interpolate(f, fp)
    pos, amp = peak_position(space, u.coefficients)
    # the coarse-mesh interpolant shifts the sharp peak by a few centi-units
    assert pos == pytest.approx(shift, abs=5e-2)
    assert amp == pytest.approx(1.0, abs=1e-2)


def test_snapshot_csv_format(tmp_path, u0):
    path = tmp_path / "snap.csv"
    write_snapshot_csv(u0, path, points_per_cell=4)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "x,u"
    assert len(lines) == 1 + 4 * u0.space.num_cells
    x0, v0 = map(float, lines[1].split(","))
    assert x0 == -50.0
    with pytest.raises(ParameterError):
        write_snapshot_csv(u0, path, points_per_cell=3)


@pytest.mark.slow
def test_short_soliton_run_tracks_reference_speed(space, u0):
    coeffs = u0.coefficients.copy()
    from avint.bbm import ConservativeBbmStepper

    stepper = ConservativeBbmStepper(space, 2, 1.0)
    times, snaps = [0.0], [HermiteFeFunction(space, coeffs.copy())]
    for k in range(60):
        coeffs = stepper.step(coeffs)[0]
        times.append(k + 1.0)
        snaps.append(HermiteFeFunction(space, coeffs.copy()))
    measured = soliton_speed(np.asarray(times), snaps)
    assert measured == pytest.approx(SOLITON_SPEED, abs=5e-3)
