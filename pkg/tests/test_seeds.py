import math

import numpy as np
import pytest

from rkpp.seeds import (
    BURGERS_VISCOSITY,
    FISHER_BINDINGS,
    BurgersId,
    BurgersSeed,
    FisherId,
    FisherSeed,
    SeedDomainError,
    SeedPoleError,
    eval_burgers_seed,
    eval_fisher_seed,
)
from rkpp.verify import GridSpec, _stencil, residual_seed

FISHER_GRIDS = {
    "U1": GridSpec(-5, 5, 41, 0, 3, 31),
    "U2": GridSpec(0.5, 3, 31, 0.1, 2, 21),
    "U3": GridSpec(-0.5, 0.5, 31, 0, 0.2, 21),
    "U4": GridSpec(-3, 3, 31, 0, 2, 21),
    "U5": GridSpec(-2, 2, 31, 0, 1, 21),
    "U6": GridSpec(-0.5, 0.5, 31, 0, 0.05, 21),
}


def test_fisher_point_values():
    assert eval_fisher_seed(FisherSeed("U1"), 0.0, 0.0) == pytest.approx(0.5, abs=1e-15)
    for tau in (0.0, 0.7, 3.0):
        assert eval_fisher_seed(FisherSeed("U4", 1.0, 2.0), 0.0, tau) == 0.0
    assert eval_fisher_seed(FisherSeed("U2", 0.0, 1.0), 1.0, 0.0) == pytest.approx(math.sqrt(2))


def test_fisher_bindings():
    assert FISHER_BINDINGS[FisherId.U1] == (1.0, -1.0, 1.0)
    assert FISHER_BINDINGS[FisherId.U3] == (0.0, 1.0, 2.0)
    assert FISHER_BINDINGS[FisherId.U6] == (2.0, 1.0, 2.0)
    s = FisherSeed("U5")
    assert (s.r0, s.h0, s.p) == (-2.0, 1.0, 2.0)
    with pytest.raises(ValueError):
        FisherSeed("U9")


@pytest.mark.parametrize("sid", list(FISHER_GRIDS))
def test_fisher_seed_solves_bound_equation(sid):
    rep = residual_seed(FisherSeed(sid, 1.0, 1.0), FISHER_GRIDS[sid].with_steps(1e-4, 1e-4))
    assert rep.max_residual <= 1e-5


def test_u3_does_not_solve_the_labelled_power():
    # the case label says p = 3; the formula solves p = 2
    grid = FISHER_GRIDS["U3"].with_steps(1e-4, 1e-4)
    assert residual_seed(FisherSeed("U3"), grid, p=3).max_residual > 1e-2


def test_u6_does_not_solve_unit_growth():
    grid = FISHER_GRIDS["U6"].with_steps(1e-4, 1e-4)
    assert residual_seed(FisherSeed("U6"), grid, r0=1.0).max_residual > 1e-2


def test_fisher_nonlinearity_flip_is_detected():
    grid = FISHER_GRIDS["U1"]
    assert residual_seed(FisherSeed("U1"), grid, h0=1.0).max_residual >= 1e-1


def test_fisher_pole_guard():
    with pytest.raises(SeedPoleError):
        # x^2 + k1 x + 6 tau + k2 vanishes at x = -1 for k1 = 2, k2 = 1, tau = 0
        eval_fisher_seed(FisherSeed("U2", 2.0, 1.0), -1.0, 0.0)
    with pytest.raises(SeedPoleError):
        eval_fisher_seed(FisherSeed("U4", -1.0, 1.0), np.array([0.0]), np.array([0.0]))


def test_fisher_vectorized():
    x = np.linspace(-1, 1, 5)
    v = eval_fisher_seed(FisherSeed("U1"), x, 0.3)
    assert v.shape == (5,)
    assert isinstance(eval_fisher_seed(FisherSeed("U1"), 0.1, 0.3), float)


def test_burgers_point_values():
    assert eval_burgers_seed(BurgersSeed("SHOCK", (0.0, 1.0, 0.0)), 0.0, 0.4) == 0.0
    assert eval_burgers_seed(BurgersSeed("NWAVE", (1.0,)), 0.0, 1.0) == 0.0
    assert eval_burgers_seed(BurgersSeed("KAMPE", (1.0, 1.0)), 1.0, 0.0) == pytest.approx(-0.5)


def test_burgers_validation():
    with pytest.raises(ValueError):
        BurgersSeed("SHOCK", (1.0,))
    with pytest.raises(ValueError):
        BurgersSeed("NWAVE", (-1.0,))
    with pytest.raises(ValueError):
        BurgersSeed("KAMPE", nu=0.0)
    with pytest.raises(SeedDomainError):
        eval_burgers_seed(BurgersSeed("TRIANGULAR"), 0.0, 0.0)
    with pytest.raises(SeedDomainError):
        eval_burgers_seed(BurgersSeed("NWAVE"), 0.3, -1.0)
    with pytest.raises(SeedPoleError):
        # 1 + xi vanishes at xi = -1
        eval_burgers_seed(BurgersSeed("KAMPE", (1.0, 1.0)), -1.0, 0.3)


def test_burgers_default_viscosities():
    assert BURGERS_VISCOSITY == {
        BurgersId.SHOCK: 1.0,
        BurgersId.TRIANGULAR: 0.5,
        BurgersId.NWAVE: 1.0,
        BurgersId.KAMPE: 0.5,
    }
    assert BurgersSeed("TRIANGULAR").L == -0.5


BURGERS_CASES = {
    "SHOCK": ((0.5, 1.0, 0.0), GridSpec(-5, 5, 41, 0, 3, 31)),
    "TRIANGULAR": ((1.0,), GridSpec(-3, 3, 31, 0.2, 3, 21)),
    "NWAVE": ((1.0,), GridSpec(-3, 3, 31, 0.2, 3, 21)),
    "KAMPE": ((1.0, 0.0, 1.0), GridSpec(-3, 3, 31, 0.2, 3, 21)),
}


@pytest.mark.parametrize("sid", list(BURGERS_CASES))
def test_burgers_seed_solves_its_viscosity(sid):
    params, grid = BURGERS_CASES[sid]
    seed = BurgersSeed(sid, params)
    rep = residual_seed(seed, grid.with_steps(1e-4, 1e-4))
    assert rep.max_residual <= 1e-5
    other = 1.5 - seed.nu
    assert residual_seed(seed, grid, nu=other).max_residual >= 1e-2


@pytest.mark.parametrize("sid", list(BURGERS_CASES))
def test_normalized_seed_solves_unit_viscosity(sid):
    params, grid = BURGERS_CASES[sid]
    seed = BurgersSeed(sid, params)
    X, T, u, ux, uxx, ut = _stencil(lambda x, t: seed.normalized(x, t, 1.0), grid.with_steps(1e-4, 1e-4))
    assert np.max(np.abs(ut + u * ux - uxx)) <= 1e-5
