import numpy as np
import pytest


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    """Compile the numba kernels once so no timed test pays the JIT cost."""
    from tracelab import kernels as K

    K.gamma_ln_scalar(3.0)
    d = np.full(64, 2.0)
    o = np.full(63, -1.0)
    lam = K.tridiag_eigvals_sturm(d, o, 2)
    K.inverse_iteration(d, o, lam[0], np.ones(64))
    K.shoot_classify(1.4, 1, 3.0, 0, 1e-2, 5.0, 1e-12)
    K.shoot_profile(1.4, 1, 3.0, 0, 1e-2, 5.0, 1e-12, 2)
    K.shoot_classify(1.9, 2, 0.2, 1, 1e-2, 5.0, 1e-12)
    K.shoot_profile(1.9, 2, 0.2, 1, 1e-2, 5.0, 1e-12, 2)
    K.cayley_evolve(d, o, np.ones((1, 64), dtype=np.complex128), 1e-3, 3, 1)
    K.enumerate_sum_squares(3, 64)


@pytest.fixture(scope="session")
def harmonic_eigensystem():
    """Six oscillator modes on a shared grid, reused across modules."""
    from tracelab.potentials import Potential
    from tracelab.spectra import dirichlet_eigensystem

    v = Potential.harmonic(1.0, 0.0, 1)
    return dirichlet_eigensystem(v, 6, 1500, domain=(-9.0, 9.0))


@pytest.fixture(scope="session")
def dual_state_21():
    """The compact-support ground state for gamma=2, d=1 (q = 3/5)."""
    from tracelab.groundstate import shoot_ground_state

    return shoot_ground_state(0.6, 1)


@pytest.fixture(scope="session")
def soliton_q2():
    from tracelab.groundstate import soliton_1d

    return soliton_1d(2.0)
