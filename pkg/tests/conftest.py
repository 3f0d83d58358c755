import numpy as np
import pytest

from memtaxis import linear, model, simulator

REF_KIN = dict(beta=0.5, m=0.5, s=0.8)
REF_TRANSPORT = dict(d11=2.0, d22=3.0, d21=18.0, xi=0.06)


def make_setup(ell, **overrides):
    """Reference parameter set at a given domain scale."""
    kin_kwargs = {**REF_KIN}
    tr_kwargs = {**REF_TRANSPORT, "ell": ell}
    for key, value in overrides.items():
        (kin_kwargs if key in kin_kwargs else tr_kwargs)[key] = value
    kin = model.KineticParams(**kin_kwargs)
    tr = model.TransportParams(**tr_kwargs)
    ss = model.steady_state(kin)
    lin = model.linearize(kin, tr, ss)
    return kin, tr, ss, lin


@pytest.fixture(scope="session")
def setup2():
    return make_setup(2.0)


@pytest.fixture(scope="session")
def setup3():
    return make_setup(3.0)


@pytest.fixture(scope="session")
def report2(setup2):
    kin, tr, ss, lin = setup2
    return linear.classify(lin, tr, ss)


@pytest.fixture(scope="session")
def report3(setup3):
    kin, tr, ss, lin = setup3
    return linear.classify(lin, tr, ss)


def random_hopf_cases(rng, count, max_tries=4000):
    """Seeded parameter draws that land in the windowed one-root regime."""
    cases = []
    tries = 0
    while len(cases) < count and tries < max_tries:
        tries += 1
        scale = rng.uniform(0.4, 1.8, size=7)
        try:
            kin = model.KineticParams(beta=0.5 * scale[0], m=0.5 * scale[1],
                                      s=0.8 * scale[2])
            tr = model.TransportParams(d11=2.0 * scale[3], d22=3.0 * scale[4],
                                       d21=18.0 * scale[5], xi=0.06 * scale[6],
                                       ell=rng.uniform(1.5, 3.5))
            ss = model.steady_state(kin)
            lin = model.linearize(kin, tr, ss)
            report = linear.classify(lin, tr, ss)
        except Exception:
            continue
        if report.regime == linear.REGIME_DELAY_HOPF:
            cases.append((kin, tr, ss, lin, report))
    if len(cases) < count:
        raise RuntimeError(f"found only {len(cases)} windowed cases")
    return cases


@pytest.fixture(scope="session")
def long_runs():
    """Session cache of heavy reference-parameter PDE runs."""
    cache = {}

    def get(ell, tau, t_end=2000.0, ic_amplitude=0.1, ic_mode=None):
        key = (ell, tau, t_end, ic_amplitude, ic_mode)
        if key not in cache:
            kin, tr, ss, lin = make_setup(ell)
            if ic_mode is None:
                rep = linear.classify(lin, tr, ss)
                ic_mode = rep.critical.n_c if rep.critical else 1
            cfg = simulator.SimConfig(kin=kin, tr=tr, tau=tau, n_cells=200,
                                      t_end=t_end, ic_mode=ic_mode,
                                      ic_amplitude=ic_amplitude)
            cache[key] = simulator.run(cfg)
        return cache[key]

    return get


def newton_root(lin, tr, n, tau, lam0, steps=80):
    """Track a characteristic root by Newton iteration from lam0."""
    lam = complex(lam0)
    for _ in range(steps):
        f = linear.characteristic_residual(lam, tau, n, lin, tr)
        h = 1e-7 * (1.0 + abs(lam))
        fp = linear.characteristic_residual(lam + h, tau, n, lin, tr)
        fm = linear.characteristic_residual(lam - h, tau, n, lin, tr)
        d = (fp - fm) / (2.0 * h)
        delta = f / d
        lam -= delta
        if abs(delta) < 1e-14 * (1.0 + abs(lam)):
            break
    return lam
