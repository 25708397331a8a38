import os
import subprocess
import sys

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from pucci_phase import _kernel_py, kernel
from pucci_phase.field import vector_field
from pucci_phase.flow import Budget, EventKind, EventSpec, integrate
from pucci_phase.params import make_params

compiled = pytest.importorskip("pucci_phase._kernel")

CASES = [(make_params(1, 1, "plus", 3, 0), 5.0, (0.3, 0.9), 30.0),
         (make_params(1, 2, "plus", 4, 0), 9.5, (0.05, 3.5), 40.0),
         (make_params(1, 2, "minus", 3, 1.0), 3.0, (0.4, 2.0), 20.0)]


def _run(fn, prm, p, start, horizon):
    b = Budget()
    return fn(0.0, start[0], start[1], 1, prm.field_vector(p), horizon, b.rtol, b.atol, b.hmax,
              int(b.max_steps), 1, (1e6, 1e6, 1e8, 5.0), [], (0.0, 0.0, 0.0, 1.0), 0)


@pytest.mark.parametrize("prm,p,start,horizon", CASES)
def test_backends_agree(prm, p, start, horizon):
    rc = _run(compiled.integrate_kernel, prm, p, start, horizon)
    rp = _run(_kernel_py.integrate_kernel, prm, p, start, horizon)
    assert len(rc[0]) == len(rp[0])
    for a, b in zip(rc[:3], rp[:3]):
        np.testing.assert_allclose(np.asarray(a), np.asarray(b), rtol=1e-9, atol=1e-11)
    assert list(rc[3]) == list(rp[3])
    assert rc[9] == rp[9]


def test_default_backend_is_compiled():
    if os.environ.get("PUCCI_PHASE_PURE"):
        pytest.skip("pure backend forced by the environment")
    assert kernel.BACKEND == "compiled"


def test_pure_fallback_selected_by_env():
    env = dict(os.environ, PUCCI_PHASE_PURE="1")
    code = ("import pucci_phase as pp;"
            "from pucci_phase.classify import classify_p;"
            "prm = pp.make_params(1, 1, 'plus', 3, 0);"
            "print(pp.BACKEND, classify_p(4.0, prm).label.value)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    assert out.stdout.split() == ["python", "C"]


@pytest.mark.parametrize("prm,p,start,horizon", CASES)
def test_integrate_against_solve_ivp(prm, p, start, horizon):
    # reference integration that steps across the interface without event handling
    # compared on the bounded part of the orbit, before any blow-up threshold
    tr = integrate(start, p, prm, events=EventSpec(stations=()), horizon=horizon)
    keep = (tr.X < 2 * prm.wall + 1) & (tr.Z < 2 * prm.n0_height)
    ts = tr.t[keep]
    ref = solve_ivp(lambda t, y: vector_field(y, p, prm), (0.0, ts[-1]), start,
                    method="DOP853", rtol=1e-12, atol=1e-13, t_eval=ts)
    assert len(ts) > 20
    np.testing.assert_allclose(np.vstack([tr.X[keep], tr.Z[keep]]), ref.y, rtol=1e-6, atol=1e-7)


def test_event_localisation():
    prm = make_params(1, 2, "plus", 4, 0)
    tr = integrate((0.05, 3.5), 9.5, prm, horizon=40.0)
    for ev in tr.events_of(EventKind.CONCAVITY_CROSS):
        assert abs(ev.point.Z - prm.concavity_level) <= 1e-9
    for ev in tr.events_of(EventKind.XNULLCLINE_CROSS):
        assert abs(vector_field(ev.point, 9.5, prm)[0]) <= 1e-8
