import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.polynomial.legendre import leggauss
from scipy import integrate, special

import damekricci.experiments as experiments_mod
from damekricci.cfunction import c_function
from damekricci.errors import NumericalError, PreconditionError, ResolutionError
from damekricci.geometry import H3, SpaceParams
from damekricci.experiments import (
    CounterexampleSpec,
    ExperimentReport,
    bump,
    build_counterexample,
    convergence_run,
    counterexample_family,
    counterexample_grid,
    envelope_run,
    fit_loglog,
    maximal_ratio_run,
    oscillatory_bound_check,
    oscillatory_integral,
    pitt_check,
    sharpness_run,
    smooth_cutoff,
)
from damekricci.spectral import RadialGrid, RadialProfile, SobolevKind, SpectralGrid, Spectrum, sft, sobolev_norm

from conftest import TEST_SPACES, calibrated


# -- bumps --------------------------------------------------------------------------


@given(st.floats(-3, 3))
def test_bump_range_and_evenness(x):
    v = bump(x)
    assert 0 <= v <= 1
    assert v == bump(-x)
    if abs(x) <= 0.5:
        assert v == 1
    if abs(x) >= 1:
        assert v == 0


def test_bump_monotone_and_smooth():
    x = np.linspace(0.5, 1, 2001)
    v = bump(x)
    assert np.all(np.diff(v) <= 0)
    assert bump(0.75) == pytest.approx(0.5, abs=1e-15)
    # derivatives vanish at the ends of the transition band
    h = 1e-3
    assert abs(bump(0.5 + h) - 1) < 1e-100 and bump(1 - h) < 1e-100
    with pytest.raises(PreconditionError):
        bump(0.2, plateau=1.0, support=0.5)


def test_smooth_cutoff():
    f = smooth_cutoff(lambda s: np.exp(-s), 2.0, 3.0)
    s = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    assert np.allclose(f(s), [1, np.exp(-1), np.exp(-2), 0, 0])


def test_fit_loglog_exact_power():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    slope, rms = fit_loglog(x, 3 * x ** -0.7)
    assert slope == pytest.approx(-0.7, abs=1e-13) and rms < 1e-13
    assert math.isnan(fit_loglog([1.0], [1.0])[0])


# -- counterexample family -------------------------------------------------------------


@pytest.mark.parametrize("space", TEST_SPACES, ids=str)
def test_counterexample_shape(space):
    spec = CounterexampleSpec(space, 0.5, 64)
    lo, hi = spec.window
    assert (lo, hi) == pytest.approx((64 - 64 ** 0.75, 64 + 64 ** 0.75))
    assert experiments_mod.counterexample_values(spec, 64.0) == pytest.approx(
        abs(c_function(space, 64.0)) / 8, rel=1e-14)
    assert experiments_mod.counterexample_values(spec, np.array([lo, hi])) == pytest.approx([0, 0], abs=0)
    assert spec.annulus == pytest.approx((0.05 * 64 ** -0.5, 0.1 * 64 ** -0.5))
    assert spec.time_at(spec.annulus[1]) == pytest.approx(0.1 * 64 ** -0.5 * 8 / 0.5)


@pytest.mark.parametrize("space", TEST_SPACES, ids=str)
@pytest.mark.parametrize("beta", [0.0, 0.1, 0.3])
def test_counterexample_sobolev_norm_oracle(space, beta):
    """Sobolev norm against direct quadrature of N^(-1) (lambda^2 + Q^2/4)^beta eta^2 over the window."""
    spec = CounterexampleSpec(space, 0.5, 128, beta=beta)
    spectrum = build_counterexample(spec)
    got = sobolev_norm(space, spectrum, SobolevKind("inhomogeneous", beta))
    lo, hi = spec.window
    w = spec.halfwidth
    oracle = integrate.quad(lambda l: (l ** 2 + space.Q ** 2 / 4) ** beta * bump((128 - l) / w) ** 2 / 128,
                            lo, hi, epsabs=0, epsrel=1e-13, limit=200)[0]
    assert got == pytest.approx(math.sqrt(oracle), rel=1e-8)


def test_counterexample_resolution_error():
    spec = CounterexampleSpec(H3, 0.5, 64)
    lo, hi = spec.window
    with pytest.raises(ResolutionError):
        build_counterexample(spec, SpectralGrid.uniform_panels(lo, hi, 2, 16))
    assert len(build_counterexample(spec, counterexample_grid(spec, 4)).values) == 64


@pytest.mark.parametrize("kwargs", [{"a": 1.0}, {"N": 1}, {"epsilon": 0.5}, {"beta": -0.1}, {"N": 64.5}])
def test_counterexample_validation(kwargs):
    args = {"space": H3, "a": 0.5, "N": 64, **kwargs}
    with pytest.raises(PreconditionError):
        CounterexampleSpec(**args)


def test_sharpness_slope_invariant_under_panel_doubling(h3_eval):
    N_list = [16, 32, 64, 128]
    coarse = sharpness_run(H3, 0.5, 0.1, N_list, evaluator=h3_eval, panels=16)
    fine = sharpness_run(H3, 0.5, 0.1, N_list, evaluator=h3_eval, panels=32)
    assert abs(coarse.slope - fine.slope) <= 0.01
    assert coarse.slope == pytest.approx(0.1 - 0.5 / 4, abs=0.05)
    with pytest.raises(PreconditionError):
        sharpness_run(H3, 0.5, 0.1, [], evaluator=h3_eval)
    with pytest.raises(PreconditionError):
        sharpness_run(H3, 0.5, 0.1, [64, 32], evaluator=h3_eval)


# -- maximal ratios -----------------------------------------------------------------


def test_maximal_ratio_zero_family(h3_eval):
    grid = SpectralGrid.uniform_panels(0, 4, 2)
    rep = maximal_ratio_run(H3, 0.5, 0.175, [(1, Spectrum(grid, np.zeros(len(grid))))], evaluator=h3_eval)
    assert rep.passed and rep.sup_ratio == 0.0


def test_maximal_ratio_gaussian_family(h3_eval):
    family = []
    for scale in (1, 2):
        profile = RadialProfile.from_function(RadialGrid.for_frequency(6, 12 * scale),
                                              lambda s, k=scale: np.exp(-k * s ** 2))
        family.append((scale, sft(h3_eval, profile, SpectralGrid.for_radius(12 * scale, 6))))
    rep = maximal_ratio_run(H3, 0.5, 0.175, family, evaluator=h3_eval, t_grid=np.geomspace(1e-3, 0.999, 32))
    assert rep.inputs["max_ratio_drift"] < 0.02
    assert all(r["ratio_refined"] >= r["ratio"] for r in rep.per_point)
    with pytest.raises(PreconditionError):
        maximal_ratio_run(H3, 0.5, 0.1, family, evaluator=h3_eval)


# -- oscillatory integral -----------------------------------------------------------


def _brute_oscillatory(x, eps, N, a, beta, k=30):
    """Composite Gauss-Legendre on a mesh graded geometrically towards 0, panels below one period."""
    X, W = leggauss(k)
    edges = [0.0] + list(0.5 * 0.15 ** np.arange(60, -1, -1))
    L = 2 * N
    panels = int(np.ceil((L - 0.5) * max(abs(x), 1))) + 10
    e = np.array(edges + list(np.linspace(0.5, L, panels + 1)[1:]))
    xi = ((e[1:] - e[:-1])[:, None] * (X + 1) / 2 + e[:-1, None]).ravel()
    w = ((e[1:] - e[:-1])[:, None] * W / 2).ravel()
    return 2 * np.sum(w * np.cos(x * xi) * np.exp(1j * eps * xi ** a) * xi ** (-2 * beta) * bump(xi / N, 1, 2))


@pytest.mark.parametrize("x,eps,N", [(100.0, -1, 64), (0.0158, 0, 64), (1.0, 1, 16), (3.3, -1, 128)])
def test_oscillatory_integral_matches_brute_force(x, eps, N):
    got = oscillatory_integral(x, eps, N, 0.5, 0.2)
    ref = _brute_oscillatory(x, eps, N, 0.5, 0.2)
    assert abs(got - ref) <= 1e-7 * max(1.0, abs(ref))


def test_oscillatory_integral_even_in_x():
    assert oscillatory_integral(-2.5, 1, 32, 0.5, 0.2) == oscillatory_integral(2.5, 1, 32, 0.5, 0.2)
    with pytest.raises(PreconditionError):
        oscillatory_integral(0.0, 1, 32, 0.5, 0.2)


def test_oscillatory_integral_homogeneous_limit():
    beta = 0.2
    for x in (0.7, 2.0, 9.0):
        exact = 2 * special.gamma(1 - 2 * beta) * math.sin(math.pi * beta) * x ** (2 * beta - 1)
        assert oscillatory_integral(x, 0.0, 512, 0.5, beta) == pytest.approx(exact, rel=1e-6)


def test_oscillatory_integral_stabilizes_in_N():
    values = [oscillatory_integral(4.0, 1.0, N, 0.5, 0.2) for N in (64, 128, 256)]
    assert abs(values[2] - values[1]) < abs(values[1] - values[0]) + 1e-9


def test_oscillatory_failure_is_reported(monkeypatch):
    def failing(*args, **kwargs):
        warnings.warn("roundoff", integrate.IntegrationWarning)
        return 0.0, 0.0

    monkeypatch.setattr(experiments_mod.integrate, "quad", failing)
    with pytest.raises(NumericalError) as info:
        oscillatory_integral(2.0, 1.0, 16, 0.5, 0.2)
    assert info.value.context == {"x": 2.0, "epsilon": 1.0, "N": 16}


def test_oscillatory_bound_small_sweep():
    rep = oscillatory_bound_check(0.5, 0.2, [16, 64], [-1, 1], np.geomspace(1, 10, 5))
    assert rep.passed
    assert len(rep.per_point) == 20
    # at x = 0.1 the cutoff N = 16 is still pre-asymptotic and the check notices
    assert not oscillatory_bound_check(0.5, 0.2, [16, 64], [1], [0.1]).passed
    assert rep.inputs["c1"] == pytest.approx(0.6) and rep.inputs["c2"] == pytest.approx(0.7)
    with pytest.raises(PreconditionError):
        oscillatory_bound_check(0.5, 0.3, [16], [0], [1.0])


# -- weighted Fourier inequality ------------------------------------------------------


def _pitt_oracle(c, w, alpha):
    def hat2(xi):
        re = integrate.quad(lambda x: bump((x - c) / w) * math.cos(x * xi), c - w, c + w, limit=200, epsabs=1e-14)[0]
        im = integrate.quad(lambda x: bump((x - c) / w) * math.sin(x * xi), c - w, c + w, limit=200, epsabs=1e-14)[0]
        return re * re + im * im

    near = integrate.quad(hat2, 0, 1, weight="alg", wvar=(-2 * alpha, 0), limit=200)[0]
    far = integrate.quad(lambda t: t ** (-2 * alpha) * hat2(t), 1, 200 / w, limit=2000)[0]
    spatial = integrate.quad(lambda x: abs(x) ** (2 * alpha) * bump((x - c) / w) ** 2, c - w, c + w, limit=200)[0]
    return math.sqrt(2 * (near + far)) / math.sqrt(spatial)


def test_pitt_alpha_zero_is_plancherel():
    rep = pitt_check([(0.0, 1.0), (1.5, 0.5), (-3.0, 0.1)], 0.0)
    for row in rep.per_point:
        assert row["ratio"] == pytest.approx(math.sqrt(2 * math.pi), rel=1e-9)


@pytest.mark.parametrize("alpha", [0.25, 0.49])
def test_pitt_matches_adaptive_oracle(alpha):
    rep = pitt_check([(1.5, 0.5)], alpha)
    assert rep.per_point[0]["ratio"] == pytest.approx(_pitt_oracle(1.5, 0.5, alpha), rel=1e-8)


def test_pitt_spike_sweep_bounded():
    rep = pitt_check([(1.5, 0.5 / 2 ** k) for k in range(5)], 0.49)
    assert rep.passed and np.isfinite(rep.sup_ratio)


@pytest.mark.parametrize("bumps,alpha,p", [([(0, 1)], 0.5, 2), ([(0, 1)], 0.2, 3), ([], 0.2, 2), ([(0, 0)], 0.2, 2)])
def test_pitt_validation(bumps, alpha, p):
    with pytest.raises(PreconditionError):
        pitt_check(bumps, alpha, p)


# -- convergence --------------------------------------------------------------------


def test_convergence_band_limited_rate(h3_eval):
    grid = SpectralGrid.uniform_panels(0, 6, 4)
    spectrum = Spectrum(grid, np.exp(-grid.lambdas))
    rep = convergence_run(H3, 0.5, 0.1, spectrum, np.geomspace(0.5, 1e-4, 8), evaluator=h3_eval)
    assert rep.passed
    assert rep.slope == pytest.approx(1.0, abs=0.05)


def test_convergence_zero_function_and_validation(h3_eval):
    grid = SpectralGrid.uniform_panels(0, 6, 2)
    rep = convergence_run(H3, 0.5, 0.1, Spectrum(grid, np.zeros(len(grid))), [0.5, 0.1], evaluator=h3_eval)
    assert rep.passed and rep.sup_ratio == 0 and rep.slope is None
    with pytest.raises(PreconditionError):
        convergence_run(H3, 0.5, 0.1, Spectrum(grid, np.zeros(len(grid))), [0.1, 0.5], evaluator=h3_eval)
    with pytest.raises(PreconditionError):
        convergence_run(H3, 0.5, 0.1, Spectrum(grid, np.zeros(len(grid))), [1.0], evaluator=h3_eval)


# -- reports and envelopes -------------------------------------------------------------


def test_report_serialization(tmp_path):
    rep = ExperimentReport({"a": np.float64(0.5), "grid": np.arange(3), "bad": float("nan")},
                           [{"N": np.int64(4), "ok": np.bool_(True), "v": 1 / 3}], 0.1, None, 2.0, True, "demo")
    data = json.loads(rep.to_json())
    assert set(data) == {"inputs", "per_point", "slope", "slope_residual", "sup_ratio", "pass", "criterion",
                         "runtime_seconds"}
    assert data["inputs"] == {"a": 0.5, "grid": [0, 1, 2], "bad": None}
    assert rep.to_json() == rep.to_json()
    path = tmp_path / "r.csv"
    rep.write_csv(path, config={"a": 0.5})
    lines = path.read_text().splitlines()
    assert lines == ['# config: {"a": 0.5}', "N,ok,v", "4,true,0.33333333333333331"]


def test_runs_are_deterministic(h3_eval):
    first = sharpness_run(H3, 0.5, 0.1, [16, 32], evaluator=h3_eval)
    second = sharpness_run(H3, 0.5, 0.1, [16, 32], evaluator=h3_eval)
    assert first.to_json() == second.to_json()
    assert first.runtime_seconds is None
    assert sharpness_run(H3, 0.5, 0.1, [16], evaluator=h3_eval, timed=True).runtime_seconds > 0


def test_envelope_run_exact_on_h3():
    rep = envelope_run(H3, lambda_count=10, s_count=50)
    assert rep.passed and all(r["exact"] for r in rep.per_point)


def test_envelope_run_fits_constants():
    rep = envelope_run(SpaceParams(2, 1), lambda_count=20, s_count=100)
    assert rep.passed
    assert all(0 < r["constant"] < np.inf and not r["exact"] for r in rep.per_point)


def test_counterexample_family_members():
    fam = counterexample_family(H3, 0.5, [16, 32], panels=8)
    assert [N for N, _ in fam] == [16, 32]
    assert all(len(s.values) == 128 for _, s in fam)
