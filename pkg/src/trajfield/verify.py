"""Self-check suites behind the `verify` subcommand.

Each suite exercises one numerical claim the rest of the package
relies on and reports a measured value against its bound.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import mlp as nets
from .derivatives import DiffConfig, dft, hybrid_derivative, idft, spectral_derivative
from .integrators import Integrator, rollout, rollout_second_order
from .presets import default_config, generate_ground_truth
from .systems import (DoublePendulumParams, SmsdParams, TmsdParams, dp_energy,
                      dp_field, dp_momenta_from_velocities, slider_crank_phi,
                      smsd_accel_fn, smsd_energy, tmsd_accel_fn, tmsd_energy)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name:<22} {status}  {self.detail}"


def _order_slope(scheme: str) -> float:
    errors = []
    dts = (0.1, 0.05, 0.025, 0.0125)
    for dt in dts:
        integ = Integrator(scheme=scheme, dt=dt)
        traj = rollout(lambda t, z: z, np.array([1.0, 1.0]), integ,
                       int(round(1.0 / dt)))
        errors.append(abs(traj.states[-1, 0] - np.e))
    return float(np.polyfit(np.log(dts), np.log(errors), 1)[0])


def suite_integrator_order() -> SuiteResult:
    rk4 = _order_slope("rk4")
    mid = _order_slope("midpoint")
    ok = 3.8 <= rk4 <= 4.2 and 1.8 <= mid <= 2.2
    return SuiteResult("integrator-order", ok,
                       f"rk4 slope {rk4:.3f} (want 4.0+-0.2), "
                       f"midpoint slope {mid:.3f} (want 2.0+-0.2)")


def suite_gradient_check() -> SuiteResult:
    rng = np.random.default_rng(7)
    net = nets.init_mlp((2, 16, 16, 1), seed=3)
    X = rng.normal(size=(8, 2))
    Y = rng.normal(size=(8, 1))
    _, grads = nets.loss_and_grad(net, X, Y)
    h = 1e-5
    worst = 0.0
    for l, (gW, gb) in enumerate(grads):
        for arr, g in ((net.weights[l], gW), (net.biases[l], gb)):
            flat = arr.ravel()
            for idx in range(flat.size):
                orig = flat[idx]
                flat[idx] = orig + h
                lp = nets.loss_and_grad(net, X, Y)[0]
                flat[idx] = orig - h
                lm = nets.loss_and_grad(net, X, Y)[0]
                flat[idx] = orig
                fd = (lp - lm) / (2.0 * h)
                num = abs(g.ravel()[idx] - fd)
                den = max(abs(fd), abs(g.ravel()[idx]), 1e-6)
                worst = max(worst, num / den)
    ok = worst < 1e-5
    return SuiteResult("gradient-check", ok,
                       f"max rel err {worst:.3e} (want < 1e-05)")


def suite_spectral_accuracy() -> SuiteResult:
    n, dt = 512, 0.01
    t = dt * np.arange(n)
    span = n * dt
    sin = np.sin(2.0 * np.pi * t / span)
    want = (2.0 * np.pi / span) * np.cos(2.0 * np.pi * t / span)
    est = spectral_derivative(sin, dt)
    lo, hi = int(0.2 * n), int(0.8 * n)
    sin_err = float(np.max(np.abs(est - want)[lo:hi]))
    ramp = 0.7 + 2.5 * t
    ramp_err = float(np.max(np.abs(spectral_derivative(ramp, dt) - 2.5)))
    ok = sin_err < 1e-2 and ramp_err < 1e-6
    return SuiteResult("spectral-accuracy", ok,
                       f"sine interior err {sin_err:.3e} (want < 1e-02), "
                       f"ramp err {ramp_err:.3e} (want < 1e-06)")


def suite_gibbs_mitigation() -> SuiteResult:
    n = 256
    dt = 1.0 / n
    z = dt * np.arange(n)  # sawtooth for the periodic extension
    omega = 2.0 * np.pi * np.fft.fftfreq(n, d=dt)
    naive = idft(1j * omega * dft(z)).real
    est = spectral_derivative(z, dt)
    lo, hi = int(0.2 * n), int(0.8 * n)
    naive_err = float(np.max(np.abs(naive - 1.0)[lo:hi]))
    est_err = float(np.max(np.abs(est - 1.0)[lo:hi]))
    ratio = naive_err / max(est_err, 1e-16)  # treated error can be ~0
    ok = ratio >= 5.0
    return SuiteResult("gibbs-mitigation", ok,
                       f"interior err naive {naive_err:.3e} vs treated "
                       f"{est_err:.3e}, ratio {ratio:.1e} (want >= 5)")


def suite_constraint_residual() -> SuiteResult:
    cfg = default_config("slider_crank")
    traj = generate_ground_truth(cfg)
    worst = max(float(np.max(np.abs(slider_crank_phi(z[:9], cfg.params))))
                for z in traj.states)
    ok = worst <= 1e-6
    return SuiteResult("constraint-residual", ok,
                       f"max |phi| {worst:.3e} over {traj.n_steps} steps "
                       f"(want <= 1e-06)")


def suite_energy_conservation() -> SuiteResult:
    integ = Integrator(scheme="rk4", dt=0.01)

    sp = SmsdParams(d=0.0)
    traj = rollout_second_order(smsd_accel_fn(sp), np.array([1.0, 0.0]),
                                integ, 1000)
    e = np.array([smsd_energy(z[0], z[1], sp) for z in traj.states])
    smsd_drift = float(np.max(np.abs(e - e[0])) / abs(e[0]))

    tp = TmsdParams(d1=0.0, d2=0.0, d3=0.0)
    traj = rollout_second_order(tmsd_accel_fn(tp),
                                np.array([1.0, 2.0, 3.0, 0.0, 0.0, 0.0]),
                                integ, 1000)
    e = np.array([tmsd_energy(z[:3], z[3:], tp) for z in traj.states])
    tmsd_drift = float(np.max(np.abs(e - e[0])) / abs(e[0]))

    dp = DoublePendulumParams()
    th1, th2 = 3.0 * np.pi / 7, 3.0 * np.pi / 4
    p1, p2 = dp_momenta_from_velocities(th1, th2, 0.0, 0.0, dp)
    ham = rollout(dp_field(dp), np.array([th1, th2, p1, p2]), integ, 300)
    e = np.array([dp_energy(*z, dp) for z in ham.states])
    scale = max(abs(e[0]), 1.0)
    dp_drift = float(np.max(np.abs(e - e[0])) / scale)

    ok = smsd_drift < 1e-6 and tmsd_drift < 1e-6 and dp_drift < 1e-4
    return SuiteResult("energy-conservation", ok,
                       f"rel drift smsd {smsd_drift:.2e}, tmsd "
                       f"{tmsd_drift:.2e} (want < 1e-06), dp "
                       f"{dp_drift:.2e} (want < 1e-04)")


def suite_hybrid_targets() -> SuiteResult:
    cfg = default_config("smsd")
    traj = generate_ground_truth(cfg)
    est = hybrid_derivative(traj.velocities[:, 0], traj.dt, DiffConfig())
    true = traj.accels[:, 0]
    margin = max(5, traj.states.shape[0] // 50)
    err = np.abs(est - true)[margin:-margin]
    rel = float(err.max() / np.max(np.abs(true)))
    ok = rel < 0.01
    return SuiteResult("hybrid-targets", ok,
                       f"interior rel err {rel:.3e} (want < 1e-02)")


SUITES = {
    "integrator-order": suite_integrator_order,
    "gradient-check": suite_gradient_check,
    "spectral-accuracy": suite_spectral_accuracy,
    "gibbs-mitigation": suite_gibbs_mitigation,
    "constraint-residual": suite_constraint_residual,
    "energy-conservation": suite_energy_conservation,
    "hybrid-targets": suite_hybrid_targets,
}


def run_suites(names=None, stream=None) -> bool:
    """Run the named suites (all by default); prints one line per suite
    and returns True when everything passed."""
    import sys

    stream = stream or sys.stdout
    names = list(names) if names else list(SUITES)
    all_ok = True
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}; available: "
                             f"{', '.join(SUITES)}")
        start = time.perf_counter()
        result = SUITES[name]()
        elapsed = time.perf_counter() - start
        stream.write(result.line() + f"  [{elapsed:.2f}s]\n")
        all_ok = all_ok and result.passed
    return all_ok
