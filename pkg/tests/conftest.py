"""Shared fixtures for the test suite.

The two expensive artifacts (a trained mass-spring-damper model and the
slider-crank ground truth) are built once per session and shared between
the unit tests and the acceptance checks.
"""

import time

import pytest

import trajfield as tf
from trajfield.integrators import field_eval_count, reset_field_eval_count
from trajfield.learning import rollout_learned

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def smsd_run():
    """Full mass-spring-damper pipeline with the shipped preset:
    ground truth, dataset, trained model, 1000-step rollout.  The
    field-evaluation counter is snapshotted around the training call so
    the solver-free property can be asserted later without retraining.
    """
    cfg = tf.default_config("smsd")
    start = time.perf_counter()
    full = tf.generate_ground_truth(cfg)
    train_traj, test_traj = tf.split_trajectory(full, cfg.train_steps)
    dataset = tf.build_dataset(train_traj, cfg.diff)
    reset_field_eval_count()
    model, history = tf.train(dataset, cfg.train)
    train_evals = field_eval_count()
    pred = rollout_learned(model, full.states[0], cfg.make_integrator(),
                           full.states.shape[0] - 1, t0=cfg.t0)
    elapsed = time.perf_counter() - start
    return {
        "cfg": cfg, "full": full, "train": train_traj, "test": test_traj,
        "dataset": dataset, "model": model, "history": history,
        "pred": pred, "elapsed": elapsed, "train_evals": train_evals,
    }


@pytest.fixture(scope="session")
def slider_truth():
    """Constrained slider-crank ground truth over the full 45 s run."""
    cfg = tf.default_config("slider_crank")
    return cfg, tf.generate_ground_truth(cfg)
