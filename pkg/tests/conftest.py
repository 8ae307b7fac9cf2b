import math

import numpy as np
import pytest

from deepsc_sr import corpus, harness

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def central_diff(f, x: np.ndarray, eps: float = 1e-4) -> np.ndarray:
    """Central finite-difference gradient of scalar ``f`` w.r.t. array ``x`` (in place)."""
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = x[i]
        x[i] = old + eps
        up = f()
        x[i] = old - eps
        down = f()
        x[i] = old
        g[i] = (up - down) / (2 * eps)
    return g


def max_rel_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Largest absolute deviation, relative to the largest gradient entry."""
    scale = max(np.abs(analytic).max(), np.abs(numeric).max(), 1e-12)
    return float(np.abs(analytic - numeric).max() / scale)


@pytest.fixture(scope="session")
def overfit_corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("overfit")
    return corpus.synth_corpus(7, 20, out)


@pytest.fixture(scope="session")
def robust_train_corpus(tmp_path_factory):
    return corpus.synth_corpus(11, 40, tmp_path_factory.mktemp("robust_train"))


@pytest.fixture(scope="session")
def robust_test_corpus(tmp_path_factory):
    return corpus.synth_corpus(12, 20, tmp_path_factory.mktemp("robust_test"))


# Desk-scale optimizer settings shared by the training-based checks.
DESK_TRAIN = dict(batch_size=4, learning_rate=0.5, clip_norm=1.0, converge_tol=0.0)


@pytest.fixture(scope="session")
def robust_model(robust_train_corpus):
    cfg = harness.ExperimentConfig(train_snr_db=8.0, epochs=100, seed=0, **DESK_TRAIN)
    result = harness.train(cfg, robust_train_corpus)
    return result


@pytest.fixture(scope="session")
def overfit_run(overfit_corpus):
    """Noiseless training on the 20-utterance corpus; shared by several checks."""
    cfg = harness.ExperimentConfig(train_snr_db=math.inf, epochs=200, seed=0, shuffle=False, **DESK_TRAIN)
    return harness.train(cfg, overfit_corpus)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {k:2d}: {detail}")
