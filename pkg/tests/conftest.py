"""Shared fixtures: one trained 2-D ring model reused by several modules.

Also collects the acceptance suite's one-line verdicts so they appear in the
terminal summary even when pytest captures per-test stdout.
"""

import numpy as np
import pytest

from tccm.data import fit_scaler, split_semi_supervised, transform
from tccm.model import init_params
from tccm.synthetic import make_figure1_dataset
from tccm.trainer import TrainConfig, train


class RingSetup:
    """Ring dataset, semi-supervised split, train-fitted scaler, 200-epoch model."""

    def __init__(self) -> None:
        self.dataset = make_figure1_dataset("ring", 1000, 200, seed=0)
        self.plan = split_semi_supervised(self.dataset, seed=0)
        self.scaler = fit_scaler(self.dataset, self.plan.train_indices)
        self.x_train = transform(self.scaler, self.dataset.X[self.plan.train_indices])
        self.x_test = transform(self.scaler, self.dataset.X[self.plan.test_indices])
        self.y_test = self.dataset.y[self.plan.test_indices]
        # epochs=150 is where the label-free margin criterion lands on this data
        self.config = TrainConfig(epochs=150, seed=0, loss_kind="mse")
        params = init_params(2, seed=0)
        self.params, self.trace = train(self.x_train, params, self.config)


@pytest.fixture(scope="session")
def ring():
    return RingSetup()


@pytest.fixture()
def rng():
    return np.random.default_rng(0)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
