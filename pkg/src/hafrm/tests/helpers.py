"""Model surgery shared by unit and evaluation tests."""

import numpy as np

from hafrm.model import DualHeadModel


def zero_policy_head(model: DualHeadModel) -> DualHeadModel:
    model.params["policy_head.weight"].data[...] = 0.0
    model.params["policy_head.bias"].data[...] = 0.0
    return model


def randomize_reward_head(model: DualHeadModel, seed: int = 1) -> DualHeadModel:
    rng = np.random.default_rng(seed)
    model.params["reward_head.weight"].data[...] = rng.normal(0.0, 0.5, size=model.params["reward_head.weight"].shape)
    model.params["reward_head.bias"].data[...] = 0.1
    return model
