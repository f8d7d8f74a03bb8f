from .objectives import LossBreakdown, hybrid_loss, policy_loss_dpo, reward_loss

__all__ = ["LossBreakdown", "hybrid_loss", "policy_loss_dpo", "reward_loss"]
