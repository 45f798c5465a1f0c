"""Step-decay learning rate schedule.

Computed in decimal so the logged values are exactly 1e-3, 1e-4, ... for
the default configuration instead of accumulating float drift.
"""

from __future__ import annotations

from decimal import Decimal


def lr_for_epoch(epoch: int, base_lr: float = 0.001, step: int = 7,
                 gamma: float = 0.1) -> float:
    """Learning rate for a 1-based epoch: decays by ``gamma`` every
    ``step`` epochs, so epochs 1..7 run at base_lr, 8..14 at base_lr*gamma,
    and so on."""
    if epoch < 1:
        raise ValueError("epoch numbering starts at 1")
    if step < 1:
        raise ValueError("step must be >= 1")
    decays = (epoch - 1) // step
    value = Decimal(str(base_lr)) * (Decimal(str(gamma)) ** decays)
    return float(value)


def schedule_table(epochs: int, base_lr: float = 0.001, step: int = 7,
                   gamma: float = 0.1) -> list[tuple[int, float]]:
    """(epoch, lr) pairs for a full run; handy for dry-run logging."""
    return [(e, lr_for_epoch(e, base_lr, step, gamma)) for e in range(1, epochs + 1)]
