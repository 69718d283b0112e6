"""Adam and the reduce-on-plateau schedule."""

from .adam import AdamState, adam_step, model_grads
from .schedule import PlateauSchedule, schedule_update

__all__ = ["AdamState", "PlateauSchedule", "adam_step", "model_grads", "schedule_update"]
