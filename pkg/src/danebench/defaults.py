"""Hyperparameter defaults for values the method leaves open.

Every one of these is written into each run manifest and CSV header.
"""

from .schedules import Kind, Schedule

REG = 0.005
ETA = 1.0
MU = 0.0
SVRG_ALPHA = 0.08
SVRG_OUTPUT = "average"  # or "last"
HOLDOUT_SIZE = 100_000
TARGET_LOG10 = -2.5

DANE_SGD_SCHEDULE = Schedule(Kind.DANE_EXP_DECAY, a0=0.05, decay=1e-3, c=0.5)
SGD_SCHEDULE = Schedule(Kind.INVERSE_DECAY, a0=0.05, decay=1e-3, c=0.0)


def schedule_for(algorithm: str) -> Schedule:
    if algorithm == "DaneSgd":
        return DANE_SGD_SCHEDULE
    if algorithm == "DaneSvrg":
        return Schedule.constant(SVRG_ALPHA)
    return SGD_SCHEDULE
