"""The proof of the 22-term relation: named cycles, step replays, bookkeeping."""

from .catalog import (ArityMismatch, NAMES, RHO_X, RHO_XY, RHO_Y, SIGMA_XY, TAU, UnknownName,
                      apply_involution, apply_tau, make_cycle)
from .steps import STEP_TITLES, StepFailed, StepResult, replay_step
from .theorem import (CLAIM, RELABELINGS, DegenerateInput, Report, RunResult, assemble_R,
                      check_nondegenerate, r_terms, rerun_step, verify_theorem)
