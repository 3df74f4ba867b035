from .matrix import ProgramError, CoefficientMatrix, Program, element_key
from .state import MachineState
from .engine import StepHook, TrajectoryPoint, Trajectory, init_machine, step, activate_element, read_stream, run, final_state
