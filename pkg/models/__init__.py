from .program_file import OperationSpec, ExternalSpec, SourceSpec, ElementSpec, ProgramFile, load_program_file, load_program, save_program
from .stats import FrameStats, EvaluationUsage, accumulate_evaluations, evaluations_by_operation
