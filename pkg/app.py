#
# app.py
#
# Command line front end of the matrix machine. Sub-commands:
#
#   validate  check a program file and summarize it
#   run       run a program file and write its trajectory as CSV
#   ca        build and run a continuous cellular automaton, writing PGM frames and statistics
#   morph     run the convex combinations of two program files along a lambda grid
#
# Exit status is 0 on success, 1 when an input is invalid and 2 when a run fails.
#

import argparse
import csv
from functools import partial
import logging
import os
import sys
import traceback
from typing import Callable, Dict, Iterable, List, TextIO

from pydantic import ValidationError
from tqdm import tqdm

from signature import NameParseError, SignatureError
from elements import ConstraintViolation, OrderClass, ViolationMode, classify_element
from machine import MachineState, Program, ProgramError, Trajectory, element_key, init_machine, run, step
from experiments import CAConfig, GridSpec, MorphError, PatternError, amplify_frame, build_ca_program, frame_file_name, frame_from_state, frame_stats, morph_programs, parse_init, parse_pattern, stabilize, write_pgm
from models import FrameStats, evaluations_by_operation, load_program, load_program_file, save_program


####################################################################################################
# Configuration
####################################################################################################

MM_SEED = os.environ.get("MM_SEED", None)
MM_LOG_LEVEL = os.environ.get("MM_LOG_LEVEL", "WARNING")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2

logger = logging.getLogger("app")


class UsageError(ValueError):
    pass


def env_seed() -> int | None:
    """
    MM_SEED as an integer, or None if it is unset.
    """
    if MM_SEED is None or len(MM_SEED) == 0:
        return None
    try:
        return int(MM_SEED)
    except ValueError:
        raise UsageError(f"MM_SEED must be an integer, got '{MM_SEED}'")

def load_seeded(filepath: str, seed: int | None) -> Program:
    """
    Loads a program file. The seed is --seed if given, else the file's own seed, else MM_SEED,
    else 0.
    """
    program_file = load_program_file(filepath=filepath)
    if seed is None and program_file.seed is None:
        seed = env_seed()
    return program_file.to_program(seed=seed)


####################################################################################################
# Output
####################################################################################################

def format_value(value: float) -> str:
    # 17 significant digits round-trip binary64
    return f"{value:.17g}"

def write_trajectory(trajectory: Trajectory, fp: TextIO):
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow([ "t", "node", "value" ])
    for point in trajectory.points:
        writer.writerow([ point.t, point.node, format_value(point.value) ])

def write_frame_stats(stats: List[FrameStats], fp: TextIO):
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow([ "t", "mean_abs", "max_abs", "rms" ])
    for row in stats:
        writer.writerow([ row.t, format_value(row.mean_abs), format_value(row.max_abs), format_value(row.rms) ])

def emit(path: str | None, write: Callable[[TextIO], None]):
    if path is None or path == "-":
        write(sys.stdout)
        return
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(file=path, mode="w", newline="") as fp:
        write(fp)

def parse_watch(values: Iterable[str] | None) -> List[str] | None:
    if not values:
        return None
    return [ value for value in values if len(value) > 0 ]

def parse_stabilize(text: str | None) -> float | None:
    if text is None:
        return None
    key, _, value = text.partition("=")
    if key.strip() != "rms" or len(value) == 0:
        raise UsageError(f"--stabilize expects rms=<target>, got '{text}'")
    try:
        target = float(value)
    except ValueError:
        raise UsageError(f"--stabilize target must be a number, got '{value}'")
    if target <= 0.0:
        raise UsageError(f"--stabilize target must be > 0, got {target}")
    return target


####################################################################################################
# Commands
####################################################################################################

def order_class_histogram(program: Program) -> Dict[OrderClass, int]:
    histogram = { order_class: 0 for order_class in OrderClass }
    for column, row, source in program.materialized_matrix().entries():
        histogram[classify_element(source, element_key(column, row), program.signature)] += 1
    return histogram

def cmd_validate(options) -> int:
    program = load_program(filepath=options.file)
    histogram = order_class_histogram(program)
    print(f"Program: {options.file}")
    print(f"  Operations: {', '.join(program.signature.names())}")
    print(f"  Nodes: {len(program.node_names())}")
    print(f"  Elements: {len(program.materialized_matrix())}")
    print(f"  Policy: {program.policy.value} ({program.violation_mode.value})")
    print("  Order classes:")
    for order_class, count in histogram.items():
        if order_class != OrderClass.ZERO:
            print(f"    {order_class.value}: {count}")
    print("OK")
    return EXIT_OK

def cmd_run(options) -> int:
    program = load_seeded(filepath=options.file, seed=options.seed)
    if options.policy_mode is not None:
        program.violation_mode = ViolationMode(options.policy_mode)
    if options.steps < 0:
        raise UsageError(f"--steps must be >= 0, got {options.steps}")

    progress = tqdm(total=options.steps, disable=not options.progress, file=sys.stderr)
    final: List[MachineState] = []
    def on_state(state: MachineState):
        if state.t > 0:
            progress.update(1)
        final[:] = [ state ]
    trajectory = run(program=program, horizon=options.steps, watch=parse_watch(options.watch), on_state=on_state)
    progress.close()

    emit(options.out, lambda fp: write_trajectory(trajectory, fp))
    if options.stats:
        state = final[0]
        print(f"Active nodes: {len(state.active_nodes)}", file=sys.stderr)
        for operation, usage in evaluations_by_operation(state.evaluations, program.signature).items():
            print(f"  {operation}: {usage.nodes} node(s), {usage.evaluations} evaluation(s)", file=sys.stderr)
    return EXIT_OK

def cmd_ca(options) -> int:
    grid = GridSpec(width=options.width, height=options.height)
    config = CAConfig(
        p=options.p,
        t_switch=options.switch_at,
        ramp=options.ramp,
        seed=options.seed if options.seed is not None else (env_seed() or 0),
        morph_start=options.morph_start,
        morph_ramp=options.morph_ramp
    )
    program = build_ca_program(
        grid=grid,
        pattern=parse_pattern(options.pattern),
        init=parse_init(options.init),
        config=config,
        morph_to=parse_pattern(options.morph_to) if options.morph_to is not None else None
    )
    if options.save_program is not None:
        save_program(program=program, filepath=options.save_program)
        print(f"Saved program to {options.save_program}")
    if options.frame_every <= 0:
        raise UsageError(f"--frame-every must be >= 1, got {options.frame_every}")

    target_rms = parse_stabilize(options.stabilize)
    adjust = partial(stabilize, target_rms=target_rms, grid=grid) if target_rms is not None else None
    stats: List[FrameStats] = []

    def capture(state: MachineState):
        if state.t % options.frame_every != 0 and state.t != options.steps:
            return
        frame = frame_from_state(state, grid)
        stats.append(frame_stats(frame))
        if options.frames_dir is not None:
            write_pgm(amplify_frame(frame) if options.amplify else frame, os.path.join(options.frames_dir, frame_file_name(state.t)))

    state = init_machine(program)
    capture(state)
    for _ in tqdm(range(options.steps), disable=not options.progress, file=sys.stderr):
        state = step(state, program, adjust=adjust)
        capture(state)

    stats_path = options.stats_out
    if stats_path is None and options.frames_dir is not None:
        stats_path = os.path.join(options.frames_dir, "stats.csv")
    emit(stats_path, lambda fp: write_frame_stats(stats, fp))
    last = stats[-1]
    print(f"t={last.t}: mean|v|={last.mean_abs:.6g} max|v|={last.max_abs:.6g} rms={last.rms:.6g}", file=sys.stderr)
    return EXIT_OK

def cmd_morph(options) -> int:
    program_a = load_seeded(filepath=options.file_a, seed=options.seed)
    program_b = load_seeded(filepath=options.file_b, seed=options.seed)
    if options.lambda_steps < 1:
        raise UsageError(f"--lambda-steps must be >= 1, got {options.lambda_steps}")
    if options.steps < 0:
        raise UsageError(f"--steps must be >= 0, got {options.steps}")
    watch = parse_watch(options.watch)

    rows = []
    for index in range(options.lambda_steps + 1):
        lam = index / options.lambda_steps
        program = morph_programs(program_a, program_b, lam)
        trajectory = run(program=program, horizon=options.steps, watch=watch if watch is not None else program_a.watch)
        if options.out_dir is not None:
            emit(os.path.join(options.out_dir, f"lambda_{index:03d}.csv"), lambda fp: write_trajectory(trajectory, fp))
        rows.extend((lam, point) for point in trajectory.points)
        logger.info(f"lambda={lam}: ran {options.steps} step(s)")

    if options.out_dir is None or options.out is not None:
        def write(fp: TextIO):
            writer = csv.writer(fp, lineterminator="\n")
            writer.writerow([ "lambda", "t", "node", "value" ])
            for lam, point in rows:
                writer.writerow([ format_value(lam), point.t, point.node, format_value(point.value) ])
        emit(options.out, write)
    return EXIT_OK


####################################################################################################
# Main Program
####################################################################################################

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser("matrix-machine")
    parser.add_argument("--verbose", action="store_true", help="Log debug output")
    commands = parser.add_subparsers(dest="command", required=True)

    validate = commands.add_parser("validate", help="Validate a program file")
    validate.add_argument("file")
    validate.set_defaults(handler=cmd_validate)

    run_parser = commands.add_parser("run", help="Run a program file")
    run_parser.add_argument("file")
    run_parser.add_argument("--steps", type=int, default=10, help="Number of steps")
    run_parser.add_argument("--watch", action="append", metavar="node", help="Node to record (repeatable; defaults to the program's watch list)")
    run_parser.add_argument("--out", metavar="file", help="Trajectory CSV (stdout if omitted)")
    run_parser.add_argument("--seed", type=int, help="Override the program's seed (fallback: MM_SEED)")
    run_parser.add_argument("--policy-mode", choices=[ mode.value for mode in ViolationMode ], help="Override the constraint violation mode")
    run_parser.add_argument("--stats", action="store_true", help="Print evaluation counters per operation")
    run_parser.add_argument("--progress", action="store_true", help="Show a progress bar")
    run_parser.set_defaults(handler=cmd_run)

    ca = commands.add_parser("ca", help="Run a continuous cellular automaton")
    ca.add_argument("--width", type=int, default=64)
    ca.add_argument("--height", type=int, default=64)
    ca.add_argument("--p", type=float, default=0.995, help="Propagation probability")
    ca.add_argument("--pattern", default="vn-avg", help="vn-avg, shift:<dx>,<dy> or random-sparse:<k>,<seed>")
    ca.add_argument("--init", default="white", help="white, black, none, checker, stripes or random:<seed>")
    ca.add_argument("--switch-at", type=int, default=5, help="Time step at which the pattern takes over")
    ca.add_argument("--ramp", type=int, default=0, help="Cross-fade length of the switch (0 = abrupt)")
    ca.add_argument("--morph-to", metavar="pattern", help="Second pattern faded in after the switch")
    ca.add_argument("--morph-start", type=int, help="Start of the fade to --morph-to")
    ca.add_argument("--morph-ramp", type=int, default=0, help="Length of the fade to --morph-to")
    ca.add_argument("--steps", type=int, default=200)
    ca.add_argument("--frames-dir", metavar="dir", help="Directory for PGM frames and stats.csv")
    ca.add_argument("--frame-every", type=int, default=1)
    ca.add_argument("--amplify", action="store_true", help="Scale each frame so its maximal absolute value is 1")
    ca.add_argument("--stabilize", metavar="rms=R", help="Rescale cell values to RMS R whenever they fall below it")
    ca.add_argument("--stats-out", metavar="file", help="Frame statistics CSV (default: <frames-dir>/stats.csv, else stdout)")
    ca.add_argument("--save-program", metavar="file", help="Also save the generated program file")
    ca.add_argument("--seed", type=int)
    ca.add_argument("--progress", action="store_true", help="Show a progress bar")
    ca.set_defaults(handler=cmd_ca)

    morph = commands.add_parser("morph", help="Run convex combinations of two program files")
    morph.add_argument("file_a")
    morph.add_argument("file_b")
    morph.add_argument("--lambda-steps", type=int, default=4, help="Number of lambda intervals K (lambda = 0, 1/K, ..., 1)")
    morph.add_argument("--steps", type=int, default=10)
    morph.add_argument("--watch", action="append", metavar="node")
    morph.add_argument("--out", metavar="file", help="Combined CSV with a lambda column (stdout if neither --out nor --out-dir)")
    morph.add_argument("--out-dir", metavar="dir", help="One trajectory CSV per lambda, lambda_<index>.csv")
    morph.add_argument("--seed", type=int)
    morph.set_defaults(handler=cmd_morph)
    return parser

def main(argv: List[str] | None = None) -> int:
    options = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if options.verbose else MM_LOG_LEVEL.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return options.handler(options)
    except (ProgramError, ValidationError, NameParseError, SignatureError, PatternError, MorphError, UsageError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except ConstraintViolation as e:
        logger.warning(f"Run stopped at t={e.t} in column '{e.column}'")
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as e:
        print(f"Error: {e}\n{traceback.format_exc()}", file=sys.stderr)
        return EXIT_RUNTIME

if __name__ == "__main__":
    sys.exit(main())
