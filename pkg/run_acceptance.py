#
# run_acceptance.py
#
# Acceptance runs for the matrix machine. Each case in the JSON file either loads a program file
# or builds a cellular automaton, runs it, and checks expected node values, frame statistics
# and/or agreement with the dense reference machine. Simply run:
#
#   python run_acceptance.py tests/acceptance.json
#
# Use --help for more instructions.
#

import argparse
from enum import Enum
import os
import time
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, RootModel

from machine import Program, Trajectory, final_state, run
from oracle import compare_trajectories, dense_run
from experiments import CAConfig, GridSpec, build_ca_program, frame_from_state, frame_stats, parse_init, parse_pattern, stabilize
from models import load_program


####################################################################################################
# Test Case JSON and Evaluation
####################################################################################################

class Expectation(BaseModel):
    node: str
    value: float
    t: Optional[int] = None         # defaults to the last step
    tolerance: float = 1e-9

class CellularAutomaton(BaseModel):
    width: int
    height: int
    p: float = 0.995
    pattern: str = "vn-avg"
    init: str = "white"
    switch_at: int = 5
    seed: int = 0
    stabilize_rms: Optional[float] = None
    max_mean_abs: Optional[float] = None    # mean |cell value| at the last step must stay below
    min_max_abs: Optional[float] = None     # max |cell value| at the last step must reach

class TestCase(BaseModel):
    name: str
    active: bool
    program: Optional[str] = None
    ca: Optional[CellularAutomaton] = None
    steps: int
    watch: List[str] = []
    expect: List[Expectation] = []
    oracle_tolerance: Optional[float] = None    # compare against the dense machine

class TestCaseFile(RootModel):
    root: List[TestCase]

class TestResult(str, Enum):
    FAILED = "FAILED"
    IGNORED = "IGNORED"
    PASSED = "PASSED"

def load_tests(filepath: str) -> List[TestCase]:
    with open(file=filepath, mode="r") as fp:
        text = fp.read()
    return TestCaseFile.model_validate_json(json_data=text).root

def evaluate_expectations(test: TestCase, trajectory: Trajectory) -> List[str]:
    failures = []
    for expectation in test.expect:
        t = expectation.t if expectation.t is not None else trajectory.horizon
        values = [ point.value for point in trajectory.points if point.t == t and point.node == expectation.node ]
        if len(values) == 0:
            failures.append(f"no value recorded for '{expectation.node}' at t={t}")
        elif abs(values[0] - expectation.value) > expectation.tolerance:
            failures.append(f"'{expectation.node}' at t={t} is {values[0]!r}, expected {expectation.value!r} +/- {expectation.tolerance}")
    return failures

def run_program_case(test: TestCase, base_dir: str) -> List[str]:
    program = load_program(filepath=os.path.join(base_dir, test.program))
    watch = test.watch if len(test.watch) > 0 else list(program.watch)
    trajectory = run(program=program, horizon=test.steps, watch=watch)
    failures = evaluate_expectations(test, trajectory)
    if test.oracle_tolerance is not None:
        report = compare_trajectories(trajectory, dense_run(program=program, horizon=test.steps, watch=watch), tol=test.oracle_tolerance)
        if not report.passed:
            failures.append(f"dense machine comparison {report.summary()}")
    return failures

def run_ca_case(test: TestCase) -> List[str]:
    spec = test.ca
    grid = GridSpec(width=spec.width, height=spec.height)
    program: Program = build_ca_program(
        grid=grid,
        pattern=parse_pattern(spec.pattern),
        init=parse_init(spec.init),
        config=CAConfig(p=spec.p, t_switch=spec.switch_at, seed=spec.seed)
    )
    adjust = None
    if spec.stabilize_rms is not None:
        adjust = lambda state: stabilize(state, target_rms=spec.stabilize_rms, grid=grid)
    stats = frame_stats(frame_from_state(final_state(program=program, horizon=test.steps, adjust=adjust), grid))
    print(f"  t={stats.t}: mean|v|={stats.mean_abs:.6g} max|v|={stats.max_abs:.6g} rms={stats.rms:.6g}")
    failures = []
    if spec.max_mean_abs is not None and not stats.mean_abs < spec.max_mean_abs:
        failures.append(f"mean |v| = {stats.mean_abs:.6g} is not below {spec.max_mean_abs}")
    if spec.min_max_abs is not None and not stats.max_abs >= spec.min_max_abs:
        failures.append(f"max |v| = {stats.max_abs:.6g} is below {spec.min_max_abs}")
    return failures


####################################################################################################
# Markdown Report Generation
####################################################################################################

class ReportGenerator:
    def __init__(self, test_filepath: str, generate_markdown: bool):
        self._generate_markdown = generate_markdown
        if not generate_markdown:
            return
        base = os.path.splitext(os.path.basename(test_filepath))[0]
        filename = f"{base}.md"
        self._fp = open(file=filename, mode="w")
        self._fp.write(f"# {test_filepath}\n\n")
        self._fp.write(f"|Result|Test|Time (s)|Details|\n")
        self._fp.write(f"|------|----|--------|-------|\n")

    def __del__(self):
        if not self._generate_markdown:
            return
        self._fp.close()

    def add_result(self, name: str, test_result: TestResult, seconds: float, failures: List[str]):
        if not self._generate_markdown:
            return
        details = "; ".join(failures)
        self._fp.write(f"|{test_result.value}|{self._escape(name)}|{seconds:.2f}|{self._escape(details)}|\n")

    def end(self, num_passed: int, num_evaluated: int, times: List[float]):
        if not self._generate_markdown:
            return
        if num_evaluated == 0:
            self._fp.write(f"\n**Score: N/A**\n\n")
        else:
            self._fp.write(f"\n**Score: {100.0 * num_passed / num_evaluated : .1f}%**\n\n")
        if len(times) > 0:
            self._fp.write(f"**Timings**\n")
            self._fp.write(f"|Mean|Median|Min|Max|Total|\n")
            self._fp.write(f"|----|------|---|---|-----|\n")
            self._fp.write(f"|{np.mean(times):.2f}|{np.median(times):.2f}|{np.min(times):.2f}|{np.max(times):.2f}|{np.sum(times):.2f}|\n\n")

    @staticmethod
    def _escape(text: str) -> str:
        special_chars = "\\`*_{}[]()#+-.!|"
        escaped_text = ''.join(['\\' + char if char in special_chars else char for char in text])
        return escaped_text.replace("\n", " ")


####################################################################################################
# Main Program
####################################################################################################

if __name__ == "__main__":
    parser = argparse.ArgumentParser("run_acceptance")
    parser.add_argument("file", nargs=1)
    parser.add_argument("--test", metavar="name", help="Run specific test")
    parser.add_argument("--markdown", action="store_true", help="Produce report in markdown file")
    options = parser.parse_args()

    # Load tests; program paths are relative to the test file
    tests = load_tests(filepath=options.file[0])
    base_dir = os.path.dirname(os.path.abspath(options.file[0]))

    # Markdown report generator
    report = ReportGenerator(test_filepath=options.file[0], generate_markdown=options.markdown)

    num_evaluated = 0
    num_passed = 0
    times = []

    for test in tests:
        if not options.test:
            # No specific test, run all that are active
            if not test.active:
                continue
        else:
            if test.name.lower().strip() != options.test.lower().strip():
                continue

        print(f"Test: {test.name}")
        start = time.perf_counter()
        try:
            if test.program is not None:
                failures = run_program_case(test=test, base_dir=base_dir)
            elif test.ca is not None:
                failures = run_ca_case(test=test)
            else:
                failures = None
        except Exception as e:
            failures = [ f"{type(e).__name__}: {e}" ]
        seconds = time.perf_counter() - start

        if failures is None:
            test_result = TestResult.IGNORED
        else:
            test_result = TestResult.PASSED if len(failures) == 0 else TestResult.FAILED
            num_evaluated += 1
            num_passed += (1 if test_result == TestResult.PASSED else 0)
            times.append(seconds)
        for failure in failures or []:
            print(f"  {failure}")
        print(f"Test: {test_result.value} ({seconds:.2f} s)")
        print("")
        report.add_result(name=test.name, test_result=test_result, seconds=seconds, failures=failures or [])

    # Summary
    print("TEST RESULTS")
    if num_evaluated == 0:
        print(f"  Score: N/A")
    else:
        print(f"  Score: {num_passed}/{num_evaluated} = {100.0 * num_passed / num_evaluated : .1f}%")
    if len(times) > 0:
        print("")
        print("Timing")
        print("------")
        print(f"Mean  : {np.mean(times):.2f}")
        print(f"Median: {np.median(times):.2f}")
        print(f"Min   : {np.min(times):.2f}")
        print(f"Max   : {np.max(times):.2f}")
        print(f"Total : {np.sum(times):.2f}")
    report.end(num_passed=num_passed, num_evaluated=num_evaluated, times=times)
