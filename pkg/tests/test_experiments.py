import numpy as np
import pytest

from operations import standard_signature
from elements import ConstantSource, ExternalSource, Interpolation, NodeSource, Schedule
from machine import CoefficientMatrix, MachineState, Program, final_state, run
from experiments import (
    CAConfig, Frame, GridSpec, MorphError, PatternError, amplify_frame, build_ca_program, cell_input, cell_node, cell_nodes,
    frame_file_name, frame_from_state, frame_stats, frame_to_pixels, morph_matrices, morph_programs, parse_init, parse_pattern,
    stabilize, write_pgm
)
from experiments.grid import CellInit


def ca(width: int, height: int, pattern: str = "vn-avg", init: str = "white", **config) -> Program:
    return build_ca_program(
        grid=GridSpec(width=width, height=height),
        pattern=parse_pattern(pattern),
        init=parse_init(init),
        config=CAConfig(**config)
    )


####################################################################################################
# Grids, patterns and initialization
####################################################################################################

def test_cells_are_row_major():
    assert GridSpec(width=2, height=2).cells() == [ (0, 0), (1, 0), (0, 1), (1, 1) ]
    assert GridSpec(width=3, height=2).wrap(-1, 2) == (2, 0)

def test_grid_size_limit(monkeypatch):
    monkeypatch.setenv("MM_MAX_CELLS", "10")
    with pytest.raises(ValueError):
        GridSpec(width=4, height=4)
    assert GridSpec(width=2, height=5).size == 10

def test_vn_avg_sums_duplicate_neighbors():
    weights = parse_pattern("vn-avg").neighbors(GridSpec(width=2, height=1))
    assert weights[(0, 0)] == { (1, 0): 0.5, (0, 0): 0.5 }
    weights = parse_pattern("vn-avg").neighbors(GridSpec(width=1, height=1))
    assert weights[(0, 0)] == { (0, 0): 1.0 }

def test_shift_wraps():
    weights = parse_pattern("shift:1,-1").neighbors(GridSpec(width=3, height=3))
    assert weights[(2, 0)] == { (0, 2): 1.0 }

def test_random_sparse_is_deterministic():
    grid = GridSpec(width=3, height=3)
    pattern = parse_pattern("random-sparse:3,17")
    weights = pattern.neighbors(grid)
    assert weights == pattern.neighbors(grid)
    for cell_weights in weights.values():
        assert len(cell_weights) == 3
        assert all(weight == pytest.approx(1.0 / 3.0) for weight in cell_weights.values())
    with pytest.raises(PatternError):
        parse_pattern("random-sparse:10,1").neighbors(grid)

@pytest.mark.parametrize("text", [ "vn-avg:1", "shift:1", "shift:a,b", "random-sparse:0,1", "hex" ])
def test_bad_patterns(text):
    with pytest.raises(PatternError):
        parse_pattern(text)

def test_init_kinds():
    grid = GridSpec(width=2, height=2)
    assert parse_init("checker").assign(grid)[(1, 1)] == CellInit.WHITE
    assert parse_init("checker").assign(grid)[(1, 0)] == CellInit.BLACK
    assert parse_init("stripes").assign(grid)[(0, 1)] == CellInit.WHITE
    assert parse_init("stripes").assign(grid)[(1, 1)] == CellInit.BLACK
    assert parse_init("random:4").assign(grid) == parse_init("random:4").assign(grid)
    assert parse_init("random:4").describe() == "random:4"

@pytest.mark.parametrize("text", [ "gray", "random:x", "white:1" ])
def test_bad_inits(text):
    with pytest.raises(PatternError):
        parse_init(text)


####################################################################################################
# Cellular automaton programs
####################################################################################################

def test_ca_program_layout():
    program = ca(3, 3)
    sig = program.signature
    column = cell_input(0, 0, sig)
    assert column == "arg1 prop cell_0_0"
    assert program.matrix.get(column, "white init").schedule.value_at(4) == 1.0
    assert program.matrix.get(column, "white init").schedule.value_at(5) == 0.0
    assert program.matrix.get(column, cell_node(1, 0, sig)).schedule.value_at(5) == 0.25
    assert program.watch == ("prop cell_0_0",)
    assert program.shared_input_groups == ()
    program.check()

def test_ca_ramp_uses_linear_schedules():
    program = ca(2, 2, ramp=4)
    schedule = program.matrix.get(cell_input(0, 0, program.signature), "white init").schedule
    assert schedule.mode == Interpolation.LINEAR
    assert [ schedule.value_at(t) for t in (5, 7, 9) ] == [ 1.0, 0.5, 0.0 ]

def test_abrupt_switch_in_linear_mode():
    program = build_ca_program(
        grid=GridSpec(width=3, height=3),
        pattern=parse_pattern("shift:1,0"),
        init=parse_init("white"),
        config=CAConfig(t_switch=2, morph_start=10, morph_ramp=4),
        morph_to=parse_pattern("shift:0,1")
    )
    sig = program.signature
    init = program.matrix.get(cell_input(0, 0, sig), "white init").schedule
    assert init.mode == Interpolation.LINEAR
    assert (init.value_at(1), init.value_at(2)) == (1.0, 0.0)
    fading = program.matrix.get(cell_input(0, 0, sig), cell_node(1, 0, sig)).schedule
    assert [ fading.value_at(t) for t in (1, 2, 10, 12, 14) ] == [ 0.0, 1.0, 1.0, 0.5, 0.0 ]
    appearing = program.matrix.get(cell_input(0, 0, sig), cell_node(0, 1, sig)).schedule
    assert appearing.value_at(14) == 1.0

def test_morph_must_follow_switch():
    with pytest.raises(ValueError):
        CAConfig(t_switch=5, ramp=2, morph_start=6)

def test_identical_columns_share_one_input():
    program = ca(2, 2, pattern="random-sparse:4,3", init="none")
    sig = program.signature
    assert program.shared_input_groups == (frozenset(cell_input(x, y, sig) for x in range(2) for y in range(2)),)
    assert program.matrix.columns() == [ cell_input(0, 0, sig) ]

def test_single_cell_self_loop_keeps_its_value():
    program = ca(1, 1, p=1.0)
    trajectory = run(program, horizon=50)
    assert trajectory.series("prop cell_0_0")[2:] == [ 1.0 ] * 49

def test_frame_at_switch_is_binary():
    grid = GridSpec(width=4, height=4)
    program = ca(4, 4, seed=9)
    frame = frame_from_state(final_state(program, horizon=5), grid)
    assert frame.values.shape == (4, 4)
    assert set(np.unique(frame.values)) <= { 0.0, 1.0 }

def test_checker_dynamics_stay_bounded():
    grid = GridSpec(width=6, height=6)
    program = ca(6, 6, init="checker", seed=2)
    run(program, horizon=60, watch=cell_nodes(grid, program.signature), on_state=lambda state: _assert_bounded(frame_from_state(state, grid)))

def _assert_bounded(frame: Frame):
    assert np.all(np.abs(frame.values) <= 1.0)

@pytest.mark.slow
def test_fade_to_gray():
    grid = GridSpec(width=64, height=64)
    stats = frame_stats(frame_from_state(final_state(ca(64, 64, seed=1), horizon=2000), grid))
    assert stats.mean_abs < 0.01

@pytest.mark.slow
def test_stabilized_structure_persists():
    grid = GridSpec(width=64, height=64)
    state = final_state(ca(64, 64, seed=1), horizon=5000, adjust=lambda state: stabilize(state, target_rms=0.25, grid=grid))
    assert frame_stats(frame_from_state(state, grid)).max_abs >= 0.125

@pytest.mark.slow
def test_self_loop_survival_matches_probability():
    # A cell keeps 1 while every draw since t = 2 succeeded
    p = 0.995
    grid = GridSpec(width=50, height=50)
    state = final_state(ca(50, 50, pattern="shift:0,0", p=p, seed=21), horizon=200)
    expected = p ** 199
    sigma = np.sqrt(expected * (1.0 - expected) / grid.size)
    assert abs(frame_stats(frame_from_state(state, grid)).mean_abs - expected) <= 4.0 * sigma


####################################################################################################
# Morphing
####################################################################################################

def test_morph_endpoints_are_exact():
    a = ca(3, 3, pattern="shift:1,0")
    b = ca(3, 3, pattern="shift:0,1")
    assert morph_programs(a, b, 0.0) is a
    assert morph_programs(a, b, 1.0) is b
    assert morph_matrices(a.matrix, b.matrix, 0.0) == a.matrix
    assert morph_matrices(a.matrix, b.matrix, 1.0) == b.matrix

def test_morph_midpoint_of_shifts():
    a = ca(3, 3, pattern="shift:1,0")
    b = ca(3, 3, pattern="shift:0,1")
    mid = morph_programs(a, b, 0.5)
    sig = mid.signature
    column = cell_input(0, 0, sig)
    assert mid.matrix.get(column, cell_node(1, 0, sig)).schedule.value_at(10) == 0.5
    assert mid.matrix.get(column, cell_node(0, 1, sig)).schedule.value_at(10) == 0.5
    assert mid.matrix.get(column, "white init").schedule.value_at(0) == 1.0
    mid.check()
    assert final_state(mid, horizon=20).t == 20

def test_morph_constants_and_absent_entries(unit_sig):
    a = CoefficientMatrix.from_entries({ ("arg1 id a", "one u"): ConstantSource(0.2) })
    b = CoefficientMatrix.from_entries({
        ("arg1 id a", "one u"): ConstantSource(0.6),
        ("arg1 id b", "one u"): ExternalSource(Schedule(points=((0, 0.0), (4, 0.8)))),
    })
    morph = morph_matrices(a, b, 0.25)
    assert morph.get("arg1 id a", "one u").value == pytest.approx(0.3)
    assert morph.get("arg1 id b", "one u").schedule.points == ((0, 0.0), (4, 0.2))

def test_morph_errors(unit_sig):
    a = Program(signature=unit_sig, matrix=CoefficientMatrix.from_entries({ ("arg1 id a", "one u"): NodeSource("id b") }))
    b = Program(signature=unit_sig, matrix=CoefficientMatrix.from_entries({ ("arg1 id a", "one u"): ConstantSource(0.5) }))
    with pytest.raises(MorphError):
        morph_programs(a, b, 0.5)
    assert morph_programs(a, a, 0.5).matrix.get("arg1 id a", "one u") == NodeSource("id b")
    with pytest.raises(MorphError):
        morph_programs(a, a, 1.5)
    with pytest.raises(MorphError):
        morph_programs(ca(2, 2, p=0.5), ca(2, 2, p=0.9), 0.5)
    step_matrix = CoefficientMatrix.from_entries({ ("arg1 id a", "one u"): ExternalSource(Schedule(points=((0, 0.1),))) })
    ramp_matrix = CoefficientMatrix.from_entries({ ("arg1 id a", "one u"): ExternalSource(Schedule.ramp([ (0, 0.1), (5, 0.3) ])) })
    with pytest.raises(MorphError):
        morph_matrices(step_matrix, ramp_matrix, 0.5)

def test_morphed_trajectories_are_lipschitz_in_lambda():
    # With p = 1 every cell is a delay. A column moves at most 2 of coefficient mass between the
    # patterns and cell values stay in [-1, 1], so |d y_t / d lambda| <= 2 t.
    horizon = 20
    grid = GridSpec(width=8, height=8)
    a = ca(8, 8, pattern="vn-avg", init="random:5", p=1.0)
    b = ca(8, 8, pattern="shift:1,0", init="random:5", p=1.0)
    watch = cell_nodes(grid, a.signature)

    def trajectory(lam: float) -> np.ndarray:
        return np.array([ point.value for point in run(morph_programs(a, b, lam), horizon=horizon, watch=watch).points ])

    lam = 0.3
    base = trajectory(lam)
    for delta in (1e-6, 1e-4, 1e-2):
        ratio = float(np.max(np.abs(trajectory(lam + delta) - base))) / delta
        assert 0.0 < ratio <= 2.0 * horizon


####################################################################################################
# Frames and rendering
####################################################################################################

def _state_with_cells(values):
    grid = GridSpec(width=2, height=2)
    names = cell_nodes(grid, standard_signature())
    return grid, MachineState(
        t=3,
        x_values=dict(zip(names, values)),
        y_values={},
        resolved_a={},
        active_x=frozenset(names),
        active_y=frozenset(),
        master_seed=0
    )

def test_stabilize_rescales_low_rms():
    grid, state = _state_with_cells([ 0.1, 0.1, -0.1, 0.1 ])
    adjusted = frame_from_state(stabilize(state, target_rms=0.25, grid=grid), grid)
    assert adjusted.values.flatten().tolist() == pytest.approx([ 0.25, 0.25, -0.25, 0.25 ])

def test_stabilize_leaves_other_states_alone():
    grid, state = _state_with_cells([ 0.5, 0.5, 0.5, 0.5 ])
    assert stabilize(state, target_rms=0.25, grid=grid) is state
    grid, state = _state_with_cells([ 0.0, 0.0, 0.0, 0.0 ])
    assert stabilize(state, target_rms=0.25, grid=grid) is state
    with pytest.raises(ValueError):
        stabilize(state, target_rms=0.0, grid=grid)

def test_stabilized_ca_stays_visible():
    grid = GridSpec(width=4, height=4)
    program = ca(4, 4, seed=3)
    state = final_state(program, horizon=1500, adjust=lambda state: stabilize(state, target_rms=0.3, grid=grid))
    stats = frame_stats(frame_from_state(state, grid))
    # Clamping can only pull a 16 cell frame down to one saturated cell
    assert stats.rms >= 0.25 - 1e-9

def test_amplify_frame():
    frame = amplify_frame(Frame(t=1, values=np.array([ [ 0.2, -0.4 ] ])))
    assert frame.values.tolist() == [ [ 0.5, -1.0 ] ]
    assert amplify_frame(frame).values.tolist() == [ [ 0.5, -1.0 ] ]
    zero = Frame(t=1, values=np.zeros((2, 2)))
    assert amplify_frame(zero) is zero

def test_pixels():
    pixels = frame_to_pixels(Frame(t=0, values=np.array([ [ 0.0, 1.0, -1.0, 3.0 ] ])))
    assert pixels.dtype == np.uint8
    assert pixels.tolist() == [ [ 128, 255, 0, 255 ] ]

def test_write_pgm(tmp_path):
    values = np.linspace(-1.0, 1.0, 16).reshape(4, 4)
    frame = Frame(t=12, values=values)
    path = tmp_path / "frames" / frame_file_name(frame.t)
    write_pgm(frame, str(path))
    assert path.name == "frame_12.pgm"
    assert path.read_bytes() == b"P5\n4 4\n255\n" + frame_to_pixels(frame).tobytes()

def test_frame_stats():
    stats = frame_stats(Frame(t=4, values=np.array([ [ 0.5, -0.5 ], [ 0.0, 1.0 ] ])))
    assert stats.t == 4
    assert stats.mean_abs == pytest.approx(0.5)
    assert stats.max_abs == 1.0
    assert stats.rms == pytest.approx(np.sqrt(1.5 / 4))
