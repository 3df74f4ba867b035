from .grid import DEFAULT_MAX_CELLS, PatternError, GridSpec, PatternKind, ConnectivityPattern, parse_pattern, CellInit, InitKind, InitSpec, parse_init, max_cells
from .ca import CAConfig, build_ca_program, cell_node, cell_input, cell_nodes, init_node
from .morph import MorphError, morph_matrices, morph_programs
from .frames import Frame, frame_from_state, amplify_frame, stabilize
from .render import frame_to_pixels, write_pgm, frame_file_name, frame_stats
