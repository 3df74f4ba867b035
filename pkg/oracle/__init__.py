from .dense import MAX_DENSE_NODES, OracleCapacityError, DenseModel, build_dense_model, dense_init, dense_step, dense_run
from .compare import TrajectoryShapeError, ComparisonReport, compare_trajectories
