"""Application corpus: each module's build() records one program.

All builders emit deterministic files that compile, validate and run
cleanly through the toolchain; companion scalar oracles live with the
tests.
"""

from . import (
    harris,
    linear_regression,
    multivariate_regression,
    path_length_3d,
    polynomial_regression,
    sobel,
)

ALL = {
    "path_length_3d": path_length_3d,
    "linear_regression": linear_regression,
    "polynomial_regression": polynomial_regression,
    "multivariate_regression": multivariate_regression,
    "sobel": sobel,
    "harris": harris,
}
