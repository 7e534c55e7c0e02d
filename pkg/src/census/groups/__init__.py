from .free import (
    FreeClassSpec,
    cyclic_data,
    free_conj_count_bfs,
    free_conj_count_closed,
    free_conj_count_literal,
    reduce,
)
from .fuchsian import GroupSpec, OrbitBall, gamma2, matrix_ball_enumerate
from .heisenberg import HeisElt, HeisenbergSpec, heis_conj_count, heis_conj_series

PRESETS = ("free:k", "heisenberg:k", "gamma2")
