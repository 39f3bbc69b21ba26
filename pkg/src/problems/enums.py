from enum import Enum


class ProblemName(str, Enum):
    FIGURE1 = "figure1"
    ROTATIONAL_QUADRATIC = "rotational_quadratic"
    COUPLED_SEPARABLE = "coupled_separable"
