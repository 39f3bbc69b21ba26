from enum import Enum


class InnerMethod(str, Enum):
    NEWTON = "newton"
    GDA = "gda"
