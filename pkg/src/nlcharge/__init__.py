"""Even and odd nonlinear (f-deformed) charge coherent states.

Submodules
----------
deform      deformation functions f(n), f-factorials, q-brackets
fock        deformed ladder operators on fixed-charge sectors
states      state construction, overlaps, generation, Schmidt data
dalg        differential-operator realisation on formal xi-series
besselk     modified Bessel K_n for the completeness weight
quadrature  radial/angular schemes for the completeness integral
resolve     resolution of unity within and across charge sectors
nonclass    squeezing, antibunching and the coth-bar scan
cli         the ``nlcharge`` command
"""
from importlib.resources import files

from .deform import DeformationSpec
from .fock import ChargeSectorState, SectorOperator, sector_op
from .states import NormalizationSet, StateRequest, build_state

__all__ = ["DeformationSpec", "ChargeSectorState", "SectorOperator", "sector_op",
           "StateRequest", "NormalizationSet", "build_state", "schema_path"]


def schema_path(command):
    """Path of the JSON schema shipped for a CLI subcommand's report."""
    return files(__name__) / "schemas" / f"{command}.json"
