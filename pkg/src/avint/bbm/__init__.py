from .space import HermiteFeFunction, PeriodicHermiteSpace, assemble_h1_gram
from .dynamics import (
    BbmInvariants,
    ConservativeBbmStepper,
    GaussBbmStepper,
    bbm_invariants,
    bbm_step_conservative,
    bbm_step_gauss,
    soliton_ic,
    soliton_speed,
    write_snapshot_csv,
)

__all__ = [
    "BbmInvariants",
    "ConservativeBbmStepper",
    "GaussBbmStepper",
    "HermiteFeFunction",
    "PeriodicHermiteSpace",
    "assemble_h1_gram",
    "bbm_invariants",
    "bbm_step_conservative",
    "bbm_step_gauss",
    "soliton_ic",
    "soliton_speed",
    "write_snapshot_csv",
]
