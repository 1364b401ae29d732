from .config import ChargeField, LatticeConfig, TodaState
from .sampling import sample_equilibrium
from .evolution import BlowUpError, backend_name, evolve
from .charges import (
    band_power,
    charge_field,
    current_field,
    integrated_current,
    local_charge,
    local_current,
)

__all__ = [
    "BlowUpError",
    "ChargeField",
    "LatticeConfig",
    "TodaState",
    "backend_name",
    "band_power",
    "charge_field",
    "current_field",
    "integrated_current",
    "local_charge",
    "local_current",
    "evolve",
    "sample_equilibrium",
]
