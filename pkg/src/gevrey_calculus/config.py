import os
from dataclasses import dataclass, field

import simple_parsing


@dataclass(frozen=True)
class Tolerances:
    identity: float = 1e-10  # float-mode identity checks
    inequality_slack: float = 1e-9
    quadrature: float = 1e-10
    inverse_residual: float = 1e-12
    on_spectrum: float = 1e-8
    hermitian: float = 1e-10


@dataclass
class EngineConfig:
    # sharp | parametrix | resum | fit | certify | adiabatic | selftest, given as the subcommand
    command: str = simple_parsing.field(default="selftest", cmd=False)
    input: list[str] = field(default_factory=list)
    output: str = "out"
    report: str = ""  # CSV path for growth tables
    filter: str = ""  # FilterSymbol JSON for adiabatic runs
    backend: str = "exact"
    order: int = 4
    jet_order: int = 0  # cap on the Taylor depth of input jets, 0 keeps them as given
    tol: float = 1e-10
    inequality_slack: float = 1e-9  # relative slack of float inequality checks
    inverse_residual: float = 1e-12
    nodes: int = 64
    max_doublings: int = 4
    seed: int = 0
    side: str = "two-sided"
    method: str = "recursive"
    hbar: str = "1/16"
    R1: str = "1"  # resummation radii of the two representatives
    R2: str = "2"
    norm_T: str = "1/16"  # pseudonorm weight T
    T0: str = "1/4"
    rho: str = ""
    samples: int = 1  # grid points per axis of the sample set
    sample_radius: str = "1/10"
    debug: bool = False

    def tolerances(self) -> Tolerances:
        return Tolerances(identity=self.tol, inequality_slack=self.inequality_slack,
                          inverse_residual=self.inverse_residual)


def num_threads() -> int:
    return max(1, int(os.getenv("GEVREY_NUM_THREADS", "1")))
