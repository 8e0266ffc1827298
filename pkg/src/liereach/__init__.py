"""Lie-rank analysis and variational experiments for Pauli-based parameterized circuits."""

__version__ = "0.1.0"

from .pauli import (  # noqa: E402
    CapacityError,
    PauliOperator,
    PauliString,
    SizeMismatchError,
    commutator,
    hs_inner,
    multiply,
    to_dense,
)
from .closure import (  # noqa: E402
    ClosureTrace,
    ControllabilityReport,
    InconclusiveError,
    close_algebra,
    controllability,
    dense_closure_oracle,
)
from .models import HamiltonianSpec, exact_ground_energy, two_qubit_pauli_set, xxz_2x2  # noqa: E402
from .partitions import (  # noqa: E402
    Partition,
    count_partitions,
    generators_from_partition,
    sample_partition,
)
from .statevector import AnsatzSpec, GeneratorGate, StateVector, apply_exp, expectation, run_ansatz  # noqa: E402
from .vqe import VqeRun, build_lap, optimize, vha_sweep  # noqa: E402
from .proxy import ProxyModel, fit_proxy, predict  # noqa: E402
