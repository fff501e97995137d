"""Gap certificates for purified Gibbs samplers of local Hamiltonians.

The package splits into a small algebra core (lattices, regions, dense
operators), model constructors, closed-form Gibbs marginals, the
purified parent Hamiltonian with its projector calculus, mixing
coefficients, thermal generators, certificate assembly, and the
verification suites behind the command line tool.
"""

from .algebra import (DenseOperator, DensityMatrix, Lattice, Region,
                      embed, gns_inner, herm_basis, hs_inner, opnorm,
                      partial_trace, philox)
from .certify import (Certificate, DeltaEnvelope, certificate_1d,
                      certificate_2d, certificate_nd, ising_delta,
                      ising_envelope, ising_gap_corollary, mu_beta,
                      qd_abelian_delta, qd_abelian_gap_corollary,
                      qd_general_delta, qd_general_gap_corollary,
                      tail_product)
from .davies import (BohrDecomposition, DaviesGenerator, bohr_decompose,
                     build_davies, commutant_dimension, db_defect,
                     dissipator_gaps, evolve, gns_negativity,
                     jump_dissipator, local_primitivity_check,
                     purified_dissipator, rate_profile)
from .errors import (CapacityError, ContractError, GibbsgapError,
                     NumericalError, ParameterError, PartitionError,
                     RegionError, VerificationError)
from .gibbs import (gibbs_state, ising_marginal_closed,
                    ising_partition_function, qd_marginal_closed,
                    qd_trace_sandwich)
from .mixing import (Partition, delta_constrained, delta_decay_scan,
                     delta_direct, delta_upper_bounds, shield_partition)
from .models import (Interaction, cyclic_group, ising_ring,
                     quantum_double, random_ring, symmetric_group_s3)
from .purified import (GapResult, eta_bound, martingale_defect,
                       pi_project, purified_hamiltonian,
                       small_region_gap_bound, spectral_gap)
from .verify import SUITES, run_criterion, run_suite

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # algebra
    "DenseOperator", "DensityMatrix", "Lattice", "Region", "embed",
    "gns_inner", "herm_basis", "hs_inner", "opnorm", "partial_trace",
    "philox",
    # models
    "Interaction", "cyclic_group", "ising_ring", "quantum_double",
    "random_ring", "symmetric_group_s3",
    # gibbs
    "gibbs_state", "ising_marginal_closed", "ising_partition_function",
    "qd_marginal_closed", "qd_trace_sandwich",
    # purified
    "GapResult", "eta_bound", "martingale_defect", "pi_project",
    "purified_hamiltonian", "small_region_gap_bound", "spectral_gap",
    # mixing
    "Partition", "delta_constrained", "delta_decay_scan", "delta_direct",
    "delta_upper_bounds", "shield_partition",
    # davies
    "BohrDecomposition", "DaviesGenerator", "bohr_decompose",
    "build_davies", "commutant_dimension", "db_defect", "dissipator_gaps",
    "evolve", "gns_negativity", "jump_dissipator",
    "local_primitivity_check", "purified_dissipator", "rate_profile",
    # certify
    "Certificate", "DeltaEnvelope", "certificate_1d", "certificate_2d",
    "certificate_nd", "ising_delta", "ising_envelope",
    "ising_gap_corollary", "mu_beta", "qd_abelian_delta",
    "qd_abelian_gap_corollary", "qd_general_delta",
    "qd_general_gap_corollary", "tail_product",
    # verify
    "SUITES", "run_criterion", "run_suite",
    # errors
    "CapacityError", "ContractError", "GibbsgapError", "NumericalError",
    "ParameterError", "PartitionError", "RegionError",
    "VerificationError",
]
