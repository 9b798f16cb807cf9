"""Channels with prescribed noncommutative graphs and zero-error code certificates."""
from .channel import (PositiveBasis, QuantumChannel, apply, build_pseudo_diagonal, channels_equal, choi,
                      complementary, make_channel, ncgraph, positive_basis, tensor_channels)
from .graphcap import (CodeCertificate, CodeSubspace, ViolationReport, build_recovery, check_code,
                       make_code, search_violation, violation_functional)
from .opalg import (OperatorSpace, ProductSpace, Spectrum, eig_hermitian, partial_trace, span, tensor,
                    tensor_spaces)
from .povm import (Observable, find_indistinguishable, is_indistinguishable, make_observable,
                   observable_from_graph, pi_channel, tensor_observables)
from .superact import (GraphFamilySpec, code_vectors, make_graph, paper_kraus, paper_povm, paper_psis,
                       reproduce_corollary1, reproduce_theorem2)

__version__ = "0.1.0"
