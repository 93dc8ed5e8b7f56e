"""Probability bracket calculus for finite, continuous and Markov models."""
from .config import TOL, Tolerances
from .continuous import (Density1D, Density2D, Region, cexpectation, conditional_density,
                         conditional_probability, exponential, ideal_gas_stats, normal, point_bracket,
                         region_probability, uniform_disc)
from .ctmc import (GainLossRates, Generator, GridKernel, ctmc_stationary, doi_expectation, evolve_density,
                   generator_from_rates, grid_master_evolve, heisenberg_expectation, heisenberg_operator,
                   kolmogorov_residuals, peliti_expectation, transition_matrix)
from .dtmc import (COLUMN, ROW, ProbVector, StochasticMatrix, chapman_kolmogorov_discrete, evolve_left,
                   evolve_right, matrix_power, power_iteration, stationary, stationary_multiplicity)
from .errors import (AlignmentError, ConvergenceError, DivergenceError, DomainError, EvaluationError,
                     IntegrationError, LabelError, ModelError, ObservableError, OrientationError, ParseError,
                     PartitionError, PBracketError, TotalityError, ZeroEvidenceError)
from .observables import (Observable, ProductSpace, conditional_expectation, expectation, expectation_fn,
                          marginal, moment_product, partition_expectation, product_space, variance)
from .processes import (BrownianMotion, PoissonProcess, SamplePath, WienerProcess, analytic_moments,
                        brownian_density, ck_check_continuous, empirical_moments, poisson_moments,
                        poisson_pmf, poisson_transition, sample_path, sample_paths, wiener_density,
                        wiener_transition)
from .sample import (DiscreteSpace, EventSet, Partition, bayes, bra_expansion, bracket, identity_insertion,
                     is_independent, ket_expansion, probability, singleton_partition, total_probability,
                     validate_partition)

__version__ = "0.1.0"
