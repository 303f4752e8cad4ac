"""Principal-stratum bounds, data fusion, and treatment choice for binary problems.

The package splits into small pure layers:

* :mod:`harmbounds.laws` - full and observed probability laws, validation,
  the push-forward between them, and the law file format;
* :mod:`harmbounds.identify` - potential-outcome means from trial data and
  from fused trial + observational data;
* :mod:`harmbounds.bounds` - sharp interval identification of stratum
  probabilities (closed forms and an exact rational LP oracle), treatment
  regimes, and the bound-improvement test;
* :mod:`harmbounds.utility` - outcome-level and stratum-level utility
  tables, gain equality, and the margin-only fast path;
* :mod:`harmbounds.decide` - policies under the supported criteria, policy
  evaluation at a known law, and the outcome cost of stratum-level choice;
* :mod:`harmbounds.simulate` - random laws, dataset sampling, plug-in
  estimation;
* :mod:`harmbounds.verify` - brute-force property sweeps;
* :mod:`harmbounds.cli` - the ``harmbounds`` command.
"""

from .bounds import (LinearConstraintSystem, Regime, StrataBounds, exp_bounds,
                     fused_bounds, fused_lower_bound_s1, improvement_test,
                     polytope_vertices, regime_lower_bound, regime_value,
                     sharp_bounds_lp, strata_system, stratum_target, true_bounds)
from .decide import (CRITERIA, DecisionCell, DecisionReport, Policy,
                     counterfactual_policy, counterfactual_report,
                     excess_outcome, gain_interval, interventionist_policy,
                     interventionist_report, policy_value, true_law_policies)
from .errors import (FileFormatError, GainEqualityError, GammaMissingError,
                     HarmboundsError, IncompatibleLawsError, LawValidationError,
                     NotPointIdentifiedError, PartialPolicyError, PositivityError)
from .identify import (IdentifiedMeans, att_atu, exp_potential_mean,
                       fused_potential_mean, identified_means)
from .laws import (STRATA, STRATUM_OUTCOMES, FullLaw, ObservedLaw,
                   format_law_text, observed_from_full, parse_law_text,
                   potential_outcome, read_law_file, stratum_from_outcomes,
                   stratum_margins, validate_full_law, validate_observed_law)
from .simulate import (Dataset, estimate_observed_law, format_dataset_csv,
                       parse_dataset_csv, random_law, read_dataset_file,
                       sample_dataset, write_dataset_file)
from .utility import (UtilitySpec, expected_cf_utility_diff, expected_int_utility,
                      format_utility_text, gain_equality_diff, gain_equality_holds,
                      harm_asymmetric, harm_penalized_gamma, induced_gamma,
                      parse_utility_text, read_utility_file, survival_spec)

__version__ = "0.1.0"
