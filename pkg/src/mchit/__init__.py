"""Mixing and hitting times of finite Markov chains."""
from .chain import (MarkovChain, check_distribution, from_matrix, is_reversible, kernel_at,
                    lazify, load_chain, point_mass, stationary, tv_distance, validate_chain)
from .config import DEFAULT, Config
from .families import FamilySpec, family, make_family
from .hitting import (HittingReport, expected_hitting, harmonic_measure, hit_survival,
                      t_hit_alpha, t_hit_product)
from .mixing import (MixingProfile, cesaro_kernel, cesaro_mixing_time,
                     check_submultiplicativity, d_bar, d_worst, mixing_time)
from .montecarlo import PathSample, sample_path, sample_rule_stop, sample_rule_stops
from .records import VerifyRecord
from .stopping import (StoppingRule, build_rule, check_halting_state, check_tail_bound,
                       rule_law, rule_mean, rule_tail)
from .verify import (empirical_constants, verify_counterexample, verify_hitting_lower_bound,
                     verify_pairwise_average, verify_reversible_contraction, verify_tail_bounds)

__version__ = "0.1.0"
