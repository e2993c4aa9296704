"""Counterexample machinery for quasi-analytic Denjoy-Carleman classes.

Growth sequences and their widening, the associated function, the explicit
brick construction with certified derivative bounds, and the formal
preparation witness, all in MPFR arithmetic.
"""
from carleman._numeric import LogComplex, workprec
from carleman._scan import BACKEND as SCAN_BACKEND
from carleman.associated import AssociatedFunction, phi_eval, phi_inv
from carleman.construction import (Brick, CounterexampleFn, brick_params, build_counterexample,
                                   choose_y, select_subsequence)
from carleman.errors import (CarlemanError, CompositionConstantTerm, ConfigInvalid,
                             InvalidSequence, NotInvertible, PhiDivergent, PhiRange,
                             PrecisionOverflow, SubsequenceHorizon, WideningDegenerate,
                             WrongPipeline)
from carleman.evaluate import (brick_derivative, extension_tail_bound, f_derivative,
                               s_derivative, taylor_coeffs)
from carleman.formal import (TruncatedSeries, class_envelope_diag, prepare_2d, series_compose,
                             series_invert)
from carleman.sequences import (GrowthSequence, WidenedSequence, inclusion_diag, seq_term,
                                seq_validate, wep_widen)
from carleman.verify import (nonmembership_certificate, run_all, verify_peaks,
                             verify_upper_bounds)

__version__ = "0.1.0"
