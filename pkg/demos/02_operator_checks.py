"""Run the built-in operator property suite and print every invariant.

Same checks as `deconvbox verify-operators`: projection algebra, norm
identities, the trilinear energy cancellation, filter residuals, symbol
bounds, and the smoothing inequality, each with its measured defect.
"""

import sys

from deconvbox import run_operator_checks

ok = run_operator_checks(K=16, seed=0)
sys.exit(0 if ok else 1)
