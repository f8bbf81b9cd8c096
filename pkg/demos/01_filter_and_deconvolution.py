"""Tour of the filter / deconvolution operator family.

The smoothing filter G solves -delta^2 Lap(wbar) + wbar = w on the box and
acts mode-by-mode with symbol 1/(1 + delta^2 |k|^2). The Van Cittert
series sum_{n<=N} (I - G)^n approximately inverts it, and the composition
H_N = D_N o G has the closed-form symbol 1 - (d2k2/(1+d2k2))^(N+1). This
script prints the symbols, shows the norm contraction on a random field,
and cross-checks the explicit series against the closed form.
"""

import numpy as np

from deconvbox import (
    FieldSpec,
    SymbolTable,
    generate_ic,
    make_grid,
    smoothing_bound,
    smoothing_constant,
    sobolev_norm,
    truncation_hn,
    van_cittert_apply,
)

grid = make_grid(16)
delta = 0.5

print("symbol table (delta = 0.5), first shells:")
print(f"{'k2':>6} {'G':>10} {'H_1':>10} {'H_5':>10} {'H_20':>10}")
tables = {n: SymbolTable.build(grid, delta, n) for n in (1, 5, 20)}
for i, k2 in enumerate(tables[1].k2[:8]):
    row = [tables[1].g[i], tables[1].hn[i], tables[5].hn[i], tables[20].hn[i]]
    print(f"{k2:6.0f} " + " ".join(f"{v:10.6f}" for v in row))
print("higher N pushes the symbol toward 1: deconvolution recovers detail\n")

# every H_s norm contracts, and two extra derivatives stay controlled
w = generate_ic(FieldSpec(kind="random_spectrum", seed=1, target_norm=2.0), grid)
print("norm contraction on a random divergence-free field:")
for n in (0, 2, 10):
    hw = truncation_hn(w, delta, n)
    print(
        f"  N = {n:2d}: |H_N w| / |w| = {sobolev_norm(hw, 0) / sobolev_norm(w, 0):.4f}, "
        f"|H_N w|_1 / |w|_1 = {sobolev_norm(hw, 1) / sobolev_norm(w, 1):.4f}"
    )
measured = smoothing_constant(delta, 2, grid)
print(
    f"\nsmoothing constant sup |k|^2 H_2(k): measured {measured:.3f} vs "
    f"admissible (N+1)/delta^2 = {smoothing_bound(delta, 2):.3f}"
)

# the iterative series and the closed-form symbol are the same operator
worst = 0.0
for n in (0, 1, 5, 20):
    diff = van_cittert_apply(w, delta, n) - truncation_hn(w, delta, n)
    worst = max(worst, sobolev_norm(diff, 0) / sobolev_norm(w, 0))
print(f"series vs closed form, worst relative gap over N <= 20: {worst:.2e}")
