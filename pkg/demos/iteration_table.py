"""Iteration counts of the four preconditioned methods as the grid is refined."""
from bltt import assemble_system, example1_problem, solve_bltt

METHODS = ("sk2_bicgstab", "s2_bicgstab", "sk2_fgmres", "s2_fgmres")

print(f"{'alpha':>5} {'beta':>4} {'N':>4}  " + "  ".join(f"{m:>14}" for m in METHODS))
for alpha, beta in [(0.1, 1.1), (0.4, 1.7), (0.7, 1.4), (0.9, 1.9)]:
    for n in (64, 128, 256):
        p = example1_problem(alpha, beta, n, n)
        sys = assemble_system(p)
        cells = []
        for m in METHODS:
            _, r = solve_bltt(p, m, sys=sys)
            cells.append(f"({r.iter1}+{r.iter2},{r.iter3})".rjust(14))
        print(f"{alpha:>5} {beta:>4} {n:>4}  " + "  ".join(cells))
