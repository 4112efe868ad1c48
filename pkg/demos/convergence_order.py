"""Second-order convergence when time and space are refined together."""
from bltt import example1_problem, solve_bltt

for alpha, beta in [(0.1, 1.1), (0.9, 1.9)]:
    prev = None
    for n in (32, 64, 128, 256):
        _, r = solve_bltt(example1_problem(alpha, beta, n, n), "sk2_bicgstab")
        ratio = "" if prev is None else f"  ratio {prev / r.error1:.3f}"
        print(f"alpha={alpha} beta={beta} M=N={n:<4} Error1={r.error1:.4e}{ratio}")
        prev = r.error1
