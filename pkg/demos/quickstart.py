"""Solve the manufactured test problem once and report errors and iteration counts."""
from bltt import example1_problem, solve_bltt

p = example1_problem(alpha=0.4, beta=1.7, N=64, M=64)
u, rep = solve_bltt(p, "sk2_bicgstab")
print(f"unknowns: {u.size}")
print(f"outer iterations: {rep.iter1}, first-step iterations: {rep.iter2}, setup iterations: {rep.iter3}")
print(f"Error1 = {rep.error1:.4e}, Error2 = {rep.error2:.4e}, converged = {rep.converged}")
