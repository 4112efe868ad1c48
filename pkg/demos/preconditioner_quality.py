"""Condition numbers and spectra: skew-circulant versus Strang circulant preconditioning."""
import numpy as np

from bltt import condition_report, example1_problem, spectrum

for alpha, beta in [(0.1, 1.1), (0.7, 1.4)]:
    p = example1_problem(alpha, beta, 32, 32)
    table = condition_report(p)
    print(f"alpha={alpha} beta={beta}: " + ", ".join(f"{k}={v:.2f}" for k, v in table.items()))
    for kind in ("Ps_inv_A0", "Psk_inv_A0"):
        ev = spectrum(p, kind)
        print(f"  {kind}: {np.sum(np.abs(ev - 1) < 0.1)}/{ev.size} eigenvalues within 0.1 of 1")
