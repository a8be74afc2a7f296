# first eigenvalue of ||grad u||_p / ||u||_p on boxes
import time
import numpy as np
from anisoeig import BoxDomain, build_grid, minimize_local, SolveConfig, rayleigh_local, sample

cfg = SolveConfig(restarts=2)

line = build_grid(BoxDomain.unit(1), (255,))
rep = minimize_local((2.0,), line, cfg)
print("1D p=2:", rep.lambda_, "pi =", np.pi, "iterations", rep.iterations, rep.converged)

# on (0,1) the minimum of ||u'||_p/||u||_p has a closed form
def closed_form(p):
    return 2 * np.pi * (p - 1) ** (1 / p) / (p * np.sin(np.pi / p))

# for p < 2 the residual stalls near 1e-5 from rounding, so "converged" may read False
for p in (1.5, 3.0, 4.0):
    rep = minimize_local((p,), line, SolveConfig(restarts=1, tol_residual=1e-5))
    print(f"1D p={p}: {rep.lambda_:.6f}  closed form {closed_form(p):.6f}  converged {rep.converged}")

t0 = time.time()
square = build_grid(BoxDomain.unit(2), (63, 63))
rep = minimize_local((2.0, 2.0), square, cfg)
print("2D p=(2,2):", rep.lambda_, "2pi =", 2 * np.pi, f"{time.time() - t0:.2f}s")

# the product sine attains 2pi in the continuum limit
prod = sample(lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y), square)
print("Q(product sine) =", rayleigh_local(prod, (2, 2)))

# anisotropic exponents on a rectangle
rect = build_grid(BoxDomain((0, 0), (1.0, 0.6)), (47, 29))
rep = minimize_local((1.5, 3.0), rect, SolveConfig(restarts=1, tol_residual=1e-5))
print("p=(1.5,3) on (0,1)x(0,0.6):", rep.lambda_, rep.converged, rep.iterations)
vals = rep.u.values
print("one sign:", bool(np.all(vals >= 0) or np.all(vals <= 0)))
for k, q, r in rep.history[:: max(1, len(rep.history) // 8)]:
    print(f"  iter {k:4d}  Q {q:.8f}  residual {r:.2e}")
