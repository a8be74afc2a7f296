# mixed norms, the gradient norm, and the duality map F_p
import numpy as np
from anisoeig import (BoxDomain, GridFunction, build_grid, sample, mixed_norm, partials,
                      gradient_norm, directional_norms, F_p, pairing)

grid = build_grid(BoxDomain((0.0, 0.0), (1.0, 2.0)), (31, 47))
print(grid.counts, grid.spacings)

u = sample(lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y / 2) * (1 + x * y), grid)
p = (1.5, 3.0)

# x1 is integrated first with p1, then x2 with p2
stack = partials(u, p)
print([np.shape(level) for level in stack.levels])
print("||u||_p =", mixed_norm(u, p))

# axis order matters: transposing the field is a different norm
ut = u.with_values(u.values.T.copy())
swapped = build_grid(BoxDomain((0.0, 0.0), (2.0, 1.0)), (47, 31))
print("same exponents, axes swapped:", mixed_norm(GridFunction(swapped, ut.values), p))

print("directional norms ||u_xi||_pi:", directional_norms(u, p))
print("||grad u||_p =", gradient_norm(u, p))

# F_p is the derivative of the norm. It is 0-homogeneous, so its dual
# norm is 1 whatever the size of u, and pairing it with u gives back ||u||_p
pc = tuple(q / (q - 1) for q in p)
for t in (0.01, 1.0, 100.0):
    v = u * t
    f = F_p(v, p)
    print(f"t={t:g}  ||v||={mixed_norm(v, p):.6g}  ||F_p(v)||_p'={mixed_norm(f, pc):.15f}  "
          f"<F_p(v),v>={pairing(f, v):.6g}")
