"""Von Neumann scan of the linearized schemes.

The second scheme keeps every Fourier mode bounded for the usual step
restriction. The infinity norm of the amplification matrix is a stricter,
sufficient test: it can exceed one while the spectral radius does not.
"""

from sglattice import ModelParams, predicates, scan

p = ModelParams(c=5.0)
for dt in (0.1, 0.2, 0.3):
    rep = scan("s2", p, dt)
    print(f"s2 dt={dt}: max rho = {rep.max_rho:.12f}, dt <= 1/c: {predicates(p, dt)[0]}")

rep = scan("s1", p, 0.01)
print(f"s1 undamped dt=0.01: max rho {rep.max_rho:.12f}, max inf-norm {rep.max_inf_norm:.3f}")

damped = ModelParams(c=0.5, gamma=12.0)
rep = scan("s1", damped, 0.2)
print(f"s1 gamma*dt/2 = {12.0 * 0.2 / 2}: max inf-norm {rep.max_inf_norm:.12f},",
      "predicates (necessary, sufficient, corollary) =", predicates(damped, 0.2))
