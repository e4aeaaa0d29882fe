"""Wave mechanics of the photon on periodic grids.

Natural units hbar = c = eps0 = mu0 = 1 throughout; SI factors appear only
in command-line output scaling.  Submodules:

- fieldcore: point-level algebra of complex field vectors and the
  six-component stack (spin matrices, boosts, duality, conjugation).
- spectral: periodic-grid transforms, polarization triads, helicity
  decomposition, positive-frequency projection, the gauge connection.
- metrics: physical scalar products, photon number, Poincare-generator
  observables in both representations, the nonlocal norm transforms.
- evolve: exact free propagation and medium time stepping.
- eigen: boost eigenfunctions (Macdonald functions of imaginary index) and
  guided fiber modes.
- phasespace: Wigner distributions and the hydrodynamic form.
- geometry: static curved metrics, constitutive maps, spinor/Dirac form.
- states: named initial states; gridio/config/cli: artifacts and driver.
"""

__version__ = "0.1.0"
