"""
chaindrive module system

Numerical building blocks:
- operators: Pauli-string operators, states and density matrices
- models: static, driven and effective chain Hamiltonians; drive calibration
- dynamics: constant and driven propagation on time grids
- noise: Ornstein-Uhlenbeck fields, noisy ensembles, decoupling residual
- observables: fidelity, concurrence, single-excitation transfer
"""
