"""Distributed adaptive estimation over directed sensor networks.

Submodules:
  linalg     dense solvers and spectra (Lyapunov, Stein, Kronecker)
  graph      sensor-network construction, balance, reachability, Laplacians
  coupling   coupling operators, stability conditions, ISS certificates
  signals    deterministic sinusoid signal specs
  continuous adaptive observer simulation in continuous time
  discrete   normalized-gradient adaptive observers in discrete time
  config     key=value scenario configuration
  scenario   pipeline orchestration, reports, benchmarks
  cli        command line entry point
"""

__version__ = "0.1.0"
