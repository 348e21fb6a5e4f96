#ifndef PHLQG_BENCHMARKS_HPP
#define PHLQG_BENCHMARKS_HPP

#include <string>
#include <utility>
#include <vector>

#include "phlqg/model.hpp"

namespace phlqg {

/// Small systems whose balanced truncation at ell = 1 has a singular pencil.
struct Counterexample {
  std::string id;
  DescriptorSystem sys;
  PortHamiltonianDAE ph;  // filled for "phdae_mor" only
  bool is_ph = false;
  Matrix P_c, P_f;        // balanced stabilizing solutions
};

/// id is "phdae_mor" (pH, modified GAREs) or "classical" (original GAREs).
Counterexample counterexample(const std::string& id);

struct MsdConfig {
  int masses = 20;
  double mass = 1.0;
  double spring_bulk = 2.0, spring_boundary = 4.0;
  double damping_bulk = 2.0, damping_boundary = 4.0;
};

struct MsdModels {
  PortHamiltonianDAE first_order;    // E = diag(K, M, 0), Q = I
  PortHamiltonianDAE semi_explicit;  // E = diag(I, I, 0), Q = I
  PortHamiltonianDAE decoupled;      // after u = -y + v, Q carries the -2N/sqrt(c) block
};

/// Chain of masses with the relative velocity of the first and last mass
/// prescribed by the input; the output is the constraint force.
MsdModels msd_chain(const MsdConfig& cfg);

struct NetworkConfig {
  int nodes = 5;
  std::vector<std::pair<int, int>> pipes{{0, 1}, {1, 2}, {1, 3}, {2, 4}};
  std::vector<int> boundary{0, 3, 4};  // pressure-driven nodes; the rest are junctions
  int inner_nodes = 4;                 // per pipe
  double d0 = 25.0;
  double density = 1.0;
};

struct NetworkModels {
  PortHamiltonianDAE index2;         // pressures, flows, junction multipliers
  PortHamiltonianDAE index1;         // flows restricted to ker N
  PortHamiltonianDAE semi_explicit;  // index-1 system scaled by Cholesky factors
  Matrix V;                          // orthonormal basis of ker N
};

/// Pipe network of unit-length damped-wave pipes on a staggered grid with
/// lumped masses: pressures at inner nodes, flows on segments.
NetworkModels transport_network(const NetworkConfig& cfg);

/// Drops uncontrollable and unobservable differential directions. The
/// algebraic part of the semi-explicit form is kept.
DescriptorSystem minimal_realization(const DescriptorSystem& sys, double tol = 1e-10);

/// Controllability reduction by a Galerkin projection that keeps the pH
/// structure. Needs Q11 to leave the retained subspace invariant.
PortHamiltonianDAE minimal_ph_realization(const PortHamiltonianDAE& ph, double tol = 1e-10);

}  // namespace phlqg

#endif  // PHLQG_BENCHMARKS_HPP
