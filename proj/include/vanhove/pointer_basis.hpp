#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "vanhove/kernels.hpp"

namespace vanhove {

// One residual degeneracy label [k]: a printable name plus numeric
// coordinates (for Fock labels, the occupation numbers).
struct LabelDescriptor {
  std::string name;
  std::vector<double> values;
};

/// Equilibrium block rho(omega, [k], [k']) of a single energy shell.
struct ShellState {
  double omega = 0.0;
  std::vector<LabelDescriptor> labels;
  ComplexMatrix block;
  double weight = 1.0;  // quadrature weight of the shell, 1 for discrete spectra
};

/// Eigendecomposition block = U diag(eigenvalues) U^dagger with a canonical
/// choice of U (see diagonalize_shell).
struct PointerBasis {
  double omega = 0.0;
  std::vector<LabelDescriptor> labels;
  std::vector<double> eigenvalues;  // descending
  ComplexMatrix unitary;            // columns are pointer vectors in [k] coordinates
  double weight = 1.0;

  // Index of the label carrying the largest |U(k, l)| (first one on ties).
  std::size_t dominant_label(std::size_t l) const;
};

// Canonical form:
//  * eigenvalues sorted descending;
//  * eigenvalues within 1e-12 (relative to the block norm) form a cluster;
//    each cluster's vectors are rebuilt from its projector by pivoted
//    Gram-Schmidt, so the result does not depend on the solver's choice
//    inside a degenerate subspace;
//  * within a cluster, vectors are ordered by the position of their
//    dominant label;
//  * each vector's first largest-magnitude component is made real positive.
// Throws invalid-shell if the block is not square or not Hermitian to 1e-12.
PointerBasis diagonalize_shell(const ShellState& shell);

// Diagonalizes every shell independently (in parallel). Throws
// invalid-argument on duplicate omegas.
std::vector<PointerBasis> pointer_state(const std::vector<ShellState>& shells);

// max |U^dagger U - I|
double unitarity_residual(const PointerBasis& basis);
// max |block - U diag U^dagger|
double reconstruction_residual(const PointerBasis& basis, const ComplexMatrix& block);
// largest off-diagonal magnitude of U^dagger block U
double offdiagonal_residual(const PointerBasis& basis, const ComplexMatrix& block);

// Header omega,l_index,eigenvalue.
void write_pointer_spectrum_csv(std::ostream& out, const std::vector<PointerBasis>& bases);

}  // namespace vanhove
