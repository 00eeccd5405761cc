#include "vanhove/pointer_basis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "vanhove/errors.hpp"
#include "vanhove/io.hpp"

namespace vanhove {

namespace {

using Vector = Eigen::Matrix<complex, Eigen::Dynamic, 1>;
using ColMatrix = Eigen::MatrixXcd;

std::size_t dominant_index(const Vector& v) {
  double best = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) best = std::max(best, std::abs(v(k)));
  for (Eigen::Index k = 0; k < v.size(); ++k)
    if (std::abs(v(k)) >= best - 1e-12) return static_cast<std::size_t>(k);
  return 0;
}

void fix_phase(Vector& v) {
  const auto k = static_cast<Eigen::Index>(dominant_index(v));
  const double mag = std::abs(v(k));
  if (mag > 0.0) v *= std::conj(v(k)) / mag;
  v(k) = complex(v(k).real(), 0.0);
}

// Orthonormal basis of range(P) chosen greedily by largest residual column,
// ties going to the lower index. Depends only on P.
std::vector<Vector> canonical_cluster_basis(const ColMatrix& vectors) {
  ColMatrix residual = vectors * vectors.adjoint();
  std::vector<Vector> out;
  for (Eigen::Index s = 0; s < vectors.cols(); ++s) {
    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index c = 0; c < residual.cols(); ++c) {
      const double nrm = residual.col(c).norm();
      if (nrm > best + 1e-12) {
        best = nrm;
        pivot = c;
      }
    }
    Vector e = residual.col(pivot) / best;
    for (const Vector& prev : out) e -= prev * prev.dot(e);  // re-orthogonalize
    e.normalize();
    residual -= e * (e.adjoint() * residual);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

std::size_t PointerBasis::dominant_label(std::size_t l) const {
  return dominant_index(unitary.col(static_cast<Eigen::Index>(l)));
}

PointerBasis diagonalize_shell(const ShellState& shell) {
  const auto n = shell.block.rows();
  require(n > 0 && shell.block.cols() == n, ErrorCode::invalid_shell, "shell block must be square");
  require(shell.labels.empty() || static_cast<Eigen::Index>(shell.labels.size()) == n,
          ErrorCode::invalid_shell, "shell label count must match block size");
  require(shell.block.allFinite(), ErrorCode::invalid_shell, "shell block has non-finite entries");
  double herm = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      herm = std::max(herm, std::abs(shell.block(i, j) - std::conj(shell.block(j, i))));
  if (herm > 1e-12) {
    std::ostringstream msg;
    msg << "shell at omega=" << shell.omega << " is not Hermitian (residual " << herm << ")";
    fail(ErrorCode::invalid_shell, msg.str());
  }

  // Symmetrize exactly before solving so tiny anti-Hermitian noise is ignored.
  const ColMatrix block = 0.5 * (ColMatrix(shell.block) + ColMatrix(shell.block).adjoint());
  Eigen::SelfAdjointEigenSolver<ColMatrix> solver(block);
  require(solver.info() == Eigen::Success, ErrorCode::numerical, "eigensolver did not converge");
  const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
  const ColMatrix& vectors = solver.eigenvectors();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::reverse(order.begin(), order.end());  // descending eigenvalues

  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  const double tie = 1e-12 * scale;

  PointerBasis out;
  out.omega = shell.omega;
  out.labels = shell.labels;
  out.weight = shell.weight;
  out.unitary.resize(n, n);

  Eigen::Index col = 0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t stop = start + 1;
    while (stop < order.size() && values(order[stop - 1]) - values(order[stop]) <= tie) ++stop;

    std::vector<Vector> members;
    if (stop - start == 1) {
      members.push_back(vectors.col(order[start]));
    } else {
      ColMatrix cluster(n, static_cast<Eigen::Index>(stop - start));
      for (std::size_t c = start; c < stop; ++c) cluster.col(static_cast<Eigen::Index>(c - start)) = vectors.col(order[c]);
      members = canonical_cluster_basis(cluster);
      std::stable_sort(members.begin(), members.end(), [](const Vector& a, const Vector& b) {
        return dominant_index(a) < dominant_index(b);
      });
    }
    for (std::size_t c = start; c < stop; ++c) {
      Vector v = members[c - start];
      fix_phase(v);
      out.unitary.col(col) = v;
      // Rayleigh quotient keeps cluster eigenvalues consistent with the rebuilt vectors.
      out.eigenvalues.push_back(stop - start == 1 ? values(order[c]) : v.dot(block * v).real());
      ++col;
    }
    start = stop;
  }
  return out;
}

std::vector<PointerBasis> pointer_state(const std::vector<ShellState>& shells) {
  std::set<double> seen;
  for (const auto& s : shells)
    require(seen.insert(s.omega).second, ErrorCode::invalid_argument, "duplicate shell omega");
  std::vector<PointerBasis> out(shells.size());
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < shells.size(); ++i) {
    try {
      out[i] = diagonalize_shell(shells[i]);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

double unitarity_residual(const PointerBasis& basis) {
  const ComplexMatrix gram = basis.unitary.adjoint() * basis.unitary;
  return (gram - ComplexMatrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

double reconstruction_residual(const PointerBasis& basis, const ComplexMatrix& block) {
  Eigen::VectorXd lambda(static_cast<Eigen::Index>(basis.eigenvalues.size()));
  for (std::size_t i = 0; i < basis.eigenvalues.size(); ++i) lambda(static_cast<Eigen::Index>(i)) = basis.eigenvalues[i];
  const ComplexMatrix rebuilt = basis.unitary * lambda.cast<complex>().asDiagonal() * basis.unitary.adjoint();
  return (rebuilt - block).cwiseAbs().maxCoeff();
}

double offdiagonal_residual(const PointerBasis& basis, const ComplexMatrix& block) {
  ComplexMatrix d = basis.unitary.adjoint() * block * basis.unitary;
  d.diagonal().setZero();
  return d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
}

void write_pointer_spectrum_csv(std::ostream& out, const std::vector<PointerBasis>& bases) {
  io::write_row(out, {"omega", "l_index", "eigenvalue"});
  for (const auto& b : bases)
    for (std::size_t l = 0; l < b.eigenvalues.size(); ++l)
      io::write_row(out, {io::format_double(b.omega), std::to_string(l), io::format_double(b.eigenvalues[l])});
}

}  // namespace vanhove
