#include "baytomo/geometry.hpp"

#include <stdexcept>

namespace baytomo::reference {

std::vector<double> apply(const SparseOperator& A, std::span<const double> x) {
  if (x.size() != A.pixels()) throw std::invalid_argument("apply: dimension mismatch");
  std::vector<double> out(A.rays(), 0.0);
  for (std::size_t r = 0; r < A.rays(); ++r) {
    const auto cols = A.row_cols(r);
    const auto vals = A.row_values(r);
    double sum = 0.0;
    for (std::size_t e = 0; e < cols.size(); ++e) sum += vals[e] * x[cols[e]];
    out[r] = sum;
  }
  return out;
}

std::vector<double> apply_adjoint(const SparseOperator& A, std::span<const double> r) {
  if (r.size() != A.rays()) throw std::invalid_argument("apply_adjoint: dimension mismatch");
  std::vector<double> out(A.pixels(), 0.0);
  for (std::size_t ray = 0; ray < A.rays(); ++ray) {
    const auto cols = A.row_cols(ray);
    const auto vals = A.row_values(ray);
    for (std::size_t e = 0; e < cols.size(); ++e) out[cols[e]] += vals[e] * r[ray];
  }
  return out;
}

}  // namespace baytomo::reference
