#include "baytomo/diagnostics.hpp"

#include "baytomo/io.hpp"

namespace baytomo {

void write_diagnostics_csv(std::ostream& out, std::span<const DiagnosticRow> rows) {
  out << "iteration,energy,step,accept_stat,divergent,tree_depth,adapting\n";
  for (const auto& r : rows) {
    out << r.iteration << ',' << format_real(r.energy) << ',' << format_real(r.step) << ','
        << format_real(r.accept_stat) << ',' << (r.divergent ? 1 : 0) << ',' << r.tree_depth << ','
        << (r.adapting ? 1 : 0) << '\n';
  }
}

}  // namespace baytomo
