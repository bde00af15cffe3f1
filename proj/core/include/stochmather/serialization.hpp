#pragma once

// JSON and CSV export of solver results. Every top-level JSON document
// carries "format_version" and "type"; decode_* accepts what encode writes
// and reproduces it exactly (doubles are written in shortest round-trip
// form).

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "stochmather/cell_solver.hpp"
#include "stochmather/diagnostics.hpp"
#include "stochmather/diffusion_sim.hpp"
#include "stochmather/model_spec.hpp"
#include "stochmather/occupation_lp.hpp"
#include "stochmather/spectral.hpp"
#include "stochmather/stationary_measure.hpp"

namespace stochmather {

inline constexpr int kFormatVersion = 1;

using Json = nlohmann::json;

Json encode(const TorusGrid& grid);
TorusGrid decode_grid(const Json& j);
Json encode(const ScalarField& f);
ScalarField decode_scalar(const Json& j);
Json encode(const VectorField& f);
VectorField decode_vector(const Json& j);
Json encode(const Momentum& P);
Momentum decode_momentum(const Json& j);

/// A cell solution together with the model it was computed for, so that
/// downstream commands can rebuild the model.
struct CellRecord {
  ModelSpec model;
  CellSolution solution;

  HamiltonianModel instantiate() const { return model.instantiate(solution.u.grid()); }
};

Json encode(const CellRecord& record);
CellRecord decode_cell(const Json& j);

Json encode(const EigenSolution& eig);
EigenSolution decode_eigen(const Json& j);

Json encode(const StationaryDensity& d);
StationaryDensity decode_density(const Json& j);

Json encode(const IdentityReport& r);
IdentityReport decode_identities(const Json& j);

Json encode(const LpSolution& s);
LpSolution decode_lp(const Json& j);

Json encode(const PathEnsemble& e);
PathEnsemble decode_ensemble(const Json& j);

Json encode(const RegularityReport& r);
RegularityReport decode_regularity(const Json& j);

Json encode(const SigmaSweep& s);
SigmaSweep decode_sweep(const Json& j);

/// Throws Error{io_failure} naming the path.
void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// CSV with coordinate columns followed by the value column(s).
void export_csv(const std::filesystem::path& path, const ScalarField& f, const char* name);
void export_csv(const std::filesystem::path& path, const VectorField& f, const char* name);
/// σ, H̄_σ, increment, sup|Δu|, L¹ θ distance, action error.
void export_csv(const std::filesystem::path& path, const SigmaSweep& sweep);

/// Checks format_version and type; throws Error{io_failure} otherwise.
void require_document(const Json& j, const char* type);
Json document(const char* type, Json body);

}  // namespace stochmather
