#include "stochmather/model_spec.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "stochmather/error.hpp"

namespace stochmather {

ScalarField PotentialSpec::sample(const TorusGrid& grid) const {
  if (samples) {
    if (samples->size() != grid.node_count()) {
      throw Error(ErrorCode::invalid_model,
                  "potential samples (" + std::to_string(samples->size()) +
                      ") do not match the grid node count (" + std::to_string(grid.node_count()) + ")");
    }
    return ScalarField(grid, *samples);
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return ScalarField::sample(grid, [&](const Coord& x) {
    double v = constant;
    for (const FourierMode& m : modes) {
      const double phase = two_pi * (m.wavenumber[0] * x[0] + m.wavenumber[1] * x[1]);
      v += m.cos_coeff * std::cos(phase) + m.sin_coeff * std::sin(phase);
    }
    return v;
  });
}

HamiltonianModel ModelSpec::instantiate(const TorusGrid& grid) const {
  if (grid.dim() != dim) throw Error(ErrorCode::invalid_model, "model dimension differs from grid dimension");
  ScalarField V = potential.sample(grid);
  if (kind == HamiltonianModel::Kind::mechanical) return HamiltonianModel::mechanical(std::move(V));

  const VelocityGrid velocities{dim, v_max, velocity_nodes};
  const std::size_t nv = velocities.size();
  std::vector<double> flat;
  flat.reserve(grid.node_count() * nv);
  if (table) {
    if (table->size() != grid.node_count()) {
      throw Error(ErrorCode::invalid_model, "tabulated model: table rows do not match the grid node count");
    }
    for (const auto& row : *table) {
      if (row.size() != nv) throw Error(ErrorCode::invalid_model, "tabulated model: row length != velocity count");
      flat.insert(flat.end(), row.begin(), row.end());
    }
  } else {
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
      for (std::size_t j = 0; j < nv; ++j) {
        const Coord v = velocities.node(j);
        flat.push_back(0.5 * (v[0] * v[0] + v[1] * v[1]) - V[k]);
      }
    }
  }
  return HamiltonianModel::tabulated(grid, velocities, std::move(flat), convexity_modulus);
}

ModelSpec ModelSpec::cosine_potential(double amplitude, double constant) {
  ModelSpec s;
  s.potential.constant = constant;
  s.potential.modes.push_back({{1, 0}, amplitude, 0.0});
  return s;
}

ModelSpec ModelSpec::free_particle(int dim) {
  ModelSpec s;
  s.dim = dim;
  return s;
}

void to_json(nlohmann::json& j, const ModelSpec& spec) {
  j = nlohmann::json::object();
  j["format_version"] = 1;
  j["kind"] = spec.kind == HamiltonianModel::Kind::mechanical ? "mechanical" : "tabulated";
  j["dim"] = spec.dim;
  nlohmann::json pot = nlohmann::json::object();
  if (spec.potential.samples) {
    pot["samples"] = *spec.potential.samples;
  } else {
    pot["constant"] = spec.potential.constant;
    nlohmann::json modes = nlohmann::json::array();
    for (const FourierMode& m : spec.potential.modes) {
      nlohmann::json k = nlohmann::json::array({m.wavenumber[0]});
      if (spec.dim == 2) k.push_back(m.wavenumber[1]);
      modes.push_back({{"k", k}, {"cos", m.cos_coeff}, {"sin", m.sin_coeff}});
    }
    pot["modes"] = modes;
  }
  j["potential"] = pot;
  if (spec.kind == HamiltonianModel::Kind::tabulated) {
    j["v_max"] = spec.v_max;
    j["velocity_nodes"] = spec.velocity_nodes;
    j["gamma_L"] = spec.convexity_modulus;
    if (spec.table) j["table"] = *spec.table;
  }
}

void from_json(const nlohmann::json& j, ModelSpec& spec) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::invalid_model, "model definition must be a JSON object");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "mechanical") {
      spec.kind = HamiltonianModel::Kind::mechanical;
    } else if (kind == "tabulated") {
      spec.kind = HamiltonianModel::Kind::tabulated;
    } else {
      throw Error(ErrorCode::invalid_model, "unknown model kind '" + kind + "'");
    }
    spec.dim = j.value("dim", 1);
    if (spec.dim != 1 && spec.dim != 2) throw Error(ErrorCode::invalid_model, "dim must be 1 or 2");
    spec.potential = PotentialSpec{};
    if (j.contains("potential")) {
      const auto& pot = j.at("potential");
      if (pot.contains("samples")) {
        spec.potential.samples = pot.at("samples").get<std::vector<double>>();
      } else {
        spec.potential.constant = pot.value("constant", 0.0);
        for (const auto& m : pot.value("modes", nlohmann::json::array())) {
          FourierMode mode;
          const auto k = m.at("k").get<std::vector<int>>();
          if (static_cast<int>(k.size()) != spec.dim) {
            throw Error(ErrorCode::invalid_model, "Fourier wavenumber length must equal dim");
          }
          mode.wavenumber[0] = k[0];
          if (spec.dim == 2) mode.wavenumber[1] = k[1];
          mode.cos_coeff = m.value("cos", 0.0);
          mode.sin_coeff = m.value("sin", 0.0);
          spec.potential.modes.push_back(mode);
        }
      }
    }
    if (spec.kind == HamiltonianModel::Kind::tabulated) {
      spec.v_max = j.at("v_max").get<double>();
      spec.velocity_nodes = j.at("velocity_nodes").get<int>();
      spec.convexity_modulus = j.at("gamma_L").get<double>();
      if (j.contains("table")) spec.table = j.at("table").get<std::vector<std::vector<double>>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_model, std::string("malformed model definition: ") + e.what());
  }
}

}  // namespace stochmather
