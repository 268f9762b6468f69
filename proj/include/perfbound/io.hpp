// io.hpp - file formats: dataset CSV (`y,x1,...,xk[,w]`), JSON sidecars
// for the box and the constants profile, fit/trace/report serialization.
// Doubles are written with 17 significant digits so every round trip is
// bit-identical.
#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "perfbound/bounds.hpp"
#include "perfbound/core.hpp"
#include "perfbound/logistic.hpp"
#include "perfbound/rerm.hpp"
#include "perfbound/transition.hpp"

namespace perfbound {

using nlohmann::json;

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ------------------------------------------------------------ datasets

inline std::string dataset_to_csv(const EmpiricalDistribution& d,
                                  bool include_weights = false) {
  if (d.box().dim_y != 1)
    throw std::invalid_argument("dataset_to_csv: expects one label coordinate");
  std::ostringstream os;
  os << 'y';
  for (int f = 1; f <= d.box().dim_x; ++f) os << ",x" << f;
  if (include_weights) os << ",w";
  os << '\n';
  for (int i = 0; i < d.n(); ++i) {
    const auto z = d.point(i);
    os << fmt17(z[0]);
    for (int c = 1; c < d.dim(); ++c) os << ',' << fmt17(z[static_cast<std::size_t>(c)]);
    if (include_weights) os << ',' << fmt17(d.weight(i));
    os << '\n';
  }
  return os.str();
}

inline EmpiricalDistribution dataset_from_csv(const std::string& csv,
                                              const DomainBox& box) {
  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line))
    throw std::invalid_argument("dataset_from_csv: empty input");
  // header tells us the column count and whether weights are present
  int cols = 1;
  for (const char ch : line) cols += ch == ',';
  const bool has_w = line.size() >= 2 && line.rfind(",w") == line.size() - 2;
  const int dim = cols - (has_w ? 1 : 0);
  if (dim != box.dim())
    throw std::invalid_argument("dataset_from_csv: column count does not match box");

  std::vector<double> flat, weights;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    int c = 0;
    while (std::getline(ls, cell, ',')) {
      const double v = std::strtod(cell.c_str(), nullptr);
      if (c < dim)
        flat.push_back(v);
      else
        weights.push_back(v);
      ++c;
    }
    if (c != cols)
      throw std::invalid_argument("dataset_from_csv: ragged row '" + line + "'");
  }
  return EmpiricalDistribution(box, std::move(flat),
                               has_w ? std::move(weights) : std::vector<double>{});
}

// ---------------------------------------------------------------- JSON

inline json to_json(const DomainBox& b) {
  return json{{"schema", 1},
              {"lower", b.lower},
              {"upper", b.upper},
              {"dim_y", b.dim_y},
              {"dim_x", b.dim_x}};
}

inline DomainBox box_from_json(const json& j) {
  DomainBox b;
  b.lower = j.at("lower").get<std::vector<double>>();
  b.upper = j.at("upper").get<std::vector<double>>();
  b.dim_y = j.at("dim_y").get<int>();
  b.dim_x = j.at("dim_x").get<int>();
  b.validate();
  return b;
}

inline json to_json(const ConstantsProfile& c) {
  json j{{"schema", 1},
         {"L_ell", c.L_ell},
         {"L_a", c.L_a},
         {"L_a_tilde", c.L_a_tilde},
         {"L_f", c.L_f},
         {"gamma", c.gamma},
         {"kappa", c.kappa},
         {"eps_sens", c.eps_sens},
         {"p", c.p},
         {"nu", c.nu},
         {"C_a", c.C_a},
         {"C_b", c.C_b},
         {"D_Z", c.D_Z},
         {"D_Theta", c.D_Theta},
         {"F", c.F},
         {"B", c.B},
         {"delta", c.delta}};
  if (c.L_ell_sampling > 0) j["L_ell_sampling"] = c.L_ell_sampling;
  if (c.complexity_inf >= 0) j["complexity_inf"] = c.complexity_inf;
  if (c.complexity_l2 >= 0) j["complexity_l2"] = c.complexity_l2;
  return j;
}

inline ConstantsProfile profile_from_json(const json& j) {
  ConstantsProfile c;
  c.L_ell = j.at("L_ell").get<double>();
  c.L_a = j.at("L_a").get<double>();
  c.L_a_tilde = j.value("L_a_tilde", 1.0 / (1.0 + c.L_a));
  c.L_f = j.at("L_f").get<double>();
  c.gamma = j.at("gamma").get<double>();
  c.kappa = j.at("kappa").get<double>();
  c.eps_sens = j.at("eps_sens").get<double>();
  c.p = j.at("p").get<double>();
  c.nu = j.at("nu").get<double>();
  c.C_a = j.value("C_a", 1.0);
  c.C_b = j.value("C_b", 1.0);
  c.D_Z = j.at("D_Z").get<double>();
  c.D_Theta = j.at("D_Theta").get<double>();
  c.F = j.value("F", 1.0);
  c.B = j.value("B", 0.0);
  c.delta = j.at("delta").get<double>();
  c.L_ell_sampling = j.value("L_ell_sampling", -1.0);
  c.complexity_inf = j.value("complexity_inf", -1.0);
  c.complexity_l2 = j.value("complexity_l2", -1.0);
  c.validate();
  return c;
}

inline json to_json(const FitResult& f) {
  return json{{"theta", f.theta.v},
              {"grad_norm", f.grad_norm},
              {"iters", f.iters},
              {"risk", f.risk},
              {"config_hash", f.config_hash}};
}

inline json to_json(const TransitionMap& m) {
  json j{{"schema", 1}};
  switch (m.kind) {
    case MapKind::top_xi_label_flip:
      j["kind"] = "top_xi_label_flip";
      j["flip_target"] = m.flip_target == FlipTarget::zero ? "zero"
                         : m.flip_target == FlipTarget::fulfill ? "fulfill"
                                                                : "negate";
      break;
    case MapKind::bounded_feature_shift:
      j["kind"] = "bounded_feature_shift";
      if (m.shift_mode == ShiftMode::offset) {
        j["shift_vector"] = m.shift_vector;
      } else {
        j["anchor"] = m.anchor;
        j["contract_rate"] = m.contract_rate;
      }
      break;
    case MapKind::composite: {
      j["kind"] = "composite";
      json kids = json::array();
      for (const auto& c : m.children) kids.push_back(to_json(c));
      j["children"] = kids;
      break;
    }
  }
  j["xi"] = m.xi;
  j["effectiveness"] = m.effectiveness;
  j["seed"] = m.seed;
  if (m.certified_eps) j["certified_eps"] = *m.certified_eps;
  return j;
}

inline TransitionMap map_from_json(const json& j) {
  TransitionMap m;
  const std::string kind = j.at("kind").get<std::string>();
  m.xi = j.value("xi", 0.0);
  m.effectiveness = j.value("effectiveness", 1.0);
  m.seed = j.value("seed", std::uint64_t{0});
  if (kind == "top_xi_label_flip") {
    m.kind = MapKind::top_xi_label_flip;
    const std::string t = j.value("flip_target", "zero");
    m.flip_target = t == "fulfill" ? FlipTarget::fulfill
                    : t == "negate" ? FlipTarget::negate
                                    : FlipTarget::zero;
  } else if (kind == "bounded_feature_shift") {
    m.kind = MapKind::bounded_feature_shift;
    if (j.contains("anchor")) {
      m.shift_mode = ShiftMode::contract_to_anchor;
      m.anchor = j.at("anchor").get<std::vector<double>>();
      m.contract_rate = j.at("contract_rate").get<double>();
    } else {
      m.shift_mode = ShiftMode::offset;
      m.shift_vector = j.at("shift_vector").get<std::vector<double>>();
    }
  } else if (kind == "composite") {
    m.kind = MapKind::composite;
    for (const auto& cj : j.at("children")) m.children.push_back(map_from_json(cj));
  } else {
    throw std::invalid_argument("map_from_json: unknown kind '" + kind + "'");
  }
  if (j.contains("certified_eps")) m.certified_eps = j.at("certified_eps").get<double>();
  return m;
}

inline json to_json(const BoundReport& r) {
  json terms = json::object();
  json order = json::array();
  for (const auto& [k, v] : r.terms) {
    terms[k] = v;
    order.push_back(k);
  }
  return json{{"name", r.name},
              {"terms", terms},
              {"term_order", order},
              {"total", r.total},
              {"confidence", r.confidence},
              {"inputs_hash", r.inputs_hash}};
}

// one round per line: {t, theta, m, w_step?}
inline std::string trace_to_jsonl(const RermTrace& trace) {
  std::ostringstream os;
  for (int t = 0; t < trace.T(); ++t) {
    json j{{"t", t + 1},
           {"theta", trace.thetas[static_cast<std::size_t>(t)].v},
           {"m", trace.shift_counts[static_cast<std::size_t>(t)]}};
    if (static_cast<std::size_t>(t) < trace.wasserstein_steps.size())
      j["w_step"] = trace.wasserstein_steps[static_cast<std::size_t>(t)];
    os << j.dump() << '\n';
  }
  return os.str();
}

struct TraceRound {
  int t = 0;
  ParamVector theta;
  int m = 0;
  double w_step = -1.0;
};

inline std::vector<TraceRound> trace_rounds_from_jsonl(const std::string& text) {
  std::vector<TraceRound> rounds;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    TraceRound r;
    r.t = j.at("t").get<int>();
    r.theta.v = j.at("theta").get<std::vector<double>>();
    r.m = j.at("m").get<int>();
    r.w_step = j.value("w_step", -1.0);
    rounds.push_back(std::move(r));
  }
  return rounds;
}

// ---------------------------------------------------------------- files

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_file: cannot open " + path);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_file: cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace perfbound
