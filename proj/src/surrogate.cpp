#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "autostgcn/errors.hpp"
#include "autostgcn/evaluator.hpp"

namespace autostgcn {

using nlohmann::json;

namespace {

template <std::size_t N>
double at(const std::array<double, N>& table, int ordinal) {
  return table[static_cast<std::size_t>(ordinal - 1)];
}

template <std::size_t N>
double min_over(const std::array<double, N>& table,
                const std::vector<int>& options) {
  double best = at(table, options.front());
  for (int o : options) best = std::min(best, at(table, o));
  return best;
}

template <std::size_t N>
void read_table(const json& j, const char* key, std::array<double, N>& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != N) {
    throw ConfigError(std::string("surrogate weights: '") + key +
                      "' must be an array of " + std::to_string(N) +
                      " numbers");
  }
  for (std::size_t i = 0; i < N; ++i) out[i] = v[i].get<double>();
}

void read_number(const json& j, const char* key, double& out) {
  if (j.contains(key)) out = j.at(key).get<double>();
}

}  // namespace

std::string SurrogateWeights::to_json() const {
  json j;
  j["base"] = base;
  j["is"] = is;
  j["os"] = os;
  j["fsc"] = fsc;
  j["mbof"] = mbof;
  j["sipm"] = sipm;
  j["tipm"] = tipm;
  j["fes"] = fes;
  j["lf"] = lf;
  j["bs"] = bs;
  j["ilr"] = ilr;
  j["of"] = of;
  j["diversity_coeff"] = diversity_coeff;
  j["nonseq_bonus"] = nonseq_bonus;
  json depth = json::object();
  for (const auto& [k, v] : depth_penalty) depth[std::to_string(k)] = v;
  j["depth_penalty"] = depth;
  j["time_base"] = time_base;
  j["time_per_block"] = time_per_block;
  j["time_fsc_coeff"] = time_fsc_coeff;
  j["fes_time"] = fes_time;
  return j.dump(2);
}

SurrogateWeights SurrogateWeights::from_json(std::string_view text) {
  SurrogateWeights w;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("surrogate weights must be an object");
    read_number(j, "base", w.base);
    read_table(j, "is", w.is);
    read_table(j, "os", w.os);
    read_table(j, "fsc", w.fsc);
    read_table(j, "mbof", w.mbof);
    read_table(j, "sipm", w.sipm);
    read_table(j, "tipm", w.tipm);
    read_table(j, "fes", w.fes);
    read_table(j, "lf", w.lf);
    read_table(j, "bs", w.bs);
    read_table(j, "ilr", w.ilr);
    read_table(j, "of", w.of);
    read_number(j, "diversity_coeff", w.diversity_coeff);
    read_number(j, "nonseq_bonus", w.nonseq_bonus);
    if (j.contains("depth_penalty")) {
      w.depth_penalty.clear();
      for (const auto& [k, v] : j.at("depth_penalty").items()) {
        w.depth_penalty[std::stoi(k)] = v.get<double>();
      }
    }
    read_number(j, "time_base", w.time_base);
    read_number(j, "time_per_block", w.time_per_block);
    read_number(j, "time_fsc_coeff", w.time_fsc_coeff);
    read_table(j, "fes_time", w.fes_time);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("surrogate weights: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ConfigError("surrogate weights: depth_penalty keys must be integers");
  }
  return w;
}

SurrogateWeights SurrogateWeights::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open surrogate weights '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

double surrogate_mae_lower_bound(const SurrogateWeights& w,
                                 const ParameterCatalog& catalog) {
  std::vector<int> fsc;
  for (int size : catalog.fsc_options) fsc.push_back(filter_size_ordinal(size));
  const double fixed = w.base + min_over(w.is, catalog.is_options) +
                       min_over(w.os, catalog.os_options) + min_over(w.fsc, fsc) +
                       min_over(w.mbof, catalog.mbof_options) +
                       min_over(w.lf, catalog.lf_options) +
                       min_over(w.bs, catalog.bs_options) +
                       min_over(w.ilr, catalog.ilr_options) +
                       min_over(w.of, catalog.of_options);
  const double per_block = min_over(w.sipm, catalog.sipm_options) +
                           min_over(w.tipm, catalog.tipm_options) +
                           min_over(w.fes, catalog.fes_options);
  const int fes_count = static_cast<int>(catalog.fes_options.size());
  double best = 0.0;
  for (int k = 1; k <= catalog.max_blocks; ++k) {
    const auto depth = w.depth_penalty.find(k);
    const int max_distinct = std::min(k, fes_count);
    double v = k * per_block +
               (depth == w.depth_penalty.end() ? 0.0 : depth->second) +
               std::min(0.0, w.diversity_coeff * (max_distinct - 1)) +
               (k >= 2 ? std::min(0.0, w.nonseq_bonus) : 0.0);
    best = (k == 1) ? v : std::min(best, v);
  }
  return fixed + best;
}

EvaluationResult surrogate_evaluate(const ArchitectureCode& code,
                                    const SurrogateWeights& w) {
  const auto& training = code.states.at(1).slots;
  const auto& global = code.states.at(2).slots;

  double mae = w.base;
  mae += at(w.lf, training[0]) + at(w.bs, training[1]) +
         at(w.ilr, training[2]) + at(w.of, training[3]);
  mae += at(w.is, global[0]) + at(w.os, global[1]) + at(w.fsc, global[2]) +
         at(w.mbof, global[3]);

  const int filter_size = filter_size_value(global[2]);
  double time = w.time_base;
  std::set<int> distinct_fes;
  bool nonsequential = false;
  int blocks = 0;
  for (std::size_t p = 3; p < code.states.size(); ++p) {
    const auto& s = code.states[p];
    if (s.is_terminal()) break;
    ++blocks;
    mae += at(w.sipm, s.slots[0]) + at(w.tipm, s.slots[1]) +
           at(w.fes, s.slots[2]);
    distinct_fes.insert(s.slots[2]);
    if (s.slots[3] != s.index - 1) nonsequential = true;
    time += w.time_per_block + w.time_fsc_coeff * (filter_size / 16.0 - 1.0) +
            at(w.fes_time, s.slots[2]);
  }
  mae += w.diversity_coeff * static_cast<double>(distinct_fes.size() - 1);
  if (nonsequential) mae += w.nonseq_bonus;
  if (const auto it = w.depth_penalty.find(blocks); it != w.depth_penalty.end()) {
    mae += it->second;
  }
  return EvaluationResult::success(mae, time);
}

}  // namespace autostgcn
