#include "autostgcn/search_space.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "autostgcn/errors.hpp"

namespace autostgcn {

namespace {

bool contains(const std::vector<int>& options, int value) {
  return std::find(options.begin(), options.end(), value) != options.end();
}

std::vector<int> sorted(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<int> fsc_ordinals(const ParameterCatalog& catalog) {
  std::vector<int> out;
  out.reserve(catalog.fsc_options.size());
  for (int size : catalog.fsc_options) out.push_back(filter_size_ordinal(size));
  return sorted(std::move(out));
}

void check_option_list(const char* name, const std::vector<int>& options,
                       int lo, int hi, std::vector<std::string>& out) {
  if (options.empty()) {
    out.push_back(std::string(name) + " options must be non-empty");
    return;
  }
  std::set<int> seen;
  for (int v : options) {
    if (v < lo || v > hi) {
      out.push_back(std::string(name) + " option " + std::to_string(v) +
                    " outside " + std::to_string(lo) + ".." +
                    std::to_string(hi));
    }
    if (!seen.insert(v).second) {
      out.push_back(std::string(name) + " option " + std::to_string(v) +
                    " duplicated");
    }
  }
}

int parse_int(std::string_view text) {
  int value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') throw InvalidInput("syntax", "bad integer");
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw InvalidInput("syntax", "bad integer '" + std::string(text) + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

struct SlotRule {
  const char* name;
  const std::vector<int>* options;
};

void check_slots(const StateVector& s, const std::array<SlotRule, 4>& rules,
                 std::size_t count, std::vector<Violation>& out) {
  for (std::size_t k = 0; k < count; ++k) {
    if (!contains(*rules[k].options, s.slots[k])) {
      out.push_back({0, s.index, "catalog_member",
                     std::string(rules[k].name) + " ordinal " +
                         std::to_string(s.slots[k]) + " not in catalog"});
    }
  }
}

}  // namespace

int filter_size_ordinal(int filter_size) {
  for (std::size_t i = 0; i < kFilterSizes.size(); ++i) {
    if (kFilterSizes[i] == filter_size) return static_cast<int>(i) + 1;
  }
  throw InvalidInput("filter_size",
                     "unsupported filter size " + std::to_string(filter_size));
}

int filter_size_value(int ordinal) {
  if (ordinal < 1 || ordinal > static_cast<int>(kFilterSizes.size())) {
    throw InvalidInput("filter_size",
                       "bad filter size ordinal " + std::to_string(ordinal));
  }
  return kFilterSizes[static_cast<std::size_t>(ordinal - 1)];
}

std::vector<std::string> ParameterCatalog::violations() const {
  std::vector<std::string> out;
  if (max_blocks < 1) out.push_back("max_blocks must be >= 1");
  check_option_list("IS", is_options, 1, kNumInputStructures, out);
  check_option_list("SIPM", sipm_options, 1, kNumSpatialMethods, out);
  check_option_list("TIPM", tipm_options, 1, kNumTemporalMethods, out);
  check_option_list("FES", fes_options, 1, kNumEmbeddingStructures, out);
  check_option_list("OS", os_options, 1, kNumOutputStructures, out);
  check_option_list("MBOF", mbof_options, 1, kNumFusionMethods, out);
  check_option_list("LF", lf_options, 1, kNumLossFunctions, out);
  check_option_list("BS", bs_options, 1, kNumBatchSizes, out);
  check_option_list("ILR", ilr_options, 1, kNumLearningRates, out);
  check_option_list("OF", of_options, 1, kNumOptimizers, out);
  if (fsc_options.empty()) out.push_back("FSC options must be non-empty");
  std::set<int> seen;
  for (int v : fsc_options) {
    if (std::find(kFilterSizes.begin(), kFilterSizes.end(), v) ==
        kFilterSizes.end()) {
      out.push_back("FSC option " + std::to_string(v) +
                    " is not one of 16, 32, 64");
    }
    if (!seen.insert(v).second) {
      out.push_back("FSC option " + std::to_string(v) + " duplicated");
    }
  }
  return out;
}

void ParameterCatalog::check() const {
  const auto v = violations();
  if (!v.empty()) throw InvalidInput("catalog", v.front());
}

bool StateVector::is_start() const {
  return index == kStartIndex &&
         std::all_of(slots.begin(), slots.end(),
                     [](int x) { return x == kSentinel; });
}

bool StateVector::is_terminal() const {
  return index >= 1 && std::all_of(slots.begin(), slots.end(),
                                   [](int x) { return x == kSentinel; });
}

std::string StateVector::text() const {
  std::string out = std::to_string(index);
  out += ':';
  for (std::size_t k = 0; k < slots.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(slots[k]);
  }
  return out;
}

StateVector StateVector::parse(std::string_view text) {
  text = trim(text);
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw InvalidInput("syntax", "state '" + std::string(text) +
                                     "' lacks ':' separator");
  }
  StateVector s;
  s.index = parse_int(text.substr(0, colon));
  std::string_view rest = text.substr(colon + 1);
  for (std::size_t k = 0; k < 4; ++k) {
    const auto comma = rest.find(',');
    const bool last = (k == 3);
    if (last != (comma == std::string_view::npos)) {
      throw InvalidInput("syntax", "state '" + std::string(text) +
                                       "' must have exactly 4 slots");
    }
    s.slots[k] = parse_int(last ? rest : rest.substr(0, comma));
    if (!last) rest = rest.substr(comma + 1);
  }
  return s;
}

StateVector StateVector::terminal(int index) {
  return StateVector{index, {kSentinel, kSentinel, kSentinel, kSentinel}};
}

std::string ArchitectureCode::text() const {
  std::string out;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (i) out += ';';
    out += states[i].text();
  }
  return out;
}

ArchitectureCode ArchitectureCode::parse(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw InvalidInput("syntax", "empty code text");
  ArchitectureCode code;
  std::size_t pos = 0;
  while (true) {
    const auto semi = text.find(';', pos);
    code.states.push_back(StateVector::parse(text.substr(
        pos, semi == std::string_view::npos ? std::string_view::npos
                                            : semi - pos)));
    if (semi == std::string_view::npos) break;
    pos = semi + 1;
  }
  return code;
}

int ArchitectureCode::block_count() const {
  return static_cast<int>(std::count_if(
      states.begin(), states.end(), [](const StateVector& s) {
        return s.index >= 1 && !s.is_terminal();
      }));
}

int ArchitectureCode::transitions() const {
  return states.empty() ? 0 : static_cast<int>(states.size()) - 1;
}

std::string to_string(const Violation& v) {
  std::ostringstream os;
  os << "state " << v.position << " (index " << v.state_index << ") ["
     << v.rule << "]: " << v.message;
  return os.str();
}

StateVector start_state() { return StateVector{}; }

std::vector<Violation> validate_state(const StateVector& s,
                                      const ParameterCatalog& catalog) {
  std::vector<Violation> out;
  if (s.index < kStartIndex || s.index > catalog.max_blocks) {
    out.push_back({0, s.index, "index_range",
                   "state index must lie in -2.." +
                       std::to_string(catalog.max_blocks)});
    return out;
  }
  if (s.index == kStartIndex) {
    if (!s.is_start()) {
      out.push_back({0, s.index, "start_slots",
                     "start state slots must all be -1"});
    }
    return out;
  }
  if (s.is_terminal()) return out;

  if (s.index == kTrainingIndex) {
    check_slots(s,
                {{{"LF", &catalog.lf_options},
                  {"BS", &catalog.bs_options},
                  {"ILR", &catalog.ilr_options},
                  {"OF", &catalog.of_options}}},
                4, out);
    return out;
  }
  if (s.index == kGlobalIndex) {
    const auto fsc = fsc_ordinals(catalog);
    check_slots(s,
                {{{"IS", &catalog.is_options},
                  {"OS", &catalog.os_options},
                  {"FSC", &fsc},
                  {"MBOF", &catalog.mbof_options}}},
                4, out);
    return out;
  }
  check_slots(s,
              {{{"SIPM", &catalog.sipm_options},
                {"TIPM", &catalog.tipm_options},
                {"FES", &catalog.fes_options},
                {"", nullptr}}},
              3, out);
  const int pb = s.slots[3];
  if (pb >= s.index) {
    out.push_back({0, s.index, "pbindex_range",
                   "PBIndex must be < " + std::to_string(s.index)});
  } else if (pb < 0) {
    out.push_back({0, s.index, "pbindex_range", "PBIndex must be >= 0"});
  }
  return out;
}

std::vector<StateVector> action_space(const StateVector& s,
                                      const ParameterCatalog& catalog) {
  if (s.is_terminal()) {
    throw TerminalState("state " + s.text() + " is terminal");
  }
  if (s.index >= catalog.max_blocks || s.index < kStartIndex) {
    throw IndexOutOfRange("state " + s.text() + " has no successors");
  }
  const int next = s.index + 1;
  std::vector<StateVector> out;

  auto product = [&](const std::vector<int>& a, const std::vector<int>& b,
                     const std::vector<int>& c, const std::vector<int>& d) {
    out.reserve(out.size() + a.size() * b.size() * c.size() * d.size());
    for (int x : a)
      for (int y : b)
        for (int z : c)
          for (int w : d) out.push_back(StateVector{next, {x, y, z, w}});
  };

  if (next == kTrainingIndex) {
    product(sorted(catalog.lf_options), sorted(catalog.bs_options),
            sorted(catalog.ilr_options), sorted(catalog.of_options));
  } else if (next == kGlobalIndex) {
    product(sorted(catalog.is_options), sorted(catalog.os_options),
            fsc_ordinals(catalog), sorted(catalog.mbof_options));
  } else {
    // Closing the model is legal once at least one block exists.
    if (next >= 2) out.push_back(StateVector::terminal(next));
    std::vector<int> preds(static_cast<std::size_t>(next));
    for (int j = 0; j < next; ++j) preds[static_cast<std::size_t>(j)] = j;
    product(sorted(catalog.sipm_options), sorted(catalog.tipm_options),
            sorted(catalog.fes_options), preds);
  }
  return out;
}

std::vector<Violation> validate_code(const ArchitectureCode& code,
                                     const ParameterCatalog& catalog) {
  std::vector<Violation> out;
  const auto& states = code.states;
  if (states.empty()) {
    out.push_back({0, 0, "empty_code", "code has no states"});
    return out;
  }
  if (states.front().index != kStartIndex) {
    out.push_back({0, states.front().index, "start_state",
                   "code must begin with the start state"});
  }
  for (std::size_t p = 0; p < states.size(); ++p) {
    const auto& s = states[p];
    const int expected = static_cast<int>(p) + kStartIndex;
    if (s.index != expected) {
      out.push_back({p, s.index, "index_step",
                     "expected state index " + std::to_string(expected)});
    }
    for (auto v : validate_state(s, catalog)) {
      v.position = p;
      out.push_back(std::move(v));
    }
    if (s.is_terminal()) {
      if (p + 1 != states.size()) {
        out.push_back({p, s.index, "terminal_not_last",
                       "terminal state must be the last state"});
      }
      if (s.index == 1) {
        out.push_back({p, s.index, "empty_model", "empty model"});
      }
    }
  }
  const auto& last = states.back();
  if (!last.is_terminal() && last.index != catalog.max_blocks) {
    out.push_back({states.size() - 1, last.index, "incomplete",
                   "code must end with a terminal state or reach block " +
                       std::to_string(catalog.max_blocks)});
  }
  return out;
}

ArchitectureCode encode(const StructuredConfig& cfg,
                        const ParameterCatalog& catalog) {
  const int k = static_cast<int>(cfg.blocks.size());
  if (k < 1) throw InvalidInput("empty_model", "empty model");
  if (k > catalog.max_blocks) {
    throw InvalidInput("block_count",
                       "config has " + std::to_string(k) + " blocks, max is " +
                           std::to_string(catalog.max_blocks));
  }
  int fsc = 0;
  try {
    fsc = filter_size_ordinal(cfg.global.filter_size);
  } catch (const InvalidInput&) {
    throw InvalidInput("catalog_member",
                       "FSC " + std::to_string(cfg.global.filter_size) +
                           " not in catalog");
  }

  ArchitectureCode code;
  code.states.reserve(static_cast<std::size_t>(k) + 4);
  code.states.push_back(start_state());
  const auto& t = cfg.training;
  code.states.push_back(
      {kTrainingIndex, {t.loss, t.batch_size, t.initial_lr, t.optimizer}});
  const auto& g = cfg.global;
  code.states.push_back({kGlobalIndex,
                         {g.input_structure, g.output_structure, fsc,
                          g.fusion_method}});
  for (int i = 1; i <= k; ++i) {
    const auto& b = cfg.blocks[static_cast<std::size_t>(i - 1)];
    code.states.push_back({i, {b.sipm, b.tipm, b.fes, b.pred_index}});
  }
  if (k < catalog.max_blocks) code.states.push_back(StateVector::terminal(k + 1));

  const auto violations = validate_code(code, catalog);
  if (!violations.empty()) {
    throw InvalidInput(violations.front().rule, to_string(violations.front()));
  }
  return code;
}

StructuredConfig decode(const ArchitectureCode& code,
                        const ParameterCatalog& catalog) {
  const auto violations = validate_code(code, catalog);
  if (!violations.empty()) {
    throw InvalidInput(violations.front().rule, to_string(violations.front()));
  }
  StructuredConfig cfg;
  const auto& t = code.states[1].slots;
  cfg.training = {t[0], t[1], t[2], t[3]};
  const auto& g = code.states[2].slots;
  cfg.global = {g[0], g[1], filter_size_value(g[2]), g[3]};
  for (std::size_t p = 3; p < code.states.size(); ++p) {
    const auto& s = code.states[p];
    if (s.is_terminal()) break;
    cfg.blocks.push_back({s.slots[0], s.slots[1], s.slots[2], s.slots[3]});
  }
  return cfg;
}

ArchitectureCode random_code(const ParameterCatalog& catalog, Rng& rng) {
  auto pick = [&rng](const std::vector<int>& options) {
    return options[uniform_index(rng, options.size())];
  };
  const int k =
      1 + static_cast<int>(uniform_index(
              rng, static_cast<std::size_t>(catalog.max_blocks)));

  ArchitectureCode code;
  code.states.push_back(start_state());
  const int lf = pick(catalog.lf_options);
  const int bs = pick(catalog.bs_options);
  const int ilr = pick(catalog.ilr_options);
  const int of = pick(catalog.of_options);
  code.states.push_back({kTrainingIndex, {lf, bs, ilr, of}});
  const int is = pick(catalog.is_options);
  const int os = pick(catalog.os_options);
  const int fsc = filter_size_ordinal(pick(catalog.fsc_options));
  const int mbof = pick(catalog.mbof_options);
  code.states.push_back({kGlobalIndex, {is, os, fsc, mbof}});
  for (int i = 1; i <= k; ++i) {
    const int sipm = pick(catalog.sipm_options);
    const int tipm = pick(catalog.tipm_options);
    const int fes = pick(catalog.fes_options);
    const int pb =
        static_cast<int>(uniform_index(rng, static_cast<std::size_t>(i)));
    code.states.push_back({i, {sipm, tipm, fes, pb}});
  }
  if (k < catalog.max_blocks) code.states.push_back(StateVector::terminal(k + 1));
  return code;
}

ArchitectureCode random_code(const ParameterCatalog& catalog,
                             std::uint64_t seed) {
  Rng rng(seed);
  return random_code(catalog, rng);
}

BigInt space_size(const ParameterCatalog& catalog) {
  const BigInt training = BigInt(catalog.lf_options.size()) *
                          catalog.bs_options.size() *
                          catalog.ilr_options.size() *
                          catalog.of_options.size();
  const BigInt global = BigInt(catalog.is_options.size()) *
                        catalog.os_options.size() *
                        catalog.fsc_options.size() *
                        catalog.mbof_options.size();
  const BigInt per_block = BigInt(catalog.sipm_options.size()) *
                           catalog.tipm_options.size() *
                           catalog.fes_options.size();
  BigInt blocks = 0;
  BigInt prefix = 1;
  for (int i = 1; i <= catalog.max_blocks; ++i) {
    prefix *= per_block * i;
    blocks += prefix;
  }
  return training * global * blocks;
}

}  // namespace autostgcn
