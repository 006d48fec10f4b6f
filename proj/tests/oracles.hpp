// Test-only brute-force oracles. Nothing here calls action_space, space_size
// or random_code; enumeration walks the catalog lists directly.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "autostgcn/random.hpp"
#include "autostgcn/search_space.hpp"

namespace oracle {

using autostgcn::BlockConfig;
using autostgcn::ParameterCatalog;
using autostgcn::StructuredConfig;

// Calls visit(cfg) for every structured configuration of the catalog.
inline void for_each_config(const ParameterCatalog& c,
                            const std::function<void(const StructuredConfig&)>& visit) {
  StructuredConfig cfg;
  std::function<void(int)> blocks = [&](int i) {
    if (i > 1 && !cfg.blocks.empty()) visit(cfg);
    if (i > c.max_blocks) return;
    for (int s : c.sipm_options)
      for (int t : c.tipm_options)
        for (int f : c.fes_options)
          for (int pb = 0; pb < i; ++pb) {
            cfg.blocks.push_back(BlockConfig{s, t, f, pb});
            blocks(i + 1);
            cfg.blocks.pop_back();
          }
  };
  for (int lf : c.lf_options)
    for (int bs : c.bs_options)
      for (int ilr : c.ilr_options)
        for (int of : c.of_options)
          for (int is : c.is_options)
            for (int os : c.os_options)
              for (int fsc : c.fsc_options)
                for (int mbof : c.mbof_options) {
                  cfg.training = {lf, bs, ilr, of};
                  cfg.global = {is, os, fsc, mbof};
                  blocks(1);
                }
}

inline std::uint64_t count_configs(const ParameterCatalog& c) {
  std::uint64_t n = 0;
  for_each_config(c, [&n](const StructuredConfig&) { ++n; });
  return n;
}

// Random non-empty sorted subset of 1..n (or of `values`).
inline std::vector<int> random_subset(autostgcn::Rng& rng, const std::vector<int>& values) {
  std::vector<int> out;
  while (out.empty()) {
    out.clear();
    for (int v : values) {
      if (autostgcn::uniform_unit(rng) < 0.5) out.push_back(v);
    }
  }
  return out;
}

inline std::vector<int> range(int n) {
  std::vector<int> v;
  for (int i = 1; i <= n; ++i) v.push_back(i);
  return v;
}

// Reduced catalog with at most `limit` configurations (by brute-force count).
inline ParameterCatalog random_small_catalog(autostgcn::Rng& rng, std::uint64_t limit) {
  while (true) {
    ParameterCatalog c;
    c.max_blocks = 1 + static_cast<int>(autostgcn::uniform_index(rng, 3));
    c.is_options = random_subset(rng, range(2));
    c.sipm_options = random_subset(rng, range(4));
    c.tipm_options = random_subset(rng, range(3));
    c.fes_options = random_subset(rng, range(4));
    c.os_options = random_subset(rng, range(3));
    c.fsc_options = random_subset(rng, {16, 32, 64});
    c.mbof_options = random_subset(rng, range(2));
    c.lf_options = random_subset(rng, range(2));
    c.bs_options = random_subset(rng, range(3));
    c.ilr_options = random_subset(rng, range(3));
    c.of_options = random_subset(rng, range(3));
    // Cheap product estimate first so we never enumerate huge spaces.
    double est = 1.0;
    for (const auto* v : {&c.is_options, &c.os_options, &c.fsc_options, &c.mbof_options,
                          &c.lf_options, &c.bs_options, &c.ilr_options, &c.of_options}) {
      est *= static_cast<double>(v->size());
    }
    double blocks = 0.0, prefix = 1.0;
    const double per = static_cast<double>(c.sipm_options.size() * c.tipm_options.size() *
                                           c.fes_options.size());
    for (int i = 1; i <= c.max_blocks; ++i) {
      prefix *= per * i;
      blocks += prefix;
    }
    if (est * blocks <= static_cast<double>(limit)) return c;
  }
}

// Reference formula of the toy worker protocol fixture.
//   mae = 25 + 3 sin(h), h = fnv1a64(code text) / 2^64 * 2 pi
//   inference_time = 2 + 0.9 * block_count
inline double toy_mae(const std::string& code_text) {
  const double h = static_cast<double>(autostgcn::fnv1a64(code_text)) *
                   0x1.0p-64 * 2.0 * 3.14159265358979323846;
  return 25.0 + 3.0 * std::sin(h);
}

inline double toy_time(int block_count) { return 2.0 + 0.9 * block_count; }

}  // namespace oracle
