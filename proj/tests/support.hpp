// Shared fixture for the model-dependent suites: the default A1 gain
// surrogate trained with the full recipe. Training is deterministic, so the
// result is cached on disk (under the build tree) and reused across test
// binaries and repeated runs. Delete the cache file to force a retrain.
#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <memory>

#include "linkopt/io.hpp"
#include "linkopt/testbed.hpp"

#ifndef LINKOPT_TEST_CACHE_DIR
#define LINKOPT_TEST_CACHE_DIR "."
#endif

namespace linkopt_tests {

struct CachedModel {
  std::shared_ptr<const linkopt::EdfaMlp> model;
  double train_seconds = 0.0;  ///< 0 when read from cache
};

inline const CachedModel& cached_default_model() {
  static const CachedModel cached = [] {
    namespace fs = std::filesystem;
    const fs::path dir(LINKOPT_TEST_CACHE_DIR);
    const fs::path file = dir / "a1_default.model.json";
    CachedModel out;
    if (fs::exists(file)) {
      out.model =
          std::make_shared<linkopt::EdfaMlp>(linkopt::io::read_model_json(file));
      std::fprintf(stderr, "[fixture] reusing cached surrogate %s\n",
                   file.string().c_str());
      return out;
    }
    std::fprintf(stderr, "[fixture] training the default surrogate "
                         "(several minutes, cached afterwards)...\n");
    const auto t0 = std::chrono::steady_clock::now();
    out.model = linkopt::testbed::train_default_model(linkopt::build_grid());
    const auto t1 = std::chrono::steady_clock::now();
    out.train_seconds = std::chrono::duration<double>(t1 - t0).count();
    std::fprintf(stderr, "[fixture] trained in %.0f s\n", out.train_seconds);
    const fs::path tmp = file.string() + ".tmp";
    linkopt::io::write_model_json(tmp, *out.model);
    fs::rename(tmp, file);
    return out;
  }();
  return cached;
}

}  // namespace linkopt_tests
