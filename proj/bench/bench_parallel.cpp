// Serial reference vs OpenMP versions of the two parallel kernels.

#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "persona/ingest.h"
#include "persona/profile_update.h"
#include "persona/reranker.h"

namespace {

using namespace persona;

std::vector<std::string> vocabulary(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::string> words;
  std::uniform_int_distribution<int> letter(0, 25);
  for (std::size_t i = 0; i < n; ++i) {
    std::string w = "w";
    for (int k = 0; k < 6; ++k) w.push_back(static_cast<char>('a' + letter(rng)));
    words.push_back(std::move(w));
  }
  return words;
}

std::string sentence(std::mt19937_64& rng, const std::vector<std::string>& words, int length) {
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::string out;
  for (int i = 0; i < length; ++i) out += (i ? " " : "") + words[pick(rng)];
  return out;
}

struct Workload {
  Profile profile;
  SearchBank bank;
};

const Workload& workload(std::size_t bank_size) {
  static std::map<std::size_t, Workload> cache;
  if (auto it = cache.find(bank_size); it != cache.end()) return it->second;
  std::mt19937_64 rng(7);
  const auto words = vocabulary(rng, 400);
  Workload w;
  std::vector<VisitRecord> visits;
  for (int i = 0; i < 500; ++i) {
    visits.push_back({"https://site" + std::to_string(i % 60) + ".example/" + std::to_string(i), sentence(rng, words, 6),
                      1'700'000'000 + i * 60, 30, Transition::kClicked, 1'700'000'000 + i * 60});
  }
  ingest_visits(w.profile, visits, EngineConfig{});
  std::vector<ProviderHit> hits;
  for (std::size_t i = 0; i < bank_size; ++i) {
    hits.push_back({"https://result.example/" + std::to_string(i), sentence(rng, words, 8), sentence(rng, words, 30)});
  }
  w.bank = make_bank("bench", hits, bank_size);
  return cache.emplace(bank_size, std::move(w)).first->second;
}

void BM_grade_bank_serial(benchmark::State& state) {
  const auto& w = workload(static_cast<std::size_t>(state.range(0)));
  const RerankContext context(w.profile);
  for (auto _ : state) benchmark::DoNotOptimize(grade_bank_serial(w.bank, context));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_grade_bank_parallel(benchmark::State& state) {
  const auto& w = workload(static_cast<std::size_t>(state.range(0)));
  const RerankContext context(w.profile);
  for (auto _ : state) benchmark::DoNotOptimize(grade_bank(w.bank, context));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_grade_bank_serial)->Arg(100)->Arg(1000);
BENCHMARK(BM_grade_bank_parallel)->Arg(100)->Arg(1000);

const std::filesystem::path& corpus() {
  static const std::filesystem::path root = [] {
    const auto dir = std::filesystem::temp_directory_path() / "persona-bench-corpus";
    std::filesystem::create_directories(dir);
    std::mt19937_64 rng(11);
    const auto words = vocabulary(rng, 2000);
    for (int i = 0; i < 300; ++i) {
      const auto name = dir / ("doc" + std::to_string(i) + (i % 3 ? ".txt" : ".html"));
      if (std::filesystem::exists(name)) continue;
      std::ofstream out(name);
      out << (i % 3 ? "" : "<html><body><p>") << sentence(rng, words, 2000) << (i % 3 ? "" : "</p></body></html>");
    }
    return dir;
  }();
  return root;
}

void BM_scan_documents_serial(benchmark::State& state) {
  const std::vector<std::filesystem::path> paths{corpus()};
  for (auto _ : state) benchmark::DoNotOptimize(scan_documents_serial(paths, {}, 0));
}

void BM_scan_documents_parallel(benchmark::State& state) {
  const std::vector<std::filesystem::path> paths{corpus()};
  for (auto _ : state) benchmark::DoNotOptimize(scan_documents(paths, {}, 0));
}

BENCHMARK(BM_scan_documents_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_scan_documents_parallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
