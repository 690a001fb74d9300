// Copyright 2026 The r2tk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Criteria 1-5 reuse the property suites; 6-10 drive the command
// line tool on configs/toy.json exactly as a user would.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "r2tk/config.hpp"
#include "r2tk/synth.hpp"
#include "suites.hpp"

namespace fs = std::filesystem;
using r2tk::testing::SuiteResult;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string part; std::getline(in, part, sep);) out.push_back(part);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

const fs::path kConfig = fs::path(R2TK_CONFIG_DIR) / "toy.json";
const fs::path kWork = fs::path(R2TK_WORK_DIR);

/// One `r2tk` invocation; throws with the tool's stderr on a nonzero exit.
std::string tool(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = r2tk::cli::run(args, out, err);
  if (code != 0) {
    std::string cmd;
    for (const auto& a : args) cmd += a + " ";
    throw std::runtime_error("r2tk " + cmd + "exited " + std::to_string(code) + ": " + err.str());
  }
  return out.str();
}

struct Run {
  fs::path dir;
  double train_accuracy = 0.0;
};

/// Trains on the toy config with the given overrides into kWork/name.
Run train_run(const std::string& name, std::vector<std::string> flags) {
  Run r{kWork / name};
  fs::remove_all(r.dir);
  std::vector<std::string> args = {"train", "--config", kConfig.string(), "--out", r.dir.string()};
  args.insert(args.end(), flags.begin(), flags.end());
  std::istringstream out(tool(args));
  for (std::string key; out >> key;) {
    double v;
    out >> v;
    if (key == "train_accuracy") r.train_accuracy = v;
  }
  return r;
}

std::string seed_flag(int seed) { return std::to_string(seed); }

/// I(X;T) of the deepest layer from `probe-mi` on a finished run.
double deepest_ixt(const Run& run) {
  const fs::path out = run.dir / "probe";
  tool({"probe-mi", "--config", (run.dir / "config.lock.json").string(), "--out", out.string(), "--checkpoint",
        (run.dir / "model.r2tk").string()});
  std::istringstream csv(slurp(out / "mi.csv"));
  std::string line, last;
  std::getline(csv, line);
  while (std::getline(csv, line))
    if (!line.empty()) last = line;
  return std::stod(split(last, ',').at(1));
}

struct Targeting {
  double redundant_share = 0.0;  ///< mean over images with at least one masked patch
  double base_rate = 0.0;        ///< mean over the same images
  std::size_t images = 0;
  std::size_t masked = 0;
};

/// Share of background and duplicate-cue patches among the masked patches.
/// One cue of each image is informative; the remaining cue_count-1 copies
/// and every background patch are redundant.
Targeting mask_targeting(const Run& run) {
  const fs::path out = run.dir / "masks";
  const r2tk::RunConfig c = r2tk::load_run_config(run.dir / "config.lock.json");
  tool({"export-mask", "--config", (run.dir / "config.lock.json").string(), "--out", out.string(),
        "--checkpoint", (run.dir / "model.r2tk").string()});
  const double n = static_cast<double>(c.data.num_patches());
  const double background = n - static_cast<double>(c.data.foreground_count() + c.data.cue_count);
  const double base = (background + static_cast<double>(c.data.cue_count - 1)) / n;

  Targeting t;
  std::istringstream csv(slurp(out / "masks.csv"));
  std::string line;
  std::getline(csv, line);
  double share_sum = 0.0;
  while (std::getline(csv, line)) {
    const auto cols = split(line, ',');
    if (cols.size() != 4 || cols[3].empty()) continue;
    std::size_t bg = 0, cues = 0, total = 0;
    for (const auto& role : split(cols[3], ';')) {
      ++total;
      bg += role == "background";
      cues += role == "cue";
    }
    const std::size_t redundant = bg + std::min(cues, c.data.cue_count - 1);
    share_sum += static_cast<double>(redundant) / static_cast<double>(total);
    t.masked += total;
    ++t.images;
  }
  t.redundant_share = t.images ? share_sum / static_cast<double>(t.images) : 0.0;
  t.base_rate = base;
  return t;
}

Verdict from_suite(const SuiteResult& r, double seconds, double budget) {
  Verdict v;
  v.pass = r.pass && seconds < budget;
  v.detail = std::to_string(r.checks) + " checks, worst error " + fixed(r.worst, 12) +
             (r.pass ? "" : "; first failure: " + r.failure) +
             (seconds < budget ? "" : "; over the " + fixed(budget, 0) + " s budget");
  return v;
}

// Shared between criteria 7 and 8.
const int kSeeds[] = {0, 1, 2};
std::map<int, Run> ib_runs, base_runs;
double ib_seconds = 0.0;

}  // namespace

int main() {
  fs::create_directories(kWork);
  using Clock = std::chrono::steady_clock;
  const std::vector<std::pair<std::string, std::function<Verdict(double&)>>> criteria = {
      {"entropy analytic values",
       [](double& s) {
         const auto t0 = Clock::now();
         const auto r = r2tk::testing::entropy_analytic_suite();
         s = std::chrono::duration<double>(Clock::now() - t0).count();
         return from_suite(r, s, 1.0);
       }},
      {"entropy and MI against brute force",
       [](double& s) {
         const auto t0 = Clock::now();
         const auto r = r2tk::testing::entropy_oracle_suite(20, 2024);
         s = std::chrono::duration<double>(Clock::now() - t0).count();
         return from_suite(r, s, 5.0);
       }},
      {"finite-difference gradients over 5 seeds",
       [](double& s) {
         const auto t0 = Clock::now();
         const auto r = r2tk::testing::gradient_suite(5);
         s = std::chrono::duration<double>(Clock::now() - t0).count();
         return from_suite(r, s, 60.0);
       }},
      {"mask ratio traces and properties",
       [](double& s) {
         const auto t0 = Clock::now();
         auto r = r2tk::testing::bdmm_hand_traces();
         const auto p = r2tk::testing::bdmm_property_suite(200, 99);
         r.checks += p.checks;
         r.worst = std::max(r.worst, p.worst);
         if (r.pass && !p.pass) r.failure = p.failure;
         r.pass = r.pass && p.pass;
         s = std::chrono::duration<double>(Clock::now() - t0).count();
         return from_suite(r, s, 5.0);
       }},
      {"attention fusion properties",
       [](double& s) {
         const auto t0 = Clock::now();
         const auto r = r2tk::testing::fusion_property_suite(100, 11);
         s = std::chrono::duration<double>(Clock::now() - t0).count();
         return from_suite(r, s, 5.0);
       }},
      {"baseline toy training reaches signal",
       [](double& s) {
         const auto t0 = Clock::now();
         const Run r = train_run("c6", {"--beta", "0", "--no-bdmm", "--seed", "0"});
         s = std::chrono::duration<double>(Clock::now() - t0).count();
         const bool ok = r.train_accuracy >= 0.9 && s < 300.0;
         return Verdict{ok, "train accuracy " + fixed(r.train_accuracy) + " (need >= 0.9)"};
       }},
      {"IB lowers deepest-layer I(X;T)",
       [](double& s) {
         const auto t0 = Clock::now();
         double ixt_ib = 0.0, ixt_base = 0.0, acc_ib = 0.0, acc_base = 0.0;
         std::string per_seed;
         for (int seed : kSeeds) {
           ib_runs[seed] = train_run("c7_ib_" + seed_flag(seed), {"--seed", seed_flag(seed), "--beta", "0.005"});
           base_runs[seed] = train_run("c7_base_" + seed_flag(seed), {"--seed", seed_flag(seed), "--beta", "0"});
           const double a = deepest_ixt(ib_runs[seed]), b = deepest_ixt(base_runs[seed]);
           ixt_ib += a / 3.0;
           ixt_base += b / 3.0;
           acc_ib += ib_runs[seed].train_accuracy / 3.0;
           acc_base += base_runs[seed].train_accuracy / 3.0;
           per_seed += " " + fixed(a) + "/" + fixed(b);
         }
         s = ib_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
         const bool ok = ixt_ib < ixt_base && acc_base - acc_ib <= 0.05 && s < 900.0;
         return Verdict{ok, "I(X;T) ib " + fixed(ixt_ib) + " vs baseline " + fixed(ixt_base) +
                                " (per seed ib/base:" + per_seed + "); train accuracy " + fixed(acc_ib) +
                                " vs " + fixed(acc_base)};
       }},
      {"masking targets redundant patches",
       [](double& s) {
         const auto t0 = Clock::now();
         if (ib_runs.size() != 3) return Verdict{false, "criterion 7 runs missing"};
         double share = 0.0, base = 0.0;
         std::string per_seed;
         for (int seed : kSeeds) {
           const Targeting t = mask_targeting(ib_runs[seed]);
           share += t.redundant_share / 3.0;
           base += t.base_rate / 3.0;
           per_seed += " " + fixed(t.redundant_share, 3) + " (" + std::to_string(t.images) + " imgs, " +
                       std::to_string(t.masked) + " masked)";
         }
         s = std::chrono::duration<double>(Clock::now() - t0).count();
         const double margin = share - base;
         const bool ok = margin >= 0.10 && s + ib_seconds < 900.0;
         return Verdict{ok, "redundant share " + fixed(share) + " vs base rate " + fixed(base) + ", margin " +
                                fixed(100.0 * margin, 2) + " points (need >= 10); per seed" + per_seed};
       }},
      {"ablation grid completes deterministically",
       [](double& s) {
         const auto t0 = Clock::now();
         const std::vector<std::pair<std::string, std::vector<std::string>>> cells = {
             {"bdmm_ib", {"--beta", "0.005"}},
             {"bdmm_ce", {"--beta", "0"}},
             {"plain_ib", {"--beta", "0.005", "--no-bdmm"}},
             {"plain_ce", {"--beta", "0", "--no-bdmm"}},
         };
         bool ok = true;
         std::string detail;
         for (const auto& [name, flags] : cells) {
           const Run a = train_run("c9_" + name, flags);
           const Run b = train_run("c9_" + name + "_again", flags);
           const bool same = slurp(a.dir / "metrics.csv") == slurp(b.dir / "metrics.csv") &&
                             slurp(a.dir / "model.r2tk") == slurp(b.dir / "model.r2tk");
           ok = ok && same;
           detail += name + "=" + fixed(a.train_accuracy) + (same ? " " : "(nondeterministic) ");
         }
         s = std::chrono::duration<double>(Clock::now() - t0).count();
         return Verdict{ok, "train accuracy " + detail};
       }},
      {"repeated baseline run is byte-identical",
       [](double& s) {
         const auto t0 = Clock::now();
         const Run a = fs::exists(kWork / "c6" / "metrics.csv")
                           ? Run{kWork / "c6"}
                           : train_run("c6", {"--beta", "0", "--no-bdmm", "--seed", "0"});
         const Run b = train_run("c10", {"--beta", "0", "--no-bdmm", "--seed", "0"});
         s = std::chrono::duration<double>(Clock::now() - t0).count();
         const std::string ma = slurp(a.dir / "metrics.csv"), mb = slurp(b.dir / "metrics.csv");
         const bool ok = !ma.empty() && ma == mb;
         return Verdict{ok, "metrics.csv " + std::to_string(ma.size()) + " bytes, " + (ok ? "identical" : "differs")};
       }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    double seconds = 0.0;
    Verdict v;
    try {
      v = criteria[i].second(seconds);
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("%s criterion %zu: %s (%.2f s) -- %s\n", v.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), seconds, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
