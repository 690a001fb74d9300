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

#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>

#include "CLI11.hpp"
#include "r2tk/checkpoint.hpp"
#include "r2tk/config.hpp"
#include "r2tk/dataset_io.hpp"
#include "r2tk/errors.hpp"
#include "r2tk/synth.hpp"
#include "r2tk/trainer.hpp"

namespace r2tk::cli {
namespace {

namespace fs = std::filesystem;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> beta;
  std::optional<double> lambda;
  std::optional<std::size_t> batch_size;
  bool no_bdmm = false;
  std::optional<double> fixed_ratio;
  std::optional<std::string> out;
  std::optional<std::string> data;
  std::optional<std::string> checkpoint;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--seed", o.seed, "training seed");
  cmd->add_option("--beta", o.beta, "IB weight (0 disables the entropy term)");
  cmd->add_option("--lambda", o.lambda, "BDMM threshold multiplier");
  cmd->add_option("--batch-size", o.batch_size, "training batch size");
  cmd->add_flag("--no-bdmm", o.no_bdmm, "single-pass training without masking");
  cmd->add_option("--fixed-ratio", o.fixed_ratio, "constant mask ratio instead of BDMM");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--data", o.data, "dataset directory written by gen-data");
  cmd->add_option("--checkpoint", o.checkpoint, "model checkpoint path");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (o.seed) c.train.seed = *o.seed;
  if (o.beta) c.train.ib.beta = *o.beta;
  if (o.lambda) c.train.bdmm.lambda = *o.lambda;
  if (o.batch_size) c.train.batch_size = *o.batch_size;
  if (o.no_bdmm) c.train.bdmm_enabled = false;
  if (o.fixed_ratio) c.train.fixed_ratio = *o.fixed_ratio;
  if (o.out) c.paths.out_dir = *o.out;
  if (o.data) c.paths.data_dir = *o.data;
  if (o.checkpoint) c.paths.checkpoint = *o.checkpoint;
  c.validate();
  return c;
}

/// Loads the dataset named by the config, or generates it in memory.
Dataset load_data(RunConfig& c) {
  if (c.paths.data_dir.empty()) return generate(c.data);
  LoadedDataset loaded = read_dataset(c.paths.data_dir);
  c.data = loaded.spec;
  c.validate();
  return std::move(loaded.dataset);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_lock(const RunConfig& c) {
  ensure_dir(c.paths.out_dir);
  open_out(fs::path(c.paths.out_dir) / "config.lock.json") << run_config_to_json(c);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

Params load_model(const RunConfig& c) {
  Params p = load_checkpoint(c.checkpoint_path());
  if (!params_match_config(p, c.model)) {
    throw ConfigError("checkpoint " + c.checkpoint_path().string() +
                      " does not match the model section of the config");
  }
  return p;
}

std::span<const Sample> eval_set(const Dataset& d, std::size_t limit) {
  std::span<const Sample> s(d.test);
  return s.subspan(0, std::min(limit, s.size()));
}

int cmd_gen_data(RunConfig c, std::ostream& out) {
  const Dataset d = generate(c.data);
  write_dataset(c.paths.out_dir, c.data, d);
  out << "wrote " << d.train.size() + d.test.size() << " images to " << c.paths.out_dir << "\n";
  return kExitOk;
}

int cmd_train(RunConfig c, std::ostream& out) {
  const Dataset d = load_data(c);
  // Pin the checkpoint location so later commands can run from the lock alone.
  c.paths.checkpoint = c.checkpoint_path().string();
  write_lock(c);
  std::ofstream metrics = open_out(fs::path(c.paths.out_dir) / "metrics.csv");
  metrics << kStepCsvHeader << "\n";
  TrainResult r = train(c.model, c.train, d.train,
                        [&](const StepReport& s) { metrics << to_csv_row(s) << "\n"; });
  metrics.close();
  if (!metrics) throw IoError("cannot write metrics.csv");
  ensure_dir(c.checkpoint_path().parent_path().empty() ? fs::path(".")
                                                        : c.checkpoint_path().parent_path());
  save_checkpoint(r.params, c.checkpoint_path());
  out << "train_accuracy " << fmt(accuracy(d.train, r.params, c.model)) << "\n"
      << "test_accuracy " << fmt(accuracy(d.test, r.params, c.model)) << "\n";
  return kExitOk;
}

int cmd_eval(RunConfig c, std::ostream& out) {
  const Dataset d = load_data(c);
  const Params p = load_model(c);
  write_lock(c);
  std::ostringstream csv;
  csv << "split,count,accuracy\n"
      << "train," << d.train.size() << "," << fmt(accuracy(d.train, p, c.model)) << "\n"
      << "test," << d.test.size() << "," << fmt(accuracy(d.test, p, c.model)) << "\n";
  open_out(fs::path(c.paths.out_dir) / "eval.csv") << csv.str();
  out << csv.str();
  return kExitOk;
}

int cmd_probe_mi(RunConfig c, std::ostream& out) {
  const Dataset d = load_data(c);
  const Params p = load_model(c);
  const auto batch = eval_set(d, c.train.eval_batch);
  const auto rows = probe_mi(batch, p, c.model, c.train.ib, c.train.probe_input);
  write_lock(c);
  std::ofstream f = open_out(fs::path(c.paths.out_dir) / "mi.csv");
  f << "layer,I_XT,I_TY\n";
  for (const LayerInformation& r : rows) f << r.layer << "," << fmt(r.i_xt) << "," << fmt(r.i_ty) << "\n";
  out << "probed " << rows.size() << " layers on " << batch.size() << " samples\n";
  return kExitOk;
}

std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? ";" : "") + parts[i];
  return s;
}

int cmd_export_mask(RunConfig c, std::ostream& out) {
  const Dataset d = load_data(c);
  const Params p = load_model(c);
  const auto records = export_masks(d.test, p, c.model, c.train, c.train.batch_size);
  write_lock(c);
  std::ofstream f = open_out(fs::path(c.paths.out_dir) / "masks.csv");
  f << "image_id,r_batch,masked_indices,role_of_each_masked_patch\n";
  for (const MaskRecord& r : records) {
    std::vector<std::string> idx, roles;
    for (std::size_t k : r.masked) idx.push_back(std::to_string(k));
    for (PatchRole role : r.masked_roles) roles.push_back(to_string(role));
    f << r.image_id << "," << fmt(r.r_batch) << "," << join(idx) << "," << join(roles) << "\n";
  }
  out << "exported masks for " << records.size() << " images\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"r2tk: redundancy-reduction ViT toolkit"};
  app.require_subcommand(1);
  Overrides o;
  struct Entry {
    CLI::App* cmd;
    int (*fn)(RunConfig, std::ostream&);
  };
  const std::vector<Entry> entries = {
      {app.add_subcommand("gen-data", "write the synthetic dataset to --out"), cmd_gen_data},
      {app.add_subcommand("train", "train and write checkpoint + metrics.csv"), cmd_train},
      {app.add_subcommand("eval", "accuracy of a checkpoint on both splits"), cmd_eval},
      {app.add_subcommand("probe-mi", "per-layer I(X;T) and I(T;Y) to mi.csv"), cmd_probe_mi},
      {app.add_subcommand("export-mask", "BDMM masks of the test split to masks.csv"),
       cmd_export_mask},
  };
  for (const Entry& e : entries) add_common(e.cmd, o);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o_msg, e_msg;
    const int code = app.exit(e, o_msg, e_msg);
    out << o_msg.str();
    err << e_msg.str();
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    for (const Entry& e : entries) {
      if (e.cmd->parsed()) return e.fn(resolve(o), out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DimensionError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const FormatError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitConfig;
}

}  // namespace r2tk::cli
