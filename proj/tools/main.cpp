// oblsamp CLI: dataset generation, oblivious shuffling and sampling over the
// simulated external-memory model, DP budget arithmetic and the access-trace
// audits. Exit codes: 0 pass, 1 exact-property failure, 2 statistical
// failure, 3 configuration error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "oblsamp/accounting.hpp"
#include "oblsamp/audit.hpp"
#include "oblsamp/dataset.hpp"
#include "oblsamp/errors.hpp"
#include "oblsamp/sampling.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace oblsamp;

namespace {

Seed seed_from_option(const std::string& hex, bool secret_default) {
  if (!hex.empty()) return Seed::from_hex(hex);
  if (secret_default) return Seed::os_random();
  // Audits default to a fixed seed so reports reproduce run to run.
  return Seed::from_bytes(Bytes{'o', 'b', 'l', 's', 'a', 'm', 'p'});
}

std::vector<std::uint64_t> parse_u64_csv(const std::string& csv, const char* what) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": bad number '" + tok + "'");
    }
  }
  if (out.empty()) {
    throw ConfigError(std::string(what) + ": empty list");
  }
  return out;
}

void write_blob_file(const fs::path& path, std::span<const Ciphertext> slots,
                     std::uint64_t begin, std::uint64_t end) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path.string());
  for (std::uint64_t i = begin; i < end; ++i) {
    out.write(reinterpret_cast<const char*>(slots[i].bytes.data()),
              static_cast<std::streamsize>(slots[i].bytes.size()));
  }
  if (!out) throw ConfigError("failed writing file: " + path.string());
}

void dump_json_or_text(const json& j, bool as_json) {
  if (as_json) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  for (const auto& [k, v] : j.items()) {
    std::cout << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  }
}

struct CommonRunFlags {
  std::string seed_hex;
  std::string trace_file;
  unsigned c = 2;
  double padding = 2.0;
  std::size_t capacity = 0;
  bool as_json = false;
};

void add_shuffle_flags(CLI::App* cmd, CommonRunFlags& f) {
  cmd->add_option("--c", f.c, "shuffle pass count parameter (2 supported)");
  cmd->add_option("--padding", f.padding, "bucket padding factor (> 1)");
  cmd->add_option("--capacity", f.capacity, "private memory capacity in element slots");
  cmd->add_option("--trace", f.trace_file, "write the access trace to this file");
  cmd->add_flag("--json", f.as_json, "machine-readable output");
}

json shuffle_summary(const ShuffleOutcome& o) {
  return json{{"attempts", o.attempts},
              {"retries", o.retries},
              {"trace_records", o.trace_records}};
}

int cmd_gen_data(std::uint64_t n, std::uint32_t record_size, const std::string& seed_hex,
                 const std::string& out_path) {
  Seed seed = seed_from_option(seed_hex, true);
  Dataset d = make_dataset(n, record_size, seed);
  save_dataset(d, out_path);
  std::cout << "wrote " << out_path << " (n=" << n << ", record_size=" << record_size
            << ")\n";
  return 0;
}

int cmd_shuffle(std::uint64_t n, const std::string& input, std::uint64_t m,
                const std::string& out_dir, const CommonRunFlags& f) {
  Seed master = seed_from_option(f.seed_hex, true);
  Dataset data = input.empty() ? make_dataset(n, 16, derive_seed(master, "data"))
                               : load_dataset(input);
  ShuffleConfig cfg;
  cfg.n = data.n;
  cfg.c = f.c;
  cfg.padding = f.padding;
  cfg.private_capacity = f.capacity;
  cfg.validate();

  SecretKey key = SecretKey::derive(master, "enc");
  RunSeeds rs = RunSeeds::derive(master);
  ExternalMemory mem;
  RegionId region = ingest_dataset(mem, data, key);
  PrivateMemory pm(cfg.capacity());
  SecretPermutation pi(rs.pi1, data.n);
  SeededRng rng(rs.shuffle);
  mem.begin_phase("shuffle");
  ShuffleOutcome o = oblivious_shuffle(mem, region, pi, cfg, key, rng, pm);
  mem.end_phase();

  // The shuffle-based sampling baseline: split the shuffled array into k
  // consecutive batches of size m. The batch boundaries are public, which is
  // exactly what costs this method its amplification benefit.
  if (!out_dir.empty()) {
    if (m == 0 || data.n % m != 0) {
      throw ConfigError("shuffle batching needs --m dividing n");
    }
    fs::create_directories(out_dir);
    std::span<const Ciphertext> slots = mem.slots(region);
    const std::uint64_t k = data.n / m;
    for (std::uint64_t i = 0; i < k; ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "batch_%04llu.bin",
                    static_cast<unsigned long long>(i + 1));
      write_blob_file(fs::path(out_dir) / name, slots, i * m, (i + 1) * m);
    }
    json manifest{{"n", data.n},
                  {"m", m},
                  {"k", k},
                  {"record_size", data.record_size},
                  {"slot_bytes", record_ct_size(data.record_size)}};
    std::ofstream(fs::path(out_dir) / "manifest.json") << manifest.dump(2) << "\n";
  }

  if (!f.trace_file.empty()) write_trace_file(mem.trace(), f.trace_file);
  json j = shuffle_summary(o);
  j["n"] = data.n;
  j["predicted_cost"] = access_cost(data.n, cfg);
  j["private_peak"] = pm.peak();
  dump_json_or_text(j, f.as_json);
  return 0;
}

int cmd_swo(const std::string& input, std::uint64_t m, const std::string& sizes_csv,
            const std::string& out_dir, const CommonRunFlags& f) {
  Seed master = seed_from_option(f.seed_hex, true);
  Dataset data = load_dataset(input);
  ShuffleConfig cfg;
  cfg.n = data.n;
  cfg.c = f.c;
  cfg.padding = f.padding;
  cfg.private_capacity = f.capacity;
  cfg.validate();

  SecretKey key = SecretKey::derive(master, "enc");
  RunSeeds rs = RunSeeds::derive(master);
  ExternalMemory mem;
  RegionId dataset = ingest_dataset(mem, data, key);

  std::optional<SwoTemplate> tmpl;
  if (!sizes_csv.empty()) {
    tmpl.emplace(data.n, parse_u64_csv(sizes_csv, "--sizes"), rs.tmpl);
  } else {
    tmpl.emplace(data.n, m, rs.tmpl);
  }
  SecretPermutation pi1(rs.pi1, data.n), pi2(rs.pi2, data.n);
  SeededRng rng(rs.shuffle);
  SwoRun run = samples_swo(mem, dataset, *tmpl, pi1, pi2, cfg, key, rng);

  fs::create_directories(out_dir);
  std::span<const Ciphertext> slots = mem.slots(run.output);
  std::uint64_t off = 0;
  for (std::size_t i = 0; i < run.segment_sizes.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%04zu.bin", i + 1);
    write_blob_file(fs::path(out_dir) / name, slots, off, off + run.segment_sizes[i]);
    off += run.segment_sizes[i];
  }
  json manifest{{"n", data.n},
                {"m", sizes_csv.empty() ? m : 0},
                {"k", run.segment_sizes.size()},
                {"record_size", data.record_size},
                {"slot_bytes", record_ct_size(data.record_size)}};
  if (!sizes_csv.empty()) manifest["sizes"] = run.segment_sizes;
  std::ofstream(fs::path(out_dir) / "manifest.json") << manifest.dump(2) << "\n";

  if (!f.trace_file.empty()) write_trace_file(mem.trace(), f.trace_file);
  json j{{"n", data.n},
         {"k", run.segment_sizes.size()},
         {"out", out_dir},
         {"shuffle1", shuffle_summary(run.shuffle1)},
         {"shuffle2", shuffle_summary(run.shuffle2)},
         {"private_peak", run.private_peak}};
  dump_json_or_text(j, f.as_json);
  return 0;
}

int cmd_poisson(const std::string& input, double gamma, std::uint64_t k,
                const std::string& out_dir, bool reveal_boundaries,
                const CommonRunFlags& f) {
  Seed master = seed_from_option(f.seed_hex, true);
  Dataset data = load_dataset(input);
  ShuffleConfig cfg;
  cfg.n = data.n;
  cfg.c = f.c;
  cfg.padding = f.padding;
  cfg.private_capacity = f.capacity;
  cfg.validate();

  SecretKey key = SecretKey::derive(master, "enc");
  RunSeeds rs = RunSeeds::derive(master);
  ExternalMemory mem;
  RegionId dataset = ingest_dataset(mem, data, key);
  PoissonTemplate tmpl(data.n, gamma, k, rs.tmpl);
  SecretPermutation pi1(rs.pi1, data.n), pi2(rs.pi2, data.n);
  SeededRng rng(rs.shuffle);
  PoissonRun run = samples_poisson(mem, dataset, tmpl, pi1, pi2, cfg, key, rng);

  fs::create_directories(out_dir);
  std::span<const Ciphertext> slots = mem.slots(run.output);
  write_blob_file(fs::path(out_dir) / "samples.bin", slots, 0, slots.size());
  json manifest{{"n", data.n},
                {"gamma", gamma},
                {"k", k},
                {"record_size", data.record_size},
                {"slot_bytes", SlotLayout{data.record_size, 1}.slot_bytes()}};
  std::ofstream(fs::path(out_dir) / "manifest.json") << manifest.dump(2) << "\n";
  if (reveal_boundaries) {
    // Testing escape hatch: boundaries are the secret the algorithm hides.
    json meta{{"k_prime", run.meta.k_prime},
              {"cursize", run.meta.cursize},
              {"sizes", run.meta.sizes}};
    std::ofstream(fs::path(out_dir) / "private_meta.json") << meta.dump(2) << "\n";
  }

  if (!f.trace_file.empty()) write_trace_file(mem.trace(), f.trace_file);
  json j{{"n", data.n},
         {"out", out_dir},
         {"shuffle1", shuffle_summary(run.shuffle1)},
         {"shuffle2", shuffle_summary(run.shuffle2)},
         {"private_peak", run.private_peak}};
  dump_json_or_text(j, f.as_json);
  return 0;
}

int cmd_budget(const std::string& mechanism, double eps, double delta, std::uint64_t n,
               std::uint64_t m, double gamma, std::uint64_t T, std::uint64_t E,
               double delta2, bool as_json) {
  SamplingSpec spec;
  if (mechanism == "shuffle") {
    spec.kind = SamplingKind::Shuffle;
  } else if (mechanism == "swo") {
    spec.kind = SamplingKind::Swo;
  } else if (mechanism == "poisson") {
    spec.kind = SamplingKind::Poisson;
  } else {
    throw ConfigError("mechanism must be shuffle, swo or poisson");
  }
  spec.n = n;
  spec.m = m;
  spec.gamma = gamma;
  spec.T = T;
  spec.E = E;
  spec.delta2 = delta2;
  EpochBudget b = epoch_budget(spec, eps, delta);

  char eps_total[64], delta_total[64], eps_amp[64];
  std::snprintf(eps_total, sizeof(eps_total), "%.6g", b.total.epsilon);
  std::snprintf(delta_total, sizeof(delta_total), "%.6g", b.total.delta);
  std::snprintf(eps_amp, sizeof(eps_amp), "%.6g", b.amplified_epsilon);
  if (as_json) {
    json j{{"epsilon_total", b.total.epsilon},
           {"delta_total", b.total.delta},
           {"epsilon_amplified", b.amplified_epsilon}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "epsilon_total = " << eps_total << "\n"
              << "delta_total = " << delta_total << "\n"
              << "epsilon_amplified = " << eps_amp << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-oblivious sampling over a simulated TEE external memory"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a plaintext dataset file");
  std::uint64_t gen_n = 0;
  std::uint32_t gen_record = 16;
  std::string gen_seed, gen_out;
  gen->add_option("--n", gen_n, "number of elements")->required();
  gen->add_option("--record-size", gen_record, "payload bytes per element");
  gen->add_option("--seed", gen_seed, "hex seed (default: OS randomness)");
  gen->add_option("--out", gen_out, "output file")->required();

  // shuffle
  auto* shf = app.add_subcommand("shuffle", "oblivious shuffle of a dataset");
  std::uint64_t shf_n = 0, shf_m = 0;
  std::string shf_input, shf_out;
  CommonRunFlags shf_flags;
  shf->add_option("--n", shf_n, "synthesize a dataset of this size");
  shf->add_option("--input", shf_input, "dataset file (alternative to --n)");
  shf->add_option("--m", shf_m, "batch size for the shuffle-sampling baseline");
  shf->add_option("--out", shf_out, "write k = n/m batch files to this directory");
  shf->add_option("--seed", shf_flags.seed_hex, "hex master seed");
  add_shuffle_flags(shf, shf_flags);

  // swo
  auto* swo = app.add_subcommand("swo", "oblivious sampling without replacement");
  std::string swo_input, swo_sizes, swo_out;
  std::uint64_t swo_m = 0;
  CommonRunFlags swo_flags;
  swo->add_option("--input", swo_input, "dataset file")->required();
  swo->add_option("--m", swo_m, "sample size (m divides n)");
  swo->add_option("--sizes", swo_sizes, "comma-separated variable sample sizes");
  swo->add_option("--seed", swo_flags.seed_hex, "hex master seed");
  swo->add_option("--out", swo_out, "output directory")->required();
  add_shuffle_flags(swo, swo_flags);

  // poisson
  auto* poi = app.add_subcommand("poisson", "oblivious Poisson sampling");
  std::string poi_input, poi_out;
  double poi_gamma = 0;
  std::uint64_t poi_k = 0;
  bool poi_reveal = false;
  CommonRunFlags poi_flags;
  poi->add_option("--input", poi_input, "dataset file")->required();
  poi->add_option("--gamma", poi_gamma, "per-key inclusion probability")->required();
  poi->add_option("--k", poi_k, "number of samples drawn")->required();
  poi->add_option("--seed", poi_flags.seed_hex, "hex master seed");
  poi->add_option("--out", poi_out, "output directory")->required();
  poi->add_flag("--unsafe-reveal-boundaries", poi_reveal,
                "also write the private boundary metadata (testing only)");
  add_shuffle_flags(poi, poi_flags);

  // budget
  auto* bud = app.add_subcommand("budget", "privacy budget of a sampled mechanism");
  std::string bud_mech;
  double bud_eps = 0, bud_delta = 0, bud_gamma = 0, bud_delta2 = 0;
  std::uint64_t bud_n = 0, bud_m = 0, bud_T = 1, bud_E = 1;
  bool bud_json = false;
  bud->add_option("--mechanism", bud_mech, "shuffle | swo | poisson")->required();
  bud->add_option("--eps", bud_eps, "per-step epsilon")->required();
  bud->add_option("--delta", bud_delta, "per-step delta")->required();
  bud->add_option("--n", bud_n, "dataset size");
  bud->add_option("--m", bud_m, "sample size");
  bud->add_option("--gamma", bud_gamma, "poisson rate");
  bud->add_option("--T", bud_T, "mechanism invocations per epoch");
  bud->add_option("--E", bud_E, "epochs");
  bud->add_option("--delta2", bud_delta2, "composition slack delta''");
  bud->add_flag("--json", bud_json, "machine-readable output");

  // audit
  auto* aud = app.add_subcommand("audit", "obliviousness and distribution audits");
  aud->require_subcommand(1);
  RunConfig rc;
  std::string aud_seed, aud_policy = "varied-data", aud_nlist;
  bool aud_json = false;
  auto add_audit_flags = [&](CLI::App* cmd) {
    cmd->add_option("--algorithm", rc.algorithm, "swo | poisson | shuffle");
    cmd->add_option("--n", rc.n, "dataset size");
    cmd->add_option("--m", rc.m, "swo sample size");
    cmd->add_option("--gamma", rc.gamma, "poisson rate");
    cmd->add_option("--k", rc.k, "poisson sample count");
    cmd->add_option("--c", rc.c, "shuffle pass count parameter");
    cmd->add_option("--padding", rc.padding, "bucket padding factor");
    cmd->add_option("--capacity", rc.private_capacity, "private capacity");
    cmd->add_option("--record-size", rc.record_size, "payload bytes");
    cmd->add_option("--runs", rc.runs, "number of runs");
    cmd->add_option("--seed", aud_seed, "hex master seed (default: fixed)");
    cmd->add_option("--seed-policy", aud_policy, "fixed-data | varied-data");
    cmd->add_option("--trace", rc.trace_file, "write the first run's trace to this file");
    cmd->add_flag("--json", aud_json, "machine-readable report");
  };
  auto* aud_trace = aud->add_subcommand("trace", "trace byte-equality across runs");
  add_audit_flags(aud_trace);
  auto* aud_reveal = aud->add_subcommand("reveal", "revealed-value exactness and uniformity");
  add_audit_flags(aud_reveal);
  auto* aud_dist = aud->add_subcommand("dist", "sample distribution tests (small n)");
  add_audit_flags(aud_dist);
  auto* aud_cost = aud->add_subcommand("cost", "linear access-cost scaling");
  add_audit_flags(aud_cost);
  aud_cost->add_option("--n-list", aud_nlist, "comma-separated sizes (default 4096,16384,65536)");

  try {
    app.parse(argc, argv);

    if (gen->parsed()) return cmd_gen_data(gen_n, gen_record, gen_seed, gen_out);
    if (shf->parsed()) {
      if (shf_n == 0 && shf_input.empty()) {
        throw ConfigError("shuffle needs --n or --input");
      }
      return cmd_shuffle(shf_n, shf_input, shf_m, shf_out, shf_flags);
    }
    if (swo->parsed()) {
      if (swo_m == 0 && swo_sizes.empty()) {
        throw ConfigError("swo needs --m or --sizes");
      }
      return cmd_swo(swo_input, swo_m, swo_sizes, swo_out, swo_flags);
    }
    if (poi->parsed()) {
      return cmd_poisson(poi_input, poi_gamma, poi_k, poi_out, poi_reveal, poi_flags);
    }
    if (bud->parsed()) {
      return cmd_budget(bud_mech, bud_eps, bud_delta, bud_n, bud_m, bud_gamma, bud_T,
                        bud_E, bud_delta2, bud_json);
    }
    if (aud->parsed()) {
      rc.master = seed_from_option(aud_seed, false);
      if (aud_policy == "fixed-data") {
        rc.policy = SeedPolicy::FixedDataVariedSecret;
      } else if (aud_policy == "varied-data") {
        rc.policy = SeedPolicy::VariedDataVariedSecret;
      } else {
        throw ConfigError("seed policy must be fixed-data or varied-data");
      }
      AuditReport report;
      if (aud_trace->parsed()) {
        report = audit_trace_invariance(rc);
      } else if (aud_reveal->parsed()) {
        report = audit_revealed_values(rc);
      } else if (aud_dist->parsed()) {
        report = audit_distribution(rc);
      } else {
        std::vector<std::uint64_t> sizes =
            aud_nlist.empty() ? std::vector<std::uint64_t>{4096, 16384, 65536}
                              : parse_u64_csv(aud_nlist, "--n-list");
        report = audit_cost(rc, sizes);
      }
      std::cout << (aud_json ? report.to_json() : report.to_text()) << "\n";
      return report.exit_code();
    }
    throw ConfigError("no subcommand");
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 3;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
