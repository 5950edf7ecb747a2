#include <doctest.h>

#include <map>
#include <set>

#include "oblsamp/errors.hpp"
#include "oblsamp/sampling.hpp"
#include "support.hpp"

using namespace oblsamp;
using namespace oblsamp::test;

namespace {
const Seed kSeed = Seed::from_bytes(Bytes{'s', 'm', 'p'});

struct Tuple {
  std::uint64_t key = 0;
  Bytes payload;
  std::uint64_t id = 0;
  std::uint64_t pos = 0;
  bool real = false;
};

std::vector<Tuple> decrypt_tuples(const ExternalMemory& mem, RegionId region,
                                  const SecretKey& key) {
  const SlotLayout& layout = mem.layout(region);
  std::vector<Tuple> out;
  for (const Ciphertext& slot : mem.slots(region)) {
    auto parts = layout.split(slot);
    Record r = decrypt_record(parts[0], key, layout.payload_len);
    AuxRecord a = decrypt_aux(parts[1], key);
    out.push_back({r.key, r.payload, a.a, a.b, r.real});
  }
  return out;
}

// The Example setup: D = (1,A)..(6,F), m=2, template samples {1,4},{1,2},{1,5},
// post-shuffle order (4,D),(1,A),(5,E),(3,C),(6,F),(2,B).
struct WorkedExample {
  TestRig rig;
  FixedSwoTemplate tmpl{6, {{1, 4}, {1, 2}, {1, 5}}};
  SecretPermutation pi1 = SecretPermutation::from_image({1, 5, 3, 0, 2, 4});
};

WorkedExample make_worked_example() {
  WorkedExample ex{TestRig{}};
  ex.rig.key = SecretKey::derive(kSeed, "enc");
  Dataset d;
  d.n = 6;
  d.record_size = 1;
  for (std::uint64_t j = 1; j <= 6; ++j) {
    d.elements.push_back({true, j, Bytes{static_cast<std::uint8_t>('A' + j - 1)}});
  }
  ex.rig.data = d;
  ex.rig.dataset = ingest_dataset(ex.rig.mem, d, ex.rig.key);
  return ex;
}
}  // namespace

TEST_CASE("worked example: shuffle order, then the exact replication stream") {
  WorkedExample ex = make_worked_example();
  ShuffleConfig cfg = ShuffleConfig::for_n(6);
  PrivateMemory pm(cfg.capacity());
  SeededRng rng(kSeed);
  oblivious_shuffle(ex.rig.mem, ex.rig.dataset, ex.pi1, cfg, ex.rig.key, rng, pm);

  std::vector<std::uint64_t> shuffled_keys;
  for (const Ciphertext& c : ex.rig.mem.slots(ex.rig.dataset)) {
    shuffled_keys.push_back(decrypt_record(c, ex.rig.key, 1).key);
  }
  CHECK(shuffled_keys == std::vector<std::uint64_t>{4, 1, 5, 3, 6, 2});

  RegionId scratch = ex.rig.mem.add_region("scratch", 6, {1, 1});
  std::size_t scan_begin = ex.rig.mem.trace().size();
  replication_scan(ex.rig.mem, ex.rig.dataset, scratch, ex.tmpl, ex.rig.key, pm);
  CHECK(ex.rig.mem.trace().size() - scan_begin == 2 * 6 + 2);

  auto stream = decrypt_tuples(ex.rig.mem, scratch, ex.rig.key);
  const std::vector<std::pair<std::uint64_t, std::uint64_t>> expected = {
      {4, 1}, {4, 2}, {4, 3}, {3, 2}, {6, 1}, {2, 3}};
  REQUIRE(stream.size() == 6);
  for (std::size_t t = 0; t < 6; ++t) {
    CHECK(stream[t].key == expected[t].first);
    CHECK(stream[t].id == expected[t].second);
    CHECK(stream[t].payload ==
          Bytes{static_cast<std::uint8_t>('A' + expected[t].first - 1)});
  }
}

TEST_CASE("scan trace: two initial reads then write/read pairs, capped indices") {
  WorkedExample ex = make_worked_example();
  ShuffleConfig cfg = ShuffleConfig::for_n(6);
  PrivateMemory pm(cfg.capacity());
  SeededRng rng(kSeed);
  oblivious_shuffle(ex.rig.mem, ex.rig.dataset, ex.pi1, cfg, ex.rig.key, rng, pm);
  RegionId scratch = ex.rig.mem.add_region("scratch", 6, {1, 1});
  std::size_t begin = ex.rig.mem.trace().size();
  replication_scan(ex.rig.mem, ex.rig.dataset, scratch, ex.tmpl, ex.rig.key, pm);

  const AccessTrace& tr = ex.rig.mem.trace();
  CHECK(tr.record_text(begin) == "dataset\tread\t0");
  CHECK(tr.record_text(begin + 1) == "dataset\tread\t0");
  std::uint64_t prev_read = 0;
  for (std::size_t t = 0; t < 6; ++t) {
    const TraceRecord& w = tr.records()[begin + 2 + 2 * t];
    const TraceRecord& r = tr.records()[begin + 2 + 2 * t + 1];
    CHECK(w.op == MemOp::Write);
    CHECK(w.index == t);
    CHECK(r.op == MemOp::Read);
    CHECK(r.index == std::min<std::uint64_t>(t + 1, 5));
    CHECK(r.index >= prev_read);
    prev_read = r.index;
  }
}

TEST_CASE("scan trace is template-independent byte for byte") {
  std::vector<std::string> texts;
  for (int s = 0; s < 6; ++s) {
    TestRig rig = make_rig(12, 4, derive_seed(kSeed, "scantpl", s));
    SwoTemplate tmpl(12, 3, derive_seed(kSeed, "tpl", s));
    ShuffleConfig cfg = ShuffleConfig::for_n(12);
    PrivateMemory pm(cfg.capacity());
    SeededRng rng(derive_seed(kSeed, "rng", s));
    oblivious_shuffle(rig.mem, rig.dataset, SecretPermutation(derive_seed(kSeed, "pi", s), 12),
                      cfg, rig.key, rng, pm);
    RegionId scratch = rig.mem.add_region("scratch", 12, {4, 1});
    std::size_t begin = rig.mem.trace().size();
    replication_scan(rig.mem, rig.dataset, scratch, tmpl, rig.key, pm);
    texts.push_back(rig.mem.trace().to_text(begin, rig.mem.trace().size()));
  }
  for (const auto& t : texts) CHECK(t == texts[0]);
}

TEST_CASE("samples_swo end to end: n=m yields one sample holding everything") {
  TestRig rig = make_rig(8, 4, kSeed);
  SwoTemplate tmpl(8, 8, derive_seed(kSeed, "t"));
  ShuffleConfig cfg = ShuffleConfig::for_n(8);
  SeededRng rng(kSeed);
  SwoRun run = samples_swo(rig.mem, rig.dataset, tmpl,
                           SecretPermutation(derive_seed(kSeed, "p1"), 8),
                           SecretPermutation(derive_seed(kSeed, "p2"), 8), cfg, rig.key,
                           rng);
  for (std::uint64_t id : run.revealed_ids) CHECK(id == 1);
  auto samples = open_swo_samples(rig.mem, run.output, run.segment_sizes, rig.key);
  REQUIRE(samples.size() == 1);
  std::set<std::uint64_t> keys;
  for (const Record& r : samples[0]) keys.insert(r.key);
  CHECK(keys.size() == 8);
}

TEST_CASE("samples_swo: each id appears exactly m times and samples have distinct keys") {
  TestRig rig = make_rig(12, 4, kSeed);
  SwoTemplate tmpl(12, 4, derive_seed(kSeed, "t12"));
  ShuffleConfig cfg = ShuffleConfig::for_n(12);
  SeededRng rng(kSeed);
  SwoRun run = samples_swo(rig.mem, rig.dataset, tmpl,
                           SecretPermutation(derive_seed(kSeed, "p1"), 12),
                           SecretPermutation(derive_seed(kSeed, "p2"), 12), cfg, rig.key,
                           rng);
  std::map<std::uint64_t, std::uint64_t> id_counts;
  for (std::uint64_t id : run.revealed_ids) ++id_counts[id];
  REQUIRE(id_counts.size() == 3);
  for (auto& [id, count] : id_counts) CHECK(count == 4);

  auto samples = open_swo_samples(rig.mem, run.output, run.segment_sizes, rig.key);
  for (const auto& sample : samples) {
    std::set<std::uint64_t> keys;
    for (const Record& r : sample) {
      CHECK(r.key >= 1);
      CHECK(r.key <= 12);
      CHECK(keys.insert(r.key).second);  // pairwise distinct
    }
  }
}

TEST_CASE("samples_swo: output equals template samples through the mapping m(.)") {
  for (int s = 0; s < 20; ++s) {
    TestRig rig = make_rig(12, 4, derive_seed(kSeed, "oracle", s));
    SwoTemplate tmpl(12, 3, derive_seed(kSeed, "otpl", s));
    ShuffleConfig cfg = ShuffleConfig::for_n(12);
    SeededRng rng(derive_seed(kSeed, "orng", s));
    SamplesOptions opts;
    opts.want_transcript = true;
    SwoRun run = samples_swo(rig.mem, rig.dataset, tmpl,
                             SecretPermutation(derive_seed(kSeed, "op1", s), 12),
                             SecretPermutation(derive_seed(kSeed, "op2", s), 12), cfg,
                             rig.key, rng, opts);
    REQUIRE(run.transcript.has_value());
    auto samples = open_swo_samples(rig.mem, run.output, run.segment_sizes, rig.key);
    std::set<std::uint64_t> image;  // injectivity of the realized substitution
    for (std::uint64_t i = 1; i <= tmpl.k(); ++i) {
      std::set<std::uint64_t> expected;
      for (std::uint64_t j = 1; j <= 12; ++j) {
        if (tmpl.contains(i, j)) {
          std::uint64_t mk = mapped_key(run.transcript->pi1, run.transcript->replication, j);
          expected.insert(mk);
          image.insert(mk);
        }
      }
      std::set<std::uint64_t> got;
      for (const Record& r : samples[i - 1]) got.insert(r.key);
      CHECK(got == expected);
    }
    std::uint64_t keys_with_replicas = 0;
    for (std::uint64_t v : run.transcript->replication) keys_with_replicas += v > 0;
    CHECK(image.size() == keys_with_replicas);  // injective mapping
  }
}

TEST_CASE("samples_swo: variable-size samples split n accordingly") {
  TestRig rig = make_rig(6, 4, kSeed);
  SwoTemplate tmpl(6, std::vector<std::uint64_t>{1, 2, 3}, derive_seed(kSeed, "var"));
  ShuffleConfig cfg = ShuffleConfig::for_n(6);
  SeededRng rng(kSeed);
  SwoRun run = samples_swo(rig.mem, rig.dataset, tmpl,
                           SecretPermutation(derive_seed(kSeed, "vp1"), 6),
                           SecretPermutation(derive_seed(kSeed, "vp2"), 6), cfg, rig.key,
                           rng);
  auto samples = open_swo_samples(rig.mem, run.output, run.segment_sizes, rig.key);
  REQUIRE(samples.size() == 3);
  CHECK(samples[0].size() == 1);
  CHECK(samples[1].size() == 2);
  CHECK(samples[2].size() == 3);
}

TEST_CASE("samples_swo trace is byte-identical across datasets and templates") {
  std::vector<std::string> texts;
  for (int s = 0; s < 4; ++s) {
    TestRig rig = make_rig(32, 4, derive_seed(kSeed, "inv", s));
    SwoTemplate tmpl(32, 8, derive_seed(kSeed, "invt", s));
    ShuffleConfig cfg = ShuffleConfig::for_n(32);
    SeededRng rng(derive_seed(kSeed, "invr", s));
    SwoRun run = samples_swo(rig.mem, rig.dataset, tmpl,
                             SecretPermutation(derive_seed(kSeed, "ip1", s), 32),
                             SecretPermutation(derive_seed(kSeed, "ip2", s), 32), cfg,
                             rig.key, rng);
    REQUIRE(run.shuffle1.attempts == 1);
    REQUIRE(run.shuffle2.attempts == 1);
    auto begin = rig.mem.phase("shuffle1")->begin;
    auto end = rig.mem.phase("shuffle2")->end;
    texts.push_back(rig.mem.trace().to_text(begin, end));
  }
  for (const auto& t : texts) CHECK(t == texts[0]);
}

TEST_CASE("grouping rejects out-of-range sample ids") {
  TestRig rig = make_rig(4, 4, kSeed);
  SlotLayout tuple_layout{4, 1};
  RegionId scratch = rig.mem.add_region("scratch", 4, tuple_layout);
  RegionId output = rig.mem.add_region("output", 4, {4, 0});
  Record e{true, 1, Bytes(4, 0)};
  for (std::uint64_t t = 0; t < 4; ++t) {
    std::vector<Ciphertext> parts;
    parts.push_back(encrypt_record(e, rig.key));
    parts.push_back(
        encrypt_aux({true, t == 3 ? std::uint64_t{9} : std::uint64_t{1}, 0}, rig.key));
    rig.mem.write(scratch, t, tuple_layout.join(parts));
  }
  std::vector<std::uint64_t> segments{4};
  CHECK_THROWS_AS(group_by_sample_id(rig.mem, scratch, output, segments, rig.key),
                  IntegrityError);
}

TEST_CASE("poisson: forced template unrolls to samples then dummies") {
  TestRig rig = make_rig(4, 4, kSeed);
  // rho_1 = (2,1,3,4), M_1 = 1 -> sample {2}; rho_2 = (1,3,2,4), M_2 = 2 ->
  // sample {1,3}. cursize 3, one dummy.
  FixedPoissonTemplate tmpl(4, {{2, 1, 3, 4}, {1, 3, 2, 4}}, {1, 2});
  ShuffleConfig cfg = ShuffleConfig::for_n(4);
  SeededRng rng(kSeed);
  PoissonRun run = samples_poisson(rig.mem, rig.dataset, tmpl,
                                   SecretPermutation::identity(4),
                                   SecretPermutation(derive_seed(kSeed, "pp2"), 4), cfg,
                                   rig.key, rng);
  CHECK(run.meta.k_prime == 2);
  CHECK(run.meta.cursize == 3);

  auto tuples = decrypt_tuples(rig.mem, run.output, rig.key);
  REQUIRE(tuples.size() == 4);
  // Identity first shuffle: scan consumes D[1], D[2], D[3] in order.
  CHECK(tuples[0].key == 2);  // pos 1: sample 1's member, second element read
  CHECK(tuples[0].id == 1);
  CHECK(tuples[1].key == 1);  // pos 2: sample 2 position 1
  CHECK(tuples[1].id == 2);
  CHECK(tuples[2].key == 3);  // pos 3: sample 2 position 2
  CHECK(tuples[2].id == 2);
  CHECK_FALSE(tuples[3].real);  // dummy tail
  CHECK(tuples[3].id == 0);

  auto samples = open_poisson_samples(rig.mem, run.output, run.meta, rig.key);
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].size() == 1);
  CHECK(samples[1].size() == 2);
}

TEST_CASE("poisson: k=1 with M_1=n gives a permutation of D and zero dummies") {
  TestRig rig = make_rig(6, 4, kSeed);
  FixedPoissonTemplate tmpl(6, {{3, 1, 6, 2, 5, 4}}, {6});
  ShuffleConfig cfg = ShuffleConfig::for_n(6);
  SeededRng rng(kSeed);
  PoissonRun run = samples_poisson(rig.mem, rig.dataset, tmpl,
                                   SecretPermutation(derive_seed(kSeed, "mp1"), 6),
                                   SecretPermutation(derive_seed(kSeed, "mp2"), 6), cfg,
                                   rig.key, rng);
  CHECK(run.meta.cursize == 6);
  auto tuples = decrypt_tuples(rig.mem, run.output, rig.key);
  std::set<std::uint64_t> keys;
  for (const Tuple& t : tuples) {
    CHECK(t.real);
    keys.insert(t.key);
  }
  CHECK(keys.size() == 6);
}

TEST_CASE("poisson: empty first sample is fine (M_1 = 0)") {
  TestRig rig = make_rig(4, 4, kSeed);
  FixedPoissonTemplate tmpl(4, {{1, 2, 3, 4}, {4, 3, 2, 1}}, {0, 1});
  ShuffleConfig cfg = ShuffleConfig::for_n(4);
  SeededRng rng(kSeed);
  PoissonRun run = samples_poisson(rig.mem, rig.dataset, tmpl,
                                   SecretPermutation::identity(4),
                                   SecretPermutation(derive_seed(kSeed, "ep2"), 4), cfg,
                                   rig.key, rng);
  CHECK(run.meta.k_prime == 2);
  CHECK(run.meta.cursize == 1);
  auto samples = open_poisson_samples(rig.mem, run.output, run.meta, rig.key);
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].empty());
  CHECK(samples[1].size() == 1);
}

TEST_CASE("poisson: revealed positions are a permutation of 1..n every run") {
  for (int s = 0; s < 5; ++s) {
    TestRig rig = make_rig(16, 4, derive_seed(kSeed, "perm", s));
    PoissonTemplate tmpl(16, 0.25, 4, derive_seed(kSeed, "permt", s));
    ShuffleConfig cfg = ShuffleConfig::for_n(16);
    SeededRng rng(derive_seed(kSeed, "permr", s));
    PoissonRun run = samples_poisson(rig.mem, rig.dataset, tmpl,
                                     SecretPermutation(derive_seed(kSeed, "pm1", s), 16),
                                     SecretPermutation(derive_seed(kSeed, "pm2", s), 16),
                                     cfg, rig.key, rng);
    auto sorted = run.revealed_positions;
    std::sort(sorted.begin(), sorted.end());
    for (std::uint64_t p = 0; p < 16; ++p) CHECK(sorted[p] == p + 1);
  }
}

TEST_CASE("poisson: oblivious output equals the non-oblivious reference") {
  for (int s = 0; s < 25; ++s) {
    TestRig rig = make_rig(16, 4, derive_seed(kSeed, "ref", s));
    PoissonTemplate tmpl(16, 0.25, 4, derive_seed(kSeed, "reft", s));
    ShuffleConfig cfg = ShuffleConfig::for_n(16);
    SeededRng rng(derive_seed(kSeed, "refr", s));
    SamplesOptions opts;
    opts.want_transcript = true;
    PoissonRun run = samples_poisson(rig.mem, rig.dataset, tmpl,
                                     SecretPermutation(derive_seed(kSeed, "rf1", s), 16),
                                     SecretPermutation(derive_seed(kSeed, "rf2", s), 16),
                                     cfg, rig.key, rng, opts);
    auto expected = reference_poisson_layout(tmpl, run.transcript->pi1, run.meta);
    auto tuples = decrypt_tuples(rig.mem, run.output, rig.key);
    for (std::uint64_t p = 0; p < 16; ++p) {
      if (expected[p]) {
        CHECK(tuples[p].real);
        CHECK(tuples[p].key == expected[p]->first);
        CHECK(tuples[p].id == expected[p]->second);
      } else {
        CHECK_FALSE(tuples[p].real);
      }
    }
  }
}

TEST_CASE("poisson scan trace: one write paired with one read throughout padding") {
  TestRig rig = make_rig(8, 4, kSeed);
  FixedPoissonTemplate tmpl(8, {{1, 2, 3, 4, 5, 6, 7, 8}}, {2});  // cursize 2, 6 dummies
  ShuffleConfig cfg = ShuffleConfig::for_n(8);
  PrivateMemory pm(cfg.capacity());
  SeededRng rng(kSeed);
  oblivious_shuffle(rig.mem, rig.dataset, SecretPermutation::identity(8), cfg, rig.key, rng,
                    pm);
  RegionId scratch = rig.mem.add_region("scratch", 8, {4, 1});
  std::size_t begin = rig.mem.trace().size();
  poisson_replication_scan(rig.mem, rig.dataset, scratch, tmpl, rig.key, pm);
  const AccessTrace& tr = rig.mem.trace();
  CHECK(tr.size() - begin == 2 * 8 + 2);
  CHECK(tr.record_text(begin) == "dataset\tread\t0");
  CHECK(tr.record_text(begin + 1) == "dataset\tread\t0");
  for (std::size_t t = 0; t < 8; ++t) {
    const TraceRecord& w = tr.records()[begin + 2 + 2 * t];
    const TraceRecord& r = tr.records()[begin + 2 + 2 * t + 1];
    CHECK(w.op == MemOp::Write);
    CHECK(w.index == t);
    CHECK(r.op == MemOp::Read);
    CHECK(r.index == (t + 1) % 8);  // sequentially advancing modulo n
  }
}

TEST_CASE("poisson trace is byte-identical across templates including padding") {
  std::vector<std::string> texts;
  for (int s = 0; s < 4; ++s) {
    TestRig rig = make_rig(32, 4, derive_seed(kSeed, "pinv", s));
    PoissonTemplate tmpl(32, 1.0 / 8, 8, derive_seed(kSeed, "pinvt", s));
    ShuffleConfig cfg = ShuffleConfig::for_n(32);
    SeededRng rng(derive_seed(kSeed, "pinvr", s));
    PoissonRun run = samples_poisson(rig.mem, rig.dataset, tmpl,
                                     SecretPermutation(derive_seed(kSeed, "pv1", s), 32),
                                     SecretPermutation(derive_seed(kSeed, "pv2", s), 32),
                                     cfg, rig.key, rng);
    REQUIRE(run.shuffle1.attempts == 1);
    REQUIRE(run.shuffle2.attempts == 1);
    texts.push_back(rig.mem.trace().to_text(rig.mem.phase("shuffle1")->begin,
                                            rig.mem.phase("shuffle2")->end));
  }
  for (const auto& t : texts) CHECK(t == texts[0]);
}

TEST_CASE("degenerate n=1: both pipelines produce the single element") {
  {
    TestRig rig = make_rig(1, 4, kSeed);
    SwoTemplate tmpl(1, 1, derive_seed(kSeed, "one"));
    SeededRng rng(kSeed);
    SwoRun run = samples_swo(rig.mem, rig.dataset, tmpl, SecretPermutation::identity(1),
                             SecretPermutation::identity(1), ShuffleConfig::for_n(1),
                             rig.key, rng);
    auto samples = open_swo_samples(rig.mem, run.output, run.segment_sizes, rig.key);
    REQUIRE(samples.size() == 1);
    REQUIRE(samples[0].size() == 1);
    CHECK(samples[0][0].key == 1);
  }
  {
    TestRig rig = make_rig(1, 4, kSeed);
    FixedPoissonTemplate tmpl(1, {{1}}, {1});
    SeededRng rng(kSeed);
    PoissonRun run = samples_poisson(rig.mem, rig.dataset, tmpl,
                                     SecretPermutation::identity(1),
                                     SecretPermutation::identity(1),
                                     ShuffleConfig::for_n(1), rig.key, rng);
    CHECK(run.meta.cursize == 1);
    auto samples = open_poisson_samples(rig.mem, run.output, run.meta, rig.key);
    REQUIRE(samples.size() == 1);
    CHECK(samples[0][0].key == 1);
  }
}

TEST_CASE("a memory instance hosts one sampling run; a second one is rejected") {
  TestRig rig = make_rig(8, 4, kSeed);
  SwoTemplate tmpl(8, 4, derive_seed(kSeed, "again"));
  ShuffleConfig cfg = ShuffleConfig::for_n(8);
  SeededRng rng(kSeed);
  samples_swo(rig.mem, rig.dataset, tmpl, SecretPermutation(derive_seed(kSeed, "a1"), 8),
              SecretPermutation(derive_seed(kSeed, "a2"), 8), cfg, rig.key, rng);
  CHECK_THROWS_AS(
      samples_swo(rig.mem, rig.dataset, tmpl, SecretPermutation(derive_seed(kSeed, "b1"), 8),
                  SecretPermutation(derive_seed(kSeed, "b2"), 8), cfg, rig.key, rng),
      ConfigError);
}

TEST_CASE("private peak stays within capacity for both pipelines") {
  TestRig rig = make_rig(64, 4, kSeed);
  SwoTemplate tmpl(64, 8, derive_seed(kSeed, "cap"));
  ShuffleConfig cfg = ShuffleConfig::for_n(64);
  SeededRng rng(kSeed);
  SwoRun run = samples_swo(rig.mem, rig.dataset, tmpl,
                           SecretPermutation(derive_seed(kSeed, "cp1"), 64),
                           SecretPermutation(derive_seed(kSeed, "cp2"), 64), cfg, rig.key,
                           rng);
  CHECK(run.private_peak <= cfg.capacity());
}
