// Command-line front end. Every command resolves its config against a fixed
// key table, writes manifest.json to the output directory before doing any
// work, then emits its artifacts; `rerun` replays a saved manifest.
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <list>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "hop/accounting.hpp"
#include "hop/dataset.hpp"
#include "hop/encoders.hpp"
#include "hop/gradscopes.hpp"
#include "hop/manifest.hpp"
#include "hop/pca.hpp"
#include "hop/pipeline.hpp"
#include "hop/serialize.hpp"
#include "hop/student.hpp"

namespace fs = std::filesystem;
using namespace hop;

namespace {

constexpr const char* kOutRootEnv = "HOP_OUT_ROOT";

struct KeySpec {
  const char* key;
  const char* def;
};

// clang-format off
const std::vector<KeySpec> kGenKeys = {
    {"seed", "7"}, {"count", "20000"}, {"grid", "24"}, {"max_instances", "7"},
    {"instance_size", "4"}, {"cluster_prob", "0.35"}, {"pair_seed_prob", "0.6"},
};
const std::vector<KeySpec> kModelKeys = {
    {"d", "64"}, {"d_aff", "48"}, {"d_sem", "16"}, {"d_text", "64"}, {"heads", "8"},
    {"grid", "24"}, {"fusion", "joint"},
    {"hint_affinity", "true"}, {"hint_semantic", "true"}, {"hint_question", "true"},
    {"affinity_source", "raw-teacher"}, {"question_source", "llm-embed"},
    {"semantic_k", "8"}, {"num_distractors", "5"}, {"adapter_width", "64"},
    {"scramble", "true"}, {"semantic_dropout", "0.9"},
};
const std::vector<KeySpec> kTrainRunKeys = {
    {"seed", "1"}, {"data", ""}, {"test", ""}, {"student", ""},
    {"lr", "0.003"}, {"warmup_ratio", "0.03"}, {"weight_decay", "0.01"},
    {"epochs", "1"}, {"batch_size", "8"}, {"train_items", "0"},
};
const std::vector<KeySpec> kEvalKeys = {
    {"ckpt", ""}, {"data", ""},
};
const std::vector<KeySpec> kAblateExtraKeys = {
    {"axis", "hints"}, {"values", ""},
};
const std::vector<KeySpec> kBenchKeys = {
    {"d", "1024"}, {"d_aff", "1024"}, {"d_sem", "256"}, {"d_text", "4096"},
    {"l", "576"}, {"n", "576"}, {"m", "32"}, {"k", "40"}, {"heads", "8"},
};
const std::vector<KeySpec> kGradKeys = {
    {"scope", "all"}, {"seeds", "3"}, {"eps", "1e-5"}, {"tol", "1e-4"},
};
const std::vector<KeySpec> kVizKeys = {
    {"seed", "7"}, {"data", ""}, {"index", "0"}, {"source", "teacher"},
    {"d", "64"}, {"d_aff", "48"}, {"d_sem", "16"},
    {"scramble", "true"}, {"semantic_dropout", "0.9"}, {"student", ""},
};
const std::vector<KeySpec> kDistillKeys = {
    {"seed", "1"}, {"data", ""}, {"items", "1500"},
    {"d", "64"}, {"d_aff", "48"}, {"d_sem", "16"},
    {"scramble", "true"}, {"semantic_dropout", "0.9"},
    {"student_layers", "2"}, {"student_heads", "4"}, {"student_width", "64"},
    {"student_ffn_ratio", "2"},
    {"lr", "0.001"}, {"warmup_ratio", "0.05"}, {"weight_decay", "0.01"},
    {"epochs", "1"}, {"batch_size", "8"},
};
// clang-format on

std::vector<KeySpec> concat_keys(std::initializer_list<const std::vector<KeySpec>*> parts) {
  std::vector<KeySpec> out;
  for (const auto* p : parts) out.insert(out.end(), p->begin(), p->end());
  return out;
}

const std::vector<KeySpec>& key_table(const std::string& cmd) {
  static const std::vector<KeySpec> train_keys = concat_keys({&kModelKeys, &kTrainRunKeys});
  static const std::vector<KeySpec> ablate_keys =
      concat_keys({&kModelKeys, &kTrainRunKeys, &kAblateExtraKeys});
  if (cmd == "gen-data") return kGenKeys;
  if (cmd == "train") return train_keys;
  if (cmd == "eval") return kEvalKeys;
  if (cmd == "ablate") return ablate_keys;
  if (cmd == "bench-cost") return kBenchKeys;
  if (cmd == "grad-check") return kGradKeys;
  if (cmd == "viz-affinity") return kVizKeys;
  if (cmd == "distill") return kDistillKeys;
  throw std::runtime_error("unknown command '" + cmd + "'");
}

// Canonical key order plus defaults; rejects keys outside the table so typos
// fail loudly instead of silently running defaults.
KvConfig resolve_config(const std::string& cmd, const KvConfig& user) {
  const auto& specs = key_table(cmd);
  std::vector<std::string> allowed;
  allowed.reserve(specs.size());
  for (const auto& s : specs) allowed.push_back(s.key);
  user.require_known(allowed);
  KvConfig out;
  for (const auto& s : specs)
    out.set(s.key, user.has(s.key) ? user.get_str(s.key, "") : std::string(s.def));
  return out;
}

std::string require_path(const KvConfig& cfg, const std::string& key) {
  std::string v = cfg.get_str(key, "");
  if (v.empty()) throw std::runtime_error("config key '" + key + "': a path is required");
  return v;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::string steps_csv(const std::vector<StepRecord>& history) {
  std::string s = "step,lr,loss\n";
  for (const auto& r : history)
    s += std::to_string(r.step) + "," + fmt_double(r.lr) + "," + fmt_double(r.loss) + "\n";
  return s;
}

std::string metrics_header() {
  return "items,accuracy,bleu,acc_presence,acc_count,acc_relation,acc_global";
}

std::string metrics_row(const MetricsRecord& r) {
  std::string s = std::to_string(r.items) + "," + fmt_double(r.accuracy) + "," +
                  fmt_double(r.bleu);
  for (int k = 0; k < kNumQAKinds; k++) s += "," + fmt_double(r.kind_accuracy[k]);
  return s;
}

void print_metrics(const std::string& tag, const MetricsRecord& r) {
  std::cout << tag << ": items=" << r.items << " accuracy=" << fmt_double(r.accuracy)
            << " bleu=" << fmt_double(r.bleu);
  for (int k = 0; k < kNumQAKinds; k++)
    std::cout << " " << qa_kind_name(static_cast<QAKind>(k)) << "="
              << fmt_double(r.kind_accuracy[k]);
  std::cout << "\n";
}

void print_step_lines(const std::vector<StepRecord>& history) {
  if (history.empty()) return;
  int stride = std::max<int>(1, static_cast<int>(history.size()) / 20);
  for (size_t i = 0; i < history.size(); i++) {
    if (i % stride == 0 || i + 1 == history.size()) {
      const auto& r = history[i];
      std::cout << "step=" << r.step << " lr=" << fmt_double(r.lr)
                << " loss=" << fmt_double(r.loss) << "\n";
    }
  }
}

ToyModelConfig model_config_from(const KvConfig& cfg) {
  ToyModelConfig m;
  m.grid = cfg.get_int("grid", m.grid);
  m.dims.d = cfg.get_int("d", m.dims.d);
  m.dims.d_aff = cfg.get_int("d_aff", m.dims.d_aff);
  m.dims.d_sem = cfg.get_int("d_sem", m.dims.d_sem);
  m.dims.d_text = cfg.get_int("d_text", m.dims.d_text);
  m.dims.heads = cfg.get_int("heads", m.dims.heads);
  m.dims.l = m.dims.n = m.grid * m.grid;
  m.fusion = parse_fusion_strategy(cfg.get_str("fusion", "joint"));
  m.hint_affinity = cfg.get_bool("hint_affinity", true);
  m.hint_semantic = cfg.get_bool("hint_semantic", true);
  m.hint_question = cfg.get_bool("hint_question", true);
  m.affinity_source = parse_affinity_source(cfg.get_str("affinity_source", "raw-teacher"));
  m.question_source = cfg.get_str("question_source", "llm-embed");
  m.semantic_k = cfg.get_int("semantic_k", m.semantic_k);
  m.dims.m = m.semantic_k;
  m.num_distractors = cfg.get_int("num_distractors", m.num_distractors);
  m.adapter_width = cfg.get_int("adapter_width", m.adapter_width);
  m.degrade.affinity_scramble = cfg.get_bool("scramble", true);
  m.degrade.semantic_dropout = cfg.get_double("semantic_dropout", 0.9);
  return m;
}

TrainConfig train_config_from(const KvConfig& cfg) {
  TrainConfig t;
  t.opt.base_lr = cfg.get_double("lr", 0.003);
  t.opt.warmup_ratio = cfg.get_double("warmup_ratio", 0.03);
  t.opt.weight_decay = cfg.get_double("weight_decay", 0.01);
  t.epochs = cfg.get_int("epochs", 1);
  t.batch_size = cfg.get_int("batch_size", 8);
  t.train_items = cfg.get_int("train_items", 0);
  return t;
}

// A distilled student lives in its run directory: config in the manifest,
// weights in student.tns.
StudentParams load_student_dir(const std::string& dir) {
  RunManifest m = load_manifest((fs::path(dir) / "manifest.json").string());
  StudentDecoderConfig sc;
  sc.layers = m.config.get_int("student_layers", 2);
  sc.heads = m.config.get_int("student_heads", 4);
  sc.width = m.config.get_int("student_width", 64);
  sc.ffn_ratio = m.config.get_int("student_ffn_ratio", 2);
  sc.input_dim = m.config.get_int("d", 64);
  sc.output_dim = m.config.get_int("d_aff", 48);
  Rng rng(1);
  StudentParams sp = make_student_params(sc, rng);
  Params ps = sp.params();
  load_checkpoint((fs::path(dir) / "student.tns").string(), ps);
  return sp;
}

ToyModel build_model(const KvConfig& cfg, std::uint64_t seed) {
  ToyModel model = make_toy_model(model_config_from(cfg), seed);
  if (model.cfg.affinity_source == AffinitySource::Student)
    attach_student(model, load_student_dir(require_path(cfg, "student")));
  return model;
}

int cmd_gen_data(const KvConfig& cfg, const fs::path& out) {
  GenConfig g;
  g.count = cfg.get_int("count", 20000);
  g.master_seed = cfg.get_u64("seed", 7);
  g.scene.grid = cfg.get_int("grid", 24);
  g.scene.max_instances = cfg.get_int("max_instances", 7);
  g.scene.instance_size = cfg.get_int("instance_size", 4);
  g.scene.cluster_prob = cfg.get_double("cluster_prob", 0.35);
  g.scene.pair_seed_prob = cfg.get_double("pair_seed_prob", 0.6);
  if (g.count <= 0) throw std::runtime_error("config key 'count': must be positive");
  std::vector<DatasetItem> items = generate_dataset(g);
  save_dataset((out / "dataset.jsonl").string(), items);
  std::cout << "wrote " << items.size() << " items to " << (out / "dataset.jsonl").string()
            << "\n";
  return 0;
}

int cmd_train(const KvConfig& cfg, const fs::path& out) {
  std::vector<DatasetItem> items = load_dataset(require_path(cfg, "data"));
  std::uint64_t seed = cfg.get_u64("seed", 1);
  ToyModel model = build_model(cfg, seed);
  std::vector<StepRecord> history = train_model(model, items, train_config_from(cfg));
  print_step_lines(history);
  write_text(out / "train_log.csv", steps_csv(history));
  Params ps = model.params();
  save_checkpoint((out / "model.tns").string(), ps);
  std::string test = cfg.get_str("test", "");
  if (!test.empty()) {
    MetricsRecord rec = evaluate_model(model, load_dataset(test));
    write_text(out / "metrics.csv", metrics_header() + "\n" + metrics_row(rec) + "\n");
    print_metrics("eval", rec);
  }
  return 0;
}

int cmd_eval(const KvConfig& cfg, const fs::path& out) {
  std::string ckpt = require_path(cfg, "ckpt");
  RunManifest train_man = load_manifest((fs::path(ckpt) / "manifest.json").string());
  ToyModel model = build_model(train_man.config, train_man.master_seed);
  Params ps = model.params();
  load_checkpoint((fs::path(ckpt) / "model.tns").string(), ps);
  MetricsRecord rec = evaluate_model(model, load_dataset(require_path(cfg, "data")));
  write_text(out / "metrics.csv", metrics_header() + "\n" + metrics_row(rec) + "\n");
  print_metrics("eval", rec);
  return 0;
}

int cmd_ablate(const KvConfig& cfg, const fs::path& out) {
  std::vector<DatasetItem> train_items = load_dataset(require_path(cfg, "data"));
  std::vector<DatasetItem> test_items = load_dataset(require_path(cfg, "test"));
  std::uint64_t seed = cfg.get_u64("seed", 1);
  TrainConfig tc = train_config_from(cfg);
  ToyModelConfig base = model_config_from(cfg);
  std::string axis = cfg.get_str("axis", "hints");

  std::string csv = "axis,label," + metrics_header() + "\n";
  auto run_one = [&](const std::string& label, const ToyModelConfig& mc,
                     const std::string& student_dir) {
    ToyModel model = make_toy_model(mc, seed);
    if (mc.affinity_source == AffinitySource::Student)
      attach_student(model, load_student_dir(student_dir));
    train_model(model, train_items, tc);
    MetricsRecord rec = evaluate_model(model, test_items);
    csv += axis + "," + label + "," + metrics_row(rec) + "\n";
    print_metrics(axis + "/" + label, rec);
  };

  if (axis == "hints") {
    const struct { const char* label; bool a, s, q; } subsets[] = {
        {"none", false, false, false}, {"a", true, false, false},
        {"s", false, true, false},     {"q", false, false, true},
        {"as", true, true, false},     {"aq", true, false, true},
        {"sq", false, true, true},     {"asq", true, true, true},
    };
    for (const auto& sub : subsets) {
      ToyModelConfig mc = base;
      mc.hint_affinity = sub.a;
      mc.hint_semantic = sub.s;
      mc.hint_question = sub.q;
      run_one(sub.label, mc, "");
    }
  } else if (axis == "affinity-source") {
    ToyModelConfig mc = base;
    mc.hint_affinity = false;
    run_one("none", mc, "");
    for (AffinitySource src : {AffinitySource::RawTeacher, AffinitySource::SimilarityMatrix}) {
      mc = base;
      mc.hint_affinity = true;
      mc.affinity_source = src;
      run_one(format_affinity_source(src), mc, "");
    }
    std::string student_dir = cfg.get_str("student", "");
    if (!student_dir.empty()) {
      mc = base;
      mc.hint_affinity = true;
      mc.affinity_source = AffinitySource::Student;
      run_one("student", mc, student_dir);
    }
  } else if (axis == "question-source") {
    for (const char* src : {"llm-embed", "alt-text-encoder"}) {
      ToyModelConfig mc = base;
      mc.question_source = src;
      run_one(src, mc, "");
    }
  } else if (axis == "semantic-k") {
    std::string values = cfg.get_str("values", "");
    if (values.empty()) values = "8,16,32,64";
    KvConfig probe;  // reuse the integer parser for each comma-separated entry
    std::vector<int> ks;
    size_t pos = 0;
    while (pos <= values.size()) {
      size_t comma = values.find(',', pos);
      if (comma == std::string::npos) comma = values.size();
      probe.set("values", values.substr(pos, comma - pos));
      ks.push_back(probe.get_int("values", 0));
      pos = comma + 1;
    }
    for (int k : ks) {
      ToyModelConfig mc = base;
      mc.semantic_k = k;
      mc.dims.m = k;
      run_one(std::to_string(k), mc, cfg.get_str("student", ""));
    }
  } else {
    throw std::runtime_error(
        "config key 'axis': expected hints | affinity-source | question-source | semantic-k, got '" +
        axis + "'");
  }
  write_text(out / "ablation.csv", csv);
  return 0;
}

int cmd_bench_cost(const KvConfig& cfg, const fs::path& out) {
  DimConfig dims;
  dims.d = cfg.get_int("d", dims.d);
  dims.d_aff = cfg.get_int("d_aff", dims.d_aff);
  dims.d_sem = cfg.get_int("d_sem", dims.d_sem);
  dims.d_text = cfg.get_int("d_text", dims.d_text);
  dims.l = cfg.get_int("l", dims.l);
  dims.n = cfg.get_int("n", dims.n);
  dims.m = cfg.get_int("m", dims.m);
  dims.k = cfg.get_int("k", dims.k);
  dims.heads = cfg.get_int("heads", dims.heads);
  std::string csv = cost_table_csv(dims);
  write_text(out / "cost_table.csv", csv);
  std::cout << csv;
  return 0;
}

int cmd_grad_check(const KvConfig& cfg, const fs::path& out) {
  std::string scope = cfg.get_str("scope", "all");
  int seeds = cfg.get_int("seeds", 3);
  double eps = cfg.get_double("eps", 1e-5);
  double tol = cfg.get_double("tol", 1e-4);
  std::vector<std::string> scopes;
  if (scope == "all")
    scopes = grad_scope_names();
  else
    scopes.push_back(scope);
  std::string csv = "scope,seed,max_rel,max_abs\n";
  bool ok = true;
  for (const auto& sc : scopes) {
    for (const GradScopeResult& r : run_grad_scope(sc, seeds, eps)) {
      csv += r.scope + "," + std::to_string(r.seed) + "," + fmt_double(r.max_rel) + "," +
             fmt_double(r.max_abs) + "\n";
      bool pass = r.max_rel < tol;
      ok = ok && pass;
      std::cout << r.scope << " seed=" << r.seed << " max_rel=" << fmt_double(r.max_rel)
                << " max_abs=" << fmt_double(r.max_abs) << (pass ? "" : "  FAIL") << "\n";
    }
  }
  write_text(out / "grad_report.csv", csv);
  std::cout << "grad-check: " << (ok ? "PASS" : "FAIL") << " (tol=" << fmt_double(tol) << ")\n";
  return ok ? 0 : 1;
}

int cmd_viz_affinity(const KvConfig& cfg, const fs::path& out) {
  std::vector<DatasetItem> items = load_dataset(require_path(cfg, "data"));
  int index = cfg.get_int("index", 0);
  if (index < 0 || index >= static_cast<int>(items.size()))
    throw std::runtime_error("config key 'index': " + std::to_string(index) +
                             " is out of range for " + std::to_string(items.size()) + " items");
  const Scene& scene = items[index].scene;
  Dictionaries dicts = make_dictionaries(cfg.get_u64("seed", 7), cfg.get_int("d", 64),
                                         cfg.get_int("d_aff", 48), cfg.get_int("d_sem", 16));
  DegradeConfig degrade;
  degrade.affinity_scramble = cfg.get_bool("scramble", true);
  degrade.semantic_dropout = cfg.get_double("semantic_dropout", 0.9);

  std::string source = cfg.get_str("source", "teacher");
  Tensor tokens;
  if (source == "base") {
    tokens = encode_base_tokens(scene, dicts, degrade).tokens;
  } else if (source == "teacher") {
    tokens = teacher_affinity_tokens(scene, dicts);
  } else if (source == "similarity") {
    // rows of the token-wise cosine similarity matrix, colored directly
    Tensor t = teacher_affinity_tokens(scene, dicts);
    int n = t.shape[0], dim = t.shape[1];
    const auto& td = *t.data;
    std::vector<double> norms(n);
    for (int i = 0; i < n; i++) {
      double s = 0;
      for (int j = 0; j < dim; j++) s += td[i * dim + j] * td[i * dim + j];
      norms[i] = std::sqrt(std::max(s, 1e-30));
    }
    tokens = zeros({n, n});
    auto& sd = *tokens.data;
    for (int i = 0; i < n; i++)
      for (int j = 0; j < n; j++) {
        double dot = 0;
        for (int c = 0; c < dim; c++) dot += td[i * dim + c] * td[j * dim + c];
        sd[i * n + j] = dot / (norms[i] * norms[j]);
      }
  } else if (source == "student") {
    StudentParams sp = load_student_dir(require_path(cfg, "student"));
    tokens = student_forward(encode_base_tokens(scene, dicts, degrade).tokens, sp);
  } else {
    throw std::runtime_error(
        "config key 'source': expected base | teacher | similarity | student, got '" + source +
        "'");
  }
  Tensor rgb = pca_color_map(tokens);
  write_ppm((out / "affinity.ppm").string(), rgb, scene.grid, scene.grid);
  std::cout << "wrote " << (out / "affinity.ppm").string() << " (" << scene.grid << "x"
            << scene.grid << ", source=" << source << ")\n";
  return 0;
}

int cmd_distill(const KvConfig& cfg, const fs::path& out) {
  std::vector<DatasetItem> items = load_dataset(require_path(cfg, "data"));
  int n = std::min<int>(cfg.get_int("items", 1500), static_cast<int>(items.size()));
  if (n <= 0) throw std::runtime_error("config key 'items': no items to distill on");
  Dictionaries dicts = make_dictionaries(cfg.get_u64("seed", 1), cfg.get_int("d", 64),
                                         cfg.get_int("d_aff", 48), cfg.get_int("d_sem", 16));
  DegradeConfig degrade;
  degrade.affinity_scramble = cfg.get_bool("scramble", true);
  degrade.semantic_dropout = cfg.get_double("semantic_dropout", 0.9);
  ExampleStream stream = [&](int i) {
    return std::pair<Tensor, Tensor>(encode_base_tokens(items[i].scene, dicts, degrade).tokens,
                                     teacher_affinity_tokens(items[i].scene, dicts));
  };
  StudentDecoderConfig sc;
  sc.layers = cfg.get_int("student_layers", 2);
  sc.heads = cfg.get_int("student_heads", 4);
  sc.width = cfg.get_int("student_width", 64);
  sc.ffn_ratio = cfg.get_int("student_ffn_ratio", 2);
  sc.input_dim = cfg.get_int("d", 64);
  sc.output_dim = cfg.get_int("d_aff", 48);
  DistillRunConfig rc;
  rc.opt.base_lr = cfg.get_double("lr", 0.001);
  rc.opt.warmup_ratio = cfg.get_double("warmup_ratio", 0.05);
  rc.opt.weight_decay = cfg.get_double("weight_decay", 0.01);
  rc.epochs = cfg.get_int("epochs", 1);
  rc.batch_size = cfg.get_int("batch_size", 8);
  rc.seed = cfg.get_u64("seed", 1);
  DistillResult res = distill_train(stream, n, sc, rc);
  print_step_lines(res.history);
  write_text(out / "distill_log.csv", steps_csv(res.history));
  Params ps = res.student.params();
  save_checkpoint((out / "student.tns").string(), ps);
  write_text(out / "cosine.txt", fmt_double(res.final_cosine) + "\n");
  std::cout << "final cosine " << fmt_double(res.final_cosine) << " over " << n << " items\n";
  return 0;
}

std::vector<std::string> artifacts_for(const std::string& cmd, const KvConfig& cfg) {
  if (cmd == "gen-data") return {"dataset.jsonl"};
  if (cmd == "train") {
    std::vector<std::string> a = {"model.tns", "train_log.csv"};
    if (!cfg.get_str("test", "").empty()) a.push_back("metrics.csv");
    return a;
  }
  if (cmd == "eval") return {"metrics.csv"};
  if (cmd == "ablate") return {"ablation.csv"};
  if (cmd == "bench-cost") return {"cost_table.csv"};
  if (cmd == "grad-check") return {"grad_report.csv"};
  if (cmd == "viz-affinity") return {"affinity.ppm"};
  if (cmd == "distill") return {"student.tns", "distill_log.csv", "cosine.txt"};
  throw std::runtime_error("unknown command '" + cmd + "'");
}

fs::path resolve_out_dir(const std::string& out) {
  fs::path p(out);
  const char* root = std::getenv(kOutRootEnv);
  if (p.is_relative() && root != nullptr && *root != '\0') p = fs::path(root) / p;
  fs::create_directories(p);
  return p;
}

// The manifest goes to disk before any computation so a crashed or killed run
// still records exactly what was asked of it.
int run_command(const std::string& cmd, const KvConfig& cfg, const std::string& out_raw) {
  fs::path out = resolve_out_dir(out_raw);
  RunManifest man;
  man.command = cmd;
  man.master_seed = cfg.get_u64("seed", 0);
  man.config = cfg;
  man.artifacts = artifacts_for(cmd, cfg);
  save_manifest((out / "manifest.json").string(), man);

  if (cmd == "gen-data") return cmd_gen_data(cfg, out);
  if (cmd == "train") return cmd_train(cfg, out);
  if (cmd == "eval") return cmd_eval(cfg, out);
  if (cmd == "ablate") return cmd_ablate(cfg, out);
  if (cmd == "bench-cost") return cmd_bench_cost(cfg, out);
  if (cmd == "grad-check") return cmd_grad_check(cfg, out);
  if (cmd == "viz-affinity") return cmd_viz_affinity(cfg, out);
  if (cmd == "distill") return cmd_distill(cfg, out);
  throw std::runtime_error("unknown command '" + cmd + "'");
}

struct SubCtx {
  CLI::App* sub = nullptr;
  std::string config_path;
  std::string out = "out";
  std::vector<std::string> sets;
  // flag value storage; list keeps addresses stable for CLI11's bindings
  std::list<std::tuple<std::string, std::string, CLI::Option*>> aliases;

  void alias(const std::string& flag, const std::string& key, const std::string& help) {
    aliases.emplace_back(key, std::string(), nullptr);
    std::get<2>(aliases.back()) = sub->add_option(flag, std::get<1>(aliases.back()), help);
  }
};

KvConfig collect_config(const SubCtx& c) {
  KvConfig cfg = c.config_path.empty() ? KvConfig{} : parse_kv_file(c.config_path);
  for (const std::string& s : c.sets) {
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("--set expects key=value, got '" + s + "'");
    std::string key = s.substr(0, eq);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    std::string val = s.substr(eq + 1);
    while (!val.empty() && val.front() == ' ') val.erase(val.begin());
    cfg.set(key, val);
  }
  for (const auto& [key, value, opt] : c.aliases)
    if (opt->count() > 0) cfg.set(key, value);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hint-fusion workbench: synthetic data, training, ablations, cost accounting"};
  app.require_subcommand(1);

  std::deque<SubCtx> subs;
  auto add_sub = [&](const std::string& name, const std::string& desc) -> SubCtx& {
    subs.emplace_back();
    SubCtx& c = subs.back();
    c.sub = app.add_subcommand(name, desc);
    c.sub->add_option("--config", c.config_path, "key = value config file");
    c.sub->add_option("--out", c.out,
                      "output directory; relative paths join " + std::string(kOutRootEnv));
    c.sub->add_option("--set", c.sets, "override one config key, key=value")
        ->allow_extra_args(false);
    return c;
  };

  SubCtx& gen = add_sub("gen-data", "generate a synthetic scene/QA dataset");
  gen.alias("--seed", "seed", "master seed");
  gen.alias("--count", "count", "number of items");

  SubCtx& train = add_sub("train", "train the toy VQA model");
  train.alias("--seed", "seed", "master seed");
  train.alias("--data", "data", "training dataset path");
  train.alias("--test", "test", "held-out dataset path (writes metrics.csv)");
  train.alias("--student", "student", "distill run directory for the student affinity source");

  SubCtx& evalc = add_sub("eval", "evaluate a trained checkpoint");
  evalc.alias("--ckpt", "ckpt", "train run directory");
  evalc.alias("--data", "data", "dataset path");

  SubCtx& ablate = add_sub("ablate", "train/eval across one ablation axis");
  ablate.alias("--seed", "seed", "master seed shared by every configuration");
  ablate.alias("--data", "data", "training dataset path");
  ablate.alias("--test", "test", "held-out dataset path");
  ablate.alias("--axis", "axis", "hints | affinity-source | question-source | semantic-k");
  ablate.alias("--student", "student", "distill run directory (student rows)");

  SubCtx& bench = add_sub("bench-cost", "parameter and FLOP table for all fusion strategies");
  bench.alias("--d", "d", "model width");
  bench.alias("--d-aff", "d_aff", "affinity hint width");
  bench.alias("--d-sem", "d_sem", "semantic query width");
  bench.alias("--d-text", "d_text", "question embedding width");
  bench.alias("--l", "l", "visual token count");
  bench.alias("--n", "n", "affinity token count");
  bench.alias("--m", "m", "semantic query count");
  bench.alias("--k", "k", "question token count");
  bench.alias("--heads", "heads", "attention heads");

  SubCtx& grad = add_sub("grad-check", "finite-difference gradient verification");
  grad.alias("--scope", "scope", "attention | fusion | distill | pipeline | all");
  grad.alias("--seeds", "seeds", "seeds per scope");
  grad.alias("--tol", "tol", "max relative error allowed");

  SubCtx& viz = add_sub("viz-affinity", "render token affinity as a P6 pixmap");
  viz.alias("--seed", "seed", "dictionary seed");
  viz.alias("--data", "data", "dataset path");
  viz.alias("--index", "index", "scene index within the dataset");
  viz.alias("--source", "source", "base | teacher | similarity | student");
  viz.alias("--student", "student", "distill run directory (student source)");

  SubCtx& dist = add_sub("distill", "train the student against the affinity teacher");
  dist.alias("--seed", "seed", "master seed");
  dist.alias("--data", "data", "dataset path supplying scenes");
  dist.alias("--items", "items", "number of training items");

  std::string rerun_manifest, rerun_out;
  CLI::App* rerun = app.add_subcommand("rerun", "replay a recorded run from its manifest");
  rerun->add_option("manifest", rerun_manifest, "path to a manifest.json")->required();
  rerun->add_option("--out", rerun_out, "output directory for the replay")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (rerun->parsed()) {
      RunManifest m = load_manifest(rerun_manifest);
      return run_command(m.command, resolve_config(m.command, m.config), rerun_out);
    }
    for (const SubCtx& c : subs)
      if (c.sub->parsed())
        return run_command(c.sub->get_name(), resolve_config(c.sub->get_name(), collect_config(c)),
                           c.out);
    throw std::runtime_error("no command given");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
