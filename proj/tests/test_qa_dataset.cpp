#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hop/dataset.hpp"
#include "hop/qa.hpp"
#include "hop/rng.hpp"

using namespace hop;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("vocabulary ids are stable and unique") {
  const auto& vocab = vocabulary();
  std::set<std::string> seen;
  for (int i = 0; i < static_cast<int>(vocab.size()); i++) {
    CHECK(seen.insert(vocab[i]).second);
    CHECK(vocab_id(vocab[i]) == i);
  }
  CHECK_THROWS(vocab_id("zebra"));
  CHECK(answer_class_names().size() == kNumAnswerClasses);
  for (const auto& name : answer_class_names()) CHECK_NOTHROW(vocab_id(name));
}

TEST_CASE("count bins and chance rates") {
  CHECK(count_bin(0) == 0);
  CHECK(count_bin(3) == 3);
  CHECK(count_bin(4) == 4);
  CHECK(count_bin(9) == 4);
  CHECK(count_answer_class(0) == 2);
  CHECK(count_answer_class(7) == 6);
  CHECK(chance_accuracy(QAKind::Presence) == 0.5);
  CHECK(chance_accuracy(QAKind::Count) == 0.2);
  CHECK(chance_accuracy(QAKind::Relation) == 0.5);
  CHECK(chance_accuracy(QAKind::Global) == doctest::Approx(5.0 / 12.0));
}

TEST_CASE("kind names and hint requirements") {
  for (QAKind k : {QAKind::Presence, QAKind::Count, QAKind::Relation, QAKind::Global})
    CHECK(parse_qa_kind(qa_kind_name(k)) == k);
  CHECK_THROWS(parse_qa_kind("riddle"));

  HintMask m = required_hints(QAKind::Presence);
  CHECK((!m.affinity && m.semantic && !m.question));
  m = required_hints(QAKind::Count);
  CHECK((m.affinity && m.semantic && !m.question));
  m = required_hints(QAKind::Relation);
  CHECK((m.affinity && m.semantic && !m.question));
  m = required_hints(QAKind::Global);
  CHECK((!m.affinity && !m.semantic && !m.question));
}

TEST_CASE("questions are grounded in their scene") {
  SceneConfig scfg;
  scfg.grid = 12;
  const int vocab_size = static_cast<int>(vocabulary().size());
  int presence_yes = 0, relation_yes = 0;
  std::set<int> count_answers;
  for (uint64_t i = 1; i <= 400; i++) {
    Scene scene = generate_scene(i, scfg);
    for (QAKind kind : {QAKind::Presence, QAKind::Count, QAKind::Relation, QAKind::Global}) {
      QAItem qa = make_qa(scene, kind, 1000 + i);
      CHECK(qa.kind == kind);
      REQUIRE(!qa.question_ids.empty());
      for (int id : qa.question_ids) {
        CHECK(id >= 0);
        CHECK(id < vocab_size);
      }
      switch (kind) {
        case QAKind::Presence:
          REQUIRE(qa.arg1 >= 0);
          REQUIRE(qa.arg1 < kNumClasses);
          CHECK((qa.answer == 0 || qa.answer == 1));
          CHECK(class_present(scene, qa.arg1) == (qa.answer == 0));
          presence_yes += qa.answer == 0 ? 1 : 0;
          break;
        case QAKind::Count:
          REQUIRE(qa.arg1 >= 0);
          REQUIRE(qa.arg1 < kNumClasses);
          CHECK(qa.answer == count_answer_class(count_class(scene, qa.arg1)));
          count_answers.insert(qa.answer);
          break;
        case QAKind::Relation:
          REQUIRE(qa.arg1 >= 0);
          REQUIRE(qa.arg1 < kNumClasses);
          REQUIRE(qa.arg2 >= 0);
          REQUIRE(qa.arg2 < kNumClasses);
          CHECK((qa.answer == 0 || qa.answer == 1));
          CHECK(classes_adjacent(scene, qa.arg1, qa.arg2) == (qa.answer == 0));
          relation_yes += qa.answer == 0 ? 1 : 0;
          break;
        case QAKind::Global:
          if (qa.arg1 == 0)
            CHECK(qa.answer == 7 + scene.weather);
          else
            CHECK(qa.answer == 10 + scene.lighting);
          break;
      }
    }
  }
  // target answers are drawn before the template search, so both sides of the
  // binary kinds stay represented
  CHECK(presence_yes > 400 * 0.3);
  CHECK(presence_yes < 400 * 0.7);
  CHECK(relation_yes > 400 * 0.3);
  CHECK(relation_yes < 400 * 0.7);
  CHECK(count_answers.size() >= 4);  // nearly every bin shows up

  Scene scene = generate_scene(5, scfg);
  QAItem a = make_qa(scene, QAKind::Count, 42);
  QAItem b = make_qa(scene, QAKind::Count, 42);
  CHECK(a.question_ids == b.question_ids);
  CHECK(a.answer == b.answer);
  CHECK(a.arg1 == b.arg1);
}

TEST_CASE("answer renderings stay inside the vocabulary") {
  const int vocab_size = static_cast<int>(vocabulary().size());
  for (int cls = 0; cls < kNumAnswerClasses; cls++) {
    std::vector<int> toks = render_answer_tokens(cls);
    REQUIRE(!toks.empty());
    for (int id : toks) {
      CHECK(id >= 0);
      CHECK(id < vocab_size);
    }
  }
  CHECK(render_answer_tokens(0) ==
        std::vector<int>{vocab_id("yes"), vocab_id("it"), vocab_id("is")});
  CHECK(render_answer_tokens(1) ==
        std::vector<int>{vocab_id("no"), vocab_id("it"), vocab_id("is"), vocab_id("not")});
  CHECK_THROWS(render_answer_tokens(-1));
  CHECK_THROWS(render_answer_tokens(kNumAnswerClasses));
}

TEST_CASE("dataset generation rotates kinds and reproduces itself") {
  GenConfig cfg;
  cfg.count = 64;
  cfg.master_seed = 11;
  cfg.scene.grid = 12;
  std::vector<DatasetItem> items = generate_dataset(cfg);
  REQUIRE(items.size() == 64);
  for (int i = 0; i < 64; i++) {
    CHECK(items[i].qa.kind == static_cast<QAKind>(i % kNumQAKinds));
    CHECK(items[i].scene.grid == 12);
  }
  std::vector<DatasetItem> again = generate_dataset(cfg);
  for (int i = 0; i < 64; i++) {
    CHECK(items[i].scene.seed == again[i].scene.seed);
    CHECK(items[i].qa.answer == again[i].qa.answer);
    CHECK(items[i].qa.question_ids == again[i].qa.question_ids);
  }
  CHECK(generate_item(cfg, 3).scene.seed == items[3].scene.seed);

  GenConfig bad = cfg;
  bad.count = 0;
  CHECK_THROWS(generate_dataset(bad));
}

TEST_CASE("dataset files round-trip byte for byte") {
  GenConfig cfg;
  cfg.count = 24;
  cfg.master_seed = 13;
  cfg.scene.grid = 10;
  std::vector<DatasetItem> items = generate_dataset(cfg);

  const auto path_a = temp_file("hop_test_ds_a.jsonl");
  const auto path_b = temp_file("hop_test_ds_b.jsonl");
  save_dataset(path_a.string(), items);
  std::vector<DatasetItem> loaded = load_dataset(path_a.string());
  REQUIRE(loaded.size() == items.size());
  for (size_t i = 0; i < items.size(); i++) {
    CHECK(loaded[i].scene.seed == items[i].scene.seed);
    CHECK(loaded[i].scene.grid == items[i].scene.grid);
    CHECK(loaded[i].scene.weather == items[i].scene.weather);
    CHECK(loaded[i].scene.lighting == items[i].scene.lighting);
    REQUIRE(loaded[i].scene.instances.size() == items[i].scene.instances.size());
    for (size_t j = 0; j < items[i].scene.instances.size(); j++) {
      CHECK(loaded[i].scene.instances[j].cls == items[i].scene.instances[j].cls);
      CHECK(loaded[i].scene.instances[j].attribute == items[i].scene.instances[j].attribute);
      CHECK(loaded[i].scene.instances[j].cells == items[i].scene.instances[j].cells);
    }
    CHECK(loaded[i].qa.kind == items[i].qa.kind);
    CHECK(loaded[i].qa.question_ids == items[i].qa.question_ids);
    CHECK(loaded[i].qa.answer == items[i].qa.answer);
    CHECK(loaded[i].qa.arg1 == items[i].qa.arg1);
    CHECK(loaded[i].qa.arg2 == items[i].qa.arg2);
  }
  save_dataset(path_b.string(), loaded);
  CHECK(slurp(path_a) == slurp(path_b));
  std::filesystem::remove(path_a);
  std::filesystem::remove(path_b);
}

TEST_CASE("loader errors carry line numbers") {
  const auto path = temp_file("hop_test_ds_bad.jsonl");
  {
    GenConfig cfg;
    cfg.count = 1;
    cfg.scene.grid = 10;
    save_dataset(path.string(), generate_dataset(cfg));
    std::ofstream app(path, std::ios::app | std::ios::binary);
    app << "this is not json\n";
  }
  bool threw = false;
  try {
    load_dataset(path.string());
  } catch (const std::exception& e) {
    threw = true;
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK(threw);

  {
    std::ofstream out(path, std::ios::binary);
    out << "{\"v\":2}\n";
  }
  threw = false;
  try {
    load_dataset(path.string());
  } catch (const std::exception& e) {
    threw = true;
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  CHECK(threw);

  CHECK_THROWS(load_dataset((std::filesystem::temp_directory_path() / "hop_missing.jsonl").string()));
  std::filesystem::remove(path);
}
