#include "hop/qa.hpp"

#include <stdexcept>
#include <unordered_map>

#include "hop/rng.hpp"

namespace hop {

const char* qa_kind_name(QAKind kind) {
  switch (kind) {
    case QAKind::Presence: return "presence";
    case QAKind::Count: return "count";
    case QAKind::Relation: return "relation";
    case QAKind::Global: return "global";
  }
  throw std::runtime_error("qa_kind_name: bad kind");
}

QAKind parse_qa_kind(const std::string& name) {
  if (name == "presence") return QAKind::Presence;
  if (name == "count") return QAKind::Count;
  if (name == "relation") return QAKind::Relation;
  if (name == "global") return QAKind::Global;
  throw std::runtime_error("parse_qa_kind: unknown kind '" + name + "'");
}

HintMask required_hints(QAKind kind) {
  switch (kind) {
    case QAKind::Presence: return {false, true, false};
    case QAKind::Count: return {true, true, false};
    case QAKind::Relation: return {true, true, false};
    case QAKind::Global: return {false, false, false};
  }
  throw std::runtime_error("required_hints: bad kind");
}

const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> v = {
      "?",     "0",    "1",          "2",     "3",     "4+",  "a",    "adjacent", "are",
      "car",   "cyclist", "day",     "foggy", "how",   "is",  "it",   "lane",     "many",
      "night", "no",   "not",        "of",    "or",    "pedestrian", "rainy", "sign",
      "sunny", "the",  "them",       "there", "to",    "weather",    "what",  "yes"};
  return v;
}

int vocab_id(const std::string& word) {
  static const std::unordered_map<std::string, int> index = [] {
    std::unordered_map<std::string, int> m;
    const auto& v = vocabulary();
    for (int i = 0; i < static_cast<int>(v.size()); i++) m[v[i]] = i;
    return m;
  }();
  auto it = index.find(word);
  if (it == index.end()) throw std::runtime_error("vocab_id: unknown word '" + word + "'");
  return it->second;
}

const std::vector<std::string>& answer_class_names() {
  static const std::vector<std::string> v = {"yes",   "no",    "0",     "1",   "2",     "3",
                                             "4+",    "sunny", "rainy", "foggy", "day", "night"};
  return v;
}

int count_bin(int count) { return count >= 4 ? 4 : count; }

int count_answer_class(int count) { return 2 + count_bin(count); }

double chance_accuracy(QAKind kind) {
  switch (kind) {
    case QAKind::Presence: return 0.5;
    case QAKind::Count: return 0.2;
    case QAKind::Relation: return 0.5;
    case QAKind::Global: return 5.0 / 12.0;  // even mix of 3-way and 2-way templates
  }
  throw std::runtime_error("chance_accuracy: bad kind");
}

namespace {

std::vector<int> ids(const std::vector<std::string>& words) {
  std::vector<int> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(vocab_id(w));
  return out;
}

int pick(Rng& rng, const std::vector<int>& cand) {
  return cand[rng.uniform_int(0, static_cast<int>(cand.size()) - 1)];
}

}  // namespace

QAItem make_qa(const Scene& scene, QAKind kind, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x5141u));
  QAItem qa;
  qa.kind = kind;
  const auto& cls = class_names();
  switch (kind) {
    case QAKind::Presence: {
      bool want_yes = rng.uniform_int(0, 1) == 1;
      std::vector<int> cand;
      for (int flip = 0; flip < 2 && cand.empty(); flip++, want_yes = !want_yes)
        for (int c = 0; c < kNumClasses; c++)
          if (class_present(scene, c) == want_yes) cand.push_back(c);
      want_yes = !want_yes;  // undo the loop's final toggle
      qa.arg1 = pick(rng, cand);
      qa.answer = want_yes ? 0 : 1;
      qa.question_ids = ids({"is", "there", "a", cls[qa.arg1], "?"});
      break;
    }
    case QAKind::Count: {
      const int target_bin = rng.uniform_int(0, 4);
      std::vector<int> cand;
      for (int off = 0; off < 5 && cand.empty(); off++) {
        const int bin = (target_bin + off) % 5;
        for (int c = 0; c < kNumClasses; c++)
          if (count_bin(count_class(scene, c)) == bin) cand.push_back(c);
      }
      qa.arg1 = pick(rng, cand);
      qa.answer = count_answer_class(count_class(scene, qa.arg1));
      qa.question_ids = ids({"how", "many", cls[qa.arg1], "?"});
      break;
    }
    case QAKind::Relation: {
      bool want_yes = rng.uniform_int(0, 1) == 1;
      std::vector<int> cand;  // encoded pair c1 * kNumClasses + c2, c1 <= c2
      for (int flip = 0; flip < 2 && cand.empty(); flip++, want_yes = !want_yes)
        for (int c1 = 0; c1 < kNumClasses; c1++)
          for (int c2 = c1; c2 < kNumClasses; c2++)
            if (classes_adjacent(scene, c1, c2) == want_yes)
              cand.push_back(c1 * kNumClasses + c2);
      want_yes = !want_yes;
      const int enc = pick(rng, cand);
      qa.arg1 = enc / kNumClasses;
      qa.arg2 = enc % kNumClasses;
      if (qa.arg1 != qa.arg2 && rng.uniform_int(0, 1) == 1) std::swap(qa.arg1, qa.arg2);
      qa.answer = want_yes ? 0 : 1;
      qa.question_ids =
          ids({"is", "a", cls[qa.arg1], "adjacent", "to", "a", cls[qa.arg2], "?"});
      break;
    }
    case QAKind::Global: {
      if (rng.uniform_int(0, 1) == 0) {
        qa.arg1 = 0;
        qa.answer = 7 + scene.weather;
        qa.question_ids = ids({"what", "is", "the", "weather", "?"});
      } else {
        qa.arg1 = 1;
        qa.answer = 10 + scene.lighting;
        qa.question_ids = ids({"is", "it", "day", "or", "night", "?"});
      }
      break;
    }
  }
  return qa;
}

std::vector<int> render_answer_tokens(int answer_class) {
  if (answer_class < 0 || answer_class >= kNumAnswerClasses)
    throw std::runtime_error("render_answer_tokens: answer class out of range");
  const std::string& word = answer_class_names()[answer_class];
  if (answer_class == 0) return ids({"yes", "it", "is"});
  if (answer_class == 1) return ids({"no", "it", "is", "not"});
  if (answer_class <= 6) return ids({"there", "are", word, "of", "them"});
  if (answer_class <= 9) return ids({"the", "weather", "is", word});
  return ids({"it", "is", word});
}

}  // namespace hop
