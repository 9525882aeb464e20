#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hop/scene.hpp"

namespace hop {

// Closed-world VQA over synthetic scenes: a small fixed vocabulary, four
// question kinds, and a 12-way answer classification head. Answers also have
// a templated rendering so n-gram metrics apply.

enum class QAKind { Presence, Count, Relation, Global };
inline constexpr int kNumQAKinds = 4;

const char* qa_kind_name(QAKind kind);
QAKind parse_qa_kind(const std::string& name);

struct HintMask {
  bool affinity = false;
  bool semantic = false;
  bool question = false;
};

// Hints a kind needs before its accuracy can rise above the no-hint floor.
HintMask required_hints(QAKind kind);

const std::vector<std::string>& vocabulary();
int vocab_id(const std::string& word);  // throws on unknown word

inline constexpr int kNumAnswerClasses = 12;
// yes no 0 1 2 3 4+ sunny rainy foggy day night
const std::vector<std::string>& answer_class_names();

int count_bin(int count);                  // 0..3 map to themselves, >=4 -> 4
int count_answer_class(int count);         // answer class for a count bin
double chance_accuracy(QAKind kind);       // uniform guess over valid answers

struct QAItem {
  QAKind kind = QAKind::Presence;
  std::vector<int> question_ids;
  int answer = 0;   // index into answer_class_names()
  int arg1 = -1;    // asked class, or weather/lighting selector for Global
  int arg2 = -1;    // second class for Relation
};

// Builds one question for the scene. The seed picks a target answer first and
// the template arguments are then searched deterministically, so answer
// frequencies stay balanced across a dataset.
QAItem make_qa(const Scene& scene, QAKind kind, std::uint64_t seed);

// Templated rendering of an answer class, used as reference and candidate
// text for n-gram scoring.
std::vector<int> render_answer_tokens(int answer_class);

}  // namespace hop
