#pragma once

// Deterministic restaurant-review style corpus in SemEval form. Used where the
// official SemEval files are not available: every sentence pairs aspect terms
// with opinion words, two-aspect sentences carry independent polarities, and a
// fixed fraction of labels is flipped so the task is not trivially separable.

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dlcf/dataset.hpp"
#include "dlcf/example.hpp"
#include "dlcf/tokenizer.hpp"

namespace dlcf::testing {

struct SyntheticCorpusOptions {
  std::size_t annotations = 1000;
  std::uint64_t seed = 2014;
  // Class mix of the clean labels: positive, negative, neutral.
  std::array<double, 3> class_weights{0.60, 0.22, 0.18};
  double label_noise = 0.08;
  double two_aspect_fraction = 0.35;
};

inline std::vector<RawAnnotation> synthetic_restaurant_corpus(const SyntheticCorpusOptions& opt) {
  static const std::vector<std::string> aspects = {
      "food",   "service", "staff",   "pasta",  "pizza",   "wine list", "ambience", "prices",
      "menu",   "dessert", "waiter",  "decor",  "sushi",   "bread",     "coffee",   "portions",
      "music",  "salad",   "manager", "tables", "seafood", "drinks",    "view",     "steak"};
  static const std::vector<std::string> positive = {
      "great", "delicious", "excellent", "friendly", "amazing", "perfect", "wonderful", "fresh"};
  static const std::vector<std::string> negative = {
      "terrible", "slow", "rude", "bland", "awful", "overpriced", "cold", "disappointing"};
  static const std::vector<std::string> neutral = {"ordinary", "standard", "typical", "average"};
  static const std::vector<std::string> openers = {"the", "honestly the", "i thought the",
                                                   "we found the", "overall the"};
  static const std::vector<std::string> fillers = {
      "although i have to say that after a long wait on a busy friday night",
      "but when we came back again the next weekend with some friends",
      "while on the other hand and to be completely fair about it",
      "yet as my sister pointed out later that evening over coffee"};

  std::mt19937_64 rng(opt.seed);
  std::discrete_distribution<int> cls(opt.class_weights.begin(), opt.class_weights.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = [&](const std::vector<std::string>& v) -> const std::string& {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  auto opinion = [&](int c) -> const std::string& {
    return c == 0 ? pick(positive) : c == 1 ? pick(negative) : pick(neutral);
  };
  auto noisy = [&](int c) {
    if (unit(rng) < opt.label_noise) c = (c + 1 + static_cast<int>(unit(rng) * 2.0)) % 3;
    return static_cast<Polarity>(c);
  };

  std::vector<RawAnnotation> out;
  std::size_t sentence_no = 0;
  while (out.size() < opt.annotations) {
    const std::string id = "S" + std::to_string(++sentence_no);
    const bool two = out.size() + 1 < opt.annotations && unit(rng) < opt.two_aspect_fraction;
    std::string text = pick(openers) + " ";
    std::vector<RawAnnotation> here;

    auto add_clause = [&](const std::string& aspect, int c) {
      RawAnnotation r;
      r.sentence_id = id;
      r.term = aspect;
      r.char_from = utf8_length(text);
      r.char_to = r.char_from + utf8_length(aspect);
      r.polarity = noisy(c);
      text += aspect + (aspect.back() == 's' ? " were " : " was ") + opinion(c);
      here.push_back(r);
    };

    const std::string& a = pick(aspects);
    add_clause(a, cls(rng));
    if (two) {
      std::string b = pick(aspects);
      while (b == a) b = pick(aspects);
      text += " , " + pick(fillers) + " the ";
      add_clause(b, cls(rng));
    }
    text += " .";
    for (auto& r : here) {
      r.sentence = text;
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace dlcf::testing
