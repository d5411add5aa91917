#pragma once

#include <random>
#include <string>
#include <vector>

// Shared input generators for the normalization property suites.
namespace generators {

// Mixed ASCII, punctuation, digits, and multibyte codepoints, all valid UTF-8.
inline std::string random_string(std::mt19937& rng) {
  static const std::vector<std::string> pool = {
      "a", "b", "c", "d", "e", "z", "A", "B", "Q", "Z", "0", "1", "7", "9",
      " ", "  ", "\t", "\n", ".", ",", ";", ":", "!", "?", "(", ")", "[", "]",
      "{", "}", "\"", "'", "-", "/", "&", "_", "+", "=", "%",
      "é", "ñ", "ü", "ç", "Á", "ß", "œ", "½", "⅓", "¾", "—", "’", "“",
      "日", "🍅",
  };
  std::uniform_int_distribution<std::size_t> length(0, 40);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::string out;
  const std::size_t n = length(rng);
  for (std::size_t i = 0; i < n; ++i) out += pool[pick(rng)];
  return out;
}

// Lowercase alphabetic names whose regular "+s" plural folds back onto them:
// at least three letters, not ending in 's', and not ending in the suffixes
// the es/ies/oes rules would reinterpret ("ie", "oe", "se", "xe", "ze",
// "che", "she").
inline std::string random_safe_name(std::mt19937& rng) {
  std::uniform_int_distribution<int> letter('a', 'z');
  std::uniform_int_distribution<std::size_t> length(3, 10);
  auto bad_tail = [](const std::string& name) {
    if (name.back() == 's') return true;
    auto ends = [&name](const char* suffix) {
      std::string_view sv(suffix);
      return name.size() >= sv.size() &&
             name.compare(name.size() - sv.size(), sv.size(), sv) == 0;
    };
    return ends("ie") || ends("oe") || ends("se") || ends("xe") || ends("ze") ||
           ends("che") || ends("she");
  };
  while (true) {
    std::string name;
    const std::size_t n = length(rng);
    for (std::size_t i = 0; i < n; ++i) {
      name.push_back(static_cast<char>(letter(rng)));
    }
    if (!bad_tail(name)) return name;
  }
}

// Deterministic in-place Fisher-Yates; avoids std::shuffle so the result is
// identical on every standard library.
template <typename T>
void shuffle(std::vector<T>& values, std::mt19937& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(values[i - 1], values[pick(rng)]);
  }
}

}  // namespace generators
