#include "phytosub/normalize.hpp"

#include <algorithm>
#include <cstdint>
#include <set>
#include <unordered_map>

#include "phytosub/csv.hpp"
#include "phytosub/error.hpp"

namespace phytosub::normalize {

namespace {

// Decodes one UTF-8 codepoint starting at i; invalid bytes decode as
// U+FFFD and consume a single byte.
std::uint32_t decode_utf8(const std::string_view s, std::size_t& i) {
  unsigned char b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int extra = 0;
  std::uint32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    cp = b0 & 0x1F;
    extra = 1;
  } else if ((b0 & 0xF0) == 0xE0) {
    cp = b0 & 0x0F;
    extra = 2;
  } else if ((b0 & 0xF8) == 0xF0) {
    cp = b0 & 0x07;
    extra = 3;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + static_cast<std::size_t>(extra) >= s.size()) {
    // truncated sequence
    ++i;
    return 0xFFFD;
  }
  for (int k = 1; k <= extra; ++k) {
    unsigned char b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += static_cast<std::size_t>(extra) + 1;
  return cp;
}

bool is_fraction_glyph(std::uint32_t cp) {
  return (cp >= 0x00BC && cp <= 0x00BE) ||  // ¼ ½ ¾
         (cp >= 0x2150 && cp <= 0x215F) ||  // ⅐..⅟
         cp == 0x2044;                      // fraction slash
}

// Latin diacritic fold, both cases mapped to lowercase ASCII. Typographic
// punctuation maps to its ASCII counterpart so R5 can handle it.
const std::unordered_map<std::uint32_t, const char*>& fold_table() {
  static const std::unordered_map<std::uint32_t, const char*> table = {
      {0x00C0, "a"}, {0x00C1, "a"}, {0x00C2, "a"}, {0x00C3, "a"},
      {0x00C4, "a"}, {0x00C5, "a"}, {0x00C6, "ae"}, {0x00C7, "c"},
      {0x00C8, "e"}, {0x00C9, "e"}, {0x00CA, "e"}, {0x00CB, "e"},
      {0x00CC, "i"}, {0x00CD, "i"}, {0x00CE, "i"}, {0x00CF, "i"},
      {0x00D0, "d"}, {0x00D1, "n"}, {0x00D2, "o"}, {0x00D3, "o"},
      {0x00D4, "o"}, {0x00D5, "o"}, {0x00D6, "o"}, {0x00D8, "o"},
      {0x00D9, "u"}, {0x00DA, "u"}, {0x00DB, "u"}, {0x00DC, "u"},
      {0x00DD, "y"}, {0x00DF, "ss"},
      {0x00E0, "a"}, {0x00E1, "a"}, {0x00E2, "a"}, {0x00E3, "a"},
      {0x00E4, "a"}, {0x00E5, "a"}, {0x00E6, "ae"}, {0x00E7, "c"},
      {0x00E8, "e"}, {0x00E9, "e"}, {0x00EA, "e"}, {0x00EB, "e"},
      {0x00EC, "i"}, {0x00ED, "i"}, {0x00EE, "i"}, {0x00EF, "i"},
      {0x00F0, "d"}, {0x00F1, "n"}, {0x00F2, "o"}, {0x00F3, "o"},
      {0x00F4, "o"}, {0x00F5, "o"}, {0x00F6, "o"}, {0x00F8, "o"},
      {0x00F9, "u"}, {0x00FA, "u"}, {0x00FB, "u"}, {0x00FC, "u"},
      {0x00FD, "y"}, {0x00FF, "y"},
      {0x0100, "a"}, {0x0101, "a"}, {0x0102, "a"}, {0x0103, "a"},
      {0x0104, "a"}, {0x0105, "a"}, {0x0106, "c"}, {0x0107, "c"},
      {0x0108, "c"}, {0x0109, "c"}, {0x010C, "c"}, {0x010D, "c"},
      {0x010E, "d"}, {0x010F, "d"}, {0x0110, "d"}, {0x0111, "d"},
      {0x0112, "e"}, {0x0113, "e"}, {0x0116, "e"}, {0x0117, "e"},
      {0x0118, "e"}, {0x0119, "e"}, {0x011A, "e"}, {0x011B, "e"},
      {0x011E, "g"}, {0x011F, "g"}, {0x0120, "g"}, {0x0121, "g"},
      {0x0122, "g"}, {0x0123, "g"}, {0x0128, "i"}, {0x0129, "i"},
      {0x012A, "i"}, {0x012B, "i"}, {0x012E, "i"}, {0x012F, "i"},
      {0x0130, "i"}, {0x0131, "i"}, {0x0136, "k"}, {0x0137, "k"},
      {0x0139, "l"}, {0x013A, "l"}, {0x013B, "l"}, {0x013C, "l"},
      {0x013D, "l"}, {0x013E, "l"}, {0x0141, "l"}, {0x0142, "l"},
      {0x0143, "n"}, {0x0144, "n"}, {0x0145, "n"}, {0x0146, "n"},
      {0x0147, "n"}, {0x0148, "n"}, {0x014C, "o"}, {0x014D, "o"},
      {0x0150, "o"}, {0x0151, "o"}, {0x0152, "oe"}, {0x0153, "oe"},
      {0x0154, "r"}, {0x0155, "r"}, {0x0158, "r"}, {0x0159, "r"},
      {0x015A, "s"}, {0x015B, "s"}, {0x015C, "s"}, {0x015D, "s"},
      {0x015E, "s"}, {0x015F, "s"}, {0x0160, "s"}, {0x0161, "s"},
      {0x0162, "t"}, {0x0163, "t"}, {0x0164, "t"}, {0x0165, "t"},
      {0x0168, "u"}, {0x0169, "u"}, {0x016A, "u"}, {0x016B, "u"},
      {0x016E, "u"}, {0x016F, "u"}, {0x0170, "u"}, {0x0171, "u"},
      {0x0172, "u"}, {0x0173, "u"}, {0x0174, "w"}, {0x0175, "w"},
      {0x0176, "y"}, {0x0177, "y"}, {0x0178, "y"}, {0x0179, "z"},
      {0x017A, "z"}, {0x017B, "z"}, {0x017C, "z"}, {0x017D, "z"},
      {0x017E, "z"},
      {0x2018, "'"}, {0x2019, "'"}, {0x201A, "'"}, {0x201C, "\""},
      {0x201D, "\""}, {0x2013, "-"}, {0x2014, "-"},
  };
  return table;
}

std::string apply_r1_lowercase(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string apply_r2_digits(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t start = i;
    std::uint32_t cp = decode_utf8(s, i);
    if ((cp >= '0' && cp <= '9') || is_fraction_glyph(cp)) continue;
    out.append(s, start, i - start);
  }
  return out;
}

std::string apply_r3_fold(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  const auto& table = fold_table();
  std::size_t i = 0;
  while (i < s.size()) {
    std::uint32_t cp = decode_utf8(s, i);
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
      continue;
    }
    auto it = table.find(cp);
    if (it != table.end()) {
      out += it->second;
    }
    // unmapped non-ASCII is eliminated
  }
  return out;
}

std::string apply_r4_ampersand(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '&') out += " and ";
    else out.push_back(c);
  }
  return out;
}

std::string apply_r5_punctuation(const std::string& s) {
  static const std::string deleted = ".,;:!?()[]{}\"'";
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (deleted.find(c) != std::string::npos) continue;
    if (c == '-' || c == '/') {
      out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string apply_r6_whitespace(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
        c == '\v') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> split_tokens(std::string_view s) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < s.size()) {
    std::size_t end = s.find(' ', start);
    if (end == std::string_view::npos) end = s.size();
    if (end > start) tokens.emplace_back(s.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string fold_plural_token(const std::string& token,
                              const std::vector<std::string>& exceptions) {
  if (std::find(exceptions.begin(), exceptions.end(), token) !=
      exceptions.end()) {
    return token;
  }
  if (ends_with(token, "ies")) {
    return token.substr(0, token.size() - 3) + "y";
  }
  if (ends_with(token, "oes")) {
    return token.substr(0, token.size() - 2);
  }
  if (ends_with(token, "es")) {
    std::string_view stem(token.data(), token.size() - 2);
    if (ends_with(stem, "s") || ends_with(stem, "x") || ends_with(stem, "z") ||
        ends_with(stem, "ch") || ends_with(stem, "sh")) {
      return token.substr(0, token.size() - 2);
    }
  }
  if (token.size() > 3 && token.back() == 's') {
    return token.substr(0, token.size() - 1);
  }
  return token;
}

}  // namespace

const RuleTable& RuleTable::defaults() {
  static const RuleTable table = {
      {
          {"R1", "lowercase ASCII letters"},
          {"R2", "delete decimal digits and fraction glyphs"},
          {"R3", "fold Latin diacritics to ASCII; drop other non-ASCII"},
          {"R4", "rewrite '&' to 'and'"},
          {"R5", "delete .,;:!?()[]{}\"' and rewrite '-'/'/' to space"},
          {"R6", "collapse whitespace runs and trim"},
      },
      {"couscous", "hummus", "asparagus", "molasses", "swiss"},
  };
  return table;
}

RuleTable RuleTable::from_json(const nlohmann::json& config) {
  RuleTable table = defaults();
  for (const auto& [key, value] : config.items()) {
    if (key == "rules") {
      table.rules.clear();
      for (const auto& id : value) {
        const std::string rule_id = id.get<std::string>();
        bool known = false;
        for (const auto& rule : defaults().rules) {
          if (rule.id == rule_id) {
            table.rules.push_back(rule);
            known = true;
            break;
          }
        }
        if (!known) {
          throw Error(Errc::bad_config, "unknown normalization rule: " + rule_id);
        }
      }
    } else if (key == "plural_exceptions") {
      table.plural_exceptions = value.get<std::vector<std::string>>();
      for (auto& word : table.plural_exceptions) {
        word = apply_r1_lowercase(word);
      }
    } else {
      throw Error(Errc::bad_config, "unknown rule table key: " + key);
    }
  }
  return table;
}

std::string normalize_name(std::string_view raw, const RuleTable& rules) {
  std::string current(raw);
  for (const auto& rule : rules.rules) {
    if (rule.id == "R1") current = apply_r1_lowercase(current);
    else if (rule.id == "R2") current = apply_r2_digits(current);
    else if (rule.id == "R3") current = apply_r3_fold(current);
    else if (rule.id == "R4") current = apply_r4_ampersand(current);
    else if (rule.id == "R5") current = apply_r5_punctuation(current);
    else if (rule.id == "R6") current = apply_r6_whitespace(current);
    else throw Error(Errc::bad_config, "unknown normalization rule: " + rule.id);
  }
  return current;
}

std::string fold_plural(std::string_view normalized, const RuleTable& rules) {
  auto tokens = split_tokens(normalized);
  std::string out;
  for (const auto& token : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += fold_plural_token(token, rules.plural_exceptions);
  }
  return out;
}

CuratedGroups CuratedGroups::load(const std::filesystem::path& csv_path,
                                  const RuleTable& rules) {
  auto rows = csv::read_file(csv_path);
  if (rows.empty()) {
    return CuratedGroups();
  }
  if (rows[0].size() < 2 || rows[0][0] != "group_id" || rows[0][1] != "member") {
    throw Error(Errc::malformed_line,
                "curated group file must start with header group_id,member: " +
                    csv_path.string());
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 2) {
      throw Error(Errc::malformed_line,
                  "curated group row " + std::to_string(i + 1) +
                      " must have exactly two fields");
    }
    pairs.emplace_back(rows[i][0], rows[i][1]);
  }
  return from_rows(pairs, rules);
}

CuratedGroups CuratedGroups::from_rows(
    const std::vector<std::pair<std::string, std::string>>& group_member_rows,
    const RuleTable& rules) {
  CuratedGroups curated;
  std::map<std::string, std::string> group_of_member;  // folded member -> group
  for (const auto& [group_id, raw_member] : group_member_rows) {
    std::string member = normalize_name(raw_member, rules);
    if (member.empty()) {
      throw Error(Errc::malformed_line,
                  "curated member normalizes to empty: \"" + raw_member + "\"");
    }
    std::string key = fold_plural(member, rules);
    auto [it, inserted] = group_of_member.emplace(key, group_id);
    if (!inserted && it->second != group_id) {
      throw Error(Errc::curated_conflict,
                  "name appears in two curated groups: " + member);
    }
    auto& members = curated.groups_[group_id];
    if (std::find(members.begin(), members.end(), member) == members.end()) {
      members.push_back(member);
    }
  }
  for (auto& [id, members] : curated.groups_) {
    std::sort(members.begin(), members.end());
  }
  return curated;
}

IngredientClustering cluster_ingredients(
    const std::vector<std::string>& normalized_names,
    const CuratedGroups& curated, const RuleTable& rules) {
  // Entities are the input names plus every curated member, keyed by their
  // plural-folded form; a union-find over keys merges curated groups.
  std::set<std::string> entities(normalized_names.begin(),
                                 normalized_names.end());
  for (const auto& [group_id, members] : curated.groups()) {
    entities.insert(members.begin(), members.end());
  }
  entities.erase("");

  std::map<std::string, std::string> parent;  // key -> representative key
  auto find = [&parent](std::string key) {
    while (parent[key] != key) {
      parent[key] = parent[parent[key]];
      key = parent[key];
    }
    return key;
  };
  auto unite = [&](const std::string& a, const std::string& b) {
    std::string ra = find(a), rb = find(b);
    if (ra != rb) parent[std::min(ra, rb)] = std::max(ra, rb);
  };

  std::map<std::string, std::vector<std::string>> names_by_key;
  for (const auto& name : entities) {
    std::string key = fold_plural(name, rules);
    if (!parent.count(key)) parent[key] = key;
    names_by_key[key].push_back(name);
  }
  for (const auto& [group_id, members] : curated.groups()) {
    for (std::size_t i = 1; i < members.size(); ++i) {
      unite(fold_plural(members[0], rules), fold_plural(members[i], rules));
    }
  }

  std::map<std::string, std::vector<std::string>> members_by_root;
  for (const auto& [key, names] : names_by_key) {
    auto& bucket = members_by_root[find(key)];
    bucket.insert(bucket.end(), names.begin(), names.end());
  }

  IngredientClustering clustering;
  clustering.rules_ = rules;
  for (auto& [root, members] : members_by_root) {
    std::sort(members.begin(), members.end());
    const std::string& id = members.front();
    clustering.members_by_id_[id] = members;
    for (const auto& name : members) {
      clustering.id_by_key_[fold_plural(name, rules)] = id;
    }
  }
  return clustering;
}

std::string IngredientClustering::cluster_of(std::string_view name) const {
  std::string key = fold_plural(normalize_name(name, rules_), rules_);
  auto it = id_by_key_.find(key);
  return it != id_by_key_.end() ? it->second : key;
}

bool IngredientClustering::same_cluster(std::string_view a,
                                        std::string_view b) const {
  return cluster_of(a) == cluster_of(b);
}

nlohmann::json IngredientClustering::to_json() const {
  nlohmann::json clusters = nlohmann::json::object();
  for (const auto& [id, members] : members_by_id_) {
    clusters[id] = members;
  }
  return nlohmann::json{{"clusters", clusters}};
}

bool same_cluster(std::string_view a, std::string_view b,
                  const IngredientClustering& clustering) {
  return clustering.same_cluster(a, b);
}

}  // namespace phytosub::normalize
