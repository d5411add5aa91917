#pragma once

#include <stdexcept>
#include <string>

namespace phytosub {

// Error conditions surfaced by the library. Data-shaped problems map to
// exit code 2 in the CLI, endpoint problems to exit code 3.
enum class Errc {
  malformed_record,
  duplicate_id,
  unknown_split,
  io_failure,
  curated_conflict,
  recipe_mismatch,
  unparseable,
  empty_name,
  unknown_network,
  negative_score,
  duplicate_entry,
  malformed_line,
  empty_input,
  unresolvable_recipe,
  endpoint_unreachable,
  bad_config,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace phytosub
