#pragma once

#include "crnlyap/network.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crnlyap {

// Line-oriented `.crn` format:
//
//   # comment
//   name: catalytic
//   species: A B
//   params: k1 = 1, k2 = 2
//   2A <-> A + B ; k1, k2
//   0 -> X ; 6
//
// `<->` needs two rates (forward, backward); `->` takes exactly one. A rate is
// a positive decimal literal or a name defined on a `params:` line anywhere in
// the file.

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);

  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& detail() const { return detail_; }

 private:
  int line_;
  int column_;
  std::string detail_;
};

struct SourcePosition {
  int line = 0;
  int column = 0;
};

struct NetworkDocument {
  ReactionNetwork network;
  std::optional<std::string> name;
  std::map<std::string, double> parameters;
  /// Position of the reaction line that introduced each network reaction
  /// (merged duplicates keep their first position).
  std::vector<SourcePosition> positions;
};

NetworkDocument parse_network(std::string_view text);

std::string serialize_network(const NetworkDocument& doc);

/// Shortest-safe decimal for a double: 17 significant digits.
std::string format_real(double value);

}  // namespace crnlyap
