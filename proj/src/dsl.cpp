#include "crnlyap/dsl.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <utility>

namespace crnlyap {

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                         message),
      line_(line),
      column_(column),
      detail_(message) {}

std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

// Cursor over a single line; columns are 1-based.
class LineScanner {
 public:
  LineScanner(std::string_view text, int line) : text_(text), line_(line) {}

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  bool accept(std::string_view token) {
    skip_ws();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }
  void expect(std::string_view token) {
    if (!accept(token)) fail("expected '" + std::string(token) + "'");
  }
  std::string_view rest() {
    skip_ws();
    auto r = text_.substr(pos_);
    while (!r.empty() && std::isspace(static_cast<unsigned char>(r.back()))) r.remove_suffix(1);
    pos_ = text_.size();
    return r;
  }
  int column() {
    skip_ws();
    return static_cast<int>(pos_) + 1;
  }

  std::string name() {
    skip_ws();
    if (pos_ >= text_.size() || !is_name_start(text_[pos_])) fail("expected a name");
    const auto start = pos_;
    while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  long integer() {
    skip_ws();
    const auto start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected an integer");
    long value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc()) {
      pos_ = start;
      fail("integer out of range");
    }
    return value;
  }

  double real() {
    skip_ws();
    const auto start = pos_;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc() || ptr == text_.data() + pos_) fail("expected a number");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    if (pos_ < text_.size() && is_name_char(text_[pos_])) {
      pos_ = start;
      fail("malformed number");
    }
    return value;
  }

  [[noreturn]] void fail(const std::string& message) { throw ParseError(line_, column(), message); }
  [[noreturn]] void fail_at(int column, const std::string& message) { throw ParseError(line_, column, message); }

 private:
  std::string_view text_;
  int line_;
  std::size_t pos_ = 0;
};

struct RateRef {
  std::optional<double> literal;
  std::string symbol;
  int column = 0;
};

struct PendingReaction {
  std::vector<std::pair<std::string, long>> source;
  std::vector<std::pair<std::string, long>> product;
  RateRef rate;
  SourcePosition pos;
};

class Parser {
 public:
  NetworkDocument run(std::string_view text) {
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      ++line_no;
      auto line = text.substr(start, end - start);
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      parse_line(line, line_no);
      start = end + 1;
    }
    return finish();
  }

 private:
  void parse_line(std::string_view line, int line_no) {
    LineScanner s(line, line_no);
    if (s.at_end()) return;
    if (s.accept("species:")) {
      while (!s.at_end()) {
        const int col = s.column();
        const auto name = s.name();
        for (const auto& existing : header_species_) {
          if (existing == name) s.fail_at(col, "duplicate species '" + name + "'");
        }
        header_species_.push_back(name);
        note_species(name);
      }
      return;
    }
    if (s.accept("name:")) {
      auto rest = s.rest();
      if (rest.empty()) s.fail("expected a network name");
      doc_.name = std::string(rest);
      return;
    }
    if (s.accept("params:")) {
      do {
        const int col = s.column();
        const auto name = s.name();
        s.expect("=");
        const int value_col = s.column();
        const double value = s.real();
        if (doc_.parameters.count(name) != 0) s.fail_at(col, "duplicate parameter '" + name + "'");
        if (!(value > 0.0) || !std::isfinite(value)) {
          s.fail_at(value_col, "nonpositive rate for parameter '" + name + "'");
        }
        doc_.parameters.emplace(name, value);
      } while (s.accept(","));
      if (!s.at_end()) s.fail("expected ',' or end of line");
      return;
    }
    parse_reaction(s, line_no);
  }

  std::vector<std::pair<std::string, long>> parse_complex(LineScanner& s) {
    std::vector<std::pair<std::string, long>> terms;
    do {
      long coeff = 1;
      const int col = s.column();
      const bool has_coeff = std::isdigit(static_cast<unsigned char>(s.peek())) != 0;
      if (has_coeff) coeff = s.integer();
      if (has_coeff && coeff == 0 && terms.empty() && !is_name_start(s.peek()) && s.peek() != '+') {
        return terms;  // `0` is the empty complex
      }
      if (coeff <= 0) s.fail_at(col, "stoichiometric coefficient must be positive");
      const auto name = s.name();
      note_species(name);
      terms.emplace_back(name, coeff);
    } while (s.accept("+"));
    return terms;
  }

  RateRef parse_rate(LineScanner& s) {
    RateRef ref;
    ref.column = s.column();
    const char c = s.peek();
    if (is_name_start(c)) {
      ref.symbol = s.name();
    } else {
      ref.literal = s.real();
      if (!(*ref.literal > 0.0) || !std::isfinite(*ref.literal)) s.fail_at(ref.column, "nonpositive rate");
    }
    return ref;
  }

  void parse_reaction(LineScanner& s, int line_no) {
    SourcePosition pos{line_no, s.column()};
    auto lhs = parse_complex(s);
    bool reversible = false;
    if (s.accept("<->")) {
      reversible = true;
    } else if (!s.accept("->")) {
      s.fail("expected '->' or '<->'");
    }
    auto rhs = parse_complex(s);
    s.expect(";");
    auto forward = parse_rate(s);
    std::optional<RateRef> backward;
    if (s.accept(",")) {
      if (!reversible) s.fail("a second rate is only allowed for '<->'");
      backward = parse_rate(s);
    } else if (reversible) {
      s.fail("'<->' requires two rates");
    }
    if (!s.at_end()) s.fail("unexpected trailing input");
    pending_.push_back({lhs, rhs, forward, pos});
    if (backward) pending_.push_back({rhs, lhs, *backward, pos});
  }

  void note_species(const std::string& name) {
    for (const auto& existing : species_) {
      if (existing == name) return;
    }
    species_.push_back(name);
  }

  NetworkDocument finish() {
    const int d = static_cast<int>(species_.size());
    auto to_complex = [&](const std::vector<std::pair<std::string, long>>& terms) {
      Complex z = Complex::Zero(d);
      for (const auto& [name, coeff] : terms) {
        for (int i = 0; i < d; ++i) {
          if (species_[static_cast<std::size_t>(i)] == name) z[i] += static_cast<int>(coeff);
        }
      }
      return z;
    };
    std::vector<Reaction> reactions;
    std::vector<SourcePosition> positions;
    for (const auto& p : pending_) {
      double kappa = 0.0;
      if (p.rate.literal) {
        kappa = *p.rate.literal;
      } else {
        auto it = doc_.parameters.find(p.rate.symbol);
        if (it == doc_.parameters.end()) {
          throw ParseError(p.pos.line, p.rate.column, "undefined parameter '" + p.rate.symbol + "'");
        }
        kappa = it->second;
      }
      Reaction r{to_complex(p.source), to_complex(p.product), kappa};
      if (same_complex(r.source, r.product)) {
        throw ParseError(p.pos.line, p.pos.column, "reaction does not change the state");
      }
      bool duplicate = false;
      for (const auto& existing : reactions) {
        duplicate = duplicate || (same_complex(existing.source, r.source) && same_complex(existing.product, r.product));
      }
      if (!duplicate) positions.push_back(p.pos);
      reactions.push_back(std::move(r));
    }
    doc_.network = ReactionNetwork(species_, std::move(reactions));
    doc_.positions = std::move(positions);
    return std::move(doc_);
  }

  NetworkDocument doc_;
  std::vector<std::string> header_species_;
  std::vector<std::string> species_;
  std::vector<PendingReaction> pending_;
};

std::string format_complex(const ReactionNetwork& net, const Complex& z) {
  std::string out;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z[i] == 0) continue;
    if (!out.empty()) out += " + ";
    if (z[i] != 1) out += std::to_string(z[i]);
    out += net.species()[static_cast<std::size_t>(i)];
  }
  return out.empty() ? "0" : out;
}

}  // namespace

NetworkDocument parse_network(std::string_view text) { return Parser{}.run(text); }

std::string serialize_network(const NetworkDocument& doc) {
  const auto& net = doc.network;
  std::ostringstream out;
  if (doc.name) out << "name: " << *doc.name << '\n';
  if (!net.species().empty()) {
    out << "species:";
    for (const auto& s : net.species()) out << ' ' << s;
    out << '\n';
  }
  for (const auto& [name, value] : doc.parameters) {
    out << "params: " << name << " = " << format_real(value) << '\n';
  }
  for (const auto& r : net.reactions()) {
    out << format_complex(net, r.source) << " -> " << format_complex(net, r.product) << " ; "
        << format_real(r.kappa) << '\n';
  }
  return out.str();
}

}  // namespace crnlyap
