#include "smm/regime.hpp"

#include <cctype>

#include "smm/errors.hpp"

namespace smm {
namespace {

[[noreturn]] void fail(std::size_t index, const std::string& message) {
  throw InputError("regime syntax error at position " + std::to_string(index + 1) + ": " + message);
}

bool is_action(char c) { return c == 'C' || c == 'U' || c == 'Q' || c == 'M'; }

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > kMaxRegimeLength * 4 / a) return kMaxRegimeLength + 1;
  return a * b;
}

struct Counts {
  std::uint64_t length = 0;
  std::uint64_t m = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  std::vector<Regime::Term> word(bool nested) {
    std::vector<Regime::Term> out;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ')') {
        if (!nested) fail(pos_, "unbalanced ')'");
        break;
      }
      if (c == '(') {
        const std::size_t open = pos_++;
        Regime::Term term;
        term.body = word(true);
        if (pos_ >= text_.size()) fail(pos_, "missing ')' for '(' at position " + std::to_string(open + 1));
        if (term.body.empty()) fail(pos_, "empty group");
        ++pos_;
        if (pos_ >= text_.size() || text_[pos_] != '^') fail(pos_, "expected '^' after group");
        ++pos_;
        term.repeat = integer();
        out.push_back(std::move(term));
        continue;
      }
      if (is_action(c)) {
        ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '^') fail(pos_, "'^' must follow a parenthesized group");
        Regime::Term term;
        term.action = static_cast<Action>(c);
        out.push_back(std::move(term));
        continue;
      }
      fail(pos_, std::string("unexpected character '") + c + "'");
    }
    return out;
  }

  std::size_t position() const { return pos_; }

 private:
  std::uint64_t integer() {
    const std::size_t start = pos_;
    if (pos_ < text_.size() && text_[pos_] == '-') fail(pos_, "exponent must be positive");
    std::uint64_t value = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      value = value * 10 + static_cast<std::uint64_t>(text_[pos_] - '0');
      if (value > kMaxRegimeLength) fail(start, "exponent too large");
      ++pos_;
    }
    if (pos_ == start) fail(pos_, "expected an exponent");
    if (value == 0) fail(start, "exponent must be positive");
    return value;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

Counts count(const std::vector<Regime::Term>& terms) {
  Counts total;
  for (const auto& t : terms) {
    Counts part;
    if (t.group()) {
      part = count(t.body);
    } else {
      part.length = 1;
      part.m = t.action == Action::M ? 1 : 0;
    }
    total.length += saturating_mul(part.length, t.repeat);
    total.m += saturating_mul(part.m, t.repeat);
    if (total.length > kMaxRegimeLength) total.length = kMaxRegimeLength + 1;
  }
  return total;
}

void expand_into(const std::vector<Regime::Term>& terms, std::vector<Action>& out) {
  for (const auto& t : terms) {
    for (std::uint64_t r = 0; r < t.repeat; ++r) {
      if (t.group()) {
        expand_into(t.body, out);
      } else {
        out.push_back(t.action);
      }
    }
  }
}

}  // namespace

Regime parse_regime(std::string_view text) {
  Parser parser(text);
  Regime regime;
  regime.terms_ = parser.word(false);
  if (regime.terms_.empty()) throw InputError("regime is empty");
  const Counts counts = count(regime.terms_);
  if (counts.length > kMaxRegimeLength)
    throw InputError("regime expands to more than " + std::to_string(kMaxRegimeLength) + " actions");
  if (counts.m == 0) throw InputError("regime must contain at least one M action");
  regime.text_ = std::string(text);
  regime.length_ = counts.length;
  regime.m_count_ = counts.m;
  return regime;
}

std::vector<Action> Regime::expand() const {
  std::vector<Action> out;
  out.reserve(static_cast<std::size_t>(length_));
  expand_into(terms_, out);
  return out;
}

Regime::Cursor::Cursor(const Regime& regime) { stack_.push_back({&regime.terms_, 0, 1}); }

bool Regime::Cursor::next(Action& out) {
  while (!stack_.empty()) {
    Frame& top = stack_.back();
    if (top.position == top.terms->size()) {
      if (--top.remaining == 0) {
        stack_.pop_back();
        if (!stack_.empty()) ++stack_.back().position;
      } else {
        top.position = 0;
      }
      continue;
    }
    const Term& term = (*top.terms)[top.position];
    if (term.group()) {
      stack_.push_back({&term.body, 0, term.repeat});
      continue;
    }
    out = term.action;
    ++top.position;
    return true;
  }
  return false;
}

}  // namespace smm
