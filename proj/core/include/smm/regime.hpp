#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace smm {

enum class Action : char { C = 'C', U = 'U', Q = 'Q', M = 'M' };

/// A parsed action program such as "(CUQM)^2000((CUQ)^5M)^1000".
///
/// Grammar: word := term+ ; term := action | '(' word ')' '^' integer.
class Regime {
 public:
  struct Term {
    Action action = Action::C;
    std::vector<Term> body;  ///< non-empty for groups
    std::uint64_t repeat = 1;
    bool group() const { return !body.empty(); }
  };

  const std::vector<Term>& terms() const { return terms_; }
  const std::string& text() const { return text_; }
  /// Number of actions in the expansion.
  std::uint64_t length() const { return length_; }
  /// Number of M actions in the expansion.
  std::uint64_t m_count() const { return m_count_; }

  /// Materializes the expansion. Intended for short programs.
  std::vector<Action> expand() const;

  /// Walks the expansion without materializing it.
  class Cursor {
   public:
    explicit Cursor(const Regime& regime);
    /// Writes the next action and returns true, or returns false at the end.
    bool next(Action& out);

   private:
    struct Frame {
      const std::vector<Term>* terms;
      std::size_t position;
      std::uint64_t remaining;  ///< repetitions left including the current one
    };
    std::vector<Frame> stack_;
  };

  Cursor cursor() const { return Cursor(*this); }

 private:
  friend Regime parse_regime(std::string_view text);
  std::vector<Term> terms_;
  std::string text_;
  std::uint64_t length_ = 0;
  std::uint64_t m_count_ = 0;
};

inline constexpr std::uint64_t kMaxRegimeLength = 1'000'000'000;

/// Throws InputError naming the 1-based character position on syntax
/// errors, non-positive exponents, programs without an M, and expansions
/// longer than kMaxRegimeLength.
Regime parse_regime(std::string_view text);

}  // namespace smm
