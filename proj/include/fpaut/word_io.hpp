#pragma once

#include <fpaut/errors.hpp>
#include <fpaut/words.hpp>

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fpaut {

namespace detail {

struct Cursor {
  std::string_view text;
  std::size_t pos = 0;

  bool done() const { return pos >= text.size(); }
  char peek() const { return done() ? '\0' : text[pos]; }

  void skip_space() {
    while (!done() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  Integer unsigned_number(const char* what) {
    const std::size_t start = pos;
    while (!done() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (start == pos) throw ParseError(start, std::string("expected ") + what);
    return Integer(std::string(text.substr(start, pos - start)));
  }

  Integer signed_number(const char* what) {
    bool negative = false;
    if (peek() == '-' || peek() == '+') {
      negative = peek() == '-';
      ++pos;
    }
    Integer v = unsigned_number(what);
    return negative ? Integer(-v) : v;
  }

  int small_index(const char* what) {
    const std::size_t start = pos;
    Integer v = unsigned_number(what);
    if (v < 1 || v > 1000000) throw ParseError(start, std::string(what) + " out of range");
    return v.convert_to<int>();
  }
};

}  // namespace detail

/// Parses the word grammar (`a<i>.<j>^<e>`, `x<l>^<e>`, whitespace separated) and reduces.
/// An empty string, or the single token `1`, denotes the identity.
inline Word parse_word(std::string_view text, const PresentationPtr& pres) {
  detail::Cursor cur{text};
  std::vector<Syllable> raw;
  cur.skip_space();
  if (cur.peek() == '1') {
    ++cur.pos;
    cur.skip_space();
    if (!cur.done()) throw ParseError(cur.pos, "unexpected text after identity");
    return Word(pres);
  }
  while (!cur.done()) {
    const std::size_t token_start = cur.pos;
    const char head = cur.peek();
    if (head == 'a') {
      ++cur.pos;
      const int factor = cur.small_index("factor index");
      if (cur.peek() != '.') throw ParseError(cur.pos, "expected '.' after factor index");
      ++cur.pos;
      const int coord = cur.small_index("generator index");
      Integer e = 1;
      if (cur.peek() == '^') {
        ++cur.pos;
        e = cur.signed_number("exponent");
      }
      if (factor > pres->factor_count())
        throw IndexOutOfRange("a" + std::to_string(factor) + " at " + std::to_string(token_start));
      if (coord > pres->rank(factor - 1))
        throw IndexOutOfRange("a" + std::to_string(factor) + "." + std::to_string(coord) + " at " +
                              std::to_string(token_start));
      IntVector v(static_cast<std::size_t>(pres->rank(factor - 1)), 0);
      v[static_cast<std::size_t>(coord - 1)] = e;
      raw.push_back(Syllable::factor(factor - 1, std::move(v)));
    } else if (head == 'x') {
      ++cur.pos;
      const int letter = cur.small_index("letter index");
      Integer e = 1;
      if (cur.peek() == '^') {
        ++cur.pos;
        e = cur.signed_number("exponent");
      }
      if (letter > pres->free_rank())
        throw IndexOutOfRange("x" + std::to_string(letter) + " at " + std::to_string(token_start));
      raw.push_back(Syllable::free(letter - 1, e));
    } else {
      throw ParseError(cur.pos, std::string("unexpected character '") + head + "'");
    }
    if (!cur.done() && !std::isspace(static_cast<unsigned char>(cur.peek())))
      throw ParseError(cur.pos, "expected whitespace between tokens");
    cur.skip_space();
  }
  return reduce(raw, pres);
}

/// Parses a generator name `a<i>.<j>` or `x<l>` into its generator number.
inline int parse_generator_name(std::string_view name, const Presentation& pres) {
  detail::Cursor cur{name};
  if (cur.peek() == 'a') {
    ++cur.pos;
    const int factor = cur.small_index("factor index");
    if (cur.peek() != '.') throw ParseError(cur.pos, "expected '.'");
    ++cur.pos;
    const int coord = cur.small_index("generator index");
    if (!cur.done()) throw ParseError(cur.pos, "trailing characters in generator name");
    if (factor > pres.factor_count() || coord > pres.rank(factor - 1))
      throw IndexOutOfRange("generator " + std::string(name));
    return pres.generator_index(factor - 1, coord - 1);
  }
  if (cur.peek() == 'x') {
    ++cur.pos;
    const int letter = cur.small_index("letter index");
    if (!cur.done()) throw ParseError(cur.pos, "trailing characters in generator name");
    if (letter > pres.free_rank()) throw IndexOutOfRange("generator " + std::string(name));
    return pres.free_generator_index(letter - 1);
  }
  throw ParseError(0, "generator names start with 'a' or 'x'");
}

}  // namespace fpaut
