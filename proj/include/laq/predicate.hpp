#pragma once

#include <algorithm>
#include <cstdint>
#include <variant>
#include <vector>

#include "laq/error.hpp"

namespace laq {

// Filter predicate over a single column: comparisons, between, or set
// membership. Constants are typed at construction; applying an integer
// predicate to a float column (or vice versa) is a TypeError. Conjunctions
// are expressed by AND-ing the resulting selection masks.
class Predicate {
 public:
  enum class Kind { Lt, Le, Eq, Ge, Gt, Between, InSet };

  static Predicate lt(std::int64_t v) { return {Kind::Lt, v, {}}; }
  static Predicate le(std::int64_t v) { return {Kind::Le, v, {}}; }
  static Predicate eq(std::int64_t v) { return {Kind::Eq, v, {}}; }
  static Predicate ge(std::int64_t v) { return {Kind::Ge, v, {}}; }
  static Predicate gt(std::int64_t v) { return {Kind::Gt, v, {}}; }
  static Predicate lt(double v) { return {Kind::Lt, v, {}}; }
  static Predicate le(double v) { return {Kind::Le, v, {}}; }
  static Predicate eq(double v) { return {Kind::Eq, v, {}}; }
  static Predicate ge(double v) { return {Kind::Ge, v, {}}; }
  static Predicate gt(double v) { return {Kind::Gt, v, {}}; }
  static Predicate between(std::int64_t lo, std::int64_t hi) { return {Kind::Between, lo, hi}; }
  static Predicate between(double lo, double hi) { return {Kind::Between, lo, hi}; }
  static Predicate in_set(std::vector<std::int64_t> vals);
  static Predicate in_set(std::vector<double> vals);

  Kind kind() const { return kind_; }
  bool is_integer() const { return integer_; }

  // Inclusive-both-ends for Between, per SQL BETWEEN.
  bool matches(std::int64_t v) const;
  bool matches(double v) const;

 private:
  using Value = std::variant<std::int64_t, double>;
  Predicate(Kind kind, Value lo, Value hi);
  template <typename T>
  bool eval(T v, T lo, T hi, const std::vector<T>& set) const;

  Kind kind_;
  bool integer_ = true;
  std::int64_t ilo_ = 0, ihi_ = 0;
  double flo_ = 0, fhi_ = 0;
  std::vector<std::int64_t> iset_;
  std::vector<double> fset_;
};

inline Predicate::Predicate(Kind kind, Value lo, Value hi) : kind_(kind) {
  integer_ = std::holds_alternative<std::int64_t>(lo);
  if (integer_) {
    ilo_ = std::get<std::int64_t>(lo);
    if (kind == Kind::Between) ihi_ = std::get<std::int64_t>(hi);
  } else {
    flo_ = std::get<double>(lo);
    if (kind == Kind::Between) fhi_ = std::get<double>(hi);
  }
}

inline Predicate Predicate::in_set(std::vector<std::int64_t> vals) {
  Predicate p{Kind::InSet, std::int64_t{0}, {}};
  std::sort(vals.begin(), vals.end());
  p.iset_ = std::move(vals);
  return p;
}

inline Predicate Predicate::in_set(std::vector<double> vals) {
  Predicate p{Kind::InSet, 0.0, {}};
  std::sort(vals.begin(), vals.end());
  p.fset_ = std::move(vals);
  return p;
}

template <typename T>
bool Predicate::eval(T v, T lo, T hi, const std::vector<T>& set) const {
  switch (kind_) {
    case Kind::Lt: return v < lo;
    case Kind::Le: return v <= lo;
    case Kind::Eq: return v == lo;
    case Kind::Ge: return v >= lo;
    case Kind::Gt: return v > lo;
    case Kind::Between: return v >= lo && v <= hi;
    case Kind::InSet: return std::binary_search(set.begin(), set.end(), v);
  }
  return false;
}

inline bool Predicate::matches(std::int64_t v) const {
  if (!integer_) throw TypeError("predicate constant is float, column is integer");
  return eval(v, ilo_, ihi_, iset_);
}

inline bool Predicate::matches(double v) const {
  if (integer_) throw TypeError("predicate constant is integer, column is float");
  return eval(v, flo_, fhi_, fset_);
}

}  // namespace laq
