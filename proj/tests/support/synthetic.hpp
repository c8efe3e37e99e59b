#pragma once

// Generator for large, well-formed .oapa modules used by the scale check.

#include <random>
#include <string>

#include "oapa/dsl.hpp"

namespace synthetic {

struct ScaleShape {
  int classes = 405;
  int object_properties = 61;
  int data_properties = 42;
  int individuals = 400;
  int defined = 60;        // equivalence axioms
  int existential = 120;   // extra GCIs with existential restrictions
};

/// Module text with exactly the requested numbers of declared entities.
/// Classes form a random forest; definitions mix existentials and ranges.
inline std::string module_text(std::uint32_t seed, const ScaleShape& s = {}) {
  std::mt19937 rng(seed);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  auto cls = [](int i) { return "C" + std::to_string(i); };
  auto op = [](int i) { return "p" + std::to_string(i); };
  auto dp = [](int i) { return "d" + std::to_string(i); };

  std::string out = "module Scale\n";
  for (int i = 0; i < s.object_properties; ++i) out += "objprop " + op(i) + "\n";
  for (int i = 0; i < s.data_properties; ++i) out += "dataprop " + dp(i) + " : decimal\n";
  out += "class C0\n";
  for (int i = 1; i < s.classes; ++i) out += "class " + cls(i) + " sub " + cls(pick(i)) + "\n";
  for (int k = 0; k < s.defined; ++k) {
    int named = s.classes - 1 - k;
    std::string rhs = cls(pick(s.classes / 2));
    if (k % 2 == 0) {
      rhs += " and " + op(pick(s.object_properties)) + " some " + cls(pick(s.classes));
    } else {
      int lo = pick(50);
      rhs += " and " + dp(pick(s.data_properties)) + " some [" + std::to_string(lo) + ", " +
             std::to_string(lo + 1 + pick(50)) + "]";
    }
    out += "class " + cls(named) + " equiv " + rhs + "\n";
  }
  for (int k = 0; k < s.existential; ++k)
    out += "sub " + op(pick(s.object_properties)) + " some " + cls(pick(s.classes)) + " sub " + cls(pick(s.classes)) +
           "\n";
  for (int i = 0; i < s.individuals; ++i) {
    std::string name = "i" + std::to_string(i);
    out += "ind " + name + " : " + cls(pick(s.classes)) + "\n";
    if (i > 0) out += "fact " + name + " " + op(pick(s.object_properties)) + " i" + std::to_string(pick(i)) + "\n";
    out += "data " + name + " " + dp(pick(s.data_properties)) + " " + std::to_string(pick(100)) + "\n";
  }
  return out;
}

}  // namespace synthetic
