#include "sad/matrix_game/payoff.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "sad/core/error.hpp"
#include "sad/matrix_game/solver.hpp"

namespace sad::matrix_game {

PayoffTensor default_payoff() {
  PayoffTensor t;
  for (int c1 = 0; c1 < kNumCards; ++c1) {
    for (int c2 = 0; c2 < kNumCards; ++c2) {
      const int answer = c1 == c2 ? 0 : 2;
      for (int a1 = 0; a1 < kNumActions; ++a1) {
        for (int a2 = 0; a2 < kNumActions; ++a2) {
          double v;
          if (a1 == kSafeAction) {
            v = a2 == kSafeAction ? 8.0 : 4.0;
          } else {
            v = a2 == answer ? 10.0 : 0.0;
          }
          t.at(c1, c2, a1, a2) = v;
        }
      }
    }
  }
  return t;
}

std::array<std::array<double, kNumActions>, kNumActions> expected_action_payoff(
    const PayoffTensor& tensor) {
  std::array<std::array<double, kNumActions>, kNumActions> out{};
  for (int a1 = 0; a1 < kNumActions; ++a1) {
    for (int a2 = 0; a2 < kNumActions; ++a2) {
      double sum = 0.0;
      for (int c1 = 0; c1 < kNumCards; ++c1) {
        for (int c2 = 0; c2 < kNumCards; ++c2) sum += tensor.at(c1, c2, a1, a2);
      }
      out[a1][a2] = sum / (kNumCards * kNumCards);
    }
  }
  return out;
}

std::vector<std::string> invariant_failures(const PayoffTensor& tensor) {
  std::vector<std::string> failed;
  for (double v : tensor.raw()) {
    if (!std::isfinite(v)) {
      failed.emplace_back("all entries finite");
      return failed;
    }
  }
  double max_entry = tensor.raw()[0];
  for (double v : tensor.raw()) max_entry = std::max(max_entry, v);

  bool safe_pays_8 = true;
  bool ten_everywhere = true;
  for (int c1 = 0; c1 < kNumCards; ++c1) {
    for (int c2 = 0; c2 < kNumCards; ++c2) {
      if (tensor.at(c1, c2, kSafeAction, kSafeAction) != 8.0) safe_pays_8 = false;
      bool has_ten = false;
      for (int a1 = 0; a1 < kNumActions; ++a1) {
        for (int a2 = 0; a2 < kNumActions; ++a2) has_ten |= tensor.at(c1, c2, a1, a2) == 10.0;
      }
      ten_everywhere &= has_ten;
    }
  }
  if (!safe_pays_8) failed.emplace_back("payoff[c1][c2][2][2] = 8 for every card pair");
  if (!ten_everywhere) failed.emplace_back("a 10-point entry exists for every card pair");
  if (max_entry != 10.0) failed.emplace_back("10 is the tensor maximum");

  const auto solved = solve_exhaustive(tensor);
  if (solved.best_value != 10.0) failed.emplace_back("best communicative joint policy value = 10");
  if (solved.best_noncomm_value != 8.0) failed.emplace_back("best card-independent P1 value = 8");

  const auto game = expected_action_payoff(tensor);
  bool strict_nash = true;
  for (int a = 0; a < kNumActions; ++a) {
    if (a == kSafeAction) continue;
    strict_nash &= game[a][kSafeAction] < game[kSafeAction][kSafeAction];
    strict_nash &= game[kSafeAction][a] < game[kSafeAction][kSafeAction];
  }
  if (!strict_nash) failed.emplace_back("(a1=2, a2=2) is a strict Nash equilibrium");
  return failed;
}

PayoffTensor parse_payoff(const std::string& text) {
  std::istringstream lines(text);
  std::vector<double> values;
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string tok;
    while (tokens >> tok) {
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) {
        throw ParseError("payoff line " + std::to_string(line_no) + ": not a number: '" + tok + "'");
      }
      if (!std::isfinite(v)) {
        throw ParseError("payoff line " + std::to_string(line_no) + ": non-finite value");
      }
      values.push_back(v);
    }
  }
  if (values.size() != 36) {
    throw ParseError("payoff file must hold 36 values, found " + std::to_string(values.size()));
  }
  PayoffTensor t;
  std::size_t i = 0;
  for (int c1 = 0; c1 < kNumCards; ++c1) {
    for (int c2 = 0; c2 < kNumCards; ++c2) {
      for (int a1 = 0; a1 < kNumActions; ++a1) {
        for (int a2 = 0; a2 < kNumActions; ++a2) t.at(c1, c2, a1, a2) = values[i++];
      }
    }
  }
  if (auto failed = invariant_failures(t); !failed.empty()) {
    std::string msg = "payoff tensor violates:";
    for (const auto& f : failed) msg += " [" + f + "]";
    throw InvariantViolation(msg);
  }
  return t;
}

PayoffTensor load_payoff(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open payoff file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_payoff(buf.str());
}

std::string format_payoff(const PayoffTensor& tensor) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "# matrix game payoff: rows a1 = 1..3, columns a2 = 1..3\n";
  for (int c1 = 0; c1 < kNumCards; ++c1) {
    for (int c2 = 0; c2 < kNumCards; ++c2) {
      out << "# c1=" << c1 + 1 << " c2=" << c2 + 1 << "\n";
      for (int a1 = 0; a1 < kNumActions; ++a1) {
        for (int a2 = 0; a2 < kNumActions; ++a2) {
          out << (a2 ? " " : "") << tensor.at(c1, c2, a1, a2);
        }
        out << "\n";
      }
    }
  }
  return out.str();
}

void save_payoff(const PayoffTensor& tensor, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write payoff file " + path.string());
  out << format_payoff(tensor);
}

}  // namespace sad::matrix_game
