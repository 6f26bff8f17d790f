#include "tsfhn/cell_function.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "tsfhn/errors.hpp"
#include "tsfhn/format.hpp"

namespace tsfhn {
namespace {

double wrap_unit(double y) {
  double r = y - std::floor(y);
  return r >= 1.0 ? 0.0 : r;
}

double parse_number(const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || *end != '\0' || !std::isfinite(v))
    throw InvalidArgument("cell function: bad number '" + tok + "'");
  return v;
}

}  // namespace

CellFunction CellFunction::constant(double value) {
  if (!std::isfinite(value)) throw InvalidArgument("cell function: non-finite constant");
  CellFunction f;
  f.kind_ = Kind::Constant;
  f.offset_ = value;
  return f;
}

CellFunction CellFunction::trig(double offset, std::vector<TrigTerm> terms) {
  if (!std::isfinite(offset)) throw InvalidArgument("cell function: non-finite offset");
  for (const auto& t : terms) {
    if (t.n < 1) throw InvalidArgument("cell function: trig frequency must be >= 1");
    if (!std::isfinite(t.amp)) throw InvalidArgument("cell function: non-finite amplitude");
  }
  CellFunction f;
  f.kind_ = Kind::Trig;
  f.offset_ = offset;
  f.terms_ = std::move(terms);
  return f;
}

CellFunction CellFunction::steps(std::vector<std::pair<double, double>> breaks) {
  if (breaks.empty() || breaks.front().first != 0.0)
    throw InvalidArgument("cell function: steps must start at y = 0");
  for (std::size_t i = 0; i < breaks.size(); ++i) {
    if (!std::isfinite(breaks[i].second)) throw InvalidArgument("cell function: non-finite step value");
    if (breaks[i].first < 0.0 || breaks[i].first >= 1.0)
      throw InvalidArgument("cell function: step breakpoints must lie in [0, 1)");
    if (i > 0 && !(breaks[i].first > breaks[i - 1].first))
      throw InvalidArgument("cell function: step breakpoints must increase");
  }
  CellFunction f;
  f.kind_ = Kind::Steps;
  f.breaks_ = std::move(breaks);
  return f;
}

CellFunction CellFunction::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<std::string> tok;
  for (std::string t; in >> t;) tok.push_back(t);
  if (tok.empty()) throw InvalidArgument("cell function: empty definition");
  const std::string head = tok.front();
  if (head == "const") {
    if (tok.size() != 2) throw InvalidArgument("cell function: 'const' takes one value");
    return constant(parse_number(tok[1]));
  }
  if (head == "trig") {
    if (tok.size() < 2 || (tok.size() - 2) % 3 != 0)
      throw InvalidArgument("cell function: 'trig' expects c0 then (sin|cos n amp) triples");
    std::vector<TrigTerm> terms;
    for (std::size_t i = 2; i < tok.size(); i += 3) {
      TrigTerm t;
      if (tok[i] == "sin") t.is_sin = true;
      else if (tok[i] == "cos") t.is_sin = false;
      else throw InvalidArgument("cell function: expected sin or cos, got '" + tok[i] + "'");
      const double n = parse_number(tok[i + 1]);
      if (n != std::floor(n) || n < 1 || n > 1e6)
        throw InvalidArgument("cell function: trig frequency must be a positive integer");
      t.n = static_cast<int>(n);
      t.amp = parse_number(tok[i + 2]);
      terms.push_back(t);
    }
    return trig(parse_number(tok[1]), std::move(terms));
  }
  if (head == "steps") {
    if (tok.size() < 3 || (tok.size() - 1) % 2 != 0)
      throw InvalidArgument("cell function: 'steps' expects y v pairs");
    std::vector<std::pair<double, double>> br;
    for (std::size_t i = 1; i < tok.size(); i += 2) br.emplace_back(parse_number(tok[i]), parse_number(tok[i + 1]));
    return steps(std::move(br));
  }
  throw InvalidArgument("cell function: unknown shape '" + head + "'");
}

double CellFunction::operator()(double y) const {
  switch (kind_) {
    case Kind::Constant:
      return offset_;
    case Kind::Trig: {
      const double w = wrap_unit(y);
      double s = offset_;
      for (const auto& t : terms_) {
        const double arg = 2.0 * std::numbers::pi * t.n * w;
        s += t.amp * (t.is_sin ? std::sin(arg) : std::cos(arg));
      }
      return s;
    }
    case Kind::Steps: {
      const double w = wrap_unit(y);
      auto it = std::upper_bound(breaks_.begin(), breaks_.end(), w,
                                 [](double v, const auto& b) { return v < b.first; });
      return std::prev(it)->second;
    }
  }
  return 0.0;
}

std::vector<double> CellFunction::sample(const CellGrid& cell) const {
  std::vector<double> out(cell.size());
  for (std::size_t k = 0; k < cell.size(); ++k) out[k] = (*this)(cell.y(k));
  return out;
}

bool CellFunction::is_constant() const noexcept {
  switch (kind_) {
    case Kind::Constant:
      return true;
    case Kind::Trig:
      return std::all_of(terms_.begin(), terms_.end(), [](const TrigTerm& t) { return t.amp == 0.0; });
    case Kind::Steps:
      return std::all_of(breaks_.begin(), breaks_.end(),
                         [&](const auto& b) { return b.second == breaks_.front().second; });
  }
  return false;
}

double CellFunction::constant_value() const {
  if (!is_constant()) throw InvalidArgument("cell function is not constant");
  return kind_ == Kind::Steps ? breaks_.front().second : offset_;
}

double CellFunction::sup_abs() const {
  switch (kind_) {
    case Kind::Constant:
      return std::abs(offset_);
    case Kind::Steps: {
      double m = 0.0;
      for (const auto& b : breaks_) m = std::max(m, std::abs(b.second));
      return m;
    }
    case Kind::Trig: {
      // Dense sampling, inflated slightly and capped by the sum of |amp|.
      double bound = std::abs(offset_);
      int nmax = 1;
      for (const auto& t : terms_) {
        bound += std::abs(t.amp);
        nmax = std::max(nmax, t.n);
      }
      const int samples = 64 * nmax;
      double m = 0.0;
      for (int i = 0; i < samples; ++i) m = std::max(m, std::abs((*this)(static_cast<double>(i) / samples)));
      return std::min(bound, m * (1.0 + 1e-3));
    }
  }
  return 0.0;
}

CellFunction CellFunction::scaled(double s) const {
  CellFunction f = *this;
  f.offset_ *= s;
  for (auto& t : f.terms_) t.amp *= s;
  for (auto& b : f.breaks_) b.second *= s;
  return f;
}

std::string CellFunction::describe() const {
  std::string out;
  switch (kind_) {
    case Kind::Constant:
      return "const " + fmt_short(offset_);
    case Kind::Trig:
      out = "trig " + fmt_short(offset_);
      for (const auto& t : terms_)
        out += std::string(t.is_sin ? " sin " : " cos ") + std::to_string(t.n) + " " + fmt_short(t.amp);
      return out;
    case Kind::Steps:
      out = "steps";
      for (const auto& b : breaks_) out += " " + fmt_short(b.first) + " " + fmt_short(b.second);
      return out;
  }
  return out;
}

}  // namespace tsfhn
