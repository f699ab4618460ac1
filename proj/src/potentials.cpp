#include "lmsa/potentials.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "lmsa/errors.hpp"
#include "lmsa/noise.hpp"

namespace lmsa {

double QuadraticSpec::min_curvature() const {
  return *std::min_element(curvatures.begin(), curvatures.end());
}

double QuadraticSpec::max_curvature() const {
  return *std::max_element(curvatures.begin(), curvatures.end());
}

Vector PotentialModel::grad(std::span<const double> x) const {
  Vector out(x.size());
  gradient(x, out);
  return out;
}

Vector PotentialModel::grad_lap(std::span<const double> x) const {
  if (!grad_laplacian) throw UnsupportedOperation(name + ": grad_laplacian not available");
  Vector out(x.size());
  grad_laplacian(x, out);
  return out;
}

PotentialModel make_quadratic(const Vector& curvatures) {
  if (curvatures.empty()) throw InvalidArgument("quadratic: at least one curvature required");
  for (double c : curvatures) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw InvalidArgument("quadratic: curvatures must be strictly positive and finite");
    }
  }
  QuadraticSpec spec{curvatures};

  PotentialModel p;
  std::ostringstream name;
  name << "quadratic(d=" << curvatures.size() << ")";
  p.name = name.str();
  p.d = curvatures.size();
  p.m = spec.min_curvature();
  p.L = spec.max_curvature();
  p.G = 0.0;
  p.gradient = [lam = curvatures](std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = lam[i] * x[i];
  };
  p.grad_laplacian = [](std::span<const double> x, std::span<double> out) {
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(x.size()), 0.0);
  };
  p.value = [lam = curvatures](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += lam[i] * x[i] * x[i];
    return 0.5 * s;
  };
  p.quadratic = std::move(spec);
  return p;
}

PotentialModel make_two_block_quadratic(double m, double L, std::size_t d) {
  if (d < 1) throw InvalidArgument("two-block quadratic: d must be >= 1");
  if (!(m > 0.0) || !(L >= m)) throw InvalidArgument("two-block quadratic: need 0 < m <= L");
  Vector lam(2 * d, m);
  std::fill(lam.begin() + static_cast<std::ptrdiff_t>(d), lam.end(), L);
  auto p = make_quadratic(lam);
  std::ostringstream name;
  name << "quadratic(m=" << m << ",L=" << L << ",d=" << d << ")";
  p.name = name.str();
  return p;
}

namespace {

// Max-shifted softmax; returns the normalizer log-sum-exp.
double softmax(std::span<const double> x, std::span<double> out) {
  const double shift = *std::max_element(x.begin(), x.end());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - shift);
    total += out[i];
  }
  for (std::size_t i = 0; i < x.size(); ++i) out[i] /= total;
  return shift + std::log(total);
}

}  // namespace

PotentialModel make_f1(std::size_t d) {
  if (d < 1) throw InvalidArgument("f1: d must be >= 1");
  PotentialModel p;
  p.name = "f1(" + std::to_string(d) + ")";
  p.d = d;
  p.m = 1.0;
  p.L = 2.0;
  p.gradient = [](std::span<const double> x, std::span<double> out) {
    softmax(x, out);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] += x[i];
  };
  // Lap f1 = d + 1 - sum s_i^2, so d/dx_j Lap f1 = -2 s_j (s_j - sum s_i^2).
  p.grad_laplacian = [](std::span<const double> x, std::span<double> out) {
    softmax(x, out);
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sq += out[i] * out[i];
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = -2.0 * out[i] * (out[i] - sq);
  };
  p.value = [](std::span<const double> x) {
    Vector scratch(x.size());
    const double lse = softmax(x, scratch);
    double sq = 0.0;
    for (double v : x) sq += v * v;
    return 0.5 * sq + lse;
  };
  return p;
}

PotentialModel make_f2(std::size_t d) {
  if (d < 1) throw InvalidArgument("f2: d must be >= 1");
  const double q = std::pow(static_cast<double>(d), 0.25);
  PotentialModel p;
  p.name = "f2(" + std::to_string(d) + ")";
  p.d = d;
  // Hessian diagonal is 1 + cos(q x_i)/2, which ranges over [1/2, 3/2].
  p.m = 0.5;
  p.L = 1.5;
  p.gradient = [q](std::span<const double> x, std::span<double> out) {
    const double amp = 0.5 / q;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + amp * std::sin(q * x[i]);
  };
  p.grad_laplacian = [q](std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = -0.5 * q * std::sin(q * x[i]);
  };
  p.value = [q, d](std::span<const double> x) {
    const double amp = 0.5 / std::sqrt(static_cast<double>(d));
    double s = 0.0;
    for (double v : x) s += 0.5 * v * v - amp * std::cos(q * v);
    return s;
  };
  return p;
}

double estimate_G(const PotentialModel& p, double radius, std::size_t samples, std::uint64_t seed) {
  if (!p.grad_laplacian) {
    throw UnsupportedOperation(p.name + ": estimate_G needs grad_laplacian");
  }
  if (!(radius > 0.0)) throw InvalidArgument("estimate_G: radius must be positive");
  if (samples == 0) throw InvalidArgument("estimate_G: samples must be positive");

  const NoiseStream noise(seed);
  Vector x(p.d), g(p.d), u(1);
  double best = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    // Uniform in the ball: Gaussian direction, radius ~ R U^{1/d}.
    noise.fill(s, 0, x);
    noise.fill_uniform(s, 0, u);
    double norm = 0.0;
    for (double v : x) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    const double r = radius * std::pow(u[0], 1.0 / static_cast<double>(p.d));
    for (double& v : x) v *= r / norm;
    p.grad_laplacian(x, g);
    double gn = 0.0;
    for (double v : g) gn += v * v;
    best = std::max(best, std::sqrt(gn) / (1.0 + r));
  }
  return best;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument("potential: cannot parse " + what + " '" + s + "'");
  }
}

std::size_t to_dim(const std::string& s) {
  const double v = to_double(s, "dimension");
  if (!(v >= 1.0) || v != std::floor(v)) throw InvalidArgument("potential: dimension must be a positive integer");
  return static_cast<std::size_t>(v);
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

PotentialSpec parse_potential(const std::string& text) {
  const std::string t = trim(text);
  if (t == "f1" || t == "f2") {
    PotentialSpec spec;
    spec.family = t == "f1" ? PotentialSpec::Family::F1 : PotentialSpec::Family::F2;
    return spec;
  }
  const auto open = t.find('(');
  const auto close = t.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open || close + 1 != t.size()) {
    throw InvalidArgument("potential: expected NAME(ARGS), got '" + text + "'");
  }
  const std::string family = trim(t.substr(0, open));
  const std::string args = t.substr(open + 1, close - open - 1);
  const auto parts = split_commas(args);

  PotentialSpec spec;
  if (family == "f1" || family == "f2") {
    spec.family = family == "f1" ? PotentialSpec::Family::F1 : PotentialSpec::Family::F2;
    if (parts.size() != 1) throw InvalidArgument("potential: " + family + " takes one argument (d)");
    spec.d = to_dim(parts[0]);
    return spec;
  }
  if (family != "quadratic") throw InvalidArgument("potential: unknown family '" + family + "'");

  if (args.find('=') != std::string::npos) {
    spec.family = PotentialSpec::Family::TwoBlock;
    bool have_d = false;
    for (const auto& part : parts) {
      const auto eq = part.find('=');
      if (eq == std::string::npos) throw InvalidArgument("potential: mixed positional and key=value arguments");
      const std::string key = trim(part.substr(0, eq));
      const std::string val = trim(part.substr(eq + 1));
      if (key == "m") {
        spec.block_m = to_double(val, "m");
      } else if (key == "L") {
        spec.block_L = to_double(val, "L");
      } else if (key == "d") {
        spec.d = to_dim(val);
        have_d = true;
      } else {
        throw InvalidArgument("potential: unknown quadratic key '" + key + "' (valid: m, L, d)");
      }
    }
    if (!have_d) spec.d = 1;
    if (!(spec.block_m > 0.0) || !(spec.block_L >= spec.block_m)) {
      throw InvalidArgument("potential: two-block quadratic needs 0 < m <= L");
    }
    return spec;
  }

  spec.family = PotentialSpec::Family::Quadratic;
  for (const auto& part : parts) {
    const double c = to_double(part, "curvature");
    if (!(c > 0.0)) throw InvalidArgument("potential: curvatures must be strictly positive");
    spec.curvatures.push_back(c);
  }
  return spec;
}

std::string PotentialSpec::to_string() const {
  switch (family) {
    case Family::F1:
      return d == 0 ? "f1" : "f1(" + std::to_string(d) + ")";
    case Family::F2:
      return d == 0 ? "f2" : "f2(" + std::to_string(d) + ")";
    case Family::TwoBlock:
      return "quadratic(m=" + fmt17(block_m) + ",L=" + fmt17(block_L) + ",d=" + std::to_string(d) + ")";
    case Family::Quadratic: {
      std::string s = "quadratic(";
      for (std::size_t i = 0; i < curvatures.size(); ++i) {
        if (i) s += ",";
        s += fmt17(curvatures[i]);
      }
      return s + ")";
    }
  }
  return {};
}

PotentialModel instantiate(const PotentialSpec& spec, std::optional<std::size_t> dim) {
  switch (spec.family) {
    case PotentialSpec::Family::F1:
      return make_f1(dim.value_or(spec.d));
    case PotentialSpec::Family::F2:
      return make_f2(dim.value_or(spec.d));
    case PotentialSpec::Family::TwoBlock:
      return make_two_block_quadratic(spec.block_m, spec.block_L, dim.value_or(spec.d));
    case PotentialSpec::Family::Quadratic: {
      if (!dim || *dim == spec.curvatures.size()) return make_quadratic(spec.curvatures);
      if (spec.curvatures.size() == 1) return make_quadratic(Vector(*dim, spec.curvatures[0]));
      throw InvalidArgument("potential: " + std::to_string(spec.curvatures.size()) +
                            " curvatures cannot be resized to d=" + std::to_string(*dim));
    }
  }
  throw InvalidArgument("potential: unhandled family");
}

}  // namespace lmsa
