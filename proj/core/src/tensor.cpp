#include "convreg/tensor.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "convreg/format.hpp"

namespace convreg {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError(std::string(what) + " holds a non-finite value");
  }
}

}  // namespace

Kernel::Kernel(int k, int g, int h) : k_(k), g_(g), h_(h) {
  if (k < 1 || g < 1 || h < 1) throw ConfigError("kernel dimensions must be positive");
  values_.assign(static_cast<std::size_t>(k) * k * g * h, 0.0);
}

Kernel::Kernel(int k, int g, int h, std::vector<double> values) : Kernel(k, g, h) {
  if (values.size() != values_.size()) {
    throw ConfigError("kernel data has " + std::to_string(values.size()) + " entries, expected " +
                      std::to_string(values_.size()));
  }
  require_finite(values, "kernel");
  values_ = std::move(values);
}

Kernel Kernel::delta(int k, int g, int h) {
  Kernel kernel(k, g, h);
  const int c = kernel.center();
  for (int z = 0; z < g && z < h; ++z) kernel(c, c, z, z) = 1.0;
  return kernel;
}

FeatureMap::FeatureMap(int n, int channels) : n_(n), c_(channels) {
  if (n < 1 || channels < 1) throw ConfigError("feature map dimensions must be positive");
  values_.assign(static_cast<std::size_t>(n) * n * channels, 0.0);
}

FeatureMap::FeatureMap(int n, int channels, std::vector<double> values) : FeatureMap(n, channels) {
  if (values.size() != values_.size()) throw ConfigError("feature map data has the wrong length");
  require_finite(values, "feature map");
  values_ = std::move(values);
}

FeatureMap conv_single(const Kernel& kernel, const FeatureMap& input) {
  if (kernel.g() != 1 || kernel.h() != 1) {
    throw ConfigError("conv_single needs a kernel with one input and one output channel");
  }
  if (input.channels() != 1) throw ConfigError("conv_single needs a single-channel input");

  const int n = input.n();
  const int k = kernel.k();
  const int c = kernel.center();
  FeatureMap out(n, 1);
  for (int r = 0; r < n; ++r) {
    for (int s = 0; s < n; ++s) {
      double acc = 0.0;
      for (int p = 0; p < k; ++p) {
        for (int q = 0; q < k; ++q) {
          acc += input.at_padded(r - c + p, s - c + q, 0) * kernel(p, q, 0, 0);
        }
      }
      out(r, s, 0) = acc;
    }
  }
  return out;
}

FeatureMap conv_multi(const Kernel& kernel, const FeatureMap& input) {
  if (input.channels() != kernel.g()) {
    throw ConfigError("input has " + std::to_string(input.channels()) +
                      " channels but the kernel expects " + std::to_string(kernel.g()));
  }
  const int n = input.n();
  const int k = kernel.k();
  const int c = kernel.center();
  FeatureMap out(n, kernel.h());
  for (int y = 0; y < kernel.h(); ++y) {
    for (int r = 0; r < n; ++r) {
      for (int s = 0; s < n; ++s) {
        double acc = 0.0;
        for (int z = 0; z < kernel.g(); ++z) {
          for (int p = 0; p < k; ++p) {
            for (int q = 0; q < k; ++q) {
              acc += input.at_padded(r - c + p, s - c + q, z) * kernel(p, q, z, y);
            }
          }
        }
        out(r, s, y) = acc;
      }
    }
  }
  return out;
}

std::vector<double> vec(const FeatureMap& x) {
  const auto v = x.values();
  return {v.begin(), v.end()};
}

double squared_norm(std::span<const double> values) {
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return acc;
}

std::string kernel_to_json(const Kernel& kernel) {
  std::string out = "{\"k\":" + std::to_string(kernel.k()) + ",\"g\":" + std::to_string(kernel.g()) +
                    ",\"h\":" + std::to_string(kernel.h()) + ",\"data\":[";
  bool first = true;
  for (double v : kernel.values()) {
    if (!first) out += ',';
    first = false;
    out += format_g17(v);
  }
  out += "]}\n";
  return out;
}

Kernel kernel_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("kernel JSON: ") + e.what());
  }
  for (const char* key : {"k", "g", "h", "data"}) {
    if (!doc.contains(key)) throw ConfigError(std::string("kernel JSON is missing \"") + key + "\"");
  }
  try {
    return Kernel(doc.at("k").get<int>(), doc.at("g").get<int>(), doc.at("h").get<int>(),
                  doc.at("data").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("kernel JSON: ") + e.what());
  }
}

void save_kernel(const std::string& path, const Kernel& kernel) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << kernel_to_json(kernel);
  if (!out) throw std::runtime_error("failed writing " + path);
}

Kernel load_kernel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return kernel_from_json(buf.str());
}

}  // namespace convreg
