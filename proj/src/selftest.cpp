#include "epitome/selftest.hpp"

#include <cmath>
#include <functional>

#include "epitome/epitome.hpp"
#include "epitome/features.hpp"
#include "epitome/random.hpp"
#include "epitome/raster.hpp"

namespace epitome {

namespace {

// 1 + position of the last zero, computed without products.
std::size_t last_zero_scan(const std::vector<std::uint8_t>& bits) {
  std::size_t e = 1;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (!bits[i]) e = i + 2;
  }
  return e;
}

bool check_index_oracle(const std::vector<std::uint8_t>& bits) {
  const LabelSequence l{bits};
  const auto e = epitome_index(product_sequence(l));
  if (!e || *e != last_zero_scan(bits)) return false;
  const double s = epitome_score(*e, bits.size());
  return (s == 0.0) == (*e == 1) && s >= 0.0 && s <= 1.0;
}

Canvas random_canvas(Rng& rng, int side, double density) {
  Canvas c(side, side);
  for (auto& p : c.pixels()) p = rng.uniform() < density ? 1 : 0;
  return c;
}

SelftestCheck run(const std::string& name, const std::function<std::string()>& body) {
  SelftestCheck check{name, false, {}};
  try {
    check.detail = body();
    check.passed = check.detail.empty();
  } catch (const std::exception& e) {
    check.detail = e.what();
  }
  return check;
}

}  // namespace

std::vector<SelftestCheck> run_selftest(std::uint64_t seed) {
  std::vector<SelftestCheck> checks;

  checks.push_back(run("epitome index: exhaustive N <= 16 against last-zero scan", []() -> std::string {
    for (std::size_t n = 1; n <= 16; ++n) {
      for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
        std::vector<std::uint8_t> bits(n, 1);
        for (std::size_t i = 0; i + 1 < n; ++i) bits[i] = (mask >> i) & 1u;
        if (!check_index_oracle(bits)) return "mismatch at N=" + std::to_string(n) + " mask=" + std::to_string(mask);
      }
    }
    return {};
  }));

  checks.push_back(run("worked example: labels 010111111 give e=4, score 4/9", []() -> std::string {
    const LabelSequence l{{0, 1, 0, 1, 1, 1, 1, 1, 1}};
    const ProductSequence p = product_sequence(l);
    if (p.bits != std::vector<std::uint8_t>{0, 0, 0, 1, 1, 1, 1, 1, 1}) return "product sequence differs";
    const auto e = epitome_index(p);
    if (!e || *e != 4) return "epitome index differs";
    if (std::abs(epitome_score(*e, 9) - 4.0 / 9.0) > 1e-12) return "score differs";
    return {};
  }));

  checks.push_back(run("dilation laws on random canvases", [seed]() -> std::string {
    Rng rng(mix_seed(seed, 1));
    for (int trial = 0; trial < 20; ++trial) {
      const Canvas a = random_canvas(rng, 64, 0.02);
      const Canvas d = dilate(a);
      if (d != reference::dilate(a)) return "differs from brute force";
      if (!a.subset_of(d)) return "not extensive";
      Canvas b = a;
      for (auto& p : b.pixels()) p |= rng.uniform() < 0.01 ? 1 : 0;
      if (!d.subset_of(dilate(b))) return "not increasing";
      if (apply_transform(apply_transform(a, Transform::mirror()), Transform::mirror()) != a) return "mirror not an involution";
    }
    return {};
  }));

  checks.push_back(run("EM log-likelihood is non-decreasing", [seed]() -> std::string {
    Rng rng(mix_seed(seed, 2));
    for (int trial = 0; trial < 10; ++trial) {
      Matrix x(120, 3);
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double shift = (i % 3) * 4.0;
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = shift + rng.normal();
      }
      const GmmFit fit = fit_gmm(x, 3, rng.next());
      for (std::size_t k = 1; k < fit.log_likelihood.size(); ++k) {
        if (fit.log_likelihood[k] < fit.log_likelihood[k - 1] - 1e-9) return "log-likelihood decreased";
      }
    }
    return {};
  }));

  checks.push_back(run("parallel kernels match serial references", [seed]() -> std::string {
    Rng rng(mix_seed(seed, 3));
    Canvas c(256, 256);
    for (int k = 0; k < 12; ++k) {
      draw_line(c, static_cast<int>(rng.below(256)), static_cast<int>(rng.below(256)), static_cast<int>(rng.below(256)),
                static_cast<int>(rng.below(256)));
    }
    c = dilate(c);
    const DescriptorSet fast = extract_descriptors(c);
    const DescriptorSet slow = reference::extract_descriptors(c);
    if ((fast.descriptors - slow.descriptors).cwiseAbs().maxCoeff() > 1e-12) return "descriptors differ";

    GmmModel g;
    g.weights = Vector::Constant(4, 0.25);
    g.means.resize(4, 5);
    for (Eigen::Index i = 0; i < g.means.size(); ++i) g.means.data()[i] = rng.normal();
    g.variances = Matrix::Constant(4, 5, 0.5);
    Matrix x(50, 5);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    if ((fisher_gradients(x, g) - reference::fisher_gradients(x, g)).cwiseAbs().maxCoeff() > 1e-10) {
      return "Fisher gradients differ";
    }
    return {};
  }));

  return checks;
}

}  // namespace epitome
