// Binary model container. All integers and IEEE doubles are written
// little-endian byte by byte, so files are portable and scores reload
// bit-exactly.

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "epitome/error.hpp"
#include "epitome/pipeline.hpp"

namespace epitome {

namespace {

constexpr char kMagic[4] = {'E', 'P', 'I', 'T'};

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    out_.append(s);
  }
  void vec(const Vector& v) {
    u64(static_cast<std::uint64_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) f64(v(i));
  }
  void mat(const Matrix& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
    }
  }
  std::string take() { return std::move(out_); }

 private:
  void put(std::uint64_t v, int bytes) {
    for (int b = 0; b < bytes; ++b) out_.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint64_t n = u64();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  Vector vec() {
    const std::uint64_t n = u64();
    if (n > (in_.size() - pos_) / 8) throw DataError("model file truncated");
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = f64();
    return v;
  }
  Matrix mat() {
    const std::uint64_t r = u64();
    const std::uint64_t c = u64();
    if (c != 0 && r > (in_.size() - pos_) / 8 / c) throw DataError("model file truncated");
    Matrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = f64();
    }
    return m;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (n > in_.size() - pos_) throw DataError("model file truncated");
  }
  std::uint64_t get(int bytes) {
    need(static_cast<std::uint64_t>(bytes));
    std::uint64_t v = 0;
    for (int b = 0; b < bytes; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + b])) << (8 * b);
    pos_ += static_cast<std::size_t>(bytes);
    return v;
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_model(const ClassifierModel& model) {
  Writer p;
  p.str(model.config.to_json());
  const SvmModel& svm = model.svm;
  p.u64(svm.categories.size());
  for (const auto& c : svm.categories) p.str(c);
  p.u32(svm.kernel == KernelKind::kLinear ? 0 : 1);
  p.f64(svm.gamma);
  p.u64(svm.dim);
  if (svm.kernel == KernelKind::kLinear) {
    for (const auto& d : svm.linear) {
      p.vec(d.weights);
      p.f64(d.bias);
    }
  } else {
    for (const auto& d : svm.rbf) {
      p.mat(d.support_vectors);
      p.vec(d.coefficients);
      p.f64(d.bias);
    }
  }
  const FeaturePipeline& fp = model.features;
  p.vec(fp.pca.mean);
  p.mat(fp.pca.basis);
  p.vec(fp.pca.eigenvalues);
  p.vec(fp.gmm.weights);
  p.mat(fp.gmm.means);
  p.mat(fp.gmm.variances);
  const std::string payload = p.take();

  Writer header;
  header.u32(kModelFormatVersion);
  header.u64(payload.size());
  return std::string(kMagic, 4) + header.take() + payload;
}

ClassifierModel deserialize_model(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw DataError("not a model file (bad magic)");
  Reader head(bytes.substr(4));
  const std::uint32_t version = head.u32();
  if (version != kModelFormatVersion) {
    throw DataError("unsupported model format version " + std::to_string(version));
  }
  const std::uint64_t length = head.u64();
  if (length != bytes.size() - 16) throw DataError("model file truncated or padded");

  Reader p(bytes.substr(16));
  ClassifierModel m;
  m.config = PipelineConfig::from_json(p.str());
  SvmModel& svm = m.svm;
  const std::uint64_t ncat = p.u64();
  if (ncat > bytes.size()) throw DataError("model file corrupt");
  for (std::uint64_t i = 0; i < ncat; ++i) svm.categories.push_back(p.str());
  const std::uint32_t kernel = p.u32();
  if (kernel > 1) throw DataError("model file has unknown kernel tag");
  svm.kernel = kernel == 0 ? KernelKind::kLinear : KernelKind::kRbf;
  svm.gamma = p.f64();
  svm.dim = p.u64();
  for (std::uint64_t c = 0; c < ncat; ++c) {
    if (svm.kernel == KernelKind::kLinear) {
      LinearDecision d;
      d.weights = p.vec();
      d.bias = p.f64();
      svm.linear.push_back(std::move(d));
    } else {
      RbfDecision d;
      d.support_vectors = p.mat();
      d.coefficients = p.vec();
      d.bias = p.f64();
      svm.rbf.push_back(std::move(d));
    }
  }
  FeaturePipeline& fp = m.features;
  fp.raster_side = m.config.raster_side;
  fp.descriptor = m.config.descriptor;
  fp.pca.mean = p.vec();
  fp.pca.basis = p.mat();
  fp.pca.eigenvalues = p.vec();
  fp.gmm.weights = p.vec();
  fp.gmm.means = p.mat();
  fp.gmm.variances = p.mat();
  if (!p.done()) throw DataError("model file has trailing bytes");
  return m;
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize_model(model);
  if (!out) throw DataError("cannot write " + path.string());
}

ClassifierModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read model " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  try {
    return deserialize_model(os.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace epitome
