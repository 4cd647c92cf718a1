#include "dlroc/classifier.hpp"

#include <bit>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dlroc/error.hpp"

namespace dlroc {

std::string to_string(CoderKind kind) { return kind == CoderKind::Hybrid ? "hybrid" : "omp"; }

CoderKind parse_coder_kind(const std::string& text) {
  if (text == "hybrid") return CoderKind::Hybrid;
  if (text == "omp") return CoderKind::Omp;
  fail(ErrorKind::BadParameter, "unknown coder '" + text + "' (expected hybrid or omp)");
}

ClassifierModel::ClassifierModel(Dictionary dict, CoderSettings settings, std::vector<std::string> label_names)
    : dict_(std::move(dict)), settings_(settings), names_(std::move(label_names)) {
  if (dict_.num_blocks() == 0) fail(ErrorKind::BadModel, "model dictionary is empty");
  if (names_.empty())
    for (std::size_t k = 0; k < dict_.num_blocks(); ++k) names_.push_back(std::to_string(k + 1));
  if (names_.size() != dict_.num_blocks()) fail(ErrorKind::BadModel, "one label name per block required");
  if (settings_.omp_max_atoms < 0) fail(ErrorKind::BadParameter, "omp_max_atoms must be >= 0");
  settings_.stop.validate();
  if (!(dict_.max_column_norm() <= 1.0 + 1e-9)) fail(ErrorKind::BadModel, "dictionary atoms exceed the unit ball");
  if (settings_.kind == CoderKind::Hybrid)
    hybrid_ = std::make_shared<const HybridCoder>(dict_.atoms(), settings_.alpha, settings_.gamma, settings_.stop);
}

RealVector ClassifierModel::code(const Eigen::Ref<const RealVector>& y) const {
  if (hybrid_) return hybrid_->code(y).x;
  const int cap = settings_.omp_max_atoms > 0 ? settings_.omp_max_atoms
                                              : static_cast<int>(std::min(dict_.rows(), dict_.cols()));
  return sparse_code_omp(y, dict_.atoms(), settings_.stop.residual_threshold, cap).x;
}

RealMatrix normalize_columns(const Eigen::Ref<const RealMatrix>& m) {
  require_finite(m, "matrix");
  RealMatrix out = m;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double n = out.col(j).norm();
    if (n == 0.0) fail(ErrorKind::ZeroColumn, "column " + std::to_string(j) + " has zero norm");
    out.col(j) /= n;
  }
  return out;
}

std::vector<double> energy_ratios(const Eigen::Ref<const RealVector>& x, const std::vector<Eigen::Index>& block_sizes) {
  Eigen::Index total = 0;
  for (Eigen::Index s : block_sizes) total += s;
  if (total != x.size()) fail(ErrorKind::DimensionMismatch, "code length differs from partition size");
  // Plain ascending sums so the ratios do not depend on vectorization.
  std::vector<double> energy;
  energy.reserve(block_sizes.size());
  double all = 0.0;
  Eigen::Index i = 0;
  for (Eigen::Index s : block_sizes) {
    double e = 0.0;
    for (Eigen::Index end = i + s; i < end; ++i) e += x[i] * x[i];
    energy.push_back(e);
  }
  for (Eigen::Index j = 0; j < x.size(); ++j) all += x[j] * x[j];
  if (all == 0.0) fail(ErrorKind::ZeroCode, "code is identically zero");
  for (double& e : energy) e /= all;
  return energy;
}

std::vector<double> energy_ratios(const Eigen::Ref<const RealVector>& x, const Dictionary& dict) {
  return energy_ratios(x, dict.block_sizes());
}

std::size_t argmax_lowest(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

ClassifierModel fit(const LabeledTrainingSet& raw_train, const std::vector<Eigen::Index>& sizes,
                    const FitOptions& options, std::vector<std::string> label_names, LearnTrace* trace) {
  raw_train.validate();
  LabeledTrainingSet train;
  train.blocks.reserve(raw_train.num_labels());
  for (const auto& b : raw_train.blocks) train.blocks.push_back(normalize_columns(b));

  if (!options.learn_dictionary) {
    return ClassifierModel(Dictionary::from_blocks(train.blocks), options.coder, std::move(label_names));
  }
  LearnResult learned = learn(train, sizes, options.learn);
  if (trace) *trace = learned.trace;
  return ClassifierModel(std::move(learned.dictionary), options.coder, std::move(label_names));
}

ClassificationResult classify(const Eigen::Ref<const RealVector>& y, const ClassifierModel& model) {
  const auto start = std::chrono::steady_clock::now();
  if (y.size() != model.signal_dim())
    fail(ErrorKind::DimensionMismatch, "sample has " + std::to_string(y.size()) + " channels, model expects " +
                                           std::to_string(model.signal_dim()));
  require_finite(y, "sample");

  RealVector signal = y;
  if (model.settings().normalize_input) {
    const double n = signal.norm();
    if (n > 0.0) signal /= n;
  }
  ClassificationResult res;
  res.code = model.code(signal);
  res.residual_norm = (signal - model.dictionary().atoms() * res.code).norm();
  if (res.code.squaredNorm() > 0.0) {
    res.energy_ratios = energy_ratios(res.code, model.dictionary());
    res.label = static_cast<int>(argmax_lowest(res.energy_ratios)) + 1;
  } else {
    res.energy_ratios.assign(model.num_labels(), 0.0);
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

std::vector<ClassificationResult> classify_batch(const Eigen::Ref<const RealMatrix>& ys, const ClassifierModel& model) {
  std::vector<ClassificationResult> out;
  out.reserve(static_cast<std::size_t>(ys.cols()));
  for (Eigen::Index j = 0; j < ys.cols(); ++j) {
    try {
      out.push_back(classify(ys.col(j), model));
    } catch (const Error& e) {
      ClassificationResult failed;
      failed.error = e.what();
      failed.energy_ratios.assign(model.num_labels(), 0.0);
      out.push_back(std::move(failed));
    }
  }
  return out;
}

// --- serialization -----------------------------------------------------------
//
// Little-endian binary container:
//   "DLROCMDL" | u8 version=1 | u32 m | u32 K | K x (u32 len, name bytes, u32 L_k)
//   | u8 coder | u8 normalize | f64 alpha | f64 gamma | f64 residual_threshold
//   | i32 max_sweeps | f64 objective_rel_tol | i32 refine_max_iter | f64 refine_tol
//   | i32 omp_max_atoms | f64 atoms[m * L], column-major

namespace {

constexpr char kMagic[8] = {'D', 'L', 'R', 'O', 'C', 'M', 'D', 'L'};
constexpr std::uint8_t kVersion = 1;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::string& data) : data_(data) {}
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) fail(ErrorKind::BadModel, "model data truncated");
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return std::bit_cast<double>(bits);
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  const std::string& data_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_model(const ClassifierModel& model) {
  const Dictionary& d = model.dictionary();
  const CoderSettings& s = model.settings();
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u8(kVersion);
  w.u32(static_cast<std::uint32_t>(d.rows()));
  w.u32(static_cast<std::uint32_t>(d.num_blocks()));
  for (std::size_t k = 0; k < d.num_blocks(); ++k) {
    const std::string& name = model.label_names()[k];
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.u32(static_cast<std::uint32_t>(d.block_size(k)));
  }
  w.u8(s.kind == CoderKind::Hybrid ? 0 : 1);
  w.u8(s.normalize_input ? 1 : 0);
  w.f64(s.alpha);
  w.f64(s.gamma);
  w.f64(s.stop.residual_threshold);
  w.i32(s.stop.max_sweeps);
  w.f64(s.stop.objective_rel_tol);
  w.i32(s.stop.refine_max_iter);
  w.f64(s.stop.refine_tol);
  w.i32(s.omp_max_atoms);
  const RealMatrix& a = d.atoms();
  for (Eigen::Index i = 0; i < a.size(); ++i) w.f64(a.data()[i]);
  return w.take();
}

ClassifierModel deserialize_model(const std::string& bytes) {
  Reader r(bytes);
  if (r.str(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) fail(ErrorKind::BadModel, "not a model file");
  const std::uint8_t version = r.u8();
  if (version != kVersion) fail(ErrorKind::BadModel, "unsupported model version " + std::to_string(version));
  const std::uint32_t m = r.u32();
  const std::uint32_t k = r.u32();
  if (m == 0 || k == 0) fail(ErrorKind::BadModel, "model has zero rows or labels");
  std::vector<std::string> names;
  std::vector<Eigen::Index> sizes;
  Eigen::Index total = 0;
  for (std::uint32_t i = 0; i < k; ++i) {
    names.push_back(r.str(r.u32()));
    sizes.push_back(static_cast<Eigen::Index>(r.u32()));
    total += sizes.back();
  }
  CoderSettings s;
  const std::uint8_t kind = r.u8();
  if (kind > 1) fail(ErrorKind::BadModel, "unknown coder kind");
  s.kind = kind == 0 ? CoderKind::Hybrid : CoderKind::Omp;
  s.normalize_input = r.u8() != 0;
  s.alpha = r.f64();
  s.gamma = r.f64();
  s.stop.residual_threshold = r.f64();
  s.stop.max_sweeps = r.i32();
  s.stop.objective_rel_tol = r.f64();
  s.stop.refine_max_iter = r.i32();
  s.stop.refine_tol = r.f64();
  s.omp_max_atoms = r.i32();
  r.need(static_cast<std::size_t>(m) * static_cast<std::size_t>(total) * 8);
  RealMatrix atoms(m, total);
  for (Eigen::Index i = 0; i < atoms.size(); ++i) atoms.data()[i] = r.f64();
  if (!r.done()) fail(ErrorKind::BadModel, "trailing bytes after model data");
  return ClassifierModel(Dictionary(std::move(atoms), std::move(sizes)), s, std::move(names));
}

void save_model(const ClassifierModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot open " + path + " for writing");
  const std::string bytes = serialize_model(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::IoError, "failed writing " + path);
}

ClassifierModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace dlroc
